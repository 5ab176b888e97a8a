"""Source code as classified lines, plus numbering and docstring detection.

A :class:`SourceUnit` is an immutable sequence of text lines paired with a
:class:`LanguageProfile` that knows the language's line-comment token.  All
line indices in this package are 1-based.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class LineClass(enum.Enum):
    """The unique class of a source line."""

    BLANK = "blank"
    COMMENT = "comment"
    STAR_COMMENT = "star_comment"
    VERIFIED_STAR_COMMENT = "verified_star_comment"
    CODE = "code"


COMMENT_CLASSES = frozenset(
    {LineClass.COMMENT, LineClass.STAR_COMMENT, LineClass.VERIFIED_STAR_COMMENT}
)
STAR_CLASSES = frozenset({LineClass.STAR_COMMENT, LineClass.VERIFIED_STAR_COMMENT})

# Widest line number that fits the 3-character prefix field.
MAX_NUMBERED_LINES = 999

_TRIPLE_QUOTE = re.compile(r'^[rRuUbB]{0,2}("""|\'\'\')')


@dataclass(frozen=True)
class LanguageProfile:
    """Comment syntax and docstring convention for one language.

    ``star_suffix`` and ``verified_suffix`` are fixed: a star comment is the
    line-comment token immediately followed by ``*`` (e.g. ``#*`` or ``//*``)
    and a verified star comment appends ``!`` (``#*!``).
    """

    name: str
    line_comment_token: str
    docstring_rule: str = "none"  # "python_triple_quote" or "none"
    star_suffix: str = "*"
    verified_suffix: str = "!"

    def __post_init__(self) -> None:
        if not self.line_comment_token or any(
            c.isspace() for c in self.line_comment_token
        ):
            raise ValueError("line comment token must be non-empty without whitespace")
        if self.star_suffix != "*" or self.verified_suffix != "!":
            raise ValueError("star comment suffixes are fixed to '*' and '!'")
        if self.docstring_rule not in ("python_triple_quote", "none"):
            raise ValueError(f"unknown docstring rule: {self.docstring_rule}")

    @property
    def star_prefix(self) -> str:
        return self.line_comment_token + self.star_suffix

    @property
    def verified_prefix(self) -> str:
        return self.star_prefix + self.verified_suffix


PYTHON_PROFILE = LanguageProfile(
    name="python", line_comment_token="#", docstring_rule="python_triple_quote"
)
C_LIKE_PROFILE = LanguageProfile(name="c_like", line_comment_token="//")

PROFILES = {p.name: p for p in (PYTHON_PROFILE, C_LIKE_PROFILE)}


def profile_for_path(path: str) -> LanguageProfile:
    """Pick a shipped profile from a file extension (defaults to python)."""
    lowered = path.lower()
    c_like = (".c", ".h", ".cc", ".cpp", ".hpp", ".java", ".js", ".ts", ".go", ".rs")
    if lowered.endswith(c_like):
        return C_LIKE_PROFILE
    return PYTHON_PROFILE


@dataclass(frozen=True)
class SourceUnit:
    """An immutable, line-indexed piece of source code."""

    lines: tuple[str, ...]
    profile: LanguageProfile = PYTHON_PROFILE

    def __post_init__(self) -> None:
        for line in self.lines:
            if "\n" in line or "\r" in line:
                raise ValueError("source lines must not contain newline characters")

    @classmethod
    def from_text(cls, text: str, profile: LanguageProfile = PYTHON_PROFILE) -> "SourceUnit":
        return cls(lines=tuple(text.splitlines()), profile=profile)

    def text(self) -> str:
        return "\n".join(self.lines)

    def __len__(self) -> int:
        return len(self.lines)

    def line(self, index: int) -> str:
        """Return the line at a 1-based index."""
        if not 1 <= index <= len(self.lines):
            raise IndexError(f"line index {index} out of range 1..{len(self.lines)}")
        return self.lines[index - 1]

    def classify(self, index: int) -> LineClass:
        return classify_line(self.profile, self.line(index))


def classify_line(profile: LanguageProfile, line: str) -> LineClass:
    """Classify one line.  Total and deterministic.

    Whitespace-only lines are blank.  ``#*!`` wins over ``#*`` which wins
    over a plain comment.
    """
    stripped = line.strip()
    if not stripped:
        return LineClass.BLANK
    if stripped.startswith(profile.verified_prefix):
        return LineClass.VERIFIED_STAR_COMMENT
    if stripped.startswith(profile.star_prefix):
        return LineClass.STAR_COMMENT
    if stripped.startswith(profile.line_comment_token):
        return LineClass.COMMENT
    return LineClass.CODE


def number_lines(unit: SourceUnit) -> str:
    """Prefix every line with its right-aligned width-3 line number and ``|``.

    Refuses units beyond 999 lines; the numbering targets function-sized
    inputs and the prefix field is fixed at 3 characters.
    """
    if len(unit) == 0:
        raise ValueError("cannot number an empty unit")
    if len(unit) > MAX_NUMBERED_LINES:
        raise ValueError(
            f"unit has {len(unit)} lines; numbering supports at most {MAX_NUMBERED_LINES}"
        )
    return "\n".join(f"{i:>3}|{line}" for i, line in enumerate(unit.lines, start=1))


def indentation(line: str) -> int:
    """Indentation depth as the count of leading whitespace characters."""
    return len(line) - len(line.lstrip())


def leading_whitespace(line: str) -> str:
    return line[: indentation(line)]


def docstring_span(unit: SourceUnit) -> tuple[int, int] | None:
    """Locate a docstring: the inclusive 1-based line range of a triple-quoted
    literal that is the first statement after the signature, or ``None``.

    Purely textual; the only consumer is placement validation, so unparseable
    code simply yields ``None``.
    """
    if unit.profile.docstring_rule != "python_triple_quote" or len(unit) == 0:
        return None
    sig_end = _signature_end(unit)
    if sig_end is None:
        return None
    # First non-blank line after the signature.
    start = None
    for i in range(sig_end + 1, len(unit) + 1):
        if unit.classify(i) is not LineClass.BLANK:
            start = i
            break
    if start is None:
        return None
    opener = _TRIPLE_QUOTE.match(unit.line(start).lstrip())
    if opener is None:
        return None
    quote = opener.group(1)
    rest = unit.line(start).lstrip()[opener.end():]
    if quote in rest:
        return (start, start)
    for i in range(start + 1, len(unit) + 1):
        if quote in unit.line(i):
            return (start, i)
    return None


def _signature_end(unit: SourceUnit) -> int | None:
    """1-based index of the last line of the first def/class signature."""
    start = None
    for i in range(1, len(unit) + 1):
        stripped = unit.line(i).lstrip()
        if stripped.startswith(("def ", "async def ", "class ")):
            start = i
            break
    if start is None:
        return None
    balance = 0
    for i in range(start, len(unit) + 1):
        balance += _bracket_delta(unit.line(i))
        if balance <= 0 and unit.line(i).rstrip().endswith(":"):
            return i
    return None


def _bracket_delta(line: str) -> int:
    """Net bracket balance of a line; a cheap, string-unaware approximation."""
    return sum(line.count(o) - line.count(c) for o, c in ("()", "[]", "{}"))
