"""Independent oracles used by the brute-force and acceptance suites.

Everything here is deliberately written from the rule definitions, without
reusing the implementation under test: legality of a comment placement is
re-derived position by position, and language membership is decided by a
naive exponential backtracking matcher instead of the NFA scan.
"""

from __future__ import annotations

import random

from nlo.generation import CommentSlot, Constraint, LiteralLine
from nlo.source_model import LineClass, SourceUnit, classify_line, docstring_span


def oracle_legal_positions(unit: SourceUnit) -> set[int]:
    """Positions where one comment may be inserted above, first principles.

    A position is the 1-based index of the line the comment would sit above.
    Excluded: blank target lines, continuations of the previous line (open
    brackets or a trailing backslash), the second line of a comment pair,
    and anything inside the docstring.
    """
    span = docstring_span(unit)
    legal: set[int] = set()
    open_brackets = 0
    for i in range(1, len(unit) + 1):
        line = unit.line(i)
        ok = unit.classify(i) is not LineClass.BLANK
        if i > 1:
            previous = unit.line(i - 1)
            if open_brackets > 0 or previous.rstrip().endswith("\\"):
                ok = False
            if (
                unit.classify(i) is LineClass.COMMENT
                and unit.classify(i - 1) is LineClass.COMMENT
            ):
                ok = False
        if span is not None and span[0] <= i <= span[1]:
            ok = False
        if ok:
            legal.add(i)
        for opener, closer in ("()", "[]", "{}"):
            open_brackets += line.count(opener) - line.count(closer)
    return legal


def oracle_required_position(unit: SourceUnit) -> int | None:
    """The first body line after the signature and docstring, if detectable."""
    def_line = None
    for i in range(1, len(unit) + 1):
        if unit.line(i).lstrip().startswith(("def ", "async def ", "class ")):
            def_line = i
            break
    if def_line is None:
        return None
    depth = 0
    sig_end = None
    for i in range(def_line, len(unit) + 1):
        line = unit.line(i)
        for opener, closer in ("()", "[]", "{}"):
            depth += line.count(opener) - line.count(closer)
        if depth <= 0 and line.rstrip().endswith(":"):
            sig_end = i
            break
    if sig_end is None:
        return None
    span = docstring_span(unit)
    search_from = (span[1] if span else sig_end) + 1
    for i in range(search_from, len(unit) + 1):
        if unit.classify(i) is not LineClass.BLANK:
            return i
    return None


def render_placement(unit: SourceUnit, positions: set[int]) -> str:
    """Insert one unique sentinel comment above each chosen position."""
    token = unit.profile.line_comment_token
    out = []
    for i, line in enumerate(unit.lines, start=1):
        if i in positions:
            out.append(f"{token} probe sentinel {i} zxqv")
        out.append(line)
    text = "\n".join(out)
    if out and out[-1] == "":
        text += "\n"  # keep the trailing blank line visible to splitlines()
    return text


def placement_is_legal(unit: SourceUnit, positions: set[int]) -> bool:
    legal = oracle_legal_positions(unit)
    required = oracle_required_position(unit)
    if required is not None and required in legal and required not in positions:
        return False
    return positions <= legal


def oracle_accepts(constraint: Constraint, candidate: str) -> bool:
    """Exponential backtracking matcher for the slot language."""
    slots = list(constraint.slots)
    lines = candidate.splitlines()
    profile = constraint.profile

    def is_comment(line: str) -> bool:
        return classify_line(profile, line) in (
            LineClass.COMMENT,
            LineClass.STAR_COMMENT,
            LineClass.VERIFIED_STAR_COMMENT,
        )

    seen: set[tuple[int, int, bool]] = set()

    def match(s: int, j: int, satisfied: bool) -> bool:
        # satisfied: whether the current slot (if a required CommentSlot)
        # has consumed its mandatory comment already.
        state = (s, j, satisfied)
        if state in seen:
            return False
        seen.add(state)
        if s == len(slots):
            return j == len(lines)
        slot = slots[s]
        if isinstance(slot, LiteralLine):
            return (
                j < len(lines)
                and lines[j] == slot.text
                and match(s + 1, j + 1, False)
            )
        assert isinstance(slot, CommentSlot)
        may_skip = not slot.required or satisfied
        if may_skip and match(s + 1, j, False):
            return True
        if j < len(lines) and is_comment(lines[j]):
            return match(s, j + 1, True)
        return False

    return match(0, 0, False)


def random_unit(rng: random.Random, max_lines: int = 8) -> SourceUnit:
    """Small random code-shaped units, mixing def and snippet styles."""
    templates = [
        "x = 1",
        "y = compute(x)",
        "return y",
        "if x > 0:",
        "  x -= 1",
        "total += x",
        "# existing note",
        "items = [",
        "    1, 2,",
        "]",
        "raise ValueError('no')",
        "",
        "  ",
        "print(x)",
        "data = load() \\",
        "    .strip()",
    ]
    lines: list[str] = []
    if rng.random() < 0.5:
        lines.append("def f(x):")
        if rng.random() < 0.3:
            lines.append('  """Doc."""')
    target = rng.randint(min(len(lines) + 1, max_lines), max_lines)
    while len(lines) < target:
        lines.append(rng.choice(templates))
    return SourceUnit(lines=tuple(lines))


def mutate_one_character(line: str, rng: random.Random) -> str:
    index = rng.randrange(len(line))
    old = line[index]
    replacement = rng.choice([c for c in "abzXY9_;" if c != old])
    return line[:index] + replacement + line[index + 1 :]
