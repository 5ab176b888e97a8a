"""Outline generation: prompt construction, response parsing, constraints.

Two techniques are supported.  *Interleaved* prompts ask the model to repeat
the code with summary comments added; the response is compared line by line
against the original.  *Line-number infilling* numbers the code and asks for
``N|text`` pairs only, so the model never repeats code.

Parsing never raises: every formatting problem becomes a :class:`ParseIssue`
with a fixed severity.  Minor issues are recovered from without affecting
the outline; major issues affect outline quality.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .gateway import Backend, ChatPrompt, GenerationRequest, complete
from .outline import Outline, OutlineStatement, validate
from .source_model import (
    COMMENT_CLASSES,
    LanguageProfile,
    LineClass,
    SourceUnit,
    classify_line,
    docstring_span,
    leading_whitespace,
    number_lines,
    _bracket_delta,
    _signature_end,
)

# --- Issue taxonomy ---------------------------------------------------------

MINOR_KINDS = frozenset(
    {
        "extra_blank_line",
        "missing_blank_line",
        "missing_comment",
        "changed_trailing_comment",
        "extra_prediction_lines",
        "not_sorted",
        "commented_empty_line",
    }
)
MAJOR_KINDS = frozenset(
    {
        "consecutive_comment",
        "changed_code",
        "missing_prediction_lines",
        "empty_outline",
        "malformed_line",
        "line_number_out_of_bounds",
        "duplicate_line_number",
        # Used only by diff-section assignment (vsplit), not by the two
        # response-comparison parsers in this module.
        "unknown_topic_index",
    }
)
ALL_KINDS = MINOR_KINDS | MAJOR_KINDS


@dataclass(frozen=True)
class ParseIssue:
    """One problem found while parsing a model response.

    Severity is a fixed function of the kind.  ``location`` is a 1-based
    line index: into the original unit for comparison issues, into the
    response for format issues (see ``detail`` for specifics).
    """

    kind: str
    location: int | None = None
    detail: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown issue kind: {self.kind}")

    @property
    def severity(self) -> str:
        return "minor" if self.kind in MINOR_KINDS else "major"


@dataclass(frozen=True)
class ParseReport:
    """An outline plus whatever issues were found while parsing it."""

    outline: Outline
    issues: tuple[ParseIssue, ...] = ()
    truncated: bool = False  # set when changed_code stopped the scan

    def has_major(self) -> bool:
        return any(i.severity == "major" for i in self.issues)


# --- Prompt construction ----------------------------------------------------

INTERLEAVED_INSTRUCTIONS = """\
You are an expert programmer.
You are especially good at understanding and explaining the main ideas in a code function.
Your task is to write comments that summarize the main ideas in the code.

Follow these rules:
* Use the comments to organize the code into logical sections.
* Do not change the code aside from adding comments.
* Do not remove or change any existing comments. Only add comments.
* Each comment should be one sentence or phrase.
* When applicable, the comment should explain why the code is written that way, but only if the reasoning is unclear.
* The comment should not be too detailed, so it is quick to read.
* Do not add any comments to the docstring.
* Aim for at most 3 comments for short functions, or at most 5 comments for long functions.
* Do not comment every line.
* Do not explain in words. Only provide the code with comments added, nothing else."""

INFILLING_INSTRUCTIONS = """\
You are an expert programmer.
You are especially good at understanding and explaining the main ideas in a code function.
Your task is to write comments that summarize the main ideas in the code.

Follow these rules:
* First, write the line number where a logical section of the code starts.
* Then, write a comment to explain and summarize that section of the code.
* Write only one comment for each logical section of the code.
* Each comment should be one sentence or phrase.
* When applicable, the comment should explain why the code is written that way, but only if the reasoning is unclear.
* The comment should not be too detailed, so it is quick to read.
* Do not add any comments to the docstring.
* Aim for at most 3 comments for short functions, or at most 5 comments for long functions.
* Do not comment every line.
* Do not repeat the code in your response."""

_INTERLEAVED_USER = """\
Please help me understand this code:
```
{code}
```

Identify the logical sections of the code and summarize them by adding comments. Only provide the code with comments, nothing else."""

_INFILLING_USER = """\
Please help me understand this code, with line numbers added for reference:
```
{code}
```

Identify the logical sections of the code and summarize them. Format your response by providing, for each logical section, the line number where that section starts, followed by one sentence that summarizes that section.

Do not repeat the code! Just provide the summary."""

TECHNIQUES = ("interleaved", "infilling")


@dataclass(frozen=True)
class FewShotExample:
    """A demonstration pair: bare code and its hand-written outline."""

    unit: SourceUnit
    gold: Outline

    def __post_init__(self) -> None:
        violations = validate(self.gold, self.unit)
        if violations:
            raise ValueError(
                "few-shot outline does not fit its code: "
                + "; ".join(v.message for v in violations)
            )


@dataclass(frozen=True)
class PromptConfig:
    technique: str
    instructions: str
    few_shots: tuple[FewShotExample, ...] = ()

    def __post_init__(self) -> None:
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown technique: {self.technique}")


def infill_text(outline: Outline) -> str:
    """Canonical line-number serialization: one ``N| text`` line per statement."""
    return "\n".join(f"{s.anchor}| {s.text}" for s in outline.statements)


def plain_comment_render(unit: SourceUnit, outline: Outline) -> str:
    """Interleave statements as ordinary line comments (the response format
    models produce; star syntax is applied only when storing outlines)."""
    violations = validate(outline, unit)
    if violations:
        from .errors import PlacementError

        raise PlacementError(violations)
    token = unit.profile.line_comment_token
    by_anchor = {s.anchor: s for s in outline.statements}
    out: list[str] = []
    for i, line in enumerate(unit.lines, start=1):
        stmt = by_anchor.get(i)
        if stmt is not None:
            out.append(f"{leading_whitespace(line)}{token} {stmt.text}")
        out.append(line)
    return "\n".join(out)


def build_prompt(unit: SourceUnit, config: PromptConfig) -> ChatPrompt:
    """Assemble the few-shot prompt for one unit, ending with an empty
    assistant cue."""
    if len(unit) == 0:
        raise ValueError("cannot build a prompt for an empty unit")
    turns: list[tuple[str, str]] = []
    for example in config.few_shots:
        turns.append(("user", _user_turn(example.unit, config.technique)))
        turns.append(("assistant", _assistant_turn(example, config.technique)))
    turns.append(("user", _user_turn(unit, config.technique)))
    turns.append(("assistant", ""))
    return ChatPrompt(system=config.instructions, turns=tuple(turns))


def _user_turn(unit: SourceUnit, technique: str) -> str:
    if technique == "interleaved":
        return _INTERLEAVED_USER.format(code=unit.text())
    return _INFILLING_USER.format(code=number_lines(unit))


def _assistant_turn(example: FewShotExample, technique: str) -> str:
    if technique == "interleaved":
        return "```\n" + plain_comment_render(example.unit, example.gold) + "\n```"
    return infill_text(example.gold)


# --- Interleaved response parsing -------------------------------------------


def parse_interleaved(response: str, original: SourceUnit) -> ParseReport:
    """Compare a code-with-comments response against the original, top down.

    A two-pointer scan walks prediction and original together, comparing
    lines with trailing whitespace removed.  New comment lines become
    outline statements anchored at the next matching original line; blank
    and comment mismatches are skipped as minor issues; any other mismatch
    is a major ``changed_code`` that stops the scan.  Purely blank leftover
    prediction lines are ignored, like the blank-line mismatches.
    """
    profile = original.profile
    pred = _strip_code_fence(response)
    issues: list[ParseIssue] = []
    statements: list[OutlineStatement] = []
    pending: list[tuple[str, bool]] = []
    truncated = False

    def flush(anchor: int) -> None:
        if not pending:
            return
        if len(pending) >= 2:
            issues.append(
                ParseIssue(
                    "consecutive_comment",
                    location=anchor,
                    detail=f"{len(pending)} consecutive comments joined",
                )
            )
        statements.append(
            OutlineStatement(
                anchor=anchor,
                text=" ".join(t for t, _ in pending),
                verified=all(v for _, v in pending),
            )
        )
        pending.clear()

    p = o = 0
    pred_len, orig_len = len(pred), len(original.lines)
    while p < pred_len and o < orig_len:
        pline, oline = pred[p], original.lines[o]
        if pline.rstrip() == oline.rstrip():
            flush(o + 1)
            p += 1
            o += 1
            continue
        pcls = classify_line(profile, pline)
        ocls = classify_line(profile, oline)
        if pcls is LineClass.BLANK:
            issues.append(
                ParseIssue(
                    "extra_blank_line",
                    location=o + 1,
                    detail=f"response line {p + 1} is blank",
                )
            )
            p += 1
            continue
        if ocls is LineClass.BLANK:
            issues.append(
                ParseIssue(
                    "missing_blank_line",
                    location=o + 1,
                    detail="blank original line has no blank response line",
                )
            )
            o += 1
            continue
        if pcls in COMMENT_CLASSES:
            pending.append(_comment_text(profile, pline, pcls))
            p += 1
            continue
        if ocls in COMMENT_CLASSES:
            issues.append(
                ParseIssue(
                    "missing_comment",
                    location=o + 1,
                    detail=f"original comment not in response: {oline.strip()!r}",
                )
            )
            o += 1
            continue
        if _drop_trailing_comment(profile, pline) == _drop_trailing_comment(
            profile, oline
        ):
            issues.append(
                ParseIssue(
                    "changed_trailing_comment",
                    location=o + 1,
                    detail="lines match except for a trailing comment",
                )
            )
            p += 1
            o += 1
            continue
        flush(o + 1)
        issues.append(
            ParseIssue(
                "changed_code",
                location=o + 1,
                detail=f"expected {oline.strip()!r}, response has {pline.strip()!r}",
            )
        )
        truncated = True
        break

    if not truncated:
        if p >= pred_len:
            # Trailing blank original lines are skippable like in-loop blanks.
            while o < orig_len and not original.lines[o].strip():
                issues.append(
                    ParseIssue(
                        "missing_blank_line",
                        location=o + 1,
                        detail="blank original line has no blank response line",
                    )
                )
                o += 1
        if o < orig_len:
            flush(o + 1)
            issues.append(
                ParseIssue(
                    "missing_prediction_lines",
                    location=o + 1,
                    detail=f"{orig_len - o} original lines unmatched",
                )
            )
        else:
            leftover = [ln for ln in pred[p:] if ln.strip()]
            if leftover or pending:
                issues.append(
                    ParseIssue(
                        "extra_prediction_lines",
                        location=None,
                        detail=f"{len(leftover) + len(pending)} unmatched response lines",
                    )
                )
                pending.clear()

    if not statements:
        issues.append(ParseIssue("empty_outline", detail="no statements parsed"))
    return ParseReport(
        outline=Outline(statements=tuple(statements)),
        issues=tuple(issues),
        truncated=truncated,
    )


def _strip_code_fence(response: str) -> list[str]:
    """Drop one surrounding triple-backtick fence, if present."""
    lines = response.splitlines()
    first = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if first is None or not lines[first].strip().startswith("```"):
        return lines
    last = max(i for i, ln in enumerate(lines) if ln.strip())
    if last > first and lines[last].strip().startswith("```"):
        return lines[first + 1 : last]
    return lines[first + 1 :]


def _comment_text(
    profile: LanguageProfile, line: str, cls: LineClass
) -> tuple[str, bool]:
    verified = cls is LineClass.VERIFIED_STAR_COMMENT
    if verified:
        prefix = profile.verified_prefix
    elif cls is LineClass.STAR_COMMENT:
        prefix = profile.star_prefix
    else:
        prefix = profile.line_comment_token
    text = line.lstrip()[len(prefix):]
    if text.startswith(" "):
        text = text[1:]
    return text, verified


def _drop_trailing_comment(profile: LanguageProfile, line: str) -> str:
    token = profile.line_comment_token
    for sep in (" " + token, "\t" + token):
        idx = line.find(sep)
        if idx != -1:
            return line[:idx].rstrip()
    return line.rstrip()


# --- Infilling response parsing ---------------------------------------------

_INFILL_LINE = re.compile(r"\s*(\d+)\| ?(.*)")


def parse_infilling(response: str, original: SourceUnit) -> ParseReport:
    """Parse ``N|text`` response lines into an outline.

    Malformed or out-of-bounds lines are skipped (major).  Unsorted anchors
    are sorted (minor); duplicates keep the first occurrence (major).  An
    anchor pointing at a blank line moves down to the next non-blank line
    (minor), since the blank belongs above the comment.
    """
    issues: list[ParseIssue] = []
    raw: list[tuple[int, str]] = []
    for lineno, line in enumerate(response.splitlines(), start=1):
        if not line.strip():
            continue
        match = _INFILL_LINE.fullmatch(line)
        if match is None or not match.group(2).strip():
            issues.append(
                ParseIssue(
                    "malformed_line",
                    location=lineno,
                    detail=f"response line {lineno}: {line.strip()!r}",
                )
            )
            continue
        anchor = int(match.group(1))
        if not 1 <= anchor <= len(original):
            issues.append(
                ParseIssue(
                    "line_number_out_of_bounds",
                    location=lineno,
                    detail=f"line number {anchor} outside 1..{len(original)}",
                )
            )
            continue
        raw.append((anchor, match.group(2)))

    anchors = [a for a, _ in raw]
    if any(b < a for a, b in zip(anchors, anchors[1:])):
        issues.append(
            ParseIssue("not_sorted", detail="line numbers were not ascending")
        )
        raw.sort(key=lambda pair: pair[0])
    raw = _drop_duplicates(raw, issues)

    repaired: list[tuple[int, str]] = []
    for anchor, text in raw:
        if original.classify(anchor) is LineClass.BLANK:
            moved = _next_non_blank(original, anchor)
            if moved is None:
                issues.append(
                    ParseIssue(
                        "line_number_out_of_bounds",
                        location=anchor,
                        detail=f"no non-blank line at or after {anchor}",
                    )
                )
                continue
            issues.append(
                ParseIssue(
                    "commented_empty_line",
                    location=anchor,
                    detail=f"anchor {anchor} is blank; moved to {moved}",
                )
            )
            anchor = moved
        repaired.append((anchor, text))
    # Moving anchors off blank lines can collide with a later statement.
    repaired = _drop_duplicates(repaired, issues)

    if not repaired:
        issues.append(ParseIssue("empty_outline", detail="no statements parsed"))
    return ParseReport(
        outline=Outline(
            statements=tuple(OutlineStatement(a, t) for a, t in repaired)
        ),
        issues=tuple(issues),
    )


def _drop_duplicates(
    pairs: list[tuple[int, str]], issues: list[ParseIssue]
) -> list[tuple[int, str]]:
    kept: list[tuple[int, str]] = []
    for anchor, text in pairs:
        if kept and kept[-1][0] == anchor:
            issues.append(
                ParseIssue(
                    "duplicate_line_number",
                    location=anchor,
                    detail=f"duplicate line number {anchor}; kept the first",
                )
            )
            continue
        kept.append((anchor, text))
    return kept


def _next_non_blank(unit: SourceUnit, start: int) -> int | None:
    for i in range(start, len(unit) + 1):
        if unit.classify(i) is not LineClass.BLANK:
            return i
    return None


# --- Constraints -------------------------------------------------------------


@dataclass(frozen=True)
class LiteralLine:
    text: str


@dataclass(frozen=True)
class CommentSlot:
    required: bool = False


@dataclass(frozen=True)
class Constraint:
    """A repeat-the-code acceptor: literal lines with comment slots between.

    Literal slots concatenated in order equal the unit's lines; an optional
    comment slot admits zero or more comment lines, a required slot at
    least one.
    """

    profile: LanguageProfile
    slots: tuple

    def literal_lines(self) -> tuple[str, ...]:
        return tuple(s.text for s in self.slots if isinstance(s, LiteralLine))


def comment_slot_positions(unit: SourceUnit) -> dict[int, bool]:
    """Line indices a comment may be inserted above, mapped to required-ness.

    No slot above a blank line, inside a multi-line statement (unbalanced
    brackets or an explicit backslash continuation), between two comment
    lines, or within the docstring.  The first body line after the
    signature and docstring gets a required slot when that structure is
    detectable.
    """
    positions: dict[int, bool] = {}
    span = docstring_span(unit)
    balance = 0
    for i in range(1, len(unit) + 1):
        line = unit.line(i)
        legal = unit.classify(i) is not LineClass.BLANK
        if i > 1:
            if balance > 0 or unit.line(i - 1).rstrip().endswith("\\"):
                legal = False
            if (
                unit.classify(i) is LineClass.COMMENT
                and unit.classify(i - 1) is LineClass.COMMENT
            ):
                legal = False
        if span is not None and span[0] <= i <= span[1]:
            legal = False
        if legal:
            positions[i] = False
        balance += _bracket_delta(line)
    required = _first_body_line(unit, span)
    if required is not None and required in positions:
        positions[required] = True
    return positions


def _first_body_line(unit: SourceUnit, span: tuple[int, int] | None) -> int | None:
    sig_end = _signature_end(unit)
    if sig_end is None:
        return None
    start = span[1] if span is not None else sig_end
    for i in range(start + 1, len(unit) + 1):
        if unit.classify(i) is not LineClass.BLANK:
            return i
    return None


def build_constraint(unit: SourceUnit) -> Constraint:
    if len(unit) == 0:
        raise ValueError("cannot build a constraint for an empty unit")
    positions = comment_slot_positions(unit)
    slots: list = []
    for i, line in enumerate(unit.lines, start=1):
        if i in positions:
            slots.append(CommentSlot(required=positions[i]))
        slots.append(LiteralLine(line))
    return Constraint(profile=unit.profile, slots=tuple(slots))


def constraint_accepts(
    constraint: Constraint, candidate: str
) -> tuple[bool, int | None]:
    """Match candidate lines against the constraint, left to right.

    Returns acceptance plus, on rejection, the 1-based index of the first
    candidate line that cannot be matched (``len+1`` when the candidate
    ended before the constraint was satisfied).
    """
    elements: list[tuple[str, str | None]] = []
    for slot in constraint.slots:
        if isinstance(slot, CommentSlot):
            if slot.required:
                elements.append(("req", None))
            elements.append(("opt", None))
        else:
            elements.append(("lit", slot.text))
    end = len(elements)

    def closure(states: set[int]) -> set[int]:
        out: set[int] = set()
        stack = list(states)
        while stack:
            s = stack.pop()
            if s in out:
                continue
            out.add(s)
            if s < end and elements[s][0] == "opt":
                stack.append(s + 1)
        return out

    states = closure({0})
    lines = candidate.splitlines()
    for index, line in enumerate(lines, start=1):
        is_comment = classify_line(constraint.profile, line) in COMMENT_CLASSES
        advanced: set[int] = set()
        for s in states:
            if s >= end:
                continue
            kind, payload = elements[s]
            if kind == "lit" and line == payload:
                advanced.add(s + 1)
            elif kind == "opt" and is_comment:
                advanced.add(s)
            elif kind == "req" and is_comment:
                advanced.add(s + 1)
        states = closure(advanced)
        if not states:
            return False, index
    if end in states:
        return True, None
    return False, len(lines) + 1


# --- End to end ---------------------------------------------------------------


def generate_outline(
    unit: SourceUnit,
    config: PromptConfig,
    backend: Backend,
    temperature: float = 0.0,
    max_output: int | None = None,
) -> ParseReport:
    """Prompt, complete, and parse with the technique-matched parser."""
    prompt = build_prompt(unit, config)
    response = complete(
        GenerationRequest(prompt=prompt, temperature=temperature, max_output=max_output),
        backend,
    )
    if config.technique == "interleaved":
        return parse_interleaved(response, unit)
    return parse_infilling(response, unit)
