"""The outline value type: validation, rendering, extraction, diffing, remapping.

An outline is an ordered sequence of prose statements, each anchored to a
1-based line of a :class:`~nlo.source_model.SourceUnit`.  Rendered
interleaved, each statement becomes a star comment (``#*`` / ``//*``, with
``#*!`` for verified statements) directly above its anchor line.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass

from .errors import DanglingCommentError, PlacementError
from .source_model import (
    LineClass,
    STAR_CLASSES,
    SourceUnit,
    classify_line,
    docstring_span,
    indentation,
    leading_whitespace,
)


@dataclass(frozen=True)
class OutlineStatement:
    """One prose statement anchored above a source line.

    Anchors and texts are validated by :func:`validate` rather than at
    construction, so that malformed model output remains representable.
    Newlines are structurally impossible to render and are rejected here.
    """

    anchor: int
    text: str
    verified: bool = False

    def __post_init__(self) -> None:
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("statement text must be a single line")


@dataclass(frozen=True)
class Outline:
    statements: tuple[OutlineStatement, ...] = ()

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self):
        return iter(self.statements)

    def anchors(self) -> tuple[int, ...]:
        return tuple(s.anchor for s in self.statements)

    @classmethod
    def of(cls, *statements: OutlineStatement) -> "Outline":
        return cls(statements=tuple(statements))


@dataclass(frozen=True)
class Violation:
    """One reason an outline does not fit a unit.  Violations are data."""

    kind: str  # out_of_range | blank_line | docstring | not_increasing | empty_text
    statement_index: int  # 0-based index into outline.statements
    message: str


@dataclass(frozen=True)
class OutlineDiff:
    added: tuple[OutlineStatement, ...] = ()
    removed: tuple[OutlineStatement, ...] = ()
    changed: tuple[tuple[OutlineStatement, OutlineStatement], ...] = ()

    def is_empty(self) -> bool:
        return not (self.added or self.removed or self.changed)


def validate(outline: Outline, unit: SourceUnit) -> list[Violation]:
    """Check an outline against a unit.  An empty list means valid.

    Violations: anchor out of range, anchor at a blank line, anchor inside
    the docstring, anchors not strictly increasing, empty statement text.
    """
    violations: list[Violation] = []
    span = docstring_span(unit)
    for i, stmt in enumerate(outline.statements):
        if not 1 <= stmt.anchor <= len(unit):
            violations.append(
                Violation(
                    "out_of_range",
                    i,
                    f"anchor {stmt.anchor} outside 1..{len(unit)}",
                )
            )
        else:
            if unit.classify(stmt.anchor) is LineClass.BLANK:
                violations.append(
                    Violation("blank_line", i, f"anchor {stmt.anchor} is a blank line")
                )
            if span is not None and span[0] <= stmt.anchor <= span[1]:
                violations.append(
                    Violation(
                        "docstring",
                        i,
                        f"anchor {stmt.anchor} is inside the docstring "
                        f"(lines {span[0]}..{span[1]})",
                    )
                )
        if i > 0 and stmt.anchor <= outline.statements[i - 1].anchor:
            violations.append(
                Violation(
                    "not_increasing",
                    i,
                    f"anchor {stmt.anchor} does not increase past "
                    f"{outline.statements[i - 1].anchor}",
                )
            )
        if not stmt.text.strip():
            violations.append(Violation("empty_text", i, "statement text is empty"))
    return violations


def statement_comment_line(unit: SourceUnit, stmt: OutlineStatement) -> str:
    """The star-comment line for one statement, indented like its anchor."""
    indent = leading_whitespace(unit.line(stmt.anchor))
    prefix = (
        unit.profile.verified_prefix if stmt.verified else unit.profile.star_prefix
    )
    return f"{indent}{prefix} {stmt.text}"


def render_interleaved(unit: SourceUnit, outline: Outline) -> SourceUnit:
    """Insert one star comment directly above each anchor line.

    Original lines are preserved byte-identically and in order.
    Raises :class:`PlacementError` when the outline does not validate.
    """
    violations = validate(outline, unit)
    if violations:
        raise PlacementError(violations)
    by_anchor = {s.anchor: s for s in outline.statements}
    out: list[str] = []
    for i, line in enumerate(unit.lines, start=1):
        stmt = by_anchor.get(i)
        if stmt is not None:
            out.append(statement_comment_line(unit, stmt))
        out.append(line)
    return SourceUnit(lines=tuple(out), profile=unit.profile)


def render_standalone(unit: SourceUnit, outline: Outline) -> str:
    """Render the outline without code: the unit's first line, then bullets.

    Bullet nesting follows the anchor lines' indentation: distinct
    indentation depths, ascending, map to nesting levels.
    """
    violations = validate(outline, unit)
    if violations:
        raise PlacementError(violations)
    out = [unit.line(1)] if len(unit) else []
    if outline.statements:
        depths = sorted({indentation(unit.line(s.anchor)) for s in outline.statements})
        level = {d: i for i, d in enumerate(depths)}
        for stmt in outline.statements:
            lvl = level[indentation(unit.line(stmt.anchor))]
            out.append(f"{'  ' * lvl}- {stmt.text}")
    return "\n".join(out)


def extract(unit_with_comments: SourceUnit) -> tuple[SourceUnit, Outline]:
    """Split a unit into bare code plus the outline held in its star comments.

    Every star-comment line is removed and becomes a statement anchored at
    the next line below it that is neither a star comment nor blank (blank
    lines belong above the comment, which sits directly above its section).
    A run of consecutive star comments joins into one statement, texts
    concatenated by a single space, because anchors may not repeat.
    """
    profile = unit_with_comments.profile
    bare: list[str] = []
    # Collected runs: (text parts, verified flags) awaiting the next bare line.
    pending: list[tuple[str, bool]] = []
    raw_statements: list[OutlineStatement] = []
    for line in unit_with_comments.lines:
        cls = classify_line(profile, line)
        if cls in STAR_CLASSES:
            verified = cls is LineClass.VERIFIED_STAR_COMMENT
            prefix = profile.verified_prefix if verified else profile.star_prefix
            text = line.lstrip()[len(prefix):]
            if text.startswith(" "):
                text = text[1:]
            pending.append((text, verified))
            continue
        bare.append(line)
        if pending and cls is not LineClass.BLANK:
            joined = " ".join(t for t, _ in pending)
            verified = all(v for _, v in pending)
            raw_statements.append(
                OutlineStatement(anchor=len(bare), text=joined, verified=verified)
            )
            pending = []
    if pending:
        raise DanglingCommentError(
            "star comment has no following line to anchor to: "
            + repr(pending[-1][0])
        )
    return (
        SourceUnit(lines=tuple(bare), profile=profile),
        Outline(statements=tuple(raw_statements)),
    )


def _line_mapping(old_unit: SourceUnit, new_unit: SourceUnit) -> dict[int, int]:
    """Map 1-based old line indices to new ones for aligned (unchanged) lines."""
    matcher = difflib.SequenceMatcher(
        a=old_unit.lines, b=new_unit.lines, autojunk=False
    )
    mapping: dict[int, int] = {}
    for block in matcher.get_matching_blocks():
        for offset in range(block.size):
            mapping[block.a + offset + 1] = block.b + offset + 1
    return mapping


def remap_anchors(
    outline: Outline, old_unit: SourceUnit, new_unit: SourceUnit
) -> tuple[Outline, list[OutlineStatement]]:
    """Carry anchors from ``old_unit`` onto ``new_unit``.

    Lines are aligned by a longest-common-subsequence style matching;
    statements anchored on deleted lines are dropped and returned as stale.
    """
    mapping = _line_mapping(old_unit, new_unit)
    kept: list[OutlineStatement] = []
    stale: list[OutlineStatement] = []
    for stmt in outline.statements:
        new_anchor = mapping.get(stmt.anchor)
        if new_anchor is None:
            stale.append(stmt)
        else:
            kept.append(
                OutlineStatement(anchor=new_anchor, text=stmt.text, verified=stmt.verified)
            )
    return Outline(statements=tuple(kept)), stale


def diff_outlines(
    old: Outline, new: Outline, old_unit: SourceUnit, new_unit: SourceUnit
) -> OutlineDiff:
    """Compare two outlines by aligned anchor position.

    Old anchors are remapped onto ``new_unit``; statements matched at the
    same remapped anchor with equal text are unchanged (omitted), with
    differing text are changed, and everything else is added or removed.
    """
    mapping = _line_mapping(old_unit, new_unit)
    new_by_anchor = {s.anchor: s for s in new.statements}
    removed: list[OutlineStatement] = []
    changed: list[tuple[OutlineStatement, OutlineStatement]] = []
    matched_new_anchors: set[int] = set()
    for stmt in old.statements:
        new_anchor = mapping.get(stmt.anchor)
        counterpart = new_by_anchor.get(new_anchor) if new_anchor is not None else None
        if counterpart is None:
            removed.append(stmt)
            continue
        matched_new_anchors.add(new_anchor)
        if counterpart.text != stmt.text:
            changed.append((stmt, counterpart))
    added = tuple(s for s in new.statements if s.anchor not in matched_new_anchors)
    return OutlineDiff(added=added, removed=tuple(removed), changed=tuple(changed))
