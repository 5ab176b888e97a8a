"""Virtual split of a change list: group diff changes into described topics.

The change list itself is never altered.  One query proposes an ordered
topic list (most important first); then, per file and in parallel, the model
outlines the numbered diff with ``N|T| description`` lines assigning each
diff section to a topic.  Assembly guarantees a partition: every changed
line lands in exactly one section, with anything unexplained collected
under the reserved final topic "Other changes".
"""

from __future__ import annotations

import html as html_lib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import DiffParseError, TopicParseError
from .gateway import Backend, ChatPrompt, GenerationRequest, complete
from .generation import ParseIssue

OTHER_CHANGES = "Other changes"

_HUNK_HEADER = re.compile(r"@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@.*")
_SECTION_LINE = re.compile(r"\s*(\d+)\|(\d+)\| ?(.*)")
_TOPIC_LINE = re.compile(r"\s*(\d+)[.)]\s+(.+?)\s*")
_SKIPPABLE = (
    "diff ",
    "index ",
    "old mode",
    "new mode",
    "new file",
    "deleted file",
    "similarity ",
    "dissimilarity ",
    "rename ",
    "copy ",
    "Binary files",
)


# --- Data model ---------------------------------------------------------------


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[tuple[str, str], ...]  # (marker, text); marker: context|added|removed

    def __post_init__(self) -> None:
        old = sum(1 for m, _ in self.lines if m in ("context", "removed"))
        new = sum(1 for m, _ in self.lines if m in ("context", "added"))
        if old != self.old_len or new != self.new_len:
            raise ValueError(
                f"hunk body ({old} old, {new} new lines) contradicts header "
                f"(-{self.old_len} +{self.new_len})"
            )

    def header(self) -> str:
        return f"@@ -{self.old_start},{self.old_len} +{self.new_start},{self.new_len} @@"


_MARKER_CHAR = {"context": " ", "added": "+", "removed": "-"}


@dataclass(frozen=True)
class FileDiff:
    old_path: str
    new_path: str
    hunks: tuple[Hunk, ...]

    @property
    def path(self) -> str:
        chosen = self.new_path if self.new_path != "/dev/null" else self.old_path
        for prefix in ("a/", "b/"):
            if chosen.startswith(prefix):
                return chosen[len(prefix):]
        return chosen

    def render_lines(self) -> list[str]:
        """The file's diff text, one entry per line."""
        return [text for text, _ in self.render_kinds()]

    def render_kinds(self) -> list[tuple[str, str]]:
        """(text, kind) pairs; kinds: file_header, hunk_header, context,
        added, removed."""
        out = [
            (f"--- {self.old_path}", "file_header"),
            (f"+++ {self.new_path}", "file_header"),
        ]
        for hunk in self.hunks:
            out.append((hunk.header(), "hunk_header"))
            for marker, text in hunk.lines:
                out.append((_MARKER_CHAR[marker] + text, marker))
        return out

    def changed_positions(self) -> tuple[int, ...]:
        """1-based positions of added/removed lines within render_lines()."""
        return tuple(
            i
            for i, (_, kind) in enumerate(self.render_kinds(), start=1)
            if kind in ("added", "removed")
        )

    def text(self) -> str:
        return "\n".join(self.render_lines())


@dataclass(frozen=True)
class ChangeList:
    description: str
    files: tuple[FileDiff, ...]

    def __post_init__(self) -> None:
        paths = [f.path for f in self.files]
        if len(paths) != len(set(paths)):
            raise ValueError("change list contains duplicate file paths")

    def total_changed_lines(self) -> int:
        return sum(len(f.changed_positions()) for f in self.files)


@dataclass(frozen=True)
class Topic:
    index: int  # 1-based
    title: str

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValueError("topic titles must be non-empty")


@dataclass(frozen=True)
class Section:
    anchor: int  # line within the numbered diff; 0 marks a synthetic section
    description: str
    topic_index: int


@dataclass(frozen=True)
class AssignedSection:
    anchor: int
    description: str
    topic_index: int
    changed_lines: tuple[int, ...]


@dataclass(frozen=True)
class FileAssignment:
    path: str
    sections: tuple[AssignedSection, ...]


@dataclass(frozen=True)
class VirtualSplit:
    topics: tuple[Topic, ...]
    assignments: tuple[FileAssignment, ...]
    coverage: tuple[tuple[int, float], ...]  # (topic index, changed-line fraction)

    def coverage_of(self, topic_index: int) -> float:
        return dict(self.coverage).get(topic_index, 0.0)


# --- Unified diff parsing -----------------------------------------------------


def parse_unified_diff(text: str) -> tuple[FileDiff, ...]:
    """Parse ---/+++ headers and @@ hunks, validating hunk arithmetic.

    Unknown metadata lines (diff headers, mode lines, ...) are skipped.
    """
    lines = text.splitlines()
    files: list[FileDiff] = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if line.startswith("--- "):
            old_path = line[4:].split("\t")[0]
            i += 1
            if i >= n or not lines[i].startswith("+++ "):
                raise DiffParseError("'---' header not followed by '+++'", i + 1)
            new_path = lines[i][4:].split("\t")[0]
            i += 1
            hunks, i = _parse_hunks(lines, i)
            files.append(
                FileDiff(old_path=old_path, new_path=new_path, hunks=tuple(hunks))
            )
        elif not line.strip() or line.startswith(_SKIPPABLE):
            i += 1
        else:
            raise DiffParseError(f"unexpected line outside a file diff: {line!r}", i + 1)
    return tuple(files)


def _parse_hunks(lines: list[str], i: int) -> tuple[list[Hunk], int]:
    hunks: list[Hunk] = []
    n = len(lines)
    while i < n and lines[i].startswith("@@"):
        match = _HUNK_HEADER.fullmatch(lines[i])
        if match is None:
            raise DiffParseError(f"malformed hunk header: {lines[i]!r}", i + 1)
        old_start = int(match.group(1))
        old_len = int(match.group(2)) if match.group(2) is not None else 1
        new_start = int(match.group(3))
        new_len = int(match.group(4)) if match.group(4) is not None else 1
        i += 1
        body: list[tuple[str, str]] = []
        seen_old = seen_new = 0
        while seen_old < old_len or seen_new < new_len:
            if i >= n:
                raise DiffParseError("diff ended inside a hunk", i)
            raw = lines[i]
            if raw.startswith("\\"):  # "\ No newline at end of file"
                i += 1
                continue
            if raw.startswith("+"):
                body.append(("added", raw[1:]))
                seen_new += 1
            elif raw.startswith("-"):
                body.append(("removed", raw[1:]))
                seen_old += 1
            elif raw.startswith(" ") or raw == "":
                body.append(("context", raw[1:]))
                seen_old += 1
                seen_new += 1
            else:
                raise DiffParseError(f"unexpected hunk body line: {raw!r}", i + 1)
            if seen_old > old_len or seen_new > new_len:
                raise DiffParseError("hunk body contradicts its header counts", i + 1)
            i += 1
        hunks.append(
            Hunk(
                old_start=old_start,
                old_len=old_len,
                new_start=new_start,
                new_len=new_len,
                lines=tuple(body),
            )
        )
    if not hunks:
        raise DiffParseError("file diff contains no hunks", i + 1)
    return hunks, i


def apply_file_diff(old_lines: list[str], filediff: FileDiff) -> list[str]:
    """Apply a parsed file diff to the old content (used to verify diffs)."""
    out: list[str] = []
    cursor = 0  # 0-based index into old_lines
    for hunk in filediff.hunks:
        start = hunk.old_start - 1 if hunk.old_len else hunk.old_start
        out.extend(old_lines[cursor:start])
        cursor = start
        for marker, text in hunk.lines:
            if marker == "context":
                if cursor >= len(old_lines) or old_lines[cursor] != text:
                    raise DiffParseError(
                        f"context mismatch applying hunk at old line {cursor + 1}"
                    )
                out.append(text)
                cursor += 1
            elif marker == "removed":
                if cursor >= len(old_lines) or old_lines[cursor] != text:
                    raise DiffParseError(
                        f"removed-line mismatch at old line {cursor + 1}"
                    )
                cursor += 1
            else:
                out.append(text)
    out.extend(old_lines[cursor:])
    return out


# --- Numbering ----------------------------------------------------------------


def change_run_starts(filediff: FileDiff) -> tuple[int, ...]:
    """First line of each maximal run of added/removed lines."""
    starts: list[int] = []
    previous_changed = False
    for i, (_, kind) in enumerate(filediff.render_kinds(), start=1):
        changed = kind in ("added", "removed")
        if changed and not previous_changed:
            starts.append(i)
        previous_changed = changed
    return tuple(starts)


def number_diff(filediff: FileDiff) -> str:
    """Prefix every diff line with ``N|`` and append change-start hints."""
    numbered = "\n".join(
        f"{i:>3}|{text}" for i, text in enumerate(filediff.render_lines(), start=1)
    )
    starts = change_run_starts(filediff)
    if not starts:
        return numbered
    hint = "Change blocks start at lines: " + ", ".join(str(s) for s in starts)
    return f"{numbered}\n\n{hint}"


def strip_diff_numbering(numbered: str) -> str:
    """Invert :func:`number_diff`, recovering the raw diff text."""
    body = numbered.split("\n\nChange blocks start at lines: ")[0]
    return "\n".join(line.split("|", 1)[1] for line in body.splitlines())


# --- Topic generation ---------------------------------------------------------

TOPICS_INSTRUCTIONS = """\
You are an expert code reviewer. You are given a change list: its description and the diffs of every changed file, in unified format.

Your job is to propose topics that group the changes into logical units a reviewer can examine one at a time.

Follow these rules:
* First, summarize each file's changes in one sentence, as reasoning.
* Then write a line reading exactly "Topics:" followed by a numbered list of topics, one per line, like "1. Added retry logic to the fetcher".
* Order the topics from most to least important.
* Each topic is a short phrase describing one logical change.
* Use between 1 and 6 topics; do not invent topics the diffs do not support.
* The reserved last topic "Other changes" collects low-priority changes such as imports, formatting, and typo fixes; include it only when needed."""

_TOPICS_USER = """\
Change list description:
{description}

File diffs:
{diffs}

Summarize each file's changes, then list the topics."""

_TOPICS_EXAMPLE_USER = """\
Change list description:
Cache template lookups

File diffs:
--- a/render.py
+++ b/render.py
@@ -1,6 +1,10 @@
 import jinja2
+from functools import lru_cache

+@lru_cache(maxsize=256)
 def load_template(name):
-    return jinja2.Template(open(name).read())
+    with open(name) as f:
+        return jinja2.Template(f.read())

 def render(name, context):
     return load_template(name).render(context)
--- a/render_test.py
+++ b/render_test.py
@@ -10,3 +10,8 @@
 def test_render():
     assert render('t.html', {}) == 'ok'
+
+
+def test_load_template_cached():
+    assert load_template('t.html') is load_template('t.html')

Summarize each file's changes, then list the topics."""

_TOPICS_EXAMPLE_ASSISTANT = """\
render.py caches template loading with lru_cache and closes the file properly.
render_test.py adds a test that repeated lookups return the cached template.

Topics:
1. Cache template lookups
2. Other changes"""


def ensure_other_changes(topics) -> tuple[Topic, ...]:
    """Append the reserved catch-all topic unless it is already present."""
    topics = tuple(topics)
    if any(t.title.strip().lower() == OTHER_CHANGES.lower() for t in topics):
        return topics
    return topics + (Topic(index=len(topics) + 1, title=OTHER_CHANGES),)


def parse_topics(response: str) -> tuple[Topic, ...]:
    """Read ``N. title`` lines, preferring those after the last "Topics:" marker."""
    lines = response.splitlines()
    marker_indexes = [
        i for i, ln in enumerate(lines) if ln.strip().lower() == "topics:"
    ]
    candidates = lines[marker_indexes[-1] + 1 :] if marker_indexes else lines
    titles: list[str] = []
    for line in candidates:
        match = _TOPIC_LINE.fullmatch(line)
        if match:
            titles.append(match.group(2).strip())
    if not titles:
        raise TopicParseError("response contains no numbered topic line")
    topics = tuple(Topic(index=i, title=t) for i, t in enumerate(titles, start=1))
    return ensure_other_changes(topics)


def build_topics_prompt(cl: ChangeList) -> ChatPrompt:
    diffs = "\n".join(f.text() for f in cl.files)
    return ChatPrompt(
        system=TOPICS_INSTRUCTIONS,
        turns=(
            ("user", _TOPICS_EXAMPLE_USER),
            ("assistant", _TOPICS_EXAMPLE_ASSISTANT),
            ("user", _TOPICS_USER.format(description=cl.description, diffs=diffs)),
            ("assistant", ""),
        ),
    )


def generate_topics(
    cl: ChangeList,
    backend: Backend,
    temperature: float = 0.0,
    max_output: int | None = None,
) -> tuple[Topic, ...]:
    if not cl.files:
        raise ValueError("change list has no files")
    response = complete(
        GenerationRequest(
            prompt=build_topics_prompt(cl),
            temperature=temperature,
            max_output=max_output,
        ),
        backend,
    )
    return parse_topics(response)


# --- Per-file sectioning ------------------------------------------------------

SECTIONS_INSTRUCTIONS = """\
You are an expert code reviewer. You are given a change list description, one file's diff with line numbers added, and a numbered list of topics.

Partition the diff into sections, where each section is a block of related changes, and assign every section to the topic it belongs to.

Follow these rules:
* Respond with one line per section, in the form "N|T| description".
* N is the diff line number where the section starts, T is the number of its topic, and the description is one short sentence about the section's changes.
* List sections from top to bottom of the diff; every changed line should fall in some section.
* Use the change-start hints to find where blocks of changes begin.
* Do not repeat the diff. Just provide the section lines."""

_SECTIONS_USER = """\
Change list description:
{description}

Diff of {path}, with line numbers added for reference:
{numbered}

Topics:
{topics}

Partition this diff into sections and assign each to a topic."""


def build_sections_prompt(
    description: str, filediff: FileDiff, topics: tuple[Topic, ...]
) -> ChatPrompt:
    topic_lines = "\n".join(f"{t.index}. {t.title}" for t in topics)
    return ChatPrompt(
        system=SECTIONS_INSTRUCTIONS,
        turns=(
            (
                "user",
                _SECTIONS_USER.format(
                    description=description,
                    path=filediff.path,
                    numbered=number_diff(filediff),
                    topics=topic_lines,
                ),
            ),
            ("assistant", ""),
        ),
    )


def parse_sections(
    response: str, filediff: FileDiff, topics: tuple[Topic, ...]
) -> tuple[tuple[Section, ...], tuple[ParseIssue, ...]]:
    """Parse ``N|T| description`` lines with the infilling error taxonomy.

    Unknown topic indices are reassigned to "Other changes" with a major
    issue.  An empty response yields zero sections; assembly repairs that.
    """
    topics = ensure_other_changes(topics)
    other_index = next(
        t.index for t in topics if t.title.lower() == OTHER_CHANGES.lower()
    )
    limit = len(filediff.render_lines())
    issues: list[ParseIssue] = []
    raw: list[tuple[int, int, str]] = []
    for lineno, line in enumerate(response.splitlines(), start=1):
        if not line.strip():
            continue
        match = _SECTION_LINE.fullmatch(line)
        if match is None or not match.group(3).strip():
            issues.append(
                ParseIssue(
                    "malformed_line",
                    location=lineno,
                    detail=f"response line {lineno}: {line.strip()!r}",
                )
            )
            continue
        anchor, topic_index = int(match.group(1)), int(match.group(2))
        if not 1 <= anchor <= limit:
            issues.append(
                ParseIssue(
                    "line_number_out_of_bounds",
                    location=lineno,
                    detail=f"diff line {anchor} outside 1..{limit}",
                )
            )
            continue
        if topic_index not in {t.index for t in topics}:
            issues.append(
                ParseIssue(
                    "unknown_topic_index",
                    location=lineno,
                    detail=f"topic {topic_index} does not exist; "
                    f"reassigned to {OTHER_CHANGES!r}",
                )
            )
            topic_index = other_index
        raw.append((anchor, topic_index, match.group(3)))

    anchors = [a for a, _, _ in raw]
    if any(b < a for a, b in zip(anchors, anchors[1:])):
        issues.append(ParseIssue("not_sorted", detail="section anchors not ascending"))
        raw.sort(key=lambda triple: triple[0])
    deduped: list[tuple[int, int, str]] = []
    for anchor, topic_index, description in raw:
        if deduped and deduped[-1][0] == anchor:
            issues.append(
                ParseIssue(
                    "duplicate_line_number",
                    location=anchor,
                    detail=f"duplicate section anchor {anchor}; kept the first",
                )
            )
            continue
        deduped.append((anchor, topic_index, description))
    sections = tuple(Section(a, d, t) for a, t, d in deduped)
    return sections, tuple(issues)


def split_file(
    description: str,
    filediff: FileDiff,
    topics: tuple[Topic, ...],
    backend: Backend,
    temperature: float = 0.0,
    max_output: int | None = None,
) -> tuple[tuple[Section, ...], tuple[ParseIssue, ...]]:
    if not topics:
        raise ValueError("topics must be non-empty")
    response = complete(
        GenerationRequest(
            prompt=build_sections_prompt(description, filediff, topics),
            temperature=temperature,
            max_output=max_output,
        ),
        backend,
    )
    return parse_sections(response, filediff, topics)


# --- Assembly -----------------------------------------------------------------


def assemble_split(
    cl: ChangeList,
    per_file_sections,
    topics,
) -> VirtualSplit:
    """Turn per-file sections into a complete partition of the change list.

    Each changed line belongs to the nearest preceding section anchor;
    changed lines before any anchor, or in files with no sections at all,
    go to a synthetic section under "Other changes".
    """
    topics = ensure_other_changes(topics)
    other_index = next(
        t.index for t in topics if t.title.lower() == OTHER_CHANGES.lower()
    )
    assignments: list[FileAssignment] = []
    counts: dict[int, int] = {t.index: 0 for t in topics}
    total = 0
    for filediff, sections in zip(cl.files, per_file_sections):
        ordered = sorted(sections, key=lambda s: s.anchor)
        buckets: dict[int, list[int]] = {i: [] for i in range(len(ordered))}
        orphans: list[int] = []
        for pos in filediff.changed_positions():
            owner = None
            for idx, section in enumerate(ordered):
                if section.anchor <= pos:
                    owner = idx
                else:
                    break
            if owner is None:
                orphans.append(pos)
            else:
                buckets[owner].append(pos)
        assigned: list[AssignedSection] = []
        if orphans:
            assigned.append(
                AssignedSection(
                    anchor=0,
                    description="Unassigned changes",
                    topic_index=other_index,
                    changed_lines=tuple(orphans),
                )
            )
        for idx, section in enumerate(ordered):
            assigned.append(
                AssignedSection(
                    anchor=section.anchor,
                    description=section.description,
                    topic_index=section.topic_index,
                    changed_lines=tuple(buckets[idx]),
                )
            )
        for entry in assigned:
            counts[entry.topic_index] += len(entry.changed_lines)
            total += len(entry.changed_lines)
        assignments.append(FileAssignment(path=filediff.path, sections=tuple(assigned)))
    coverage = tuple(
        (index, (count / total) if total else 0.0) for index, count in counts.items()
    )
    return VirtualSplit(
        topics=tuple(topics), assignments=tuple(assignments), coverage=coverage
    )


@dataclass(frozen=True)
class SplitOutcome:
    split: VirtualSplit
    file_issues: tuple[tuple[str, tuple[ParseIssue, ...]], ...]


def split_changelist(
    cl: ChangeList,
    backend: Backend,
    max_workers: int = 1,
    temperature: float = 0.0,
    max_output: int | None = None,
) -> SplitOutcome:
    """Full pipeline: topics, per-file sections (fanned out), assembly.

    File sectioning may run concurrently; results are merged in file order,
    so the outcome does not depend on scheduling.
    """
    topics = generate_topics(cl, backend, temperature, max_output)

    def one(filediff: FileDiff):
        return split_file(
            cl.description, filediff, topics, backend, temperature, max_output
        )

    if max_workers > 1 and len(cl.files) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, cl.files))
    else:
        results = [one(f) for f in cl.files]
    sections = [sections for sections, _ in results]
    issues = tuple(
        (f.path, result[1]) for f, result in zip(cl.files, results)
    )
    return SplitOutcome(
        split=assemble_split(cl, sections, topics), file_issues=issues
    )


# --- Reports ------------------------------------------------------------------

SPLIT_SCHEMA_VERSION = 1


def split_to_json(split: VirtualSplit, cl: ChangeList) -> str:
    document = {
        "version": SPLIT_SCHEMA_VERSION,
        "description": cl.description,
        "topics": [
            {
                "index": t.index,
                "title": t.title,
                "coverage": round(split.coverage_of(t.index), 6),
            }
            for t in split.topics
        ],
        "files": [
            {
                "path": fa.path,
                "sections": [
                    {
                        "anchor": s.anchor,
                        "description": s.description,
                        "topic": s.topic_index,
                        "changed_lines": list(s.changed_lines),
                    }
                    for s in fa.sections
                ],
            }
            for fa in split.assignments
        ],
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def split_from_json(text: str) -> VirtualSplit:
    document = json.loads(text)
    if document.get("version") != SPLIT_SCHEMA_VERSION:
        raise ValueError(f"unsupported split schema version: {document.get('version')!r}")
    topics = tuple(Topic(t["index"], t["title"]) for t in document["topics"])
    assignments = tuple(
        FileAssignment(
            path=f["path"],
            sections=tuple(
                AssignedSection(
                    anchor=s["anchor"],
                    description=s["description"],
                    topic_index=s["topic"],
                    changed_lines=tuple(s["changed_lines"]),
                )
                for s in f["sections"]
            ),
        )
        for f in document["files"]
    )
    coverage = tuple((t["index"], t["coverage"]) for t in document["topics"])
    return VirtualSplit(topics=topics, assignments=assignments, coverage=coverage)


def render_split_report(split: VirtualSplit, cl: ChangeList) -> dict[str, str]:
    """Render the split as JSON, a terminal report, and a static HTML page."""
    return {
        "json": split_to_json(split, cl),
        "terminal": _terminal_report(split, cl),
        "html": _html_report(split, cl),
    }


_CONTEXT_AROUND = 3


def _section_slices(split: VirtualSplit, cl: ChangeList, topic_index: int):
    """(path, section, numbered lines, muted flags) for one topic's sections."""
    files_by_path = {f.path: f for f in cl.files}
    for assignment in split.assignments:
        filediff = files_by_path[assignment.path]
        rendered = filediff.render_lines()
        anchors = sorted(s.anchor for s in assignment.sections)
        for section in assignment.sections:
            if section.topic_index != topic_index:
                continue
            start = max(section.anchor, 1)
            following = [a for a in anchors if a > section.anchor]
            end = (following[0] - 1) if following else len(rendered)
            low = max(1, start - _CONTEXT_AROUND)
            high = min(len(rendered), end + _CONTEXT_AROUND)
            lines = []
            for i in range(low, high + 1):
                muted = not start <= i <= end
                lines.append((f"{i:>3}|{rendered[i - 1]}", muted))
            yield assignment.path, section, lines


def _terminal_report(split: VirtualSplit, cl: ChangeList) -> str:
    out = [f"Virtual split: {cl.description}"]
    for topic in split.topics:
        out.append(
            f"  {topic.index}. {topic.title} "
            f"({split.coverage_of(topic.index) * 100:.1f}% of changed lines)"
        )
    for topic in split.topics:
        slices = list(_section_slices(split, cl, topic.index))
        if not slices:
            continue
        out.append("")
        out.append(
            f"=== {topic.index}. {topic.title} "
            f"({split.coverage_of(topic.index) * 100:.1f}%) ==="
        )
        for path, section, lines in slices:
            out.append(f"--- {path}: {section.description}")
            for text, muted in lines:
                out.append(("  ~ " if muted else "    ") + text)
    return "\n".join(out) + "\n"


def _html_report(split: VirtualSplit, cl: ChangeList) -> str:
    esc = html_lib.escape
    parts = [
        "<!DOCTYPE html>",
        "<html><head><meta charset='utf-8'><title>Virtual split</title>",
        "<style>body{font-family:sans-serif} pre{background:#f6f6f6;padding:8px}"
        " .muted{color:#999}</style></head><body>",
        f"<h1>Virtual split: {esc(cl.description)}</h1>",
        "<ol>",
    ]
    for topic in split.topics:
        parts.append(
            f"<li>{esc(topic.title)} "
            f"({split.coverage_of(topic.index) * 100:.1f}% of changed lines)</li>"
        )
    parts.append("</ol>")
    for topic in split.topics:
        slices = list(_section_slices(split, cl, topic.index))
        if not slices:
            continue
        parts.append(
            f"<details open><summary>{topic.index}. {esc(topic.title)} "
            f"({split.coverage_of(topic.index) * 100:.1f}%)</summary>"
        )
        for path, section, lines in slices:
            parts.append(f"<p><code>{esc(path)}</code>: {esc(section.description)}</p>")
            rendered = [
                f"<span class='muted'>{esc(text)}</span>" if muted else esc(text)
                for text, muted in lines
            ]
            parts.append("<pre>" + "\n".join(rendered) + "</pre>")
        parts.append("</details>")
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"
