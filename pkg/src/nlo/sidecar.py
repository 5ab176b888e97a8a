"""Sidecar persistence: outlines stored next to the source, not inside it.

The record lives in ``<source>.nlo.json`` and is keyed by a content hash of
the bare code, so any edit to the source marks the record stale.  The hash
algorithm is pinned by the schema version to keep staleness reproducible.
An optional snapshot of the bare code lines supports the finish-changes
workflow, which needs the code as it was when the outline was written.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import SidecarError, SidecarVersionError
from .outline import Outline, OutlineStatement, validate
from .source_model import PROFILES, SourceUnit, profile_for_path

SCHEMA_VERSION = 1  # version 1 pins sha256 over LF-joined lines

SIDECAR_SUFFIX = ".nlo.json"


def content_hash(unit: SourceUnit) -> str:
    digest = hashlib.sha256("\n".join(unit.lines).encode("utf-8")).hexdigest()
    return f"sha256:{digest}"


@dataclass(frozen=True)
class SidecarRecord:
    version: int
    source_path: str
    content_hash: str
    statements: tuple[tuple[int, str, bool], ...]  # (line, text, verified)
    profile_name: str = "python"
    snapshot: tuple[str, ...] | None = None  # bare code lines at write time

    def outline(self) -> Outline:
        return Outline(
            statements=tuple(
                OutlineStatement(anchor=line, text=text, verified=verified)
                for line, text, verified in self.statements
            )
        )

    def snapshot_unit(self) -> SourceUnit | None:
        if self.snapshot is None:
            return None
        profile = PROFILES.get(self.profile_name) or profile_for_path(self.source_path)
        return SourceUnit(lines=self.snapshot, profile=profile)


def sidecar_path(source_path: str | Path) -> Path:
    return Path(str(source_path) + SIDECAR_SUFFIX)


def sidecar_write(
    unit: SourceUnit,
    outline: Outline,
    source_path: str | Path,
    include_snapshot: bool = True,
) -> SidecarRecord:
    """Write the outline record adjacent to the source file."""
    violations = validate(outline, unit)
    if violations:
        raise SidecarError(
            "refusing to persist an invalid outline: "
            + "; ".join(v.message for v in violations)
        )
    record = SidecarRecord(
        version=SCHEMA_VERSION,
        source_path=str(source_path),
        content_hash=content_hash(unit),
        statements=tuple((s.anchor, s.text, s.verified) for s in outline.statements),
        profile_name=unit.profile.name,
        snapshot=unit.lines if include_snapshot else None,
    )
    document = {
        "version": record.version,
        "source_path": record.source_path,
        "content_hash": record.content_hash,
        "profile": record.profile_name,
        "statements": [
            {"line": line, "text": text, "verified": verified}
            for line, text, verified in record.statements
        ],
    }
    if record.snapshot is not None:
        document["snapshot"] = list(record.snapshot)
    target = sidecar_path(source_path)
    target.write_text(
        json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return record


def sidecar_read(source_path: str | Path) -> tuple[SidecarRecord, bool]:
    """Load and re-validate a record; returns it with a staleness flag.

    Stale means the stored hash no longer matches the current source bytes.
    """
    target = sidecar_path(source_path)
    if not target.exists():
        raise SidecarError(f"no sidecar record at {target}")
    try:
        document = json.loads(target.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SidecarError(f"sidecar record is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or "version" not in document:
        raise SidecarError("sidecar record is missing its version field")
    if document["version"] != SCHEMA_VERSION:
        raise SidecarVersionError(
            f"sidecar schema version {document['version']!r} unsupported "
            f"(expected {SCHEMA_VERSION})"
        )
    try:
        statements = tuple(
            (int(s["line"]), str(s["text"]), bool(s.get("verified", False)))
            for s in document["statements"]
        )
        record = SidecarRecord(
            version=document["version"],
            source_path=str(document["source_path"]),
            content_hash=str(document["content_hash"]),
            statements=statements,
            profile_name=str(document.get("profile", "python")),
            snapshot=tuple(document["snapshot"]) if "snapshot" in document else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SidecarError(f"sidecar record is malformed: {exc}") from exc
    anchors = [line for line, _, _ in record.statements]
    if any(b <= a for a, b in zip(anchors, anchors[1:])) or any(
        a < 1 for a in anchors
    ):
        raise SidecarError("sidecar statements violate anchor ordering")
    if any(not text.strip() for _, text, _ in record.statements):
        raise SidecarError("sidecar statements contain empty text")
    source = Path(source_path)
    if not source.exists():
        return record, True
    profile = PROFILES.get(record.profile_name) or profile_for_path(str(source_path))
    current = SourceUnit.from_text(source.read_text(encoding="utf-8"), profile=profile)
    stale = content_hash(current) != record.content_hash
    return record, stale
