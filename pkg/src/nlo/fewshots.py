"""Loading few-shot example sets from paired files.

A set is a directory of pairs: ``<name>.py`` (or another source extension)
holding the bare code, and ``<name>.outline`` holding the gold outline in
the canonical ``N| text`` serialization.  Sets are loadable by name (shipped
under package data) or by directory path.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .generation import FewShotExample
from .outline import Outline, OutlineStatement
from .source_model import (
    C_LIKE_PROFILE,
    LanguageProfile,
    SourceUnit,
    profile_for_path,
)

DEFAULT_SET = "default"

_GOLD_LINE = re.compile(r"(\d+)\| ?(.*)")


def parse_gold_outline(text: str) -> Outline:
    """Strict reader for hand-written outline files; malformed lines raise."""
    statements = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        match = _GOLD_LINE.fullmatch(line)
        if match is None or not match.group(2).strip():
            raise ValueError(f"outline line {lineno} is malformed: {line!r}")
        statements.append(OutlineStatement(int(match.group(1)), match.group(2)))
    return Outline(statements=tuple(statements))


def _data_root() -> Path:
    return Path(str(resources.files("nlo").joinpath("data")))


def fewshot_set_dir(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.is_dir():
        return path
    packaged = _data_root() / "fewshots" / name_or_path
    if packaged.is_dir():
        return packaged
    raise FileNotFoundError(f"no few-shot set named {name_or_path!r}")


def load_fewshot_set(
    name_or_path: str = DEFAULT_SET, profile: LanguageProfile | None = None
) -> tuple[FewShotExample, ...]:
    directory = fewshot_set_dir(name_or_path)
    examples = []
    for outline_path in sorted(directory.glob("*.outline")):
        source_path = _matching_source(outline_path)
        unit_profile = profile or profile_for_path(source_path.name)
        unit = SourceUnit.from_text(
            source_path.read_text(encoding="utf-8"), profile=unit_profile
        )
        gold = parse_gold_outline(outline_path.read_text(encoding="utf-8"))
        examples.append(FewShotExample(unit=unit, gold=gold))
    if not examples:
        raise FileNotFoundError(f"few-shot set {name_or_path!r} is empty")
    return tuple(examples)


def _matching_source(outline_path: Path) -> Path:
    candidates = [
        p
        for p in outline_path.parent.glob(outline_path.stem + ".*")
        if p.suffix != ".outline"
    ]
    if len(candidates) != 1:
        raise FileNotFoundError(
            f"expected exactly one source file for {outline_path.name}, "
            f"found {len(candidates)}"
        )
    return candidates[0]


def load_triage_examples(name_or_path: str = DEFAULT_SET) -> tuple[tuple[SourceUnit, str], ...]:
    """Triage demonstrations: (decompiled unit, wire-format prediction) pairs."""
    path = Path(name_or_path)
    directory = path if path.is_dir() else _data_root() / "triage" / name_or_path
    if not directory.is_dir():
        raise FileNotFoundError(f"no triage example set named {name_or_path!r}")
    pairs = []
    for pred_path in sorted(directory.glob("*.pred")):
        code_path = pred_path.with_suffix(".code")
        if not code_path.exists():
            raise FileNotFoundError(f"missing code file for {pred_path.name}")
        unit = SourceUnit.from_text(
            code_path.read_text(encoding="utf-8"), profile=C_LIKE_PROFILE
        )
        pairs.append((unit, pred_path.read_text(encoding="utf-8").rstrip("\n")))
    if not pairs:
        raise FileNotFoundError(f"triage example set {name_or_path!r} is empty")
    return tuple(pairs)
