"""The ``nlo`` command line.

Commands: gen, render, extract, check, finish, split, triage, eval,
fixtures.  Exit codes: 0 success, 1 usage, 2 parse or major-issue failure,
3 backend failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, Settings, load_settings, make_backend
from .errors import BackendError, NloError
from .evalharness import evaluate_corpus, eval_rows_to_json, render_eval_table
from .fewshots import load_fewshot_set, load_triage_examples
from .gateway import FixtureStore, GenerationRequest, request_key, user_prompt
from .generation import (
    INFILLING_INSTRUCTIONS,
    INTERLEAVED_INSTRUCTIONS,
    PromptConfig,
    generate_outline,
    infill_text,
)
from .maintenance import EditSession, finish_changes
from .outline import (
    extract,
    remap_anchors,
    render_interleaved,
    render_standalone,
    validate,
)
from .sidecar import sidecar_path, sidecar_read, sidecar_write
from .source_model import SourceUnit, profile_for_path
from .triage import triage
from .vsplit import ChangeList, parse_unified_diff, render_split_report, split_changelist

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_BACKEND = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _instructions(technique: str) -> str:
    return (
        INTERLEAVED_INSTRUCTIONS
        if technique == "interleaved"
        else INFILLING_INSTRUCTIONS
    )


def _prompt_config(settings: Settings, technique: str) -> PromptConfig:
    return PromptConfig(
        technique=technique,
        instructions=_instructions(technique),
        few_shots=load_fewshot_set(settings.fewshot_set),
    )


def _load_unit(path: str, settings: Settings) -> SourceUnit:
    # Config-defined profiles are keyed by file extension; shipped languages
    # fall back to the extension heuristics.
    registry = settings.profile_registry()
    text = Path(path).read_text(encoding="utf-8")
    suffix = Path(path).suffix.lstrip(".")
    profile = registry.get(suffix) or profile_for_path(path)
    return SourceUnit.from_text(text, profile=profile)


def _apply_overrides(settings: Settings, args) -> Settings:
    for name in ("backend", "backend_id", "model", "fixtures", "technique"):
        value = getattr(args, name.replace("-", "_"), None)
        if isinstance(value, str):
            setattr(settings, name, value)
    if getattr(args, "record", False):
        settings.record = True
    if getattr(args, "responses_file", None):
        settings.responses_file = args.responses_file
        settings.backend = "scripted"
    return settings


def _add_backend_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--backend", choices=["replay", "scripted", "http"])
    sub.add_argument("--backend-id", dest="backend_id")
    sub.add_argument("--model")
    sub.add_argument("--fixtures", help="replay fixture store directory")
    sub.add_argument("--record", action="store_true", help="record replay misses")
    sub.add_argument(
        "--responses-file",
        dest="responses_file",
        help="JSON list of scripted responses (implies --backend scripted)",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="nlo", description=__doc__)
    parser.add_argument("--version", action="version", version=f"nlo {__version__}")
    parser.add_argument("--config", help="path to a YAML config file")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate an outline for a source file")
    gen.add_argument("file")
    gen.add_argument("--technique", choices=["interleaved", "infilling"])
    gen.add_argument(
        "--in-place",
        action="store_true",
        help="write star comments into the file instead of the sidecar",
    )
    gen.add_argument("--no-sidecar", action="store_true", help="print only")
    _add_backend_flags(gen)

    render = commands.add_parser("render", help="render the sidecar outline")
    render.add_argument("file")
    render.add_argument("--standalone", action="store_true", help="bullets, no code")
    render.add_argument(
        "--in-place", action="store_true", help="write star comments into the file"
    )

    extract_cmd = commands.add_parser(
        "extract", help="read the outline held in a file's star comments"
    )
    extract_cmd.add_argument("file")
    extract_cmd.add_argument(
        "--in-place",
        action="store_true",
        help="strip the comments from the file and store them in the sidecar",
    )

    check = commands.add_parser("check", help="validate a sidecar against its source")
    check.add_argument("file")

    finish = commands.add_parser("finish", help="have the model finish a started edit")
    finish.add_argument("file")
    finish.add_argument("--apply", action="store_true", help="write the result back")
    finish.add_argument(
        "--old", help="bare snapshot file to treat as the old code (with sidecar)"
    )
    _add_backend_flags(finish)

    split = commands.add_parser("split", help="virtually split a unified diff")
    split.add_argument("diff", nargs="?", default="-", help="diff file, or - for stdin")
    split.add_argument("--description", required=True)
    split.add_argument("--json", dest="json_out", help="write the split JSON here")
    split.add_argument("--html", dest="html_out", help="write the static HTML here")
    split.add_argument("--workers", type=int, default=1)
    _add_backend_flags(split)

    triage_cmd = commands.add_parser(
        "triage", help="score decompiled functions for suspicion"
    )
    triage_cmd.add_argument("path", help="a function file, or a directory of them")
    triage_cmd.add_argument("--glob", default="*", help="pattern for directory mode")
    _add_backend_flags(triage_cmd)

    eval_cmd = commands.add_parser("eval", help="tabulate parse quality over a corpus")
    eval_cmd.add_argument("--corpus", required=True, help="directory of source files")
    eval_cmd.add_argument(
        "--technique",
        action="append",
        choices=["interleaved", "infilling"],
        help="repeatable; default is both",
    )
    eval_cmd.add_argument(
        "--model-id",
        action="append",
        dest="models",
        help="repeatable; each model evaluated against the same store",
    )
    eval_cmd.add_argument("--json", dest="json_out", help="write rows as JSON here")
    eval_cmd.add_argument("--workers", type=int, default=1)
    _add_backend_flags(eval_cmd)

    fixtures = commands.add_parser("fixtures", help="inspect or extend a replay store")
    fixtures_sub = fixtures.add_subparsers(dest="fixtures_command", required=True)
    flist = fixtures_sub.add_parser("list", help="list recorded request hashes")
    flist.add_argument("--fixtures", required=True)
    fadd = fixtures_sub.add_parser("add", help="record one prompt/response pair")
    fadd.add_argument("--fixtures", required=True)
    fadd.add_argument("--backend-id", dest="backend_id", default="http")
    fadd.add_argument("--model", required=True)
    fadd.add_argument("--temperature", type=float, default=0.0)
    fadd.add_argument("--system", default="", help="system text for the prompt")
    fadd.add_argument("--prompt-file", required=True, help="user turn text file")
    fadd.add_argument("--response-file", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings(args.config)
        settings = _apply_overrides(settings, args)
        handler = {
            "gen": _cmd_gen,
            "render": _cmd_render,
            "extract": _cmd_extract,
            "check": _cmd_check,
            "finish": _cmd_finish,
            "split": _cmd_split,
            "triage": _cmd_triage,
            "eval": _cmd_eval,
            "fixtures": _cmd_fixtures,
        }[args.command]
        return handler(args, settings)
    except ConfigError as exc:
        print(f"nlo: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        print(f"nlo: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except NloError as exc:
        print(f"nlo: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"nlo: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _cmd_gen(args, settings: Settings) -> int:
    technique = args.technique or settings.technique
    annotated = _load_unit(args.file, settings)
    unit, _existing = extract(annotated)
    config = _prompt_config(settings, technique)
    backend = make_backend(settings)
    report = generate_outline(
        unit,
        config,
        backend,
        temperature=settings.temperature,
        max_output=settings.max_output,
    )
    print(infill_text(report.outline))
    for issue in report.issues:
        print(f"issue[{issue.severity}] {issue.kind}: {issue.detail}", file=sys.stderr)
    if report.has_major():
        return EXIT_PARSE
    if args.in_place:
        rendered = render_interleaved(unit, report.outline)
        Path(args.file).write_text(rendered.text() + "\n", encoding="utf-8")
    elif not args.no_sidecar:
        sidecar_write(unit, report.outline, args.file)
    return EXIT_OK


def _read_fresh_sidecar(path: str):
    record, stale = sidecar_read(path)
    if stale:
        raise NloError(
            f"sidecar for {path} is stale (source changed); regenerate with 'nlo gen'"
        )
    return record


def _cmd_render(args, settings: Settings) -> int:
    unit = _load_unit(args.file, settings)
    record = _read_fresh_sidecar(args.file)
    outline = record.outline()
    if args.standalone:
        print(render_standalone(unit, outline))
        return EXIT_OK
    rendered = render_interleaved(unit, outline)
    if args.in_place:
        Path(args.file).write_text(rendered.text() + "\n", encoding="utf-8")
    else:
        print(rendered.text())
    return EXIT_OK


def _cmd_extract(args, settings: Settings) -> int:
    annotated = _load_unit(args.file, settings)
    unit, outline = extract(annotated)
    print(infill_text(outline))
    if args.in_place:
        Path(args.file).write_text(unit.text() + "\n", encoding="utf-8")
        sidecar_write(unit, outline, args.file)
    return EXIT_OK


def _cmd_check(args, settings: Settings) -> int:
    record, stale = sidecar_read(args.file)
    if stale:
        print(f"stale: {sidecar_path(args.file)} no longer matches the source")
        return EXIT_PARSE
    unit = _load_unit(args.file, settings)
    violations = validate(record.outline(), unit)
    if violations:
        for violation in violations:
            print(f"violation[{violation.kind}] {violation.message}")
        return EXIT_PARSE
    print(f"ok: {len(record.statements)} statements, fresh")
    return EXIT_OK


def _cmd_finish(args, settings: Settings) -> int:
    annotated = _load_unit(args.file, settings)
    current_unit, current_outline = extract(annotated)
    has_star_comments = len(annotated.lines) != len(current_unit.lines)

    if args.old:
        old_unit = _load_unit(args.old, settings)
        old_record, _ = sidecar_read(args.old)
        old_outline = old_record.outline()
    else:
        record, _stale = sidecar_read(args.file)
        snapshot = record.snapshot_unit()
        if snapshot is None:
            raise NloError(
                "sidecar has no code snapshot; pass --old or regenerate with 'nlo gen'"
            )
        old_unit = snapshot
        old_outline = record.outline()
    if not has_star_comments:
        current_outline, _ = remap_anchors(old_outline, old_unit, current_unit)

    session = EditSession(
        old_unit=old_unit,
        old_outline=old_outline,
        current_unit=current_unit,
        current_outline=current_outline,
    )
    backend = make_backend(settings)
    result = finish_changes(
        session,
        backend,
        path=args.file,
        temperature=settings.temperature,
        max_output=settings.max_output,
    )
    if result.reasoning:
        print(result.reasoning, file=sys.stderr)
    print(result.diff)
    if args.apply:
        if has_star_comments:
            new_text = render_interleaved(result.new_unit, result.new_outline).text()
        else:
            new_text = result.new_unit.text()
        Path(args.file).write_text(new_text + "\n", encoding="utf-8")
        sidecar_write(result.new_unit, result.new_outline, args.file)
    return EXIT_OK


def _cmd_split(args, settings: Settings) -> int:
    if args.diff == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.diff).read_text(encoding="utf-8")
    files = parse_unified_diff(text)
    cl = ChangeList(description=args.description, files=files)
    backend = make_backend(settings)
    outcome = split_changelist(
        cl,
        backend,
        max_workers=args.workers,
        temperature=settings.temperature,
        max_output=settings.max_output,
    )
    reports = render_split_report(outcome.split, cl)
    if args.json_out:
        Path(args.json_out).write_text(reports["json"], encoding="utf-8")
    if args.html_out:
        Path(args.html_out).write_text(reports["html"], encoding="utf-8")
    print(reports["terminal"], end="")
    for path, issues in outcome.file_issues:
        for issue in issues:
            print(
                f"issue[{issue.severity}] {path}: {issue.kind}: {issue.detail}",
                file=sys.stderr,
            )
    return EXIT_OK


def _triage_record(path: Path, settings: Settings, backend, examples) -> dict:
    unit = _load_unit(str(path), settings)
    result = triage(
        unit,
        backend,
        examples=examples,
        temperature=settings.temperature,
        max_output=settings.max_output,
    )
    prediction = result.prediction
    return {
        "path": str(path),
        "score": prediction.score,
        "summary": prediction.summary,
        "outline": [
            {"line": s.anchor, "text": s.text} for s in prediction.outline.statements
        ],
        "errors": list(prediction.errors),
        "consistent": result.consistent,
    }


def _cmd_triage(args, settings: Settings) -> int:
    backend = make_backend(settings)
    examples = load_triage_examples(settings.triage_set)
    target = Path(args.path)
    if target.is_dir():
        histogram: dict[str, int] = {}
        for path in sorted(target.glob(args.glob)):
            if not path.is_file():
                continue
            record = _triage_record(path, settings, backend, examples)
            print(json.dumps(record, sort_keys=True))
            histogram[str(record["score"])] = histogram.get(str(record["score"]), 0) + 1
        print(json.dumps({"score_histogram": histogram}, sort_keys=True))
        return EXIT_OK
    record = _triage_record(target, settings, backend, examples)
    print(json.dumps(record, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_eval(args, settings: Settings) -> int:
    corpus_dir = Path(args.corpus)
    corpus = [
        _load_unit(str(p), settings) for p in sorted(corpus_dir.glob("*.py"))
    ]
    techniques = args.technique or ["interleaved", "infilling"]
    configs = {t: _prompt_config(settings, t) for t in techniques}
    models = args.models or [settings.model]
    backends = [make_backend(replace(settings, model=model)) for model in models]
    rows = evaluate_corpus(corpus, configs, backends, max_workers=args.workers)
    print(render_eval_table(rows), end="")
    if args.json_out:
        Path(args.json_out).write_text(eval_rows_to_json(rows), encoding="utf-8")
    return EXIT_OK


def _cmd_fixtures(args, settings: Settings) -> int:
    store = FixtureStore(args.fixtures)
    if args.fixtures_command == "list":
        for key in store.keys():
            print(key)
        return EXIT_OK
    prompt = user_prompt(args.system, Path(args.prompt_file).read_text(encoding="utf-8"))
    request = GenerationRequest(prompt=prompt, temperature=args.temperature)
    key = request_key(args.backend_id, args.model, request)
    store.put(
        key,
        Path(args.response_file).read_text(encoding="utf-8"),
        meta={
            "backend": args.backend_id,
            "model": args.model,
            "temperature": args.temperature,
        },
    )
    print(key)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
