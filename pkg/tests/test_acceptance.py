"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as they
print.  Everything here runs offline.
"""

import random
import re
import time
from contextlib import contextmanager

import pytest

from nlo.cli import main as cli_main
from nlo.evalharness import evaluate_corpus
from nlo.fewshots import load_fewshot_set
from nlo.gateway import FixtureStore, GenerationRequest, ReplayBackend
from nlo.generation import (
    INFILLING_INSTRUCTIONS,
    MINOR_KINDS,
    PromptConfig,
    build_prompt,
    infill_text,
    parse_infilling,
    parse_interleaved,
)
from nlo.outline import Outline, OutlineStatement, render_interleaved
from nlo.source_model import LineClass, SourceUnit
from nlo.triage import parse_triage

import test_cli
import test_constraint_bruteforce
import test_properties
from conftest import SQ_CODE, TOUR_ANNOTATED, TOUR_CODE, TOUR_STATEMENTS
from test_generation import (
    INFILLING_ERROR_FIXTURES,
    INTERLEAVED_ERROR_FIXTURES,
    TALLY_CODE,
)
from test_triage import CLIPBOARD_WIRE
from test_vsplit import (
    adversarial_backend,
    assert_partition,
    random_changelist,
)
from nlo.vsplit import split_changelist


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL [{number:2d}] {title}")
        raise
    print(f"ACCEPTANCE PASS [{number:2d}] {title}")


def test_01_interleaved_reproduction():
    with criterion(1, "annotated tour example reproduces exactly, under 1 s"):
        started = time.perf_counter()
        unit = SourceUnit.from_text(TOUR_CODE)
        report = parse_interleaved(TOUR_ANNOTATED, unit)
        assert report.issues == ()
        assert report.outline.statements == TOUR_STATEMENTS
        rendered = render_interleaved(unit, report.outline)
        assert rendered.text() == TOUR_ANNOTATED
        elapsed = time.perf_counter() - started
        assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_02_error_taxonomy_coverage():
    with criterion(2, "15 error fixtures each yield exactly their kind (15/15)"):
        unit = SourceUnit.from_text(TALLY_CODE)
        passed = 0
        for kind, response in INTERLEAVED_ERROR_FIXTURES.items():
            report = parse_interleaved(response, unit)
            assert [i.kind for i in report.issues] == [kind], kind
            expected = "minor" if kind in MINOR_KINDS else "major"
            assert report.issues[0].severity == expected, kind
            if kind == "changed_code":
                assert report.truncated
                assert report.outline.statements == (
                    OutlineStatement(2, "Start from zero."),
                )
            passed += 1
        for kind, response in INFILLING_ERROR_FIXTURES.items():
            report = parse_infilling(response, unit)
            assert [i.kind for i in report.issues] == [kind], kind
            expected = "minor" if kind in MINOR_KINDS else "major"
            assert report.issues[0].severity == expected, kind
            if kind == "duplicate_line_number":
                assert report.outline.statements == (
                    OutlineStatement(2, "Start from zero."),
                )
            if kind == "not_sorted":
                assert report.outline.anchors() == (2, 4)
            if kind == "commented_empty_line":
                assert report.outline.anchors() == (7,)
            passed += 1
        assert passed == 15


def test_03_infilling_micro_example():
    with criterion(3, "numbered response places one statement on the sq function"):
        unit = SourceUnit.from_text(SQ_CODE)
        report = parse_infilling("2|Squares the input.", unit)
        assert report.issues == ()
        assert report.outline.statements == (
            OutlineStatement(2, "Squares the input."),
        )


def test_04_round_trip_properties():
    with criterion(4, "round-trip property suites, 1000 generated cases each"):
        test_properties.test_render_extract_identity()
        test_properties.test_interleaved_serialization_identity()
        test_properties.test_infilling_serialization_identity()
        test_properties.test_remap_identity_on_unchanged_unit()
        test_properties.test_sidecar_write_read_identity()


def test_05_constraint_soundness_completeness():
    with criterion(5, "constraint acceptor agrees with brute force; mutants rejected"):
        test_constraint_bruteforce.test_acceptor_agrees_with_enumeration_on_small_units()
        test_constraint_bruteforce.test_single_character_code_mutations_rejected()


def corpus_pairs():
    pairs = [
        (SourceUnit.from_text(TOUR_CODE), Outline(statements=TOUR_STATEMENTS)),
        (
            SourceUnit.from_text(TALLY_CODE),
            Outline.of(
                OutlineStatement(2, "Start from zero."),
                OutlineStatement(4, "Sum the items."),
            ),
        ),
    ]
    pairs.extend((ex.unit, ex.gold) for ex in load_fewshot_set("default"))
    return pairs


def test_06_compactness():
    ratios = []
    with criterion(6, "numbered serialization strictly shorter than interleaved"):
        for unit, outline in corpus_pairs():
            has_code = any(
                unit.classify(i) is LineClass.CODE for i in range(1, len(unit) + 1)
            )
            assert has_code
            short = len(infill_text(outline))
            long = len(render_interleaved(unit, outline).text())
            assert short < long, unit.lines[0]
            ratios.append(long / short)
    print(
        f"ACCEPTANCE INFO [ 6] interleaved/numbered size ratio: "
        f"mean {sum(ratios) / len(ratios):.2f}x over {len(ratios)} functions"
    )


def test_07_virtual_split_partition():
    with criterion(7, "100+ adversarial splits partition; concurrent == sequential"):
        rng = random.Random(5150)
        backend = adversarial_backend()
        for index in range(110):
            cl = random_changelist(rng)
            outcome = split_changelist(cl, backend)
            assert_partition(outcome.split, cl)
            total = sum(fraction for _, fraction in outcome.split.coverage)
            if cl.total_changed_lines():
                assert abs(total - 1.0) <= 0.001
            if index % 5 == 0:
                concurrent = split_changelist(cl, backend, max_workers=4)
                assert concurrent.split == outcome.split


def test_08_triage_parser_fidelity():
    with criterion(8, "triage parser matches the reference behavior on all branches"):
        # Missing sections, in both orders.
        missing = parse_triage("no structure at all")
        assert missing.errors == ("[no score section]", "[no outline section]")
        assert missing.score == -1 and missing.summary == ""
        only_notes = parse_triage("s\n\nNotes:\n<None>")
        assert only_notes.errors == ("[no score section]",)
        # Score out of range keeps the bracketed wording.
        bad_score = parse_triage("s\n\nSuspicion score:\n5\n\nNotes:\n<None>")
        assert bad_score.errors == ("[unexpected score: 5]",)
        assert bad_score.score == -1
        # <None> token, malformed lines, duplicates, and the range form.
        none_outline = parse_triage("s\n\nSuspicion score:\n0\n\nNotes:\n<None>")
        assert none_outline.errors == () and len(none_outline.outline) == 0
        malformed = parse_triage("s\n\nSuspicion score:\n1\n\nNotes:\nJust words")
        assert malformed.errors == ("[malformed outline line]",)
        duplicate = parse_triage(
            "s\n\nSuspicion score:\n1\n\nNotes:\nLine 3: a\nLine 3: b"
        )
        assert duplicate.errors == ("[duplicate line number: 3]",)
        assert duplicate.outline.statements == (OutlineStatement(3, "a"),)
        ranged = parse_triage(
            "s\n\nSuspicion score:\n2\n\nNotes:\nLines 3-5: a spanning note"
        )
        assert ranged.errors == ()
        assert ranged.outline.statements == (OutlineStatement(3, "a spanning note"),)
        # The serialized clipboard prediction: score 2 and two statements.
        clipboard = parse_triage(CLIPBOARD_WIRE)
        assert clipboard.errors == ()
        assert clipboard.score == 2
        assert len(clipboard.outline) == 2
        assert clipboard.outline.anchors() == (2, 11)


def eval_corpus_units(count=30):
    units = []
    for i in range(count):
        units.append(
            SourceUnit.from_text(
                f"def compute_{i}(x):\n"
                f"  y = x + {i}\n"
                f"  z = y * 2\n"
                f"  w = z - {i}\n"
                f"  v = w + 3\n"
                f"  u = v // 2\n"
                f"  return u"
            )
        )
    return units


def record_eval_fixtures(store_dir, corpus, model_id):
    config = PromptConfig(
        technique="infilling",
        instructions=INFILLING_INSTRUCTIONS,
        few_shots=load_fewshot_set("default"),
    )
    store = FixtureStore(store_dir)
    backend = ReplayBackend(store, backend_id="http", model_id=model_id)
    counts = [4] * 23 + [5] * 7  # 127 statements over 30 functions
    for unit, count in zip(corpus, counts):
        key = backend.key_for(GenerationRequest(prompt=build_prompt(unit, config)))
        response = "\n".join(
            f"{anchor}| Statement about line {anchor}."
            for anchor in range(2, 2 + count)
        )
        store.put(key, response, meta={"model": model_id})
    return config, backend


def test_09_eval_harness(tmp_path, capsys):
    with criterion(9, "eval table row reads none=30 minor=0 major=0 avg=4.23, <10 s"):
        corpus_dir = tmp_path / "corpus"
        corpus_dir.mkdir()
        corpus = eval_corpus_units()
        for i, unit in enumerate(corpus):
            (corpus_dir / f"fn_{i:02d}.py").write_text(
                unit.text() + "\n", encoding="utf-8"
            )
        store_dir = tmp_path / "fixtures"
        config, backend = record_eval_fixtures(store_dir, corpus, "clean-model")
        started = time.perf_counter()
        rows = evaluate_corpus(corpus, {"infilling": config}, [backend])
        code = cli_main(
            [
                "eval",
                "--corpus",
                str(corpus_dir),
                "--technique",
                "infilling",
                "--fixtures",
                str(store_dir),
                "--model",
                "clean-model",
            ]
        )
        elapsed = time.perf_counter() - started
        out = capsys.readouterr().out
        assert code == 0
        (row,) = rows
        assert (row.none, row.minor, row.major) == (30, 0, 0)
        assert f"{row.avg_statements:.2f}" == "4.23"
        table_row = next(ln for ln in out.splitlines() if "clean-model" in ln)
        assert re.search(r"\b30\b\s+0\s+0\s+4\.23$", table_row), table_row
        assert elapsed < 10.0, f"took {elapsed:.3f}s"


def run_cli(capsys, argv):
    code = cli_main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_10_end_to_end_determinism(tmp_path, capsys):
    with criterion(10, "gen, finish, split, triage byte-identical across reruns"):
        store_dir = tmp_path / "fixtures"

        gen_file = tmp_path / "add.py"
        gen_file.write_text(test_cli.SAMPLE, encoding="utf-8")
        test_cli.TestGen().record_gen(store_dir, gen_file)
        argv = ["gen", str(gen_file), "--fixtures", str(store_dir), "--no-sidecar"]
        assert run_cli(capsys, argv) == run_cli(capsys, argv)

        finish_file = tmp_path / "finish_me.py"
        finish_file.write_text(test_cli.SAMPLE, encoding="utf-8")
        test_cli.TestFinish().seed_edit(finish_file, store_dir)
        argv = ["finish", str(finish_file), "--fixtures", str(store_dir)]
        assert run_cli(capsys, argv) == run_cli(capsys, argv)

        diff_path = test_cli.TestSplit().seed_split(tmp_path, store_dir)
        argv = [
            "split",
            str(diff_path),
            "--description",
            "demo change",
            "--fixtures",
            str(store_dir),
        ]
        assert run_cli(capsys, argv) == run_cli(capsys, argv)

        triage_file = tmp_path / "fn.java"
        triage_file.write_text(
            'public void a(Context p1) {\n  this.z9.log(p1.getDeviceId());\n}\n',
            encoding="utf-8",
        )
        test_cli.TestTriage().seed_triage(triage_file, store_dir)
        argv = ["triage", str(triage_file), "--fixtures", str(store_dir)]
        assert run_cli(capsys, argv) == run_cli(capsys, argv)
