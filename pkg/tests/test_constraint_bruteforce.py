"""Exhaustive agreement checks between the constraint acceptor and oracles.

For small random units every subset of insertion positions is enumerated;
the NFA acceptor must agree with an independently derived legality verdict
and with a naive backtracking matcher on the exact same candidate text.
"""

import random
from itertools import combinations

from nlo.generation import build_constraint, constraint_accepts
from oracles import (
    mutate_one_character,
    oracle_accepts,
    oracle_legal_positions,
    placement_is_legal,
    random_unit,
    render_placement,
)

UNITS_TO_CHECK = 220


def all_subsets(positions):
    for size in range(len(positions) + 1):
        yield from (set(c) for c in combinations(positions, size))


def test_acceptor_agrees_with_enumeration_on_small_units():
    rng = random.Random(1789)
    checked_units = 0
    accepted_total = rejected_total = 0
    while checked_units < UNITS_TO_CHECK:
        unit = random_unit(rng)
        constraint = build_constraint(unit)
        positions = list(range(1, len(unit) + 1))
        for subset in all_subsets(positions):
            candidate = render_placement(unit, subset)
            accepted, _ = constraint_accepts(constraint, candidate)
            expected = placement_is_legal(unit, subset)
            assert accepted == expected, (
                f"disagreement on {unit.lines} with comments above {sorted(subset)}: "
                f"acceptor={accepted}, enumeration={expected}"
            )
            assert oracle_accepts(constraint, candidate) == accepted
            accepted_total += accepted
            rejected_total += not accepted
        checked_units += 1
    assert accepted_total and rejected_total  # both behaviors exercised


def test_single_character_code_mutations_rejected():
    rng = random.Random(4242)
    mutations_checked = 0
    for _ in range(UNITS_TO_CHECK):
        unit = random_unit(rng)
        constraint = build_constraint(unit)
        # An accepted baseline: one comment above every legal position.
        candidate = render_placement(unit, oracle_legal_positions(unit))
        accepted, _ = constraint_accepts(constraint, candidate)
        assert accepted
        lines = candidate.splitlines()
        token = unit.profile.line_comment_token
        code_line_indexes = [
            idx
            for idx, line in enumerate(lines)
            if line in unit.lines
            and line.strip()
            and not line.lstrip().startswith(token)
        ]
        for idx in code_line_indexes:
            mutated = list(lines)
            mutated[idx] = mutate_one_character(lines[idx], rng)
            verdict, first_bad = constraint_accepts(constraint, "\n".join(mutated))
            assert not verdict, (
                f"mutation of {lines[idx]!r} at candidate line {idx + 1} "
                "was accepted"
            )
            assert first_bad is not None
            mutations_checked += 1
    assert mutations_checked > 500


def test_acceptor_agrees_with_backtracker_on_adversarial_candidates():
    # Candidates the subset enumeration cannot produce: multi-comment runs,
    # duplicated unit comments, star comments, and shuffled fragments.
    rng = random.Random(99)
    for _ in range(80):
        unit = random_unit(rng)
        constraint = build_constraint(unit)
        base = render_placement(
            unit, set(rng.sample(range(1, len(unit) + 1), k=min(2, len(unit))))
        ).splitlines()
        for _ in range(6):
            candidate = list(base)
            action = rng.choice(["dup", "insert", "drop", "star", "swap"])
            if action == "dup" and candidate:
                i = rng.randrange(len(candidate))
                candidate.insert(i, candidate[i])
            elif action == "insert":
                candidate.insert(
                    rng.randint(0, len(candidate)), "# extra probe comment"
                )
            elif action == "drop" and candidate:
                del candidate[rng.randrange(len(candidate))]
            elif action == "star":
                candidate.insert(rng.randint(0, len(candidate)), "#* starred note")
            elif len(candidate) >= 2:
                i = rng.randrange(len(candidate) - 1)
                candidate[i], candidate[i + 1] = candidate[i + 1], candidate[i]
            text = "\n".join(candidate)
            nfa_verdict, _ = constraint_accepts(constraint, text)
            assert nfa_verdict == oracle_accepts(constraint, text)
