"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py`` for the plain line-per-criterion
report.  Every tolerance is exact; the two timed criteria carry their
stated runtime budgets.
"""

import time

from fourswap import game, ledger
from fourswap.cli import bribe_sweep, comparison_table, grief_sweep, honest_trace, slashing_grid
from fourswap.game import (
    backward_induction,
    brute_force_spne,
    build_tree,
    count_decisions,
    iter_nodes,
    matches_honest_path,
    multi_miner_equivalence,
    verify_spne,
)
from fourswap.rpredicate import oracle_equivalence
from fourswap.swaps import PARTY_A, PARTY_B, SwapParams

from ledger_fuzzer import fuzz_run

PARAMS = SwapParams()


def report(criterion: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_comparison_table():
    """Worst-case transaction counts and griefing verdicts, measured."""
    start = time.monotonic()
    rows = comparison_table(PARAMS)
    elapsed = time.monotonic() - start
    got = {r.variant: (r.txns, r.griefing_resistant) for r in rows}
    expected = {
        "tn": (4, False),
        "hedged": (6, True),
        "gf": (5, True),
        "4s": (4, True),
    }
    ok = got == expected and elapsed < 10.0
    report(
        "1 (comparison table)", ok,
        f"measured {got}, expected {expected}, runtime {elapsed:.2f}s < 10s",
    )


def test_criterion_2_spne_theorem():
    """Backward induction lands on the honest path; solver matches the
    brute-force oracle on every subtree with at most 12 decision nodes."""
    start = time.monotonic()
    tree = build_tree(PARAMS)
    solved = backward_induction(tree)
    honest = matches_honest_path(solved.path)
    confirmed = verify_spne(tree, solved.chosen)
    agree = True
    checked = 0
    for sub in iter_nodes(tree):
        if isinstance(sub, game.Decision) and count_decisions(sub) <= 12:
            bf = brute_force_spne(sub)
            sol = backward_induction(sub)
            if bf is None or bf.path != sol.path or bf.utilities != sol.utilities:
                agree = False
                break
            checked += 1
    elapsed = time.monotonic() - start
    ok = honest and confirmed and agree and elapsed < 60.0
    report(
        "2 (SPNE theorem)", ok,
        f"honest path={honest}, verify_spne={confirmed}, "
        f"{checked} subtrees brute-forced, runtime {elapsed:.2f}s < 60s",
    )


def test_criterion_3_griefing_lemma():
    """Every exposed abandonment strictly loses, by at least the smaller
    premium net of the whole fee schedule; the mutual-refund case hits
    the premium-difference arithmetic to the token."""
    honest = honest_trace("4s", PARAMS)
    fee_kinds = ("lock_a", "lock_b", "claim_a", "claim_b", "erefund", "refund_a", "refund_b")
    margin = min(PARAMS.p_a, PARAMS.p_b) - sum(PARAMS.fee(k) for k in fee_kinds)
    all_penalized = True
    counted = 0
    for party, k, trace, exposed in grief_sweep("4s", PARAMS):
        if not exposed:
            continue
        counted += 1
        if trace.utilities[party] > honest.utilities[party] - margin:
            all_penalized = False
    from fourswap.cli import _simulate
    from fourswap.strategies import AbandonAfter, Honest

    case2 = _simulate("4s", PARAMS, Honest, lambda d: AbandonAfter(d, 1))
    fees_a = PARAMS.fee("lock_a") + PARAMS.fee("refund_a")
    fees_b = PARAMS.fee("lock_b") + PARAMS.fee("refund_b")
    want_a = (PARAMS.p_b - PARAMS.p_a) - fees_a
    want_b = -(PARAMS.p_b - PARAMS.p_a) - fees_b
    exact = (
        case2.utilities[PARTY_A] == want_a == 3
        and case2.utilities[PARTY_B] == want_b == -7
    )
    ok = all_penalized and counted >= 4 and exact
    report(
        "3 (griefing lemma)", ok,
        f"{counted} exposed abandonments all penalized={all_penalized}; "
        f"case-2 deltas A={case2.utilities[PARTY_A]} B={case2.utilities[PARTY_B]} "
        f"(want +{want_a}/{want_b})",
    )


def test_criterion_4_slashing_lemma():
    """Dominance holds over the whole parameter grid and every bribe size
    leaves the briber strictly worse off."""
    grid = slashing_grid()
    grid_ok = all(not violations for _, violations in grid)
    rows = bribe_sweep(PARAMS)
    bribes_ok = all(util < honest for _, _, util, honest in rows)
    ok = grid_ok and len(grid) == 27 and bribes_ok and len(rows) == 6
    report(
        "4 (slashing lemma)", ok,
        f"{len(grid)} parameter sets clean={grid_ok}; "
        f"{len(rows)} bribe runs strictly deterred={bribes_ok}",
    )


def test_criterion_5_multi_miner():
    ok2 = multi_miner_equivalence(PARAMS, 2)
    ok3 = multi_miner_equivalence(PARAMS, 3)
    report("5 (multi-miner equivalence)", ok2 and ok3, f"n=2: {ok2}, n=3: {ok3}")


def test_criterion_6_rpredicate_oracle():
    result = oracle_equivalence(PARAMS)
    ok = result.ok and result.cases == 2**5 * 3 * 10
    report(
        "6 (rPredicate oracle)", ok,
        f"{result.cases} cases, {len(result.disagreements)} disagreements",
    )


def test_criterion_7_ledger_fuzz():
    """10,000 randomized action sequences: conservation, double-spend
    exclusion, activity monotonicity, and replay determinism."""
    runs = 10_000
    failures = []
    checks = 0
    for seed in range(runs):
        violations, n = fuzz_run(seed)
        checks += n
        if violations:
            failures.append((seed, violations))
            if len(failures) > 3:
                break
    ok = not failures
    report(
        "7 (ledger fuzz)", ok,
        f"{runs} runs, {checks} invariant checks, violations: {failures[:3]}",
    )


def test_criterion_8_latency_ordering():
    lat = {
        v: honest_trace(v, PARAMS).completion_round for v in ("4s", "gf", "hedged")
    }
    ok = lat["4s"] < lat["gf"] and lat["4s"] < lat["hedged"]
    report(
        "8 (honest latency ordering)", ok,
        f"completion rounds {lat} (4s strictly first)",
    )


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError as exc:
                failed += 1
                print(f"  -> {exc}")
    sys.exit(1 if failed else 0)
