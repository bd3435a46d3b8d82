"""Golden tests for the stable external text formats.

The trace log and the lock-script rendering are consumed downstream;
any change to their shape must be deliberate (regenerate the files in
tests/golden/ and review the diff).
"""

from pathlib import Path

from fourswap import ledger, swaps
from fourswap.conditions import any_of, emit_script, parse_script
from fourswap.strategies import GreedySlash, Honest, simulate
from fourswap.swaps import SwapParams, generate_secrets, lock_a_disjuncts

GOLDEN = Path(__file__).parent / "golden"


def test_honest_trace_log_golden():
    params = SwapParams()
    driver = swaps.build_baseline("4s", params)
    trace = simulate(
        "4s", params,
        {"A": Honest(driver), "B": Honest(driver)},
        {"a": GreedySlash(), "b": GreedySlash()},
        horizon=50,
    )
    got = ledger.format_trace(trace.final.events) + "\n"
    assert got == (GOLDEN / "honest_4s_trace.log").read_text()


def test_lock_a_script_golden():
    params = SwapParams()
    secrets = generate_secrets(params, 0)
    cond = any_of(*lock_a_disjuncts(params, secrets.digests()).values())
    got = emit_script(cond) + "\n"
    assert got == (GOLDEN / "lock_a_script.txt").read_text()
    assert parse_script(got) == cond
