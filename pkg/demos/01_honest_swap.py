#!/usr/bin/env python3
"""Walkthrough: the honest four-transaction swap, end to end.

A wants B's tokens on chain B and vice versa.  Each principal travels
with the counterparty's griefing premium and the owner's own bribery
premium, so the whole exchange needs exactly four on-chain
transactions: two locks, two claims.  The early-execution secret lets
B claim without waiting for the first timelock, which is what makes
this the fastest of the grief-free constructions.

Run: python demos/01_honest_swap.py
"""

from fourswap import CHAIN_A, CHAIN_B, SwapParams, balance, build_baseline, format_trace
from fourswap.strategies import GreedySlash, Honest, simulate

params = SwapParams()  # P=100/100, premiums 10/15, bribery premiums 5/5, fee 1
driver = build_baseline("4s", params)

print("=== genesis ===")
world = driver.make_world()
for party in ("A", "B"):
    print(
        f"  {party}: chain-a {balance(world, party, CHAIN_A):4d}   "
        f"chain-b {balance(world, party, CHAIN_B):4d}"
    )

print("\n=== the four templates locked in at setup ===")
setup = driver.setup(world)
for name in ("a_lock", "b_lock", "a_claim", "b_claim"):
    tx = setup.templates[name]
    outs = ", ".join(f"{o.value}->{o.beneficiary_note}" for o in tx.outputs)
    print(f"  {name:10s} [{tx.chain}]  {outs}")

print("\n=== honest run ===")
trace = simulate(
    "4s", params,
    {"A": Honest(driver), "B": Honest(driver)},
    {"a": GreedySlash(), "b": GreedySlash()},
    horizon=50,
)
print(format_trace(trace.final.events))

print("\n=== outcome ===")
print(trace.utility_table())
print()
print("Both parties paid two fees each; principals crossed, premiums and")
print("bribery premiums went home, and the swap closed in round", trace.completion_round)
