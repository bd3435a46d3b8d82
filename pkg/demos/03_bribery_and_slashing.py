#!/usr/bin/env python3
"""Walkthrough: bribery via conflicting transactions, and why it burns.

A bribe here is in-band: publish a conflicting refund whose fee is
high enough that a censoring miner would rather wait for it than
confirm the victim's claim.  Against a plain HTLC that works.  Against
the four-transaction swap, the conflicting pair exposes both refund-
and claim-side secrets in the mempool at once, and any miner can then
seize the whole lock through an anyone-can-spend path - so a rational
miner slashes instead of censoring, and the briber funds its own
punishment.

Run: python demos/03_bribery_and_slashing.py
"""

from fourswap import SwapParams, build_baseline, format_trace
from fourswap.strategies import (
    BribeRefund,
    CensorVictim,
    GreedySlash,
    Honest,
    simulate,
)

params = SwapParams()


def run(variant, a, b, miners):
    driver = build_baseline(variant, params)
    return simulate(
        variant, params,
        {"A": a(driver), "B": b(driver)},
        miners,
        horizon=50,
    )


print("=== classic HTLC: B bribes the chain-B miner to censor A's claim ===")
trace = run(
    "tn", Honest, lambda d: BribeRefund(d, 30),
    {"a": GreedySlash(), "b": CensorVictim("A")},
)
print(f"  briber B nets {trace.utilities['B']:+d} (honest would be -2): the attack pays")

print("\n=== 4-swap: B publishes a conflicting refund against A's claim ===")
trace = run(
    "4s", Honest, lambda d: BribeRefund(d, 60),
    {"a": GreedySlash(), "b": GreedySlash()},
)
print(format_trace(trace.final.events))
print(f"  chain-B miner slashed the whole lock ({trace.final.miner_income['m_b'].slash_gains})")
print(f"  briber B nets {trace.utilities['B']:+d} vs honest -2: deterred")

print("\n=== 4-swap: A parks a high-fee refund to censor B's claim ===")
trace = run(
    "4s", lambda d: BribeRefund(d, 60), Honest,
    {"a": GreedySlash(), "b": GreedySlash()},
)
print(format_trace(trace.final.events))
print(f"  both chains slashed; briber A nets {trace.utilities['A']:+d} vs honest -2")

print("\nMutual destruction makes censorship a losing bid: the conflicting")
print("pair reveals complementary secrets, and the miner's best response is")
print("to take everything rather than pocket the bribe.")
