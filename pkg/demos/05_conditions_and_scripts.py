#!/usr/bin/env python3
"""Walkthrough: the spending-condition algebra behind the lock outputs.

Each lock output is a disjunction of spending paths: hashlocked claims,
timelocked refunds, and anyone-can-spend slash paths that arm only when
conflicting secrets co-appear.  The algebra enumerates those paths,
renders the whole tree as a Bitcoin-flavoured script, and agrees case
by case with the independently hand-coded relaxed redeem predicate.

Run: python demos/05_conditions_and_scripts.py
"""

from fourswap import SwapParams
from fourswap.conditions import any_of, emit_script, parse_script, satisfying_paths
from fourswap.rpredicate import oracle_equivalence, reachability, ReachState
from fourswap.swaps import generate_secrets, lock_a_disjuncts

params = SwapParams()
secrets = generate_secrets(params)
digests = secrets.digests()
names = {d: n for n, d in digests.items()}

print("=== chain-A lock: the six spending paths ===")
disjuncts = lock_a_disjuncts(params, digests)
cond = any_of(*disjuncts.values())
for label, path in zip(disjuncts, satisfying_paths(cond)):
    pres = "+".join(sorted(names[d] for d in path.required_preimages))
    sigs = "+".join(sorted(s for sig in path.required_signers for s in sig.signers))
    locks = ",".join(repr(t) for t in path.timelocks) or "none"
    acs = " (anyone)" if path.anyone_can_spend else ""
    print(f"  {label:9s} needs [{pres}] sig [{sigs or '-'}]{acs}, timelocks: {locks}")

print("\n=== script rendering (round-trips through the parser) ===")
script = emit_script(cond)
print(script)
assert parse_script(script) == cond

print("\n=== relaxed redeem predicate vs the evaluator ===")
report = oracle_equivalence(params)
print(f"  {report.cases} (flags x party x path) cases, "
      f"{len(report.disagreements)} disagreements")

print("\n=== who can redeem from a fresh initiation ===")
for actor, path in sorted(reachability(ReachState()), key=str):
    print(f"  {actor}: {path.value}")
print("  ...after the main secret is published:")
for actor, path in sorted(
    reachability(ReachState(pub_m=True)) - reachability(ReachState()), key=str
):
    print(f"  {actor}: {path.value}")
