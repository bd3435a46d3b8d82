"""Relaxed redeem predicate and redeem-path reachability.

This module is an independent oracle for the condition algebra: it
hand-codes, per redeem path, who may spend with which preimages once all
timelocks are treated as open.  ``oracle_equivalence`` checks it against
the evaluator running on the actually-built lock transactions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum

from .conditions import EvalContext, Witness, evaluate


class Path(Enum):
    CLAIM_B_A = "claim_B-A"
    CLAIM_A_B = "claim_A-B"
    ECLAIM_A_B = "eclaim_A-B"
    EREFUND_A_A = "erefund_A-A"
    REFUND_A_A = "refund_A-A"
    REFUND_B_B = "refund_B-B"
    SLASH1_A_M = "slash_1,A-M"
    SLASH1_B_M = "slash_1,B-M"
    SLASH2_A_M = "slash_2,A-M"
    SLASH2_B_M = "slash_2,B-M"


#: which lock transaction and which of its disjuncts each path spends
PATH_TO_DISJUNCT: dict[Path, tuple[str, str]] = {
    Path.CLAIM_A_B: ("a", "claim"),
    Path.ECLAIM_A_B: ("a", "eclaim"),
    Path.EREFUND_A_A: ("a", "erefund"),
    Path.REFUND_A_A: ("a", "refund"),
    Path.SLASH1_A_M: ("a", "slash_1"),
    Path.SLASH2_A_M: ("a", "slash_2"),
    Path.CLAIM_B_A: ("b", "claim"),
    Path.REFUND_B_B: ("b", "refund"),
    Path.SLASH1_B_M: ("b", "slash_1"),
    Path.SLASH2_B_M: ("b", "slash_2"),
}

#: the actor each path is assigned to in the reachability statement
PATH_ACTOR: dict[Path, str] = {
    Path.CLAIM_B_A: "A",
    Path.CLAIM_A_B: "B",
    Path.ECLAIM_A_B: "B",
    Path.EREFUND_A_A: "A",
    Path.REFUND_A_A: "A",
    Path.REFUND_B_B: "B",
    Path.SLASH1_A_M: "M",
    Path.SLASH1_B_M: "M",
    Path.SLASH2_A_M: "M",
    Path.SLASH2_B_M: "M",
}

PARTIES = ("A", "B", "M")


@dataclass(frozen=True)
class KnowledgeFlags:
    h_m: bool = False
    h_br: bool = False
    h_e: bool = False
    h_r1: bool = False
    h_r2: bool = False


def r_predicate(path: Path, party: str, flags: KnowledgeFlags) -> bool:
    """Timelock-relaxed redeemability of a path for a party.

    The early-refund path shares the refund row: both are gated only by
    the first refund secret once timelocks are ignored.
    """
    if party not in PARTIES:
        raise ValueError(f"unknown party {party!r}")
    if path is Path.CLAIM_B_A:
        return party == "A" and flags.h_m and flags.h_br
    if path is Path.CLAIM_A_B:
        return party == "B" and flags.h_m
    if path is Path.ECLAIM_A_B:
        return party == "B" and flags.h_m and flags.h_e
    if path in (Path.EREFUND_A_A, Path.REFUND_A_A):
        return party == "A" and flags.h_r1
    if path is Path.REFUND_B_B:
        return party == "B" and flags.h_r2
    if path in (Path.SLASH1_A_M, Path.SLASH1_B_M):
        return flags.h_m and flags.h_r1
    if path in (Path.SLASH2_A_M, Path.SLASH2_B_M):
        return flags.h_m and flags.h_br and flags.h_r2
    raise ValueError(path)


# ---------------------------------------------------------------------------
# reachability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReachState:
    """Published-preimage indicators plus the off-chain share flag."""

    pub_m: bool = False
    pub_r1: bool = False
    pub_r2: bool = False
    pub_br: bool = False
    pub_e: bool = False
    shared: bool = False


def _apply_updates(state: ReachState, party: str, path: Path) -> ReachState:
    if party == "B" and path is Path.CLAIM_A_B:
        state = replace(state, pub_m=True)
    if party == "B" and path is Path.ECLAIM_A_B and state.shared:
        state = replace(state, pub_m=True, pub_e=True)
    if party == "A" and path in (Path.EREFUND_A_A, Path.REFUND_A_A):
        state = replace(state, pub_r1=True)
    if party == "A" and path is Path.CLAIM_B_A:
        state = replace(state, pub_br=True)
    if party == "B" and path is Path.REFUND_B_B:
        state = replace(state, pub_r2=True)
    return state


def _flags(state: ReachState) -> KnowledgeFlags:
    return KnowledgeFlags(
        h_m=state.pub_m,
        h_br=state.pub_br,
        h_e=state.pub_e,
        h_r1=state.pub_r1,
        h_r2=state.pub_r2,
    )


def reachability(state: ReachState) -> set[tuple[str, Path]]:
    """Redeem transactions each actor could validly execute from this state.

    A request first records the preimages the actor would publish, then
    the predicate decides validity on the updated indicators.
    """
    valid: set[tuple[str, Path]] = set()
    for path, actor in PATH_ACTOR.items():
        updated = _apply_updates(state, actor, path)
        if r_predicate(path, actor, _flags(updated)):
            valid.add((actor, path))
    return valid


def execute(state: ReachState, actor: str, path: Path) -> ReachState:
    """Apply one valid redeem, returning the updated indicator state."""
    updated = _apply_updates(state, actor, path)
    if not r_predicate(path, actor, _flags(updated)):
        raise ValueError(f"{actor} cannot execute {path} from {state}")
    return updated


def reachable_states(shared: bool = False) -> set[ReachState]:
    """Closure of indicator states under valid redeems."""
    start = ReachState(shared=shared)
    seen = {start}
    frontier = [start]
    while frontier:
        state = frontier.pop()
        for actor, path in reachability(state):
            nxt = execute(state, actor, path)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


# ---------------------------------------------------------------------------
# equivalence against the condition algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Disagreement:
    flags: KnowledgeFlags
    party: str
    path: Path
    predicate: bool
    evaluator: bool

    def line(self) -> str:
        bits = "".join(
            "1" if getattr(self.flags, f) else "0"
            for f in ("h_m", "h_br", "h_e", "h_r1", "h_r2")
        )
        return (
            f"{bits}\t{self.party}\t{self.path.value}"
            f"\t{int(self.predicate)}\t{int(self.evaluator)}"
        )


@dataclass(frozen=True)
class EquivalenceReport:
    cases: int
    disagreements: tuple[Disagreement, ...]

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def text(self) -> str:
        lines = [f"cases checked: {self.cases}"]
        if self.ok:
            lines.append("disagreements: none")
        else:
            lines.append("flags(m,br,e,r1,r2)\tparty\tpath\tpredicate\tevaluator")
            lines.extend(d.line() for d in self.disagreements)
        return "\n".join(lines)


def oracle_equivalence(params, lock_conditions=None, seed: int = 0) -> EquivalenceReport:
    """Exhaustively compare the predicate with the evaluator on built locks.

    For every knowledge-flag vector, party, and path: a witness holding
    exactly the flagged preimages (signed by that party) must satisfy the
    corresponding lock-output disjunct, timelocks open, iff the predicate
    says so.  ``lock_conditions`` may inject mutated conditions for
    fault-injection tests.
    """
    from . import swaps  # local import; swaps builds on conditions only

    secrets = swaps.generate_secrets(params, seed)
    if lock_conditions is None:
        lock_conditions = {
            "a": swaps.lock_a_disjuncts(params, secrets.digests()),
            "b": swaps.lock_b_disjuncts(params, secrets.digests()),
        }
    preimage_of = {
        "h_m": secrets.s_m,
        "h_br": secrets.s_br,
        "h_e": secrets.s_e,
        "h_r1": secrets.s_r1,
        "h_r2": secrets.s_r2,
    }
    ctx = EvalContext(current_round=0, session_id=params.session_id)

    disagreements: list[Disagreement] = []
    cases = 0
    flag_names = ("h_m", "h_br", "h_e", "h_r1", "h_r2")
    for bits in itertools.product((False, True), repeat=5):
        flags = KnowledgeFlags(**dict(zip(flag_names, bits)))
        held = frozenset(
            preimage_of[name] for name, bit in zip(flag_names, bits) if bit
        )
        for party in PARTIES:
            witness = Witness(preimages=held, signers={party})
            for path in Path:
                chain, label = PATH_TO_DISJUNCT[path]
                disjunct = lock_conditions[chain][label]
                expected = r_predicate(path, party, flags)
                actual = evaluate(disjunct, witness, ctx, ignore_timelocks=True)
                cases += 1
                if expected != actual:
                    disagreements.append(
                        Disagreement(flags, party, path, expected, actual)
                    )
    return EquivalenceReport(cases, tuple(disagreements))
