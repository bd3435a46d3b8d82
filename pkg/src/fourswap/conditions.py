"""Spending-condition algebra for UTXO outputs.

Conditions are trees whose leaves are hashlocks, timelocks, signer
requirements, or anyone-can-spend, combined with ``AllOf``/``AnyOf``.
A condition is evaluated against a :class:`Witness` (preimages plus
signers) in a round context.  ``satisfying_paths`` enumerates the
minimal witness requirements of each disjunct, and ``emit_script`` /
``parse_script`` round-trip a deterministic textual script rendering.

All values are immutable; every function here is pure.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Union

# ---------------------------------------------------------------------------
# hashing
# ---------------------------------------------------------------------------


def session_hash(session_id: bytes, preimage: bytes) -> bytes:
    """Digest of a preimage, domain-separated by the session id."""
    return hashlib.sha256(session_id + preimage).digest()


# ---------------------------------------------------------------------------
# condition tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hashlock:
    digest: bytes


@dataclass(frozen=True)
class AbsTimelock:
    """Open when the current round is strictly greater than ``round``."""

    round: int


@dataclass(frozen=True)
class RelTimelock:
    """Open once ``rounds`` rounds have elapsed since the source confirmed."""

    rounds: int


@dataclass(frozen=True)
class SigBy:
    signers: frozenset[str]
    threshold: int

    def __init__(self, signers: Iterable[str], threshold: int | None = None):
        sset = frozenset(signers)
        if not sset:
            raise ValueError("SigBy needs at least one signer")
        t = len(sset) if threshold is None else threshold
        if not 1 <= t <= len(sset):
            raise ValueError(f"threshold {t} out of range for {len(sset)} signers")
        object.__setattr__(self, "signers", sset)
        object.__setattr__(self, "threshold", t)


@dataclass(frozen=True)
class AnyoneCanSpend:
    pass


@dataclass(frozen=True)
class AllOf:
    children: tuple["Condition", ...]


@dataclass(frozen=True)
class AnyOf:
    children: tuple["Condition", ...]


Leaf = Union[Hashlock, AbsTimelock, RelTimelock, SigBy, AnyoneCanSpend]
Condition = Union[Leaf, AllOf, AnyOf]


def all_of(*children: Condition) -> Condition:
    """Conjunction; flattens nested conjunctions and collapses singletons."""
    flat: list[Condition] = []
    for c in children:
        if isinstance(c, AllOf):
            flat.extend(c.children)
        else:
            flat.append(c)
    if not flat:
        raise ValueError("empty conjunction")
    if len(flat) == 1:
        return flat[0]
    return AllOf(tuple(flat))


def any_of(*children: Condition) -> Condition:
    """Disjunction; flattens nested disjunctions and collapses singletons."""
    flat: list[Condition] = []
    for c in children:
        if isinstance(c, AnyOf):
            flat.extend(c.children)
        else:
            flat.append(c)
    if not flat:
        raise ValueError("empty disjunction")
    if len(flat) == 1:
        return flat[0]
    return AnyOf(tuple(flat))


# ---------------------------------------------------------------------------
# witnesses and evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """Satisfier attached to a transaction input.

    ``chosen_path`` is advisory only: evaluation accepts any satisfied
    disjunct, the selector merely documents intent.
    """

    preimages: frozenset[bytes] = frozenset()
    signers: frozenset[str] = frozenset()
    chosen_path: int | None = None

    def __init__(
        self,
        preimages: Iterable[bytes] = (),
        signers: Iterable[str] = (),
        chosen_path: int | None = None,
    ):
        object.__setattr__(self, "preimages", frozenset(preimages))
        object.__setattr__(self, "signers", frozenset(signers))
        object.__setattr__(self, "chosen_path", chosen_path)


@dataclass(frozen=True)
class EvalContext:
    current_round: int
    source_confirm_round: int = 0
    spending_party: str | None = None
    session_id: bytes = b""


def effective_condition(condition: Condition, witness: Witness) -> Condition:
    """The disjunct a witness commits to, when it selects one.

    A pre-signed template pins its spending branch (and with it the
    timelocks that gate the whole transaction); without a selector the
    full disjunction applies.
    """
    if isinstance(condition, AnyOf) and witness.chosen_path is not None:
        if not 0 <= witness.chosen_path < len(condition.children):
            raise ValueError(f"chosen_path {witness.chosen_path} out of range")
        return condition.children[witness.chosen_path]
    return condition


def _timelock_open(leaf: Condition, ctx: EvalContext) -> bool:
    if isinstance(leaf, AbsTimelock):
        return ctx.current_round > leaf.round
    if isinstance(leaf, RelTimelock):
        return ctx.current_round - ctx.source_confirm_round >= leaf.rounds
    raise TypeError(leaf)


def evaluate(
    condition: Condition,
    witness: Witness,
    ctx: EvalContext,
    ignore_timelocks: bool = False,
) -> bool:
    """True iff some disjunct of the condition is fully satisfied.

    Total function: malformed witnesses simply fail to satisfy.  With
    ``ignore_timelocks`` every timelock leaf counts as open (used for the
    relaxed redeem analysis and for distinguishing timelock failures from
    witness failures).
    """
    if isinstance(condition, Hashlock):
        return any(
            session_hash(ctx.session_id, p) == condition.digest
            for p in witness.preimages
        )
    if isinstance(condition, (AbsTimelock, RelTimelock)):
        return True if ignore_timelocks else _timelock_open(condition, ctx)
    if isinstance(condition, SigBy):
        return len(witness.signers & condition.signers) >= condition.threshold
    if isinstance(condition, AnyoneCanSpend):
        return True
    if isinstance(condition, AllOf):
        return all(evaluate(c, witness, ctx, ignore_timelocks) for c in condition.children)
    if isinstance(condition, AnyOf):
        return any(evaluate(c, witness, ctx, ignore_timelocks) for c in condition.children)
    raise TypeError(condition)


# ---------------------------------------------------------------------------
# redeem paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RedeemPath:
    """Minimal witness requirements of one disjunct."""

    required_preimages: frozenset[bytes]  # digests that must be matched
    required_signers: tuple[SigBy, ...]
    timelocks: tuple[Condition, ...]
    anyone_can_spend: bool = False

    def covered_by(
        self, witness: Witness, ctx: EvalContext, ignore_timelocks: bool = False
    ) -> bool:
        for digest in self.required_preimages:
            if not any(
                session_hash(ctx.session_id, p) == digest for p in witness.preimages
            ):
                return False
        for sig in self.required_signers:
            if len(witness.signers & sig.signers) < sig.threshold:
                return False
        if not ignore_timelocks:
            for tl in self.timelocks:
                if not _timelock_open(tl, ctx):
                    return False
        return True

    def signature_only(self) -> bool:
        """No preimages required and at least one signer group present."""
        return not self.required_preimages and bool(self.required_signers)


def satisfying_paths(condition: Condition) -> list[RedeemPath]:
    """All redeem paths, one per disjunct, in left-to-right tree order.

    Exact duplicate paths are dropped; a path that merely adds a timelock
    to another is kept (it is a distinct arrow in the charts).
    """
    raw = _paths(condition)
    seen: set[tuple] = set()
    out: list[RedeemPath] = []
    for p in raw:
        key = (
            p.required_preimages,
            tuple(sorted((tuple(sorted(s.signers)), s.threshold) for s in p.required_signers)),
            tuple(sorted(map(repr, p.timelocks))),
            p.anyone_can_spend,
        )
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def _paths(condition: Condition) -> list[RedeemPath]:
    if isinstance(condition, Hashlock):
        return [RedeemPath(frozenset({condition.digest}), (), ())]
    if isinstance(condition, (AbsTimelock, RelTimelock)):
        return [RedeemPath(frozenset(), (), (condition,))]
    if isinstance(condition, SigBy):
        return [RedeemPath(frozenset(), (condition,), ())]
    if isinstance(condition, AnyoneCanSpend):
        return [RedeemPath(frozenset(), (), (), anyone_can_spend=True)]
    if isinstance(condition, AnyOf):
        out: list[RedeemPath] = []
        for c in condition.children:
            out.extend(_paths(c))
        return out
    if isinstance(condition, AllOf):
        acc = [RedeemPath(frozenset(), (), ())]
        for c in condition.children:
            acc = [_merge(a, b) for a in acc for b in _paths(c)]
        return acc
    raise TypeError(condition)


def _merge(a: RedeemPath, b: RedeemPath) -> RedeemPath:
    return RedeemPath(
        a.required_preimages | b.required_preimages,
        a.required_signers + b.required_signers,
        a.timelocks + b.timelocks,
        a.anyone_can_spend or b.anyone_can_spend,
    )


# ---------------------------------------------------------------------------
# script text
# ---------------------------------------------------------------------------

_INDENT = "  "


def emit_script(condition: Condition) -> str:
    """Deterministic human-readable stack-script rendering.

    Disjunctions become IF/ELIF/ENDIF blocks, one branch per disjunct;
    leaves render as Bitcoin-flavoured opcode lines.  ``parse_script``
    inverts this exactly on trees built with :func:`all_of`/:func:`any_of`.
    """
    return "\n".join(_emit(condition, 0))


def _emit(condition: Condition, depth: int) -> list[str]:
    pad = _INDENT * depth
    if isinstance(condition, Hashlock):
        return [f"{pad}HASH {condition.digest.hex()} EQUALVERIFY"]
    if isinstance(condition, AbsTimelock):
        return [f"{pad}{condition.round} CHECKLOCKTIMEVERIFY DROP"]
    if isinstance(condition, RelTimelock):
        return [f"{pad}{condition.rounds} CHECKSEQUENCEVERIFY DROP"]
    if isinstance(condition, SigBy):
        names = sorted(condition.signers)
        if len(names) == 1 and condition.threshold == 1:
            return [f"{pad}{names[0]} CHECKSIGVERIFY"]
        joined = " ".join(names)
        return [f"{pad}{condition.threshold} {joined} {len(names)} CHECKMULTISIGVERIFY"]
    if isinstance(condition, AnyoneCanSpend):
        return [f"{pad}TRUE"]
    if isinstance(condition, AllOf):
        lines: list[str] = []
        for c in condition.children:
            lines.extend(_emit(c, depth))
        return lines
    if isinstance(condition, AnyOf):
        lines = [f"{pad}IF"]
        for i, c in enumerate(condition.children):
            if i:
                lines.append(f"{pad}ELIF")
            lines.extend(_emit(c, depth + 1))
        lines.append(f"{pad}ENDIF")
        return lines
    raise TypeError(condition)


def parse_script(text: str) -> Condition:
    """Inverse of :func:`emit_script`."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    conds, rest = _parse_sequence(lines)
    if rest:
        raise ValueError(f"trailing script text: {rest!r}")
    return all_of(*conds)


def _parse_sequence(lines: list[str]) -> tuple[list[Condition], list[str]]:
    """Parse leaf/IF lines until an ELIF/ENDIF at this level."""
    out: list[Condition] = []
    while lines:
        head = lines[0]
        if head in ("ELIF", "ENDIF"):
            return out, lines
        if head == "IF":
            branches: list[Condition] = []
            lines = lines[1:]
            while True:
                seq, lines = _parse_sequence(lines)
                branches.append(all_of(*seq))
                tok, lines = lines[0], lines[1:]
                if tok == "ENDIF":
                    break
                if tok != "ELIF":
                    raise ValueError(f"expected ELIF/ENDIF, got {tok!r}")
            out.append(any_of(*branches))
        else:
            out.append(_parse_leaf(head))
            lines = lines[1:]
    return out, lines


def _parse_leaf(line: str) -> Condition:
    toks = line.split()
    if toks == ["TRUE"]:
        return AnyoneCanSpend()
    if toks[0] == "HASH" and toks[-1] == "EQUALVERIFY" and len(toks) == 3:
        return Hashlock(bytes.fromhex(toks[1]))
    if toks[-2:] == ["CHECKLOCKTIMEVERIFY", "DROP"] and len(toks) == 3:
        return AbsTimelock(int(toks[0]))
    if toks[-2:] == ["CHECKSEQUENCEVERIFY", "DROP"] and len(toks) == 3:
        return RelTimelock(int(toks[0]))
    if toks[-1] == "CHECKSIGVERIFY" and len(toks) == 2:
        return SigBy([toks[0]], 1)
    if toks[-1] == "CHECKMULTISIGVERIFY" and len(toks) >= 4:
        threshold = int(toks[0])
        count = int(toks[-2])
        names = toks[1:-2]
        if len(names) != count:
            raise ValueError(f"multisig count mismatch in {line!r}")
        return SigBy(names, threshold)
    raise ValueError(f"unparseable script line: {line!r}")
