"""Deterministic simulation of two UTXO chains with mempools and rounds.

The world is an immutable snapshot: every operation returns a new
:class:`WorldState`.  Each chain keeps its confirmed history, a mempool
of published-but-unconfirmed transactions (conflicting spends of the
same outpoint may coexist there), and the unspent output set.  A global
round counter drives timelocks; preimages revealed inside any published
witness become known to every party one round later, while miners read
mempool witnesses live when they confirm.

Fees are implicit: ``fee = input total - output total`` and are credited
to the confirming miner.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .conditions import (
    Condition,
    EvalContext,
    SigBy,
    Witness,
    effective_condition,
    evaluate,
    satisfying_paths,
)

CHAIN_A = "a"
CHAIN_B = "b"
CHAINS = (CHAIN_A, CHAIN_B)


class LedgerError(Exception):
    """Base class for rejections raised by ledger operations."""


class MalformedTransaction(LedgerError):
    pass


class TimelockNotExpired(LedgerError):
    pass


class Conflict(LedgerError):
    pass


class ConditionUnsatisfied(LedgerError):
    pass


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Outpoint:
    tx_id: str
    index: int


@dataclass(frozen=True)
class Output:
    value: int
    condition: Condition
    beneficiary_note: str | None = None


@dataclass(frozen=True)
class TxInput:
    outpoint: Outpoint
    witness: Witness


@dataclass(frozen=True)
class Transaction:
    id: str
    chain: str
    inputs: tuple[TxInput, ...]
    outputs: tuple[Output, ...]
    publisher: str
    publish_round: int | None = None

    def skeleton(self) -> tuple:
        """Static identity: everything except witnesses and publish round."""
        return (
            self.id,
            self.chain,
            tuple(i.outpoint for i in self.inputs),
            self.outputs,
        )


@dataclass(frozen=True)
class Event:
    round: int
    chain: str
    kind: str
    tx_id: str
    actor: str
    fee: int

    def line(self) -> str:
        return f"{self.round}\t{self.chain}\t{self.kind}\t{self.tx_id}\t{self.actor}\t{self.fee}"


@dataclass(frozen=True)
class MinerIncome:
    fees: int = 0
    slash_gains: int = 0


@dataclass(frozen=True)
class ChainState:
    name: str
    confirmed: tuple[tuple[int, Transaction], ...] = ()
    mempool: tuple[Transaction, ...] = ()
    utxo: dict[Outpoint, Output] = field(default_factory=dict)
    all_outputs: dict[Outpoint, Output] = field(default_factory=dict)
    confirm_round: dict[str, int] = field(default_factory=dict)
    fees_collected: int = 0
    supply: int = 0

    def mempool_ids(self) -> set[str]:
        return {t.id for t in self.mempool}

    def confirmed_ids(self) -> set[str]:
        return {t.id for _, t in self.confirmed}


@dataclass(frozen=True)
class WorldState:
    chain_a: ChainState
    chain_b: ChainState
    round: int = 0
    secret_knowledge: dict[str, frozenset[bytes]] = field(default_factory=dict)
    miner_income: dict[str, MinerIncome] = field(default_factory=dict)
    revealed: dict[bytes, int] = field(default_factory=dict)
    session_id: bytes = b""
    events: tuple[Event, ...] = ()

    def chain(self, name: str) -> ChainState:
        if name == CHAIN_A:
            return self.chain_a
        if name == CHAIN_B:
            return self.chain_b
        raise MalformedTransaction(f"unknown chain {name!r}")

    def with_chain(self, chain: ChainState) -> "WorldState":
        if chain.name == CHAIN_A:
            return replace(self, chain_a=chain)
        return replace(self, chain_b=chain)

    def known(self, party: str) -> frozenset[bytes]:
        return self.secret_knowledge.get(party, frozenset())

    def visible_preimages(self) -> frozenset[bytes]:
        """Everything ever revealed in a witness, mempool included (live view)."""
        return frozenset(self.revealed)

    def find_mempool(self, tx_id: str) -> tuple[str, Transaction] | None:
        for chain in (self.chain_a, self.chain_b):
            for tx in chain.mempool:
                if tx.id == tx_id:
                    return chain.name, tx
        return None


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def genesis(
    initial_balances: Mapping[str, Mapping[str, int]],
    session_id: bytes = b"session",
) -> WorldState:
    """World at round 0: one signature-spendable UTXO per (party, chain) balance."""
    per_chain: dict[str, list[tuple[str, int]]] = {CHAIN_A: [], CHAIN_B: []}
    for party in sorted(initial_balances):
        for chain_name in sorted(initial_balances[party]):
            amount = initial_balances[party][chain_name]
            if amount < 0:
                raise LedgerError(f"negative balance for {party}: {amount}")
            if chain_name not in per_chain:
                raise MalformedTransaction(f"unknown chain {chain_name!r}")
            if amount > 0:
                per_chain[chain_name].append((party, amount))

    world = WorldState(
        chain_a=ChainState(name=CHAIN_A),
        chain_b=ChainState(name=CHAIN_B),
        session_id=session_id,
        secret_knowledge={p: frozenset() for p in sorted(initial_balances)},
    )
    for chain_name in CHAINS:
        entries = per_chain[chain_name]
        if not entries:
            continue
        tx = Transaction(
            id=f"genesis_{chain_name}",
            chain=chain_name,
            inputs=(),
            outputs=tuple(
                Output(value, SigBy([party]), beneficiary_note=party)
                for party, value in entries
            ),
            publisher="genesis",
            publish_round=0,
        )
        outs = {Outpoint(tx.id, i): o for i, o in enumerate(tx.outputs)}
        chain = replace(
            world.chain(chain_name),
            confirmed=((0, tx),),
            utxo=outs,
            all_outputs=dict(outs),
            confirm_round={tx.id: 0},
            supply=sum(value for _, value in entries),
        )
        world = world.with_chain(chain)
        world = _log(world, 0, chain_name, "genesis", tx.id, "genesis", 0)
    return world


def declared_fee(world: WorldState, tx: Transaction) -> int:
    chain = world.chain(tx.chain)
    in_total = 0
    for txin in tx.inputs:
        out = chain.all_outputs.get(txin.outpoint)
        if out is None:
            raise MalformedTransaction(f"{tx.id}: unknown input {txin.outpoint}")
        in_total += out.value
    return in_total - sum(o.value for o in tx.outputs)


def publish(world: WorldState, tx: Transaction) -> WorldState:
    """Add a well-formed transaction to its chain's mempool.

    Conflicting and inactive (timelocked) transactions are accepted;
    re-publication of an already-known id is a no-op.
    """
    chain = world.chain(tx.chain)
    if tx.id in chain.mempool_ids() or tx.id in chain.confirmed_ids():
        return world
    other = world.chain(CHAIN_B if tx.chain == CHAIN_A else CHAIN_A)
    if tx.id in other.mempool_ids() or tx.id in other.confirmed_ids():
        raise MalformedTransaction(f"{tx.id}: id already used on chain {other.name}")
    if not tx.inputs:
        raise MalformedTransaction(f"{tx.id}: no inputs")
    seen: set[Outpoint] = set()
    for txin in tx.inputs:
        if txin.outpoint in seen:
            raise MalformedTransaction(f"{tx.id}: duplicate input {txin.outpoint}")
        seen.add(txin.outpoint)
    if any(o.value < 0 for o in tx.outputs):
        raise MalformedTransaction(f"{tx.id}: negative output value")
    fee = declared_fee(world, tx)  # raises on cross-chain/unknown inputs
    if fee < 0:
        raise MalformedTransaction(f"{tx.id}: outputs exceed inputs")

    tx = replace(tx, publish_round=world.round)
    revealed = world.revealed
    new_preimages = {
        p
        for txin in tx.inputs
        for p in txin.witness.preimages
        if p not in revealed
    }
    if new_preimages:
        revealed = dict(revealed)
        for p in sorted(new_preimages):
            revealed[p] = world.round
    world = replace(world, revealed=revealed).with_chain(
        replace(chain, mempool=chain.mempool + (tx,))
    )
    return _log(world, world.round, tx.chain, "publish", tx.id, tx.publisher, fee)


def confirm(world: WorldState, miner: str, tx_id: str, kind: str = "confirm") -> WorldState:
    """Confirm one mempool transaction, spending its inputs.

    Raises :class:`Conflict` if an input is already spent,
    :class:`ConditionUnsatisfied` if a witness cannot satisfy its output
    condition even with timelocks open, and :class:`TimelockNotExpired`
    if only the timelocks are in the way.  Mempool transactions that
    conflict with the confirmed one become permanently invalid and are
    dropped.
    """
    found = world.find_mempool(tx_id)
    if found is None:
        raise LedgerError(f"{tx_id}: not in any mempool")
    chain_name, tx = found
    chain = world.chain(chain_name)

    for txin in tx.inputs:
        if txin.outpoint not in chain.utxo:
            raise Conflict(f"{tx_id}: input {txin.outpoint} already spent")
    for txin in tx.inputs:
        out = chain.utxo[txin.outpoint]
        cond = effective_condition(out.condition, txin.witness)
        ctx = EvalContext(
            current_round=world.round,
            source_confirm_round=chain.confirm_round.get(txin.outpoint.tx_id, 0),
            spending_party=tx.publisher,
            session_id=world.session_id,
        )
        if not evaluate(cond, txin.witness, ctx, ignore_timelocks=True):
            raise ConditionUnsatisfied(f"{tx_id}: witness fails on {txin.outpoint}")
        if not evaluate(cond, txin.witness, ctx):
            raise TimelockNotExpired(f"{tx_id}: timelock closed on {txin.outpoint}")

    fee = declared_fee(world, tx)
    spent = {txin.outpoint for txin in tx.inputs}
    utxo = {op: o for op, o in chain.utxo.items() if op not in spent}
    new_outs = {Outpoint(tx.id, i): o for i, o in enumerate(tx.outputs)}
    utxo.update(new_outs)
    all_outputs = dict(chain.all_outputs)
    all_outputs.update(new_outs)
    mempool = tuple(
        t
        for t in chain.mempool
        if t.id != tx.id and not spent.intersection(i.outpoint for i in t.inputs)
    )
    chain = replace(
        chain,
        confirmed=chain.confirmed + ((world.round, tx),),
        mempool=mempool,
        utxo=utxo,
        all_outputs=all_outputs,
        confirm_round={**chain.confirm_round, tx.id: world.round},
        fees_collected=chain.fees_collected + fee,
    )
    income = world.miner_income.get(miner, MinerIncome())
    gain = sum(o.value for o in tx.outputs) if kind == "slash" else 0
    income = MinerIncome(income.fees + fee, income.slash_gains + gain)
    world = replace(
        world.with_chain(chain),
        miner_income={**world.miner_income, miner: income},
    )
    return _log(world, world.round, chain_name, kind, tx.id, miner, fee)


def step_round(world: WorldState) -> WorldState:
    """Advance the clock; propagate witness-revealed preimages to all parties."""
    due = frozenset(p for p, r in world.revealed.items() if r <= world.round)
    knowledge = {p: k | due for p, k in world.secret_knowledge.items()}
    return replace(world, round=world.round + 1, secret_knowledge=knowledge)


def is_active(world: WorldState, tx: Transaction) -> bool:
    """True iff the tx could be confirmed right now but for conflicts.

    Every input's witness must satisfy its output condition with all
    timelocks on the selected path open at the current round.
    """
    chain = world.chain(tx.chain)
    for txin in tx.inputs:
        out = chain.all_outputs.get(txin.outpoint)
        if out is None:
            return False
        ctx = EvalContext(
            current_round=world.round,
            source_confirm_round=chain.confirm_round.get(txin.outpoint.tx_id, 0),
            spending_party=tx.publisher,
            session_id=world.session_id,
        )
        if not evaluate(effective_condition(out.condition, txin.witness), txin.witness, ctx):
            return False
    return True


def conflicts(world: WorldState, tx: Transaction | str) -> set[str]:
    """Mempool transaction ids sharing at least one input outpoint with tx."""
    if isinstance(tx, str):
        found = world.find_mempool(tx)
        if found is None:
            raise LedgerError(f"{tx}: not in any mempool")
        _, tx = found
    chain = world.chain(tx.chain)
    mine = {i.outpoint for i in tx.inputs}
    return {
        t.id
        for t in chain.mempool
        if t.id != tx.id and mine.intersection(i.outpoint for i in t.inputs)
    }


def balance(world: WorldState, party: str, chain_name: str) -> int:
    """Confirmed UTXO value spendable by the party's signature alone."""
    chain = world.chain(chain_name)
    total = 0
    for out in chain.utxo.values():
        for path in satisfying_paths(out.condition):
            if not path.signature_only():
                continue
            if all(
                sig.threshold <= len({party} & sig.signers)
                for sig in path.required_signers
            ):
                total += out.value
                break
    return total


# ---------------------------------------------------------------------------
# off-chain plumbing
# ---------------------------------------------------------------------------


def grant_secret(world: WorldState, party: str, preimage: bytes) -> WorldState:
    """Deliver a preimage to one party off-chain (no public reveal)."""
    knowledge = dict(world.secret_knowledge)
    knowledge[party] = knowledge.get(party, frozenset()) | {preimage}
    return replace(world, secret_knowledge=knowledge)


def note_message(world: WorldState, actor: str, note: str) -> WorldState:
    return _log(world, world.round, "-", "message", note, actor, 0)


def _log(
    world: WorldState, rnd: int, chain: str, kind: str, tx_id: str, actor: str, fee: int
) -> WorldState:
    ev = Event(rnd, chain, kind, tx_id, actor, fee)
    return replace(world, events=world.events + (ev,))


def format_trace(events: Iterable[Event]) -> str:
    """Newline-delimited trace log with stable field order."""
    return "\n".join(ev.line() for ev in events)


# ---------------------------------------------------------------------------
# invariant helpers (used by tests and cmd_check)
# ---------------------------------------------------------------------------


def conservation_ok(world: WorldState) -> bool:
    """Per chain: unspent value plus collected fees equals the initial supply."""
    for chain in (world.chain_a, world.chain_b):
        if sum(o.value for o in chain.utxo.values()) + chain.fees_collected != chain.supply:
            return False
    return True


def no_double_spend(world: WorldState) -> bool:
    for chain in (world.chain_a, world.chain_b):
        seen: set[Outpoint] = set()
        for _, tx in chain.confirmed:
            for txin in tx.inputs:
                if txin.outpoint in seen:
                    return False
                seen.add(txin.outpoint)
    return True
