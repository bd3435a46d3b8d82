"""Behavior policies for parties and miners, plus the round-based runner.

A round runs A's action, then B's, then each chain's miner confirms at
most one transaction.  Strategies are single-use objects: `simulate`
drives them against a fresh world, records every action taken, and
returns a replayable :class:`Trace` with per-actor utilities.

The strategy catalogue covers the honest policies, abandonment at every
protocol step (the abandoner degrades to passive refund collection, the
way a rational griefer still picks up its own timelocked refunds),
in-band bribery via high-fee conflicting refunds, a bribed censoring
miner, and the greedy slashing miner that seizes any anyone-can-spend
output whose preimages have shown up in a mempool.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import ledger, swaps
from .conditions import SigBy, Witness, satisfying_paths, session_hash
from .ledger import (
    CHAIN_A,
    CHAIN_B,
    CHAINS,
    Outpoint,
    Output,
    Transaction,
    TxInput,
    WorldState,
)
from .swaps import (
    PARTY_A,
    PARTY_B,
    Action,
    PublishTx,
    Setup,
    ShareSecret,
    SwapDriver,
    SwapParams,
    Wait,
)


class HorizonError(Exception):
    pass


# ---------------------------------------------------------------------------
# miner decisions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Confirm:
    tx_id: str


@dataclass(frozen=True)
class Slash:
    outpoint: Outpoint
    preimages: frozenset[bytes]


@dataclass(frozen=True)
class Skip:
    pass


MinerDecision = Confirm | Slash | Skip


def confirmable(world: WorldState, tx: Transaction) -> bool:
    """Active, witness-valid, and spending only unspent outputs."""
    chain = world.chain(tx.chain)
    if any(i.outpoint not in chain.utxo for i in tx.inputs):
        return False
    return ledger.is_active(world, tx)


def slash_candidates(
    world: WorldState, chain_name: str, preimages: frozenset[bytes]
) -> list[tuple[Outpoint, Output, frozenset[bytes]]]:
    """Unspent outputs seizable through a signature-free path.

    ``preimages`` is the attacker's view: the live mempool reveal set for
    miners, or a party's (lagged) knowledge.
    """
    digests = {session_hash(world.session_id, p): p for p in preimages}
    chain = world.chain(chain_name)
    found = []
    for op in sorted(chain.utxo, key=lambda o: (o.tx_id, o.index)):
        out = chain.utxo[op]
        for path in satisfying_paths(out.condition):
            if not path.anyone_can_spend or path.required_signers:
                continue
            if path.timelocks:
                continue
            if all(d in digests for d in path.required_preimages):
                needed = frozenset(digests[d] for d in path.required_preimages)
                found.append((op, out, needed))
                break
    return found


def build_slash_tx(
    world: WorldState,
    outpoint: Outpoint,
    preimages: frozenset[bytes],
    redeemer: str,
    chain_name: str,
) -> Transaction:
    value = world.chain(chain_name).utxo[outpoint].value
    return Transaction(
        id=f"slash_{chain_name}_{outpoint.tx_id}_{outpoint.index}_r{world.round}",
        chain=chain_name,
        inputs=(TxInput(outpoint, Witness(preimages=preimages)),),
        outputs=(Output(value, SigBy([redeemer]), "slashed"),),
        publisher=redeemer,
    )


class MinerPolicy:
    name = "miner"

    def decide(self, chain_name: str, world: WorldState, miner: str) -> MinerDecision:
        raise NotImplementedError


class GreedySlash(MinerPolicy):
    """Slash whenever possible, else confirm the highest-fee active tx.

    Slash ties break toward the largest seizable value; confirmation ties
    break toward the lowest transaction id.
    """

    name = "greedy"

    def decide(self, chain_name: str, world: WorldState, miner: str) -> MinerDecision:
        cands = slash_candidates(world, chain_name, world.visible_preimages())
        if cands:
            op, out, needed = max(cands, key=lambda c: (c[1].value, c[0].tx_id))
            return Slash(op, needed)
        best: Transaction | None = None
        best_key: tuple | None = None
        for tx in world.chain(chain_name).mempool:
            if not confirmable(world, tx):
                continue
            key = (-ledger.declared_fee(world, tx), tx.id)
            if best_key is None or key < best_key:
                best, best_key = tx, key
        if best is not None:
            return Confirm(best.id)
        return Skip()


class CensorVictim(MinerPolicy):
    """Bribed miner: never confirms the victim's transactions, never slashes."""

    name = "censor"

    def __init__(self, victim: str):
        self.victim = victim

    def decide(self, chain_name: str, world: WorldState, miner: str) -> MinerDecision:
        best: Transaction | None = None
        best_key: tuple | None = None
        for tx in world.chain(chain_name).mempool:
            if tx.publisher == self.victim or not confirmable(world, tx):
                continue
            key = (-ledger.declared_fee(world, tx), tx.id)
            if best_key is None or key < best_key:
                best, best_key = tx, key
        if best is not None:
            return Confirm(best.id)
        return Skip()


# ---------------------------------------------------------------------------
# party strategies
# ---------------------------------------------------------------------------


class Strategy:
    """Single-use decision policy for one party in one simulation."""

    name = "strategy"
    aborts_setup = False

    def act(self, party: str, world: WorldState, setup: Setup) -> Action:
        raise NotImplementedError


class Honest(Strategy):
    name = "honest"

    def __init__(self, driver: SwapDriver):
        self.driver = driver

    def act(self, party, world, setup):
        return self.driver.honest_action(party, world, setup)


class AbandonAfter(Strategy):
    """Honest for the first ``k`` forward steps, then defects.

    A defector goes silent except for collecting its own standard
    timelocked refunds; it never claims, never shares secrets, and never
    publishes a lock again.  ``k=0`` with ``at_setup`` abandons during
    setup, so nothing is ever signed and no one can publish anything.
    """

    def __init__(self, driver: SwapDriver, k: int, at_setup: bool = False):
        self.driver = driver
        self.k = k
        self.at_setup = at_setup and k == 0
        self.aborts_setup = self.at_setup
        self.performed = 0
        self.name = f"abandon_after:{'setup' if self.at_setup else k}"

    def act(self, party, world, setup):
        if self.performed < self.k:
            action = self.driver.honest_action(party, world, setup)
            if isinstance(action, (PublishTx, ShareSecret)):
                self.performed += 1
            return action
        return self.driver.refund_action(party, world, setup)


class BribeRefund(Strategy):
    """Honest until the bribery window opens, then publishes the
    conflicting refund with its fee raised by ``delta``.

    After the bribe the party stops cooperating (no secret sharing) but
    still presses any claim it can make.
    """

    def __init__(self, driver: SwapDriver, delta: int):
        self.driver = driver
        self.delta = delta
        self.bribed = False
        self.name = f"bribe_refund:{delta}"

    def act(self, party, world, setup):
        if not self.bribed:
            tx = self.driver.bribe_refund_tx(party, world, setup, self.delta)
            if tx is not None:
                self.bribed = True
                return PublishTx(tx, "bribe")
        action = self.driver.honest_action(party, world, setup)
        if self.bribed and isinstance(action, ShareSecret):
            return Wait()
        return action


class PublishCounterpartyLockEarly(Strategy):
    """A broadcasts the counterparty's lock before her own is on chain."""

    name = "publish_counterparty_lock_early"

    def __init__(self, driver: SwapDriver):
        self.driver = driver
        self.deviated = False

    def act(self, party, world, setup):
        if party == PARTY_A and not self.deviated:
            self.deviated = True
            return PublishTx(setup.templates["b_lock"], "deviation: lock first")
        return self.driver.honest_action(party, world, setup)


def strategy_library() -> dict[str, Callable[..., Strategy | MinerPolicy]]:
    """Named constructors; parametrized names use ``name:arg`` in configs."""
    return {
        "honest": lambda driver: Honest(driver),
        "abandon_after": lambda driver, k, at_setup=False: AbandonAfter(driver, k, at_setup),
        "bribe_refund": lambda driver, delta: BribeRefund(driver, delta),
        "publish_counterparty_lock_early": lambda driver: PublishCounterpartyLockEarly(driver),
        "greedy": lambda: GreedySlash(),
        "censor_victim": lambda victim: CensorVictim(victim),
    }


# ---------------------------------------------------------------------------
# traces and utilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    variant: str
    actions: tuple[tuple[int, str, Action], ...]
    initial: WorldState
    final: WorldState
    utilities: dict[str, int]
    lockup: dict[str, int]
    completion_round: int
    confirmations: int

    def utility_table(self) -> str:
        lines = ["actor\tutility"]
        for actor in sorted(self.utilities):
            lines.append(f"{actor}\t{self.utilities[actor]}")
        for party in sorted(self.lockup):
            lines.append(f"lockup\t{party}\t{self.lockup[party]}")
        lines.append(f"confirmations\t{self.confirmations}")
        lines.append(f"completion_round\t{self.completion_round}")
        return "\n".join(lines)


def utility_of(trace: Trace, actor: str) -> int:
    """Net token delta over both chains; miner = fees plus slash gains."""
    if actor in trace.final.miner_income or actor.startswith("m_"):
        income = trace.final.miner_income.get(actor, ledger.MinerIncome())
        return income.fees + income.slash_gains
    return sum(
        ledger.balance(trace.final, actor, c) - ledger.balance(trace.initial, actor, c)
        for c in CHAINS
    )


def zero_sum_ok(trace: Trace) -> bool:
    """Per chain, party deltas plus miner income sum to zero (settled runs)."""
    for chain_name in CHAINS:
        total = 0
        for party in (PARTY_A, PARTY_B):
            total += ledger.balance(trace.final, party, chain_name) - ledger.balance(
                trace.initial, party, chain_name
            )
        for miner, income in trace.final.miner_income.items():
            if miner.startswith(f"m_{chain_name}"):
                total += income.fees + income.slash_gains
        if total != 0:
            return False
    return True


def _settled(world: WorldState) -> bool:
    """Only plain wallet outputs remain unspent."""
    for chain in (world.chain_a, world.chain_b):
        for out in chain.utxo.values():
            if not isinstance(out.condition, SigBy):
                return False
    return True


def _lockup(initial: WorldState, final: WorldState) -> dict[str, int]:
    """Capital lock-up in value-rounds, attributed to the funding party."""
    totals = {PARTY_A: 0, PARTY_B: 0}
    for chain in (final.chain_a, final.chain_b):
        owners: dict[Outpoint, str] = {}
        for _, tx in chain.confirmed:
            for i, out in enumerate(tx.outputs):
                if isinstance(out.condition, SigBy) and len(out.condition.signers) == 1:
                    owners[Outpoint(tx.id, i)] = next(iter(out.condition.signers))
        spent_at: dict[Outpoint, int] = {}
        for rnd, tx in chain.confirmed:
            for txin in tx.inputs:
                spent_at[txin.outpoint] = rnd
        for rnd, tx in chain.confirmed:
            for i, out in enumerate(tx.outputs):
                if isinstance(out.condition, SigBy):
                    continue
                op = Outpoint(tx.id, i)
                end = spent_at.get(op, final.round)
                share: dict[str, int] = {}
                for txin in tx.inputs:
                    owner = owners.get(txin.outpoint)
                    if owner in totals:
                        src = chain.all_outputs[txin.outpoint]
                        share[owner] = share.get(owner, 0) + src.value
                for owner, value in share.items():
                    totals[owner] += value * max(0, end - rnd)
    return totals


# ---------------------------------------------------------------------------
# the runner
# ---------------------------------------------------------------------------


def simulate(
    variant: str,
    params: SwapParams,
    strategy_profile: dict[str, Strategy],
    miner_policies: dict[str, MinerPolicy],
    horizon: int,
    seed: int = 0,
    miners_per_chain: int = 1,
    batch_confirm: bool = False,
    start_world: WorldState | None = None,
) -> Trace:
    """Deterministic run: per round A acts, B acts, then each miner.

    Ends at the horizon or at quiescence (empty mempools and only plain
    wallet outputs left).  Raises :class:`HorizonError` if the horizon
    cannot cover the longest refund timelock.  ``start_world`` resumes a
    mid-protocol snapshot; utilities remain deltas against genesis.
    """
    if horizon <= params.t_4 + 2:
        raise HorizonError(f"horizon {horizon} too small for t_4={params.t_4}")
    driver = swaps.build_baseline(variant, params)
    initial = driver.make_world()
    world = start_world if start_world is not None else initial
    confirmations = 0
    completion = 0
    actions: list[tuple[int, str, Action]] = []

    aborted = any(s.aborts_setup for s in strategy_profile.values())
    setup = None if aborted else driver.setup(initial, seed)

    while world.round <= horizon:
        for party in (PARTY_A, PARTY_B):
            if setup is None:
                continue
            action = strategy_profile[party].act(party, world, setup)
            actions.append((world.round, party, action))
            world = apply_action(world, party, action)
        for chain_name in CHAINS:
            miner = f"m_{chain_name}" if miners_per_chain == 1 else (
                f"m_{chain_name}_{world.round % miners_per_chain}"
            )
            policy = miner_policies[chain_name]
            while True:
                decision = policy.decide(chain_name, world, miner)
                world, did = apply_miner(world, chain_name, miner, decision)
                if did:
                    confirmations += 1
                    completion = world.round
                if not (did and batch_confirm):
                    break
        quiescent = _settled(world) and all(
            not world.chain(c).mempool for c in CHAINS
        )
        world = ledger.step_round(world)
        if quiescent:
            break

    return Trace(
        variant=variant,
        actions=tuple(actions),
        initial=initial,
        final=world,
        utilities=_utilities(initial, world),
        lockup=_lockup(initial, world),
        completion_round=completion,
        confirmations=confirmations,
    )


def apply_action(world: WorldState, party: str, action: Action) -> WorldState:
    if isinstance(action, Wait):
        return world
    if isinstance(action, ShareSecret):
        world = ledger.grant_secret(world, action.to, action.preimage)
        return ledger.note_message(world, party, f"share:{action.name}")
    if isinstance(action, PublishTx):
        return ledger.publish(world, action.tx)
    raise TypeError(action)


def apply_miner(
    world: WorldState, chain_name: str, miner: str, decision: MinerDecision
) -> tuple[WorldState, bool]:
    if isinstance(decision, Skip):
        return world, False
    if isinstance(decision, Confirm):
        return ledger.confirm(world, miner, decision.tx_id), True
    if isinstance(decision, Slash):
        tx = build_slash_tx(world, decision.outpoint, decision.preimages, miner, chain_name)
        world = ledger.publish(world, tx)
        return ledger.confirm(world, miner, tx.id, kind="slash"), True
    raise TypeError(decision)


def _utilities(initial: WorldState, final: WorldState) -> dict[str, int]:
    utils: dict[str, int] = {}
    for party in (PARTY_A, PARTY_B):
        utils[party] = sum(
            ledger.balance(final, party, c) - ledger.balance(initial, party, c)
            for c in CHAINS
        )
    for miner, income in sorted(final.miner_income.items()):
        utils[miner] = income.fees + income.slash_gains
    return utils


def replay(trace: Trace, params: SwapParams, seed: int = 0) -> WorldState:
    """Feed the recorded actions back through the ledger alone.

    Miner behavior is reproduced from the trace's confirm/slash events,
    so the result must equal the trace's final world exactly.
    """
    driver = swaps.build_baseline(trace.variant, params)
    world = driver.make_world()
    by_round_actions: dict[int, list[tuple[str, Action]]] = {}
    for rnd, party, action in trace.actions:
        by_round_actions.setdefault(rnd, []).append((party, action))
    miner_events = [
        ev
        for ev in trace.final.events
        if ev.kind in ("confirm", "slash") and ev.actor.startswith("m_")
    ]
    slash_txs = {
        tx.id: tx
        for chain in (trace.final.chain_a, trace.final.chain_b)
        for _, tx in chain.confirmed
        if tx.id.startswith("slash_")
    }
    last_round = max(
        [rnd for rnd, _, _ in trace.actions]
        + [ev.round for ev in miner_events]
        + [0]
    )
    for rnd in range(last_round + 1):
        for party, action in by_round_actions.get(rnd, []):
            world = apply_action(world, party, action)
        for ev in miner_events:
            if ev.round != rnd:
                continue
            if ev.tx_id in slash_txs:
                world = ledger.publish(world, slash_txs[ev.tx_id])
                world = ledger.confirm(world, ev.actor, ev.tx_id, kind="slash")
            else:
                world = ledger.confirm(world, ev.actor, ev.tx_id)
        world = ledger.step_round(world)
    return world
