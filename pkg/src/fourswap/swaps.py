"""Swap protocol drivers: transaction builders and honest policies.

Five variants are implemented: the classic two-HTLC swap (``tn``), the
cross-locked premium swap (``hedged``), the single-chain-combined
premium swap (``gf``), and the four-transaction swap in its zero-delay
form (``4s-v1``) and full form (``4s``) with bribery premiums, static
pre-signed redeem templates, cross-publishing, and slash paths.

A driver owns the scenario genesis, the setup transcript (secrets,
digests, fully-signed templates), the honest per-round policy for each
party, and the passive refund-collection policy an abandoning party
degrades to.  Redeem templates are static: their skeletons (inputs and
payout splits) are fixed at setup; witnesses carry the preimages at
publish time.  Fees come out of the redeemer's own payout, except lock
transactions, which carry a fee input funded by the principal owner so
the locked value is exactly principal + premiums.

Signatures are authenticated party labels; a template requiring both
parties' signatures cannot be forged by either alone, which is what
makes the templates effectively static (the 2-of-2 pre-signing of the
real construction).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Union

from . import ledger
from .conditions import (
    AbsTimelock,
    AnyoneCanSpend,
    Condition,
    Hashlock,
    SigBy,
    Witness,
    all_of,
    any_of,
    session_hash,
)
from .ledger import (
    CHAIN_A,
    CHAIN_B,
    Outpoint,
    Output,
    Transaction,
    TxInput,
    WorldState,
)

PARTY_A = "A"
PARTY_B = "B"
PARTIES = (PARTY_A, PARTY_B)

VARIANTS = ("tn", "hedged", "gf", "4s-v1", "4s")


class InsufficientFunds(Exception):
    pass


class SetupIncomplete(Exception):
    pass


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeeSchedule:
    """Per-transaction-kind fees; kinds not overridden use the default."""

    default: int = 1
    overrides: tuple[tuple[str, int], ...] = ()

    def for_kind(self, kind: str) -> int:
        for k, v in self.overrides:
            if k == kind:
                return v
        return self.default

    def max_fee(self) -> int:
        return max((self.default, *(v for _, v in self.overrides)))


@dataclass(frozen=True)
class SwapParams:
    """Principals, premiums, timelocks and fees for one swap session.

    ``p_b > p_a`` because the first claimer (B) must face the larger
    abandonment penalty, and both premiums must clear the largest fee
    for the penalties to bite.  ``t_1 < t_2 < t_4`` with at least two
    rounds between the chain refund locks so the cross-chain claim
    window never closes first.
    """

    P_a: int = 100
    P_b: int = 100
    p_a: int = 10
    p_b: int = 15
    x_a: int = 5
    x_b: int = 5
    t_1: int = 10
    t_2: int = 20
    t_4: int = 40
    fee_schedule: FeeSchedule = field(default_factory=FeeSchedule)
    session_id: bytes = b"4swap"

    def __post_init__(self):
        amounts = {
            "P_a": self.P_a,
            "P_b": self.P_b,
            "p_a": self.p_a,
            "p_b": self.p_b,
            "x_a": self.x_a,
            "x_b": self.x_b,
        }
        for name, value in amounts.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.p_b <= self.p_a:
            raise ValueError(f"p_b ({self.p_b}) must exceed p_a ({self.p_a})")
        if min(self.p_a, self.p_b) <= self.fee_schedule.max_fee():
            raise ValueError("premiums must exceed the largest fee")
        if not self.t_1 < self.t_2 < self.t_4:
            raise ValueError("need t_1 < t_2 < t_4")
        if self.t_4 - self.t_2 < 2:
            raise ValueError("need at least 2 rounds between t_2 and t_4")

    def fee(self, kind: str) -> int:
        return self.fee_schedule.for_kind(kind)


# ---------------------------------------------------------------------------
# secrets
# ---------------------------------------------------------------------------

SECRET_NAMES = ("s_m", "s_r2", "s_r1", "s_e", "s_br")
SECRET_OWNER = {
    "s_m": PARTY_B,
    "s_r2": PARTY_B,
    "s_r1": PARTY_A,
    "s_e": PARTY_A,
    "s_br": PARTY_A,
}


@dataclass(frozen=True)
class SecretSet:
    s_m: bytes
    s_r2: bytes
    s_r1: bytes
    s_e: bytes
    s_br: bytes
    session_id: bytes

    def preimage(self, name: str) -> bytes:
        return getattr(self, name)

    def digest(self, name: str) -> bytes:
        return session_hash(self.session_id, self.preimage(name))

    def digests(self) -> dict[str, bytes]:
        return {name: self.digest(name) for name in SECRET_NAMES}

    def owned_by(self, party: str) -> dict[str, bytes]:
        return {
            name: self.preimage(name)
            for name in SECRET_NAMES
            if SECRET_OWNER[name] == party
        }


def generate_secrets(params: SwapParams, seed: int = 0) -> SecretSet:
    """Fixed-length preimages, deterministic in (session, seed, name)."""
    def draw(name: str) -> bytes:
        material = params.session_id + seed.to_bytes(8, "big") + name.encode()
        return hashlib.sha256(material).digest()[:16]

    values = {name: draw(name) for name in SECRET_NAMES}
    assert len(set(values.values())) == len(SECRET_NAMES)
    return SecretSet(session_id=params.session_id, **values)


# ---------------------------------------------------------------------------
# 4S lock conditions
# ---------------------------------------------------------------------------


def lock_a_disjuncts(params: SwapParams, digests: dict[str, bytes]) -> dict[str, Condition]:
    """Spending paths of the chain-A lock, in chart order."""
    _require_digests(digests)
    return {
        "claim": all_of(
            Hashlock(digests["s_m"]), SigBy([PARTY_B]), AbsTimelock(params.t_1)
        ),
        "eclaim": all_of(
            Hashlock(digests["s_m"]), Hashlock(digests["s_e"]), SigBy([PARTY_B])
        ),
        "erefund": all_of(Hashlock(digests["s_r1"]), SigBy([PARTY_A])),
        "refund": all_of(
            Hashlock(digests["s_r1"]), SigBy([PARTY_A]), AbsTimelock(params.t_2)
        ),
        "slash_1": all_of(
            Hashlock(digests["s_m"]), Hashlock(digests["s_r1"]), AnyoneCanSpend()
        ),
        "slash_2": all_of(
            Hashlock(digests["s_m"]),
            Hashlock(digests["s_br"]),
            Hashlock(digests["s_r2"]),
            AnyoneCanSpend(),
        ),
    }


def lock_b_disjuncts(params: SwapParams, digests: dict[str, bytes]) -> dict[str, Condition]:
    """Spending paths of the chain-B lock, in chart order."""
    _require_digests(digests)
    return {
        "claim": all_of(
            Hashlock(digests["s_m"]), Hashlock(digests["s_br"]), SigBy([PARTY_A])
        ),
        "refund": all_of(
            Hashlock(digests["s_r2"]), SigBy([PARTY_B]), AbsTimelock(params.t_4)
        ),
        "slash_1": all_of(
            Hashlock(digests["s_m"]), Hashlock(digests["s_r1"]), AnyoneCanSpend()
        ),
        "slash_2": all_of(
            Hashlock(digests["s_m"]),
            Hashlock(digests["s_br"]),
            Hashlock(digests["s_r2"]),
            AnyoneCanSpend(),
        ),
    }


def _require_digests(digests: dict[str, bytes]) -> None:
    missing = [n for n in SECRET_NAMES if n not in digests]
    if missing:
        raise SetupIncomplete(f"missing digests: {missing}")


# ---------------------------------------------------------------------------
# actions (policy outputs)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PublishTx:
    tx: Transaction
    note: str = ""


@dataclass(frozen=True)
class ShareSecret:
    to: str
    name: str
    preimage: bytes


@dataclass(frozen=True)
class Wait:
    pass


Action = Union[PublishTx, ShareSecret, Wait]


# ---------------------------------------------------------------------------
# setup result
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Setup:
    """Everything the two parties hold after the off-chain setup phase."""

    params: SwapParams
    secrets: SecretSet
    templates: dict[str, Transaction]
    transcript: tuple[tuple, ...]
    #: preimage names each template's witness needs at publish time
    needs: dict[str, tuple[str, ...]]
    #: who created each secret (variants reassign, e.g. the single swap
    #: secret belongs to A in the classic protocols)
    owners: dict[str, str] = field(default_factory=lambda: dict(SECRET_OWNER))
    #: branch overrides for templates armed under a non-default key
    branch: dict[str, int] = field(default_factory=dict)

    def digests(self) -> dict[str, bytes]:
        return self.secrets.digests()


def resolve_preimage(
    world: WorldState, setup: Setup, party: str, name: str
) -> bytes | None:
    """The named preimage if this party owns it or has observed it."""
    if setup.owners.get(name) == party:
        return setup.secrets.preimage(name)
    digest = setup.secrets.digest(name)
    for p in world.known(party):
        if session_hash(world.session_id, p) == digest:
            return p
    return None


def with_preimages(
    tx: Transaction, preimages: list[bytes], chosen_path: int | None = None
) -> Transaction:
    """Attach preimages to every input witness; optionally pin the branch."""
    new_inputs = tuple(
        TxInput(
            i.outpoint,
            Witness(
                preimages=i.witness.preimages | frozenset(preimages),
                signers=i.witness.signers,
                chosen_path=chosen_path if chosen_path is not None else i.witness.chosen_path,
            ),
        )
        for i in tx.inputs
    )
    return replace(tx, inputs=new_inputs)


def bump_fee(tx: Transaction, delta: int, party: str) -> Transaction:
    """Raise the declared fee by reducing the party's own payout.

    This is the in-band bribe: the conflicting transaction simply offers
    the miner more.
    """
    if delta <= 0:
        return tx
    outs = list(tx.outputs)
    for idx, out in enumerate(outs):
        if isinstance(out.condition, SigBy) and out.condition.signers == frozenset(
            {party}
        ):
            if out.value < delta:
                raise ValueError(f"bribe {delta} exceeds own payout {out.value}")
            outs[idx] = replace(out, value=out.value - delta)
            return replace(tx, outputs=tuple(outs))
    raise ValueError(f"{tx.id}: no payout owned by {party} to fund the bribe")


# ---------------------------------------------------------------------------
# world inspection helpers shared by the drivers
# ---------------------------------------------------------------------------


def _confirmed(world: WorldState, chain: str, tx_id: str) -> bool:
    return tx_id in world.chain(chain).confirmed_ids()


def _published(world: WorldState, chain: str, tx_id: str) -> bool:
    ch = world.chain(chain)
    return tx_id in ch.mempool_ids() or tx_id in ch.confirmed_ids()


def _unspent(world: WorldState, chain: str, outpoint: Outpoint) -> bool:
    return outpoint in world.chain(chain).utxo


def _pending_spender(world: WorldState, chain: str, outpoint: Outpoint) -> bool:
    """Some mempool transaction spends this outpoint."""
    return any(
        outpoint in (i.outpoint for i in t.inputs)
        for t in world.chain(chain).mempool
    )


def _shared(world: WorldState, note: str) -> bool:
    return any(ev.kind == "message" and ev.tx_id == note for ev in world.events)


def _own_utxo(world: WorldState, chain: str, party: str, value: int) -> Outpoint:
    """An unspent output of exactly this value owned by the party's key."""
    for op, out in sorted(world.chain(chain).utxo.items(), key=lambda kv: (kv[0].tx_id, kv[0].index)):
        if out.value == value and isinstance(out.condition, SigBy):
            if out.condition.signers == frozenset({party}):
                return op
    raise InsufficientFunds(f"{party} lacks a {value}-unit UTXO on chain {chain}")


def _sig(*parties: str) -> Witness:
    return Witness(signers=parties)


# ---------------------------------------------------------------------------
# full 4S builders
# ---------------------------------------------------------------------------


def build_lock_a(params: SwapParams, digests: dict[str, bytes], world: WorldState) -> Transaction:
    """Chain-A lock: both parties' inputs, one output of P_a + p_b + x_a."""
    cond = any_of(*lock_a_disjuncts(params, digests).values())
    fee = params.fee("lock_a")
    a_in = _own_utxo(world, CHAIN_A, PARTY_A, params.P_a + params.x_a + fee)
    b_in = _own_utxo(world, CHAIN_A, PARTY_B, params.p_b)
    return Transaction(
        id="a_lock",
        chain=CHAIN_A,
        inputs=(TxInput(a_in, _sig(PARTY_A, PARTY_B)), TxInput(b_in, _sig(PARTY_A, PARTY_B))),
        outputs=(Output(params.P_a + params.p_b + params.x_a, cond, "swap lock A"),),
        publisher=PARTY_B,
    )


def build_lock_b(params: SwapParams, digests: dict[str, bytes], world: WorldState) -> Transaction:
    """Chain-B lock: both parties' inputs, one output of P_b + p_a + x_b."""
    cond = any_of(*lock_b_disjuncts(params, digests).values())
    fee = params.fee("lock_b")
    b_in = _own_utxo(world, CHAIN_B, PARTY_B, params.P_b + params.x_b + fee)
    a_in = _own_utxo(world, CHAIN_B, PARTY_A, params.p_a)
    return Transaction(
        id="b_lock",
        chain=CHAIN_B,
        inputs=(TxInput(b_in, _sig(PARTY_A, PARTY_B)), TxInput(a_in, _sig(PARTY_A, PARTY_B))),
        outputs=(Output(params.P_b + params.p_a + params.x_b, cond, "swap lock B"),),
        publisher=PARTY_A,
    )


def _redeem(
    tx_id: str,
    chain: str,
    lock_id: str,
    publisher: str,
    signers: tuple[str, ...],
    outputs: tuple[Output, ...],
    branch: int | None = None,
) -> Transaction:
    return Transaction(
        id=tx_id,
        chain=chain,
        inputs=(
            TxInput(Outpoint(lock_id, 0), Witness(signers=signers, chosen_path=branch)),
        ),
        outputs=outputs,
        publisher=publisher,
    )


def build_4s_templates(params: SwapParams, digests: dict[str, bytes], world: WorldState) -> dict[str, Transaction]:
    p = params
    lock_a = build_lock_a(p, digests, world)
    lock_b = build_lock_b(p, digests, world)
    a_claim = _redeem(
        "a_claim", CHAIN_A, "a_lock", PARTY_B, (PARTY_B,),
        (
            Output(p.P_a + p.p_b - p.fee("claim_a"), SigBy([PARTY_B]), "claim to B"),
            Output(p.x_a, SigBy([PARTY_A]), "x_a back to A"),
        ),
    )
    a_erefund = _redeem(
        "a_erefund", CHAIN_A, "a_lock", PARTY_A, (PARTY_A,),
        (
            Output(p.P_a + p.x_a - p.fee("erefund"), SigBy([PARTY_A]), "early refund to A"),
            Output(p.p_b, SigBy([PARTY_B]), "p_b back to B"),
        ),
        branch=2,
    )
    a_refund = _redeem(
        "a_refund", CHAIN_A, "a_lock", PARTY_A, (PARTY_A,),
        (Output(p.P_a + p.p_b + p.x_a - p.fee("refund_a"), SigBy([PARTY_A]), "refund to A"),),
        branch=3,
    )
    b_claim = _redeem(
        "b_claim", CHAIN_B, "b_lock", PARTY_A, (PARTY_A,),
        (
            Output(p.P_b + p.p_a - p.fee("claim_b"), SigBy([PARTY_A]), "claim to A"),
            Output(p.x_b, SigBy([PARTY_B]), "x_b back to B"),
        ),
        branch=0,
    )
    b_refund = _redeem(
        "b_refund", CHAIN_B, "b_lock", PARTY_B, (PARTY_B,),
        (Output(p.P_b + p.p_a + p.x_b - p.fee("refund_b"), SigBy([PARTY_B]), "refund to B"),),
        branch=1,
    )
    return {
        "a_lock": lock_a,
        "b_lock": lock_b,
        "a_claim": a_claim,
        "a_erefund": a_erefund,
        "a_refund": a_refund,
        "b_claim": b_claim,
        "b_refund": b_refund,
    }


def run_setup(params: SwapParams, world: WorldState, seed: int = 0) -> Setup:
    """Off-chain setup: secrets drawn, digests exchanged, templates signed.

    The transcript has the three message legs in protocol order; every
    redeem template is fully signed before either lock is, and nothing
    is published.
    """
    secrets = generate_secrets(params, seed)
    digests = secrets.digests()
    templates = build_4s_templates(params, digests, world)
    transcript = (
        (PARTY_B, PARTY_A, ("dig_m", digests["s_m"], "utxo_p_b")),
        (
            PARTY_A,
            PARTY_B,
            (
                "tx_a_lock_halfsigned",
                "tx_a_claim",
                "dig_r1",
                digests["s_r1"],
                "dig_e",
                digests["s_e"],
                "dig_br",
                digests["s_br"],
                "utxo_p_a",
            ),
        ),
        (PARTY_B, PARTY_A, ("tx_b_lock_halfsigned", "tx_b_claim")),
    )
    needs = {
        "a_lock": (),
        "b_lock": (),
        "a_claim": ("s_m",),
        "a_claim_early": ("s_m", "s_e"),
        "a_erefund": ("s_r1",),
        "a_refund": ("s_r1",),
        "b_claim": ("s_m", "s_br"),
        "b_refund": ("s_r2",),
    }
    branch = {"a_claim": 0, "a_claim_early": 1}
    return Setup(params, secrets, templates, transcript, needs, branch=branch)


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------


class SwapDriver:
    """Shared surface: genesis, setup, honest policy, refund collection."""

    name: str

    def __init__(self, params: SwapParams):
        self.params = params

    # -- scenario wiring ----------------------------------------------------

    def genesis_balances(self) -> dict[str, dict[str, int]]:
        raise NotImplementedError

    def make_world(self) -> WorldState:
        return ledger.genesis(self.genesis_balances(), session_id=self.params.session_id)

    def setup(self, world: WorldState, seed: int = 0) -> Setup:
        raise NotImplementedError

    # -- policies -----------------------------------------------------------

    def honest_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        raise NotImplementedError

    def refund_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        """Passive collection: own standard refunds at their timelocks only."""
        for spec in self.refund_specs(party):
            tx = setup.templates.get(spec)
            if tx is None:
                continue
            lock = tx.inputs[0].outpoint
            if (
                _confirmed(world, tx.chain, lock.tx_id)
                and _unspent(world, tx.chain, lock)
                and not _published(world, tx.chain, tx.id)
                and not _pending_spender(world, tx.chain, lock)
                and ledger.is_active(world, self._armed(world, setup, party, tx))
            ):
                return PublishTx(self._armed(world, setup, party, tx), "refund collection")
        return Wait()

    def refund_specs(self, party: str) -> tuple[str, ...]:
        raise NotImplementedError

    def forward_steps(self, party: str) -> int:
        """Number of forward (non-refund) protocol steps the party performs."""
        raise NotImplementedError

    # -- bribery ------------------------------------------------------------

    def bribe_refund_tx(
        self, party: str, world: WorldState, setup: Setup, delta: int
    ) -> Transaction | None:
        """The conflicting refund a briber would publish now, or None."""
        return None

    def bribe_victim_chain(self, briber: str) -> str:
        """Chain whose honest claim the briber tries to censor."""
        raise NotImplementedError

    # -- helpers ------------------------------------------------------------

    def _armed(
        self, world: WorldState, setup: Setup, party: str, tx: Transaction, key: str | None = None
    ) -> Transaction:
        """Template with the preimages its witness needs, looked up by key."""
        names = setup.needs.get(key or tx.id, ())
        pres = []
        for name in names:
            p = resolve_preimage(world, setup, party, name)
            if p is None:
                raise SetupIncomplete(f"{party} lacks preimage {name}")
            pres.append(p)
        return with_preimages(tx, pres, setup.branch.get(key or tx.id))

    def _can_arm(self, world: WorldState, setup: Setup, party: str, key: str) -> bool:
        return all(
            resolve_preimage(world, setup, party, n) is not None
            for n in setup.needs.get(key, ())
        )


class FourSwapDriver(SwapDriver):
    """Full 4-Swap with bribery premiums, slash paths and early execution."""

    name = "4s"

    def genesis_balances(self) -> dict[str, dict[str, int]]:
        p = self.params
        return {
            PARTY_A: {
                CHAIN_A: p.P_a + p.x_a + p.fee("lock_a"),
                CHAIN_B: p.p_a,
            },
            PARTY_B: {
                CHAIN_A: p.p_b,
                CHAIN_B: p.P_b + p.x_b + p.fee("lock_b"),
            },
        }

    def setup(self, world: WorldState, seed: int = 0) -> Setup:
        return run_setup(self.params, world, seed)

    def refund_specs(self, party: str) -> tuple[str, ...]:
        return ("a_refund",) if party == PARTY_A else ("b_refund",)

    def forward_steps(self, party: str) -> int:
        # A: publish b_lock, share s_e, publish b_claim; B: publish a_lock, publish a_claim
        return 3 if party == PARTY_A else 2

    def honest_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        p = self.params
        t = setup.templates
        lock_a_out = Outpoint("a_lock", 0)
        lock_b_out = Outpoint("b_lock", 0)

        if party == PARTY_B:
            # Initiate by cross-publishing A's lock, unless A already broke
            # the order by publishing b_lock first (then refunding after t_4
            # dominates proceeding).
            if not _published(world, CHAIN_A, "a_lock") and not _published(
                world, CHAIN_B, "b_lock"
            ):
                return PublishTx(t["a_lock"], "initiate")
            if _confirmed(world, CHAIN_A, "a_lock") and _unspent(world, CHAIN_A, lock_a_out):
                if not _published(world, CHAIN_A, "a_claim") and not _published(
                    world, CHAIN_A, "a_erefund"
                ):
                    if self._can_arm(world, setup, party, "a_claim_early"):
                        return PublishTx(
                            self._armed(world, setup, party, t["a_claim"], "a_claim_early"),
                            "early claim",
                        )
                    if world.round > p.t_1:
                        return PublishTx(
                            self._armed(world, setup, party, t["a_claim"]), "claim"
                        )
            if (
                _confirmed(world, CHAIN_B, "b_lock")
                and _unspent(world, CHAIN_B, lock_b_out)
                and world.round > p.t_4
                and not _pending_spender(world, CHAIN_B, lock_b_out)
                and not _published(world, CHAIN_B, "b_refund")
            ):
                return PublishTx(self._armed(world, setup, party, t["b_refund"]), "refund")
            return Wait()

        # party A
        if (
            _confirmed(world, CHAIN_A, "a_lock")
            and not _published(world, CHAIN_B, "b_lock")
            and not _published(world, CHAIN_A, "a_erefund")
        ):
            if _unspent(world, CHAIN_A, lock_a_out):
                return PublishTx(t["b_lock"], "respond with lock")
        if (
            _confirmed(world, CHAIN_B, "b_lock")
            and _unspent(world, CHAIN_A, lock_a_out)
            and not _shared(world, "share:s_e")
            and not _published(world, CHAIN_A, "a_claim")
        ):
            return ShareSecret(PARTY_B, "s_e", setup.secrets.s_e)
        if (
            _confirmed(world, CHAIN_B, "b_lock")
            and _unspent(world, CHAIN_B, lock_b_out)
            and not _published(world, CHAIN_B, "b_claim")
            and self._can_arm(world, setup, party, "b_claim")
        ):
            return PublishTx(self._armed(world, setup, party, t["b_claim"]), "claim")
        if (
            _confirmed(world, CHAIN_A, "a_lock")
            and _unspent(world, CHAIN_A, lock_a_out)
            and world.round > p.t_2
            and not _pending_spender(world, CHAIN_A, lock_a_out)
            and not _published(world, CHAIN_A, "a_refund")
        ):
            return PublishTx(self._armed(world, setup, party, t["a_refund"]), "refund")
        return Wait()

    def bribe_victim_chain(self, briber: str) -> str:
        return CHAIN_A if briber == PARTY_A else CHAIN_B

    def bribe_refund_tx(
        self, party: str, world: WorldState, setup: Setup, delta: int
    ) -> Transaction | None:
        t = setup.templates
        if party == PARTY_B:
            # After collecting on chain A, censor A's pending claim with a
            # conflicting high-fee refund.
            lock_b_out = Outpoint("b_lock", 0)
            if (
                _confirmed(world, CHAIN_B, "b_lock")
                and _unspent(world, CHAIN_B, lock_b_out)
                and _pending_spender(world, CHAIN_B, lock_b_out)
                and not _published(world, CHAIN_B, "b_refund")
            ):
                armed = self._armed(world, setup, party, t["b_refund"])
                return bump_fee(armed, delta, party)
            return None
        # A preempts B's claim: park a conflicting high-fee refund in the
        # chain-A mempool before the claim window opens.
        lock_a_out = Outpoint("a_lock", 0)
        if (
            _confirmed(world, CHAIN_A, "a_lock")
            and _confirmed(world, CHAIN_B, "b_lock")
            and _unspent(world, CHAIN_A, lock_a_out)
            and not _published(world, CHAIN_A, "a_refund")
        ):
            armed = self._armed(world, setup, party, t["a_refund"])
            return bump_fee(armed, delta, party)
        return None


class FourSwapV1Driver(SwapDriver):
    """Zero-delay version: no bribery premiums, no slash paths.

    The early refund is two-step here: A's early refund releases P_a and
    re-locks p_b behind the revealed refund secret for B to collect.
    """

    name = "4s-v1"

    def genesis_balances(self) -> dict[str, dict[str, int]]:
        p = self.params
        return {
            PARTY_A: {CHAIN_A: p.P_a + p.fee("lock_a"), CHAIN_B: p.p_a},
            PARTY_B: {CHAIN_A: p.p_b, CHAIN_B: p.P_b + p.fee("lock_b")},
        }

    def setup(self, world: WorldState, seed: int = 0) -> Setup:
        p = self.params
        secrets = generate_secrets(p, seed)
        d = secrets.digests()
        lock_a_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_B]), AbsTimelock(p.t_1)),
            all_of(Hashlock(d["s_r1"]), SigBy([PARTY_A])),
            all_of(SigBy([PARTY_A]), AbsTimelock(p.t_2)),
        )
        lock_b_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_A])),
            all_of(SigBy([PARTY_B]), AbsTimelock(p.t_4)),
        )
        a_in = _own_utxo(world, CHAIN_A, PARTY_A, p.P_a + p.fee("lock_a"))
        bpb_in = _own_utxo(world, CHAIN_A, PARTY_B, p.p_b)
        b_in = _own_utxo(world, CHAIN_B, PARTY_B, p.P_b + p.fee("lock_b"))
        apa_in = _own_utxo(world, CHAIN_B, PARTY_A, p.p_a)
        lock_a = Transaction(
            "a_lock", CHAIN_A,
            (TxInput(a_in, _sig(PARTY_A, PARTY_B)), TxInput(bpb_in, _sig(PARTY_A, PARTY_B))),
            (Output(p.P_a + p.p_b, lock_a_cond, "swap lock A"),),
            publisher=PARTY_B,
        )
        lock_b = Transaction(
            "b_lock", CHAIN_B,
            (TxInput(b_in, _sig(PARTY_A, PARTY_B)), TxInput(apa_in, _sig(PARTY_A, PARTY_B))),
            (Output(p.P_b + p.p_a, lock_b_cond, "swap lock B"),),
            publisher=PARTY_A,
        )
        a_claim = _redeem(
            "a_claim", CHAIN_A, "a_lock", PARTY_B, (PARTY_B,),
            (Output(p.P_a + p.p_b - p.fee("claim_a"), SigBy([PARTY_B]), "claim to B"),),
            branch=0,
        )
        premium_back = all_of(Hashlock(d["s_r1"]), SigBy([PARTY_B]))
        a_erefund = _redeem(
            "a_erefund", CHAIN_A, "a_lock", PARTY_A, (PARTY_A,),
            (
                Output(p.P_a - p.fee("erefund"), SigBy([PARTY_A]), "early refund to A"),
                Output(p.p_b, premium_back, "p_b claimable by B"),
            ),
            branch=1,
        )
        b_perefund = Transaction(
            "b_perefund", CHAIN_A,
            (TxInput(Outpoint("a_erefund", 1), _sig(PARTY_B)),),
            (Output(p.p_b - p.fee("refund_b"), SigBy([PARTY_B]), "p_b back to B"),),
            publisher=PARTY_B,
        )
        a_refund = _redeem(
            "a_refund", CHAIN_A, "a_lock", PARTY_A, (PARTY_A,),
            (Output(p.P_a + p.p_b - p.fee("refund_a"), SigBy([PARTY_A]), "refund to A"),),
            branch=2,
        )
        b_claim = _redeem(
            "b_claim", CHAIN_B, "b_lock", PARTY_A, (PARTY_A,),
            (Output(p.P_b + p.p_a - p.fee("claim_b"), SigBy([PARTY_A]), "claim to A"),),
            branch=0,
        )
        b_refund = _redeem(
            "b_refund", CHAIN_B, "b_lock", PARTY_B, (PARTY_B,),
            (Output(p.P_b + p.p_a - p.fee("refund_b"), SigBy([PARTY_B]), "refund to B"),),
            branch=1,
        )
        templates = {
            "a_lock": lock_a, "b_lock": lock_b, "a_claim": a_claim,
            "a_erefund": a_erefund, "b_perefund": b_perefund,
            "a_refund": a_refund, "b_claim": b_claim, "b_refund": b_refund,
        }
        needs = {
            "a_claim": ("s_m",), "a_erefund": ("s_r1",), "b_perefund": ("s_r1",),
            "a_refund": (), "b_claim": ("s_m",), "b_refund": (),
        }
        transcript = (
            (PARTY_B, PARTY_A, ("dig_m", d["s_m"], "utxo_p_b")),
            (PARTY_A, PARTY_B, ("tx_a_lock_halfsigned", "dig_r1", d["s_r1"], "utxo_p_a")),
            (PARTY_B, PARTY_A, ("tx_b_lock_halfsigned",)),
        )
        return Setup(p, secrets, templates, transcript, needs)

    def refund_specs(self, party: str) -> tuple[str, ...]:
        return ("a_refund",) if party == PARTY_A else ("b_refund", "b_perefund")

    def forward_steps(self, party: str) -> int:
        return 2 if party == PARTY_A else 2

    def honest_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        p = self.params
        t = setup.templates
        lock_a_out = Outpoint("a_lock", 0)
        lock_b_out = Outpoint("b_lock", 0)
        if party == PARTY_B:
            if not _published(world, CHAIN_A, "a_lock") and not _published(
                world, CHAIN_B, "b_lock"
            ):
                return PublishTx(t["a_lock"], "initiate")
            if (
                _confirmed(world, CHAIN_A, "a_lock")
                and _unspent(world, CHAIN_A, lock_a_out)
                and world.round > p.t_1
                and not _published(world, CHAIN_A, "a_claim")
                and not _pending_spender(world, CHAIN_A, lock_a_out)
            ):
                return PublishTx(self._armed(world, setup, party, t["a_claim"]), "claim")
            ep = Outpoint("a_erefund", 1)
            if (
                _confirmed(world, CHAIN_A, "a_erefund")
                and _unspent(world, CHAIN_A, ep)
                and self._can_arm(world, setup, party, "b_perefund")
                and not _published(world, CHAIN_A, "b_perefund")
            ):
                return PublishTx(
                    self._armed(world, setup, party, t["b_perefund"]), "premium refund"
                )
            if (
                _confirmed(world, CHAIN_B, "b_lock")
                and _unspent(world, CHAIN_B, lock_b_out)
                and world.round > p.t_4
                and not _pending_spender(world, CHAIN_B, lock_b_out)
                and not _published(world, CHAIN_B, "b_refund")
            ):
                return PublishTx(self._armed(world, setup, party, t["b_refund"]), "refund")
            return Wait()
        # party A
        if (
            _confirmed(world, CHAIN_A, "a_lock")
            and not _published(world, CHAIN_B, "b_lock")
            and not _published(world, CHAIN_A, "a_erefund")
        ):
            if _unspent(world, CHAIN_A, lock_a_out):
                return PublishTx(t["b_lock"], "respond with lock")
        if (
            _confirmed(world, CHAIN_B, "b_lock")
            and _unspent(world, CHAIN_B, lock_b_out)
            and not _published(world, CHAIN_B, "b_claim")
            and self._can_arm(world, setup, party, "b_claim")
        ):
            return PublishTx(self._armed(world, setup, party, t["b_claim"]), "claim")
        if (
            _confirmed(world, CHAIN_A, "a_lock")
            and _unspent(world, CHAIN_A, lock_a_out)
            and world.round > p.t_2
            and not _pending_spender(world, CHAIN_A, lock_a_out)
            and not _published(world, CHAIN_A, "a_refund")
        ):
            return PublishTx(self._armed(world, setup, party, t["a_refund"]), "refund")
        return Wait()


class TnDriver(SwapDriver):
    """Tier Nolan's two-HTLC swap: no premiums, grief-prone."""

    name = "tn"

    def genesis_balances(self) -> dict[str, dict[str, int]]:
        p = self.params
        return {
            PARTY_A: {CHAIN_A: p.P_a + p.fee("lock_a")},
            PARTY_B: {CHAIN_B: p.P_b + p.fee("lock_b")},
        }

    def setup(self, world: WorldState, seed: int = 0) -> Setup:
        p = self.params
        secrets = generate_secrets(p, seed)
        d = secrets.digests()
        # s_m plays the single swap secret; here it belongs to A.
        lock_a_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_B])),
            all_of(SigBy([PARTY_A]), AbsTimelock(p.t_4)),
        )
        lock_b_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_A])),
            all_of(SigBy([PARTY_B]), AbsTimelock(p.t_2)),
        )
        a_in = _own_utxo(world, CHAIN_A, PARTY_A, p.P_a + p.fee("lock_a"))
        b_in = _own_utxo(world, CHAIN_B, PARTY_B, p.P_b + p.fee("lock_b"))
        templates = {
            "a_lock": Transaction(
                "a_lock", CHAIN_A, (TxInput(a_in, _sig(PARTY_A)),),
                (Output(p.P_a, lock_a_cond, "HTLC A"),), publisher=PARTY_A,
            ),
            "b_lock": Transaction(
                "b_lock", CHAIN_B, (TxInput(b_in, _sig(PARTY_B)),),
                (Output(p.P_b, lock_b_cond, "HTLC B"),), publisher=PARTY_B,
            ),
            "a_claim": _redeem(
                "a_claim", CHAIN_A, "a_lock", PARTY_B, (PARTY_B,),
                (Output(p.P_a - p.fee("claim_a"), SigBy([PARTY_B]), "claim to B"),),
                branch=0,
            ),
            "b_claim": _redeem(
                "b_claim", CHAIN_B, "b_lock", PARTY_A, (PARTY_A,),
                (Output(p.P_b - p.fee("claim_b"), SigBy([PARTY_A]), "claim to A"),),
                branch=0,
            ),
            "a_refund": _redeem(
                "a_refund", CHAIN_A, "a_lock", PARTY_A, (PARTY_A,),
                (Output(p.P_a - p.fee("refund_a"), SigBy([PARTY_A]), "refund to A"),),
                branch=1,
            ),
            "b_refund": _redeem(
                "b_refund", CHAIN_B, "b_lock", PARTY_B, (PARTY_B,),
                (Output(p.P_b - p.fee("refund_b"), SigBy([PARTY_B]), "refund to B"),),
                branch=1,
            ),
        }
        needs = {"a_claim": ("s_m",), "b_claim": ("s_m",), "a_refund": (), "b_refund": ()}
        transcript = ((PARTY_A, PARTY_B, ("dig", d["s_m"])),)
        owners = {**SECRET_OWNER, "s_m": PARTY_A}
        return Setup(p, secrets, templates, transcript, needs, owners)

    def refund_specs(self, party: str) -> tuple[str, ...]:
        return ("a_refund",) if party == PARTY_A else ("b_refund",)

    def forward_steps(self, party: str) -> int:
        return 2

    def honest_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        p = self.params
        t = setup.templates
        lock_a_out = Outpoint("a_lock", 0)
        lock_b_out = Outpoint("b_lock", 0)
        if party == PARTY_A:
            if not _published(world, CHAIN_A, "a_lock"):
                return PublishTx(t["a_lock"], "lock")
            if (
                _confirmed(world, CHAIN_B, "b_lock")
                and _unspent(world, CHAIN_B, lock_b_out)
                and not _published(world, CHAIN_B, "b_claim")
            ):
                return PublishTx(
                    with_preimages(t["b_claim"], [setup.secrets.s_m]), "claim"
                )
            if (
                _confirmed(world, CHAIN_A, "a_lock")
                and _unspent(world, CHAIN_A, lock_a_out)
                and world.round > p.t_4
                and not _pending_spender(world, CHAIN_A, lock_a_out)
                and not _published(world, CHAIN_A, "a_refund")
            ):
                return PublishTx(t["a_refund"], "refund")
            return Wait()
        # party B
        if _confirmed(world, CHAIN_A, "a_lock") and not _published(world, CHAIN_B, "b_lock"):
            if _unspent(world, CHAIN_A, lock_a_out):
                return PublishTx(t["b_lock"], "lock")
        s = resolve_preimage(world, setup, PARTY_B, "s_m")
        if (
            s is not None
            and _confirmed(world, CHAIN_A, "a_lock")
            and _unspent(world, CHAIN_A, lock_a_out)
            and not _published(world, CHAIN_A, "a_claim")
        ):
            return PublishTx(with_preimages(t["a_claim"], [s]), "claim")
        if (
            _confirmed(world, CHAIN_B, "b_lock")
            and _unspent(world, CHAIN_B, lock_b_out)
            and world.round > p.t_2
            and not _pending_spender(world, CHAIN_B, lock_b_out)
            and not _published(world, CHAIN_B, "b_refund")
        ):
            return PublishTx(t["b_refund"], "refund")
        return Wait()

    def bribe_victim_chain(self, briber: str) -> str:
        return CHAIN_B

    def bribe_refund_tx(self, party, world, setup, delta):
        if party != PARTY_B:
            return None
        lock_b_out = Outpoint("b_lock", 0)
        if (
            _confirmed(world, CHAIN_B, "b_lock")
            and _unspent(world, CHAIN_B, lock_b_out)
            and _pending_spender(world, CHAIN_B, lock_b_out)
            and not _published(world, CHAIN_B, "b_refund")
        ):
            return bump_fee(setup.templates["b_refund"], delta, party)
        return None


class _PremiumBase(SwapDriver):
    """Shared structure for the hedged and single-combined premium swaps.

    The first claimer is A in both, so A posts the larger premium: the
    driver derives its premium assignment as (A: max, B: min) from the
    session parameters.
    """

    def premium_a(self) -> int:
        return max(self.params.p_a, self.params.p_b)

    def premium_b(self) -> int:
        return min(self.params.p_a, self.params.p_b)

    def bribe_victim_chain(self, briber: str) -> str:
        return CHAIN_B

    def bribe_refund_tx(self, party, world, setup, delta):
        if party != PARTY_B:
            return None
        lock_b_out = Outpoint("b_lock", 0)
        if (
            _confirmed(world, CHAIN_B, "b_lock")
            and _unspent(world, CHAIN_B, lock_b_out)
            and _pending_spender(world, CHAIN_B, lock_b_out)
            and not _published(world, CHAIN_B, "b_refund")
        ):
            return bump_fee(setup.templates["b_refund"], delta, party)
        return None


class HedgedDriver(_PremiumBase):
    """Cross-locked premiums, then premium-absorbing principal locks."""

    name = "hedged"

    def genesis_balances(self) -> dict[str, dict[str, int]]:
        p = self.params
        return {
            PARTY_A: {
                CHAIN_A: p.P_a + p.fee("lock_a"),
                CHAIN_B: self.premium_a() + p.fee("premium_a"),
            },
            PARTY_B: {
                CHAIN_A: self.premium_b() + p.fee("premium_b"),
                CHAIN_B: p.P_b + p.fee("lock_b"),
            },
        }

    def setup(self, world: WorldState, seed: int = 0) -> Setup:
        p = self.params
        secrets = generate_secrets(p, seed)
        d = secrets.digests()
        prem_a, prem_b = self.premium_a(), self.premium_b()
        joint = SigBy([PARTY_A, PARTY_B], 2)
        prem_a_cond = any_of(joint, all_of(SigBy([PARTY_A]), AbsTimelock(p.t_2)))
        prem_b_cond = any_of(joint, all_of(SigBy([PARTY_B]), AbsTimelock(p.t_4)))
        lock_a_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_B])),
            all_of(SigBy([PARTY_A]), AbsTimelock(p.t_4)),
        )
        lock_b_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_A])),
            all_of(SigBy([PARTY_B]), AbsTimelock(p.t_2)),
        )
        prem_a_in = _own_utxo(world, CHAIN_B, PARTY_A, prem_a + p.fee("premium_a"))
        prem_b_in = _own_utxo(world, CHAIN_A, PARTY_B, prem_b + p.fee("premium_b"))
        a_in = _own_utxo(world, CHAIN_A, PARTY_A, p.P_a + p.fee("lock_a"))
        b_in = _own_utxo(world, CHAIN_B, PARTY_B, p.P_b + p.fee("lock_b"))
        prem_a_lock = Transaction(
            "prem_a_lock", CHAIN_B, (TxInput(prem_a_in, _sig(PARTY_A)),),
            (Output(prem_a, prem_a_cond, "A's premium"),), publisher=PARTY_A,
        )
        prem_b_lock = Transaction(
            "prem_b_lock", CHAIN_A, (TxInput(prem_b_in, _sig(PARTY_B)),),
            (Output(prem_b, prem_b_cond, "B's premium"),), publisher=PARTY_B,
        )
        joint_spend = Witness(signers=(PARTY_A, PARTY_B), chosen_path=0)
        a_lock = Transaction(
            "a_lock", CHAIN_A,
            (
                TxInput(a_in, _sig(PARTY_A, PARTY_B)),
                TxInput(Outpoint("prem_b_lock", 0), joint_spend),
            ),
            (Output(p.P_a + prem_b, lock_a_cond, "principal A + premium B"),),
            publisher=PARTY_A,
        )
        b_lock = Transaction(
            "b_lock", CHAIN_B,
            (
                TxInput(b_in, _sig(PARTY_A, PARTY_B)),
                TxInput(Outpoint("prem_a_lock", 0), joint_spend),
            ),
            (Output(p.P_b + prem_a, lock_b_cond, "principal B + premium A"),),
            publisher=PARTY_B,
        )
        templates = {
            "prem_a_lock": prem_a_lock,
            "prem_b_lock": prem_b_lock,
            "a_lock": a_lock,
            "b_lock": b_lock,
            "a_claim": _redeem(
                "a_claim", CHAIN_A, "a_lock", PARTY_B, (PARTY_B,),
                (Output(p.P_a + prem_b - p.fee("claim_a"), SigBy([PARTY_B]), "claim to B"),),
                branch=0,
            ),
            "b_claim": _redeem(
                "b_claim", CHAIN_B, "b_lock", PARTY_A, (PARTY_A,),
                (Output(p.P_b + prem_a - p.fee("claim_b"), SigBy([PARTY_A]), "claim to A"),),
                branch=0,
            ),
            "a_refund": _redeem(
                "a_refund", CHAIN_A, "a_lock", PARTY_A, (PARTY_A,),
                (Output(p.P_a + prem_b - p.fee("refund_a"), SigBy([PARTY_A]), "refund to A"),),
                branch=1,
            ),
            "b_refund": _redeem(
                "b_refund", CHAIN_B, "b_lock", PARTY_B, (PARTY_B,),
                (Output(p.P_b + prem_a - p.fee("refund_b"), SigBy([PARTY_B]), "refund to B"),),
                branch=1,
            ),
            "prem_a_refund": _redeem(
                "prem_a_refund", CHAIN_B, "prem_a_lock", PARTY_A, (PARTY_A,),
                (Output(prem_a - p.fee("refund_b"), SigBy([PARTY_A]), "premium back to A"),),
                branch=1,
            ),
            "prem_b_refund": _redeem(
                "prem_b_refund", CHAIN_A, "prem_b_lock", PARTY_B, (PARTY_B,),
                (Output(prem_b - p.fee("refund_a"), SigBy([PARTY_B]), "premium back to B"),),
                branch=1,
            ),
        }
        needs = {"a_claim": ("s_m",), "b_claim": ("s_m",)}
        transcript = ((PARTY_A, PARTY_B, ("dig", d["s_m"])),)
        owners = {**SECRET_OWNER, "s_m": PARTY_A}
        return Setup(p, secrets, templates, transcript, needs, owners)

    def refund_specs(self, party: str) -> tuple[str, ...]:
        if party == PARTY_A:
            return ("a_refund", "prem_a_refund")
        return ("b_refund", "prem_b_refund")

    def forward_steps(self, party: str) -> int:
        return 3

    def honest_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        p = self.params
        t = setup.templates
        s = resolve_preimage(world, setup, party, "s_m")
        if party == PARTY_A:
            if not _published(world, CHAIN_B, "prem_a_lock"):
                return PublishTx(t["prem_a_lock"], "premium")
            if _confirmed(world, CHAIN_A, "prem_b_lock") and not _published(
                world, CHAIN_A, "a_lock"
            ):
                if _unspent(world, CHAIN_A, Outpoint("prem_b_lock", 0)):
                    return PublishTx(t["a_lock"], "principal")
            if (
                _confirmed(world, CHAIN_B, "b_lock")
                and _unspent(world, CHAIN_B, Outpoint("b_lock", 0))
                and not _published(world, CHAIN_B, "b_claim")
            ):
                return PublishTx(with_preimages(t["b_claim"], [setup.secrets.s_m]), "claim")
            return self._honest_refunds(party, world, setup)
        # party B
        if _confirmed(world, CHAIN_B, "prem_a_lock") and not _published(
            world, CHAIN_A, "prem_b_lock"
        ):
            return PublishTx(t["prem_b_lock"], "premium")
        if _confirmed(world, CHAIN_A, "a_lock") and not _published(world, CHAIN_B, "b_lock"):
            if _unspent(world, CHAIN_B, Outpoint("prem_a_lock", 0)):
                return PublishTx(t["b_lock"], "principal")
        if (
            s is not None
            and _confirmed(world, CHAIN_A, "a_lock")
            and _unspent(world, CHAIN_A, Outpoint("a_lock", 0))
            and not _published(world, CHAIN_A, "a_claim")
        ):
            return PublishTx(with_preimages(t["a_claim"], [s]), "claim")
        return self._honest_refunds(party, world, setup)

    def _honest_refunds(self, party: str, world: WorldState, setup: Setup) -> Action:
        p = self.params
        gates = {
            "a_refund": p.t_4, "b_refund": p.t_2,
            "prem_a_refund": p.t_2, "prem_b_refund": p.t_4,
        }
        for spec in self.refund_specs(party):
            tx = setup.templates[spec]
            lock = tx.inputs[0].outpoint
            if (
                world.round > gates[spec]
                and _confirmed(world, tx.chain, lock.tx_id)
                and _unspent(world, tx.chain, lock)
                and not _published(world, tx.chain, tx.id)
                and not _pending_spender(world, tx.chain, lock)
            ):
                return PublishTx(tx, "refund")
        return Wait()


class GfDriver(_PremiumBase):
    """Premium combined with the principal on one chain; five transactions."""

    name = "gf"

    def genesis_balances(self) -> dict[str, dict[str, int]]:
        p = self.params
        return {
            PARTY_A: {
                CHAIN_A: p.P_a + p.fee("lock_a"),
                CHAIN_B: self.premium_a() + p.fee("premium_a"),
            },
            PARTY_B: {
                CHAIN_A: self.premium_b(),
                CHAIN_B: p.P_b + p.fee("lock_b"),
            },
        }

    def setup(self, world: WorldState, seed: int = 0) -> Setup:
        p = self.params
        secrets = generate_secrets(p, seed)
        d = secrets.digests()
        prem_a, prem_b = self.premium_a(), self.premium_b()
        joint = SigBy([PARTY_A, PARTY_B], 2)
        # A can pull her premium back instantly with her own secret.
        prem_cond = any_of(joint, all_of(Hashlock(d["s_m"]), SigBy([PARTY_A])))
        lock_a_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_B])),
            all_of(SigBy([PARTY_A]), AbsTimelock(p.t_2)),
        )
        lock_b_cond = any_of(
            all_of(Hashlock(d["s_m"]), SigBy([PARTY_A])),
            all_of(SigBy([PARTY_B]), AbsTimelock(p.t_1)),
        )
        prem_in = _own_utxo(world, CHAIN_B, PARTY_A, prem_a + p.fee("premium_a"))
        a_in = _own_utxo(world, CHAIN_A, PARTY_A, p.P_a + p.fee("lock_a"))
        bpb_in = _own_utxo(world, CHAIN_A, PARTY_B, prem_b)
        b_in = _own_utxo(world, CHAIN_B, PARTY_B, p.P_b + p.fee("lock_b"))
        prem_lock = Transaction(
            "prem_a_lock", CHAIN_B, (TxInput(prem_in, _sig(PARTY_A)),),
            (Output(prem_a, prem_cond, "A's premium"),), publisher=PARTY_A,
        )
        a_lock = Transaction(
            "a_lock", CHAIN_A,
            (TxInput(a_in, _sig(PARTY_A, PARTY_B)), TxInput(bpb_in, _sig(PARTY_A, PARTY_B))),
            (Output(p.P_a + prem_b, lock_a_cond, "principal A + premium B"),),
            publisher=PARTY_A,
        )
        b_lock = Transaction(
            "b_lock", CHAIN_B,
            (
                TxInput(b_in, _sig(PARTY_A, PARTY_B)),
                TxInput(
                    Outpoint("prem_a_lock", 0),
                    Witness(signers=(PARTY_A, PARTY_B), chosen_path=0),
                ),
            ),
            (Output(p.P_b + prem_a, lock_b_cond, "principal B + premium A"),),
            publisher=PARTY_B,
        )
        templates = {
            "prem_a_lock": prem_lock,
            "a_lock": a_lock,
            "b_lock": b_lock,
            "a_claim": _redeem(
                "a_claim", CHAIN_A, "a_lock", PARTY_B, (PARTY_B,),
                (Output(p.P_a + prem_b - p.fee("claim_a"), SigBy([PARTY_B]), "claim to B"),),
                branch=0,
            ),
            "b_claim": _redeem(
                "b_claim", CHAIN_B, "b_lock", PARTY_A, (PARTY_A,),
                (Output(p.P_b + prem_a - p.fee("claim_b"), SigBy([PARTY_A]), "claim to A"),),
                branch=0,
            ),
            "a_refund": _redeem(
                "a_refund", CHAIN_A, "a_lock", PARTY_A, (PARTY_A,),
                (Output(p.P_a + prem_b - p.fee("refund_a"), SigBy([PARTY_A]), "refund to A"),),
                branch=1,
            ),
            "b_refund": _redeem(
                "b_refund", CHAIN_B, "b_lock", PARTY_B, (PARTY_B,),
                (Output(p.P_b + prem_a - p.fee("refund_b"), SigBy([PARTY_B]), "refund to B"),),
                branch=1,
            ),
            "prem_a_refund": Transaction(
                "prem_a_refund", CHAIN_B,
                (
                    TxInput(
                        Outpoint("prem_a_lock", 0),
                        Witness(signers=(PARTY_A,), chosen_path=1),
                    ),
                ),
                (Output(prem_a - p.fee("refund_b"), SigBy([PARTY_A]), "premium back to A"),),
                publisher=PARTY_A,
            ),
        }
        needs = {
            "a_claim": ("s_m",),
            "b_claim": ("s_m",),
            "prem_a_refund": ("s_m",),
        }
        transcript = ((PARTY_A, PARTY_B, ("dig", d["s_m"])),)
        owners = {**SECRET_OWNER, "s_m": PARTY_A}
        return Setup(p, secrets, templates, transcript, needs, owners)

    def refund_specs(self, party: str) -> tuple[str, ...]:
        # the standalone premium needs the secret path; refund_action
        # below handles it with the safety guards
        return ("a_refund",) if party == PARTY_A else ("b_refund",)

    def forward_steps(self, party: str) -> int:
        return 3 if party == PARTY_A else 2

    def honest_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        p = self.params
        t = setup.templates
        if party == PARTY_A:
            if not _published(world, CHAIN_B, "prem_a_lock"):
                return PublishTx(t["prem_a_lock"], "premium")
            if _confirmed(world, CHAIN_B, "prem_a_lock") and not _published(
                world, CHAIN_A, "a_lock"
            ):
                return PublishTx(t["a_lock"], "principal")
            if (
                _confirmed(world, CHAIN_B, "b_lock")
                and _unspent(world, CHAIN_B, Outpoint("b_lock", 0))
                and not _published(world, CHAIN_B, "b_claim")
            ):
                return PublishTx(with_preimages(t["b_claim"], [setup.secrets.s_m]), "claim")
            # premium stranded: B never absorbed it into his lock
            prem_out = Outpoint("prem_a_lock", 0)
            if (
                _confirmed(world, CHAIN_B, "prem_a_lock")
                and _unspent(world, CHAIN_B, prem_out)
                and _confirmed(world, CHAIN_A, "a_lock")
                and not _unspent(world, CHAIN_A, Outpoint("a_lock", 0))
                and not _published(world, CHAIN_B, "prem_a_refund")
            ):
                return PublishTx(
                    with_preimages(t["prem_a_refund"], [setup.secrets.s_m]), "premium refund"
                )
            return self._honest_refunds(party, world, setup)
        # party B
        if _confirmed(world, CHAIN_A, "a_lock") and not _published(world, CHAIN_B, "b_lock"):
            if _unspent(world, CHAIN_B, Outpoint("prem_a_lock", 0)):
                return PublishTx(t["b_lock"], "principal")
        s = resolve_preimage(world, setup, PARTY_B, "s_m")
        if (
            s is not None
            and _confirmed(world, CHAIN_A, "a_lock")
            and _unspent(world, CHAIN_A, Outpoint("a_lock", 0))
            and not _published(world, CHAIN_A, "a_claim")
        ):
            return PublishTx(with_preimages(t["a_claim"], [s]), "claim")
        return self._honest_refunds(party, world, setup)

    def _honest_refunds(self, party: str, world: WorldState, setup: Setup) -> Action:
        p = self.params
        gates = {"a_refund": p.t_2, "b_refund": p.t_1, "prem_a_refund": 0}
        for spec in self.refund_specs(party):
            tx = setup.templates[spec]
            lock = tx.inputs[0].outpoint
            if spec == "prem_a_refund":
                continue  # handled in honest_action (needs the secret path)
            if (
                world.round > gates[spec]
                and _confirmed(world, tx.chain, lock.tx_id)
                and _unspent(world, tx.chain, lock)
                and not _published(world, tx.chain, tx.id)
                and not _pending_spender(world, tx.chain, lock)
            ):
                return PublishTx(tx, "refund")
        return Wait()

    def refund_action(self, party: str, world: WorldState, setup: Setup) -> Action:
        # Abandoning A still pulls her standalone premium back via the
        # instant path, but only once revealing the secret cannot hand
        # B a claim (the principal lock is gone or never appeared).
        if party == PARTY_A:
            prem_out = Outpoint("prem_a_lock", 0)
            a_lock_live = _confirmed(world, CHAIN_A, "a_lock") and _unspent(
                world, CHAIN_A, Outpoint("a_lock", 0)
            )
            if (
                _confirmed(world, CHAIN_B, "prem_a_lock")
                and _unspent(world, CHAIN_B, prem_out)
                and not _published(world, CHAIN_B, "prem_a_refund")
                and not _pending_spender(world, CHAIN_B, prem_out)
                and not _published(world, CHAIN_B, "b_lock")
                and not a_lock_live
            ):
                return PublishTx(
                    with_preimages(
                        setup.templates["prem_a_refund"],
                        [setup.secrets.s_m],
                        chosen_path=1,
                    ),
                    "premium refund",
                )
        return super().refund_action(party, world, setup)


_DRIVERS = {
    "tn": TnDriver,
    "hedged": HedgedDriver,
    "gf": GfDriver,
    "4s-v1": FourSwapV1Driver,
    "4s": FourSwapDriver,
}


def build_baseline(variant: str, params: SwapParams) -> SwapDriver:
    """Driver for any supported variant (baselines and both 4S versions)."""
    try:
        cls = _DRIVERS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return cls(params)


def honest_action(
    variant: str, party: str, world: WorldState, setup: Setup, params: SwapParams | None = None
) -> Action:
    """The honest policy of a variant, as a standalone function."""
    driver = build_baseline(variant, params or setup.params)
    return driver.honest_action(party, world, setup)
