"""Extensive-form game over the four-transaction swap, solved exactly.

The tree follows the protocol's decision points: the setup choices
(send or withhold the lock packages, publish order), the redeem choices
(share the early-execution secret, claim, leave), and the refund
choices, with bribery branches wherever a conflicting transaction can
be pitched against a pending one.  Miner confirmations are explicit
nodes; where a slash is constructible the pruned tree expands only the
slash (the unpruned tree keeps every miner alternative and is what the
slashing-dominance check walks).  Waiting is collapsed: a party decides
an action now or commits to not taking it, with timelocked moves
scheduled at their activation round, so the tree stays finite without
per-round wait chains (delaying an always-available action is never
strictly better under the earliest-termination tie-break).

Leaf utilities are pure token deltas computed by the ledger.  For the
players' *preferences* the solver adds an exchange surplus: a party
that ends up holding the counterparty's principal values it more than
its own, by an amount larger than its fees but smaller than either
premium.  Without that premise no rational party would swap at all;
with it, backward induction lands on the honest path.  Ties break
toward the earliest-terminating subtree, then lexicographic labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Union

from . import ledger, swaps
from .ledger import CHAIN_A, CHAIN_B, CHAINS, Outpoint, Transaction, WorldState
from .strategies import Confirm, Slash, build_slash_tx, slash_candidates
from .swaps import (
    PARTY_A,
    PARTY_B,
    PublishTx,
    Setup,
    ShareSecret,
    SwapParams,
    bump_fee,
    with_preimages,
)

PHASES = ("base", "claim", "refund", "full")


# ---------------------------------------------------------------------------
# tree types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HistoryStep:
    round: int
    actor: str
    label: str
    #: ledger-level payload: a party Action, a (chain, MinerDecision) pair,
    #: or None for pure message/decision annotations
    payload: object | None


@dataclass(frozen=True)
class Leaf:
    utilities: dict[str, int]
    payoffs: dict[str, int]
    world: WorldState
    history: tuple[HistoryStep, ...]
    terminal_round: int


@dataclass(frozen=True)
class Decision:
    actor: str
    history: tuple[str, ...]
    actions: tuple[tuple[str, "GameNode"], ...]
    round: int
    world: WorldState | None = None

    def action_labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.actions)


GameNode = Union[Leaf, Decision]


def iter_nodes(node: GameNode):
    yield node
    if isinstance(node, Decision):
        for _, child in node.actions:
            yield from iter_nodes(child)


def count_decisions(node: GameNode, branching_only: bool = True) -> int:
    return sum(
        1
        for n in iter_nodes(node)
        if isinstance(n, Decision) and (len(n.actions) > 1 or not branching_only)
    )


# ---------------------------------------------------------------------------
# builder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Sit:
    world: WorldState
    sent_a: bool = False
    sent_b: bool = False
    shared_e: bool = False
    hist: tuple[HistoryStep, ...] = ()
    labels: tuple[str, ...] = ()


class GameBuilder:
    def __init__(
        self,
        params: SwapParams,
        prune_slash: bool = True,
        bribe_delta: int | None = None,
        miners_per_chain: int = 1,
        exchange_value: int | None = None,
        phase: str = "full",
    ):
        self.params = params
        self.prune = prune_slash
        self.n_miners = miners_per_chain
        self.phase = phase
        self.driver = swaps.FourSwapDriver(params)
        self.world0 = self.driver.make_world()
        self.setup: Setup = self.driver.setup(self.world0)
        locked_a = params.P_a + params.p_b + params.x_a
        self.delta = locked_a // 2 if bribe_delta is None else bribe_delta
        if exchange_value is None:
            exchange_value = min(params.p_a, params.p_b) // 2
        if not 0 < exchange_value < min(params.p_a, params.p_b):
            raise ValueError("exchange surplus must sit below both premiums")
        self.surplus = exchange_value

    # -- template arming ----------------------------------------------------

    def _tx(self, key: str, early: bool = False) -> Transaction:
        t = self.setup.templates
        s = self.setup.secrets
        if key == "a_claim":
            if early:
                return with_preimages(t["a_claim"], [s.s_m, s.s_e], chosen_path=1)
            return with_preimages(t["a_claim"], [s.s_m], chosen_path=0)
        if key == "b_claim":
            return with_preimages(t["b_claim"], [s.s_m, s.s_br])
        if key == "a_erefund":
            return with_preimages(t["a_erefund"], [s.s_r1])
        if key == "a_refund":
            return with_preimages(t["a_refund"], [s.s_r1])
        if key == "b_refund":
            return with_preimages(t["b_refund"], [s.s_r2])
        return t[key]

    # -- world mechanics ----------------------------------------------------

    def _advance(self, world: WorldState, to_round: int) -> WorldState:
        assert world.round <= to_round, "cannot rewind the clock"
        while world.round < to_round:
            world = ledger.step_round(world)
        return world

    def _publish(
        self, sit: _Sit, actor: str, label: str, tx: Transaction, rnd: int
    ) -> _Sit:
        world = self._advance(sit.world, rnd)
        world = ledger.publish(world, tx)
        step = HistoryStep(rnd, actor, label, PublishTx(tx, label))
        return replace(
            sit, world=world, hist=sit.hist + (step,), labels=sit.labels + (label,)
        )

    def _note(self, sit: _Sit, actor: str, label: str, payload=None) -> _Sit:
        rnd = sit.world.round
        step = HistoryStep(rnd, actor, label, payload)
        return replace(
            sit, hist=sit.hist + (step,), labels=sit.labels + (label,)
        )

    def _miner_name(self, chain: str, rnd: int) -> str:
        if self.n_miners == 1:
            return f"m_{chain}"
        return f"m_{chain}_{rnd % self.n_miners}"

    def leaf(self, sit: _Sit) -> Leaf:
        world = sit.world
        utilities: dict[str, int] = {}
        for party in (PARTY_A, PARTY_B):
            utilities[party] = sum(
                ledger.balance(world, party, c) - ledger.balance(self.world0, party, c)
                for c in CHAINS
            )
        for miner, income in sorted(world.miner_income.items()):
            utilities[miner] = income.fees + income.slash_gains
        payoffs = dict(utilities)
        # Exchange surplus: holding the counterparty's principal is worth
        # more than the tokens given up (bounded by the premiums, which is
        # what keeps refunds preferable to a broken exchange).
        if ledger.balance(world, PARTY_A, CHAIN_B) > ledger.balance(
            self.world0, PARTY_A, CHAIN_B
        ):
            payoffs[PARTY_A] += self.surplus
        if ledger.balance(world, PARTY_B, CHAIN_A) > ledger.balance(
            self.world0, PARTY_B, CHAIN_A
        ):
            payoffs[PARTY_B] += self.surplus
        return Leaf(utilities, payoffs, world, sit.hist, world.round)

    # -- miner nodes ----------------------------------------------------------

    def miner_node(
        self,
        sit: _Sit,
        chain: str,
        then: Callable[[_Sit], GameNode],
        expect: str | None = None,
    ) -> GameNode:
        """One confirmation opportunity for this chain's miner, as a node.

        The menu is computed from the world: seizable slash outputs first
        (live mempool view), then confirmable transactions.  Pruned trees
        expand only the best slash when one exists.
        """
        world = sit.world
        rnd = world.round
        miner = self._miner_name(chain, rnd)
        slashes = slash_candidates(world, chain, world.visible_preimages())
        confirms = [
            tx
            for tx in world.chain(chain).mempool
            if all(i.outpoint in world.chain(chain).utxo for i in tx.inputs)
            and ledger.is_active(world, tx)
        ]
        actions: list[tuple[str, _Sit]] = []
        if slashes:
            best = max(slashes, key=lambda c: (c[1].value, c[0].tx_id))
            chosen = [best] if self.prune else slashes
            for op, out, needed in chosen:
                tx = build_slash_tx(world, op, needed, miner, chain)
                w2 = ledger.publish(world, tx)
                w2 = ledger.confirm(w2, miner, tx.id, kind="slash")
                label = f"slash {op.tx_id}:{op.index}"
                step = HistoryStep(rnd, miner, label, (chain, Slash(op, needed)))
                actions.append(
                    (label, replace(sit, world=w2, hist=sit.hist + (step,),
                                    labels=sit.labels + (label,)))
                )
        if not slashes or not self.prune:
            for tx in sorted(confirms, key=lambda t: t.id):
                if expect is not None and tx.id != expect and not slashes:
                    continue
                w2 = ledger.confirm(world, miner, tx.id)
                label = f"confirm {tx.id}"
                step = HistoryStep(rnd, miner, label, (chain, Confirm(tx.id)))
                actions.append(
                    (label, replace(sit, world=w2, hist=sit.hist + (step,),
                                    labels=sit.labels + (label,)))
                )
        if not actions:
            return then(sit)
        return Decision(
            actor=miner,
            history=sit.labels,
            actions=tuple((label, then(s2)) for label, s2 in actions),
            round=rnd,
            world=world,
        )

    # -- decision stages ------------------------------------------------------

    def build(self) -> GameNode:
        if self.phase in ("full", "base"):
            return self.st_root(_Sit(self.world0))
        if self.phase == "claim":
            return self.st_b_claim(self._locked_sit())
        if self.phase == "refund":
            sit = self._locked_sit()
            sit = self._note(sit, PARTY_B, "leave")
            return self.st_a_refund(sit)
        raise ValueError(f"unknown phase {self.phase!r}")

    def _locked_sit(self) -> _Sit:
        """Honest prefix: both locks confirmed, clock past both lock rounds."""
        sit = _Sit(self.world0, sent_a=True, sent_b=True)
        sit = self._publish(sit, PARTY_B, "publish tx_A_lock", self._tx("a_lock"), 0)
        w = ledger.confirm(sit.world, self._miner_name(CHAIN_A, 0), "a_lock")
        sit = replace(sit, world=w, hist=sit.hist + (
            HistoryStep(0, self._miner_name(CHAIN_A, 0), "confirm a_lock",
                        (CHAIN_A, Confirm("a_lock"))),))
        sit = self._publish(sit, PARTY_A, "publish tx_B_lock", self._tx("b_lock"), 1)
        w = ledger.confirm(sit.world, self._miner_name(CHAIN_B, 1), "b_lock")
        sit = replace(sit, world=w, hist=sit.hist + (
            HistoryStep(1, self._miner_name(CHAIN_B, 1), "confirm b_lock",
                        (CHAIN_B, Confirm("b_lock"))),))
        return replace(sit, world=self._advance(sit.world, 2))

    def st_root(self, sit: _Sit) -> GameNode:
        """A decides whether to hand her lock package to B."""
        send = self._note(sit, PARTY_A, "send tx_A_lock")
        return Decision(
            actor=PARTY_A,
            history=sit.labels,
            actions=(
                ("send tx_A_lock", self.st_b_receive(replace(send, sent_a=True))),
                ("don't send", self.leaf(self._note(sit, PARTY_A, "don't send"))),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_receive(self, sit: _Sit) -> GameNode:
        """B holds A's package: publish it bare, or respond with his own."""
        pub = self._publish(sit, PARTY_B, "publish tx_A_lock", self._tx("a_lock"), 0)
        griefed = self.miner_node(
            pub, CHAIN_A,
            lambda s: self.st_a_griefed(replace(s, world=self._advance(s.world, 1))),
            expect="a_lock",
        )
        sent = self._note(sit, PARTY_B, "send tx_B_lock")
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_A_lock", griefed),
                ("send tx_B_lock", self.st_a_choice(replace(sent, sent_b=True))),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_a_choice(self, sit: _Sit) -> GameNode:
        """Both packages exchanged; A may jump the publishing order."""
        early = self._publish(sit, PARTY_A, "publish tx_B_lock first", self._tx("b_lock"), 0)
        deviated = self.miner_node(
            early, CHAIN_B,
            lambda s: self.st_b_deviation(replace(s, world=self._advance(s.world, 1))),
            expect="b_lock",
        )
        return Decision(
            actor=PARTY_A,
            history=sit.labels,
            actions=(
                ("wait for B", self.st_b_publish(self._note(sit, PARTY_A, "wait for B"))),
                ("publish tx_B_lock first", deviated),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_publish(self, sit: _Sit) -> GameNode:
        pub = self._publish(sit, PARTY_B, "publish tx_A_lock", self._tx("a_lock"), 0)
        locked = self.miner_node(
            pub, CHAIN_A,
            lambda s: self.st_a_after_lock(replace(s, world=self._advance(s.world, 1))),
            expect="a_lock",
        )
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_A_lock", locked),
                ("abandon", self.leaf(self._note(sit, PARTY_B, "abandon"))),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_deviation(self, sit: _Sit) -> GameNode:
        """Only tx_B_lock is on chain; B refunds after t_4 or proceeds."""
        refund = self._publish(
            sit, PARTY_B, "publish tx_B_refund", self._tx("b_refund"), self.params.t_4 + 1
        )
        refund_leaf = self.miner_node(refund, CHAIN_B, self.leaf, expect="b_refund")
        proceed = self._publish(sit, PARTY_B, "proceed: publish tx_A_lock", self._tx("a_lock"), sit.world.round)
        proceed_node = self.miner_node(
            proceed, CHAIN_A,
            lambda s: self.st_a_redeem(replace(s, world=self._advance(s.world, s.world.round + 1))),
            expect="a_lock",
        )
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_B_refund", refund_leaf),
                ("proceed: publish tx_A_lock", proceed_node),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_a_griefed(self, sit: _Sit) -> GameNode:
        """A's lock is on chain but B withheld his package."""
        return self._a_erefund_menu(sit, continue_option=False)

    def st_a_after_lock(self, sit: _Sit) -> GameNode:
        """A's lock confirmed the honest way; she can proceed or bail."""
        return self._a_erefund_menu(sit, continue_option=True)

    def _a_erefund_menu(self, sit: _Sit, continue_option: bool) -> GameNode:
        actions: list[tuple[str, GameNode]] = []
        if continue_option:
            pub = self._publish(
                sit, PARTY_A, "publish tx_B_lock", self._tx("b_lock"), sit.world.round
            )
            node = self.miner_node(
                pub, CHAIN_B,
                lambda s: self.st_a_redeem(replace(s, world=self._advance(s.world, s.world.round + 1))),
                expect="b_lock",
            )
            actions.append(("publish tx_B_lock", node))
        erefund = self._publish(
            sit, PARTY_A, "publish tx_A_erefund", self._tx("a_erefund"), sit.world.round
        )
        actions.append(("publish tx_A_erefund", self.st_b_vs_erefund(erefund)))
        actions.append(
            ("do nothing", self.st_b_grief_claim(self._note(sit, PARTY_A, "do nothing")))
        )
        return Decision(
            actor=PARTY_A,
            history=sit.labels,
            actions=tuple(actions),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_vs_erefund(self, sit: _Sit) -> GameNode:
        """A's early refund is pending; B lets it pass or bribes against it."""
        allow = self._note(sit, PARTY_B, "let the early refund confirm")
        allow_node = self.miner_node(allow, CHAIN_A, self.leaf, expect="a_erefund")
        bribe_tx = bump_fee(self._tx("a_claim"), self.delta, PARTY_B)
        bribe = self._publish(
            sit, PARTY_B, "publish tx_A_claim conflicting (bribe)", bribe_tx, sit.world.round
        )
        bribe_node = self.miner_node(bribe, CHAIN_A, self.leaf)
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("let the early refund confirm", allow_node),
                ("publish tx_A_claim conflicting (bribe)", bribe_node),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_grief_claim(self, sit: _Sit) -> GameNode:
        """A went silent after her lock confirmed; B claims after t_1."""
        claim = self._publish(
            sit, PARTY_B, "publish tx_A_claim", self._tx("a_claim"), self.params.t_1 + 1
        )
        claim_node = self.miner_node(claim, CHAIN_A, self.leaf, expect="a_claim")
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_A_claim", claim_node),
                ("leave", self.leaf(self._note(sit, PARTY_B, "leave"))),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_a_redeem(self, sit: _Sit) -> GameNode:
        """Both locks confirmed; A decides about the early-execution secret."""
        if self.phase == "base":
            # the base tree carries the redeem subgame's equilibrium values
            sub = self.st_a_redeem_full(sit)
            solved = backward_induction(sub)
            return solved.leaf
        return self.st_a_redeem_full(sit)

    def st_a_redeem_full(self, sit: _Sit) -> GameNode:
        share_sit = self._note(
            sit, PARTY_A, "share s_e",
            ShareSecret(PARTY_B, "s_e", self.setup.secrets.s_e),
        )
        share_sit = replace(
            share_sit,
            shared_e=True,
            world=ledger.grant_secret(share_sit.world, PARTY_B, self.setup.secrets.s_e),
        )
        withhold = self._note(sit, PARTY_A, "withhold s_e")
        return Decision(
            actor=PARTY_A,
            history=sit.labels,
            actions=(
                ("share s_e", self.st_b_claim(share_sit)),
                ("withhold s_e", self.st_b_claim(withhold)),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_claim(self, sit: _Sit) -> GameNode:
        """The claim decision: B publishes his claim or walks away."""
        rnd = sit.world.round if sit.shared_e else max(sit.world.round, self.params.t_1 + 1)
        claim_tx = self._tx("a_claim", early=sit.shared_e)
        claim = self._publish(sit, PARTY_B, "publish tx_A_claim", claim_tx, rnd)
        claim_node = self.miner_node(
            claim, CHAIN_A,
            lambda s: self.st_a_claim(replace(s, world=self._advance(s.world, s.world.round + 1))),
            expect="a_claim",
        )
        leave = self._note(sit, PARTY_B, "leave")
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_A_claim", claim_node),
                ("leave", self.st_a_refund(leave)),
            ),
            round=rnd,
            world=sit.world,
        )

    def st_a_claim(self, sit: _Sit) -> GameNode:
        """B claimed on chain A; A answers on chain B or abandons her claim."""
        claim = self._publish(
            sit, PARTY_A, "publish tx_B_claim", self._tx("b_claim"), sit.world.round
        )
        leave = self._note(sit, PARTY_A, "leave")
        return Decision(
            actor=PARTY_A,
            history=sit.labels,
            actions=(
                ("publish tx_B_claim", self.st_b_postclaim(claim)),
                ("leave", self.st_b_solo_refund(leave)),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_postclaim(self, sit: _Sit) -> GameNode:
        """A's claim is pending on chain B; B's last bribery window."""
        allow = self._note(sit, PARTY_B, "let the claim confirm")
        allow_node = self.miner_node(allow, CHAIN_B, self.leaf, expect="b_claim")
        bribe_tx = bump_fee(self._tx("b_refund"), self.delta, PARTY_B)
        bribe = self._publish(
            sit, PARTY_B, "publish tx_B_refund conflicting (bribe)", bribe_tx, sit.world.round
        )
        bribe_node = self.miner_node(bribe, CHAIN_B, self.leaf)
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("let the claim confirm", allow_node),
                ("publish tx_B_refund conflicting (bribe)", bribe_node),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_solo_refund(self, sit: _Sit) -> GameNode:
        refund = self._publish(
            sit, PARTY_B, "publish tx_B_refund", self._tx("b_refund"), self.params.t_4 + 1
        )
        refund_node = self.miner_node(refund, CHAIN_B, self.leaf, expect="b_refund")
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_B_refund", refund_node),
                ("leave", self.leaf(self._note(sit, PARTY_B, "leave"))),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_a_refund(self, sit: _Sit) -> GameNode:
        """B is not claiming; A refunds at t_2 or sits on her hands."""
        refund = self._publish(
            sit, PARTY_A, "publish tx_A_refund", self._tx("a_refund"), self.params.t_2 + 1
        )
        dont = self._note(sit, PARTY_A, "don't refund")
        dont = replace(dont, world=self._advance(dont.world, self.params.t_2 + 1))
        return Decision(
            actor=PARTY_A,
            history=sit.labels,
            actions=(
                ("publish tx_A_refund", self.st_b_vs_refund(refund)),
                ("don't refund", self.st_b_late_refund(dont)),
            ),
            round=self.params.t_2 + 1,
            world=sit.world,
        )

    def st_b_vs_refund(self, sit: _Sit) -> GameNode:
        """A's refund is pending and active; B yields or contests with his claim."""
        allow = self._note(sit, PARTY_B, "let the refund confirm")
        allow_node = self.miner_node(
            allow, CHAIN_A,
            lambda s: self.st_b_refund_final(s),
            expect="a_refund",
        )
        counter = self._publish(
            sit, PARTY_B, "publish tx_A_claim conflicting (bribe)",
            bump_fee(self._tx("a_claim"), self.delta, PARTY_B), sit.world.round,
        )
        counter_node = self.miner_node(
            counter, CHAIN_A,
            lambda s: self.miner_node(s, CHAIN_B, self.leaf),
        )
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("let the refund confirm", allow_node),
                ("publish tx_A_claim conflicting (bribe)", counter_node),
            ),
            round=sit.world.round,
            world=sit.world,
        )

    def st_b_refund_final(self, sit: _Sit) -> GameNode:
        refund = self._publish(
            sit, PARTY_B, "publish tx_B_refund", self._tx("b_refund"), self.params.t_4 + 1
        )
        refund_node = self.miner_node(refund, CHAIN_B, self.leaf, expect="b_refund")
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_B_refund", refund_node),
                ("leave", self.leaf(self._note(sit, PARTY_B, "leave"))),
            ),
            round=self.params.t_4 + 1,
            world=sit.world,
        )

    def st_b_late_refund(self, sit: _Sit) -> GameNode:
        """Neither side acted on chain A; B refunds chain B, then may raid."""
        refund = self._publish(
            sit, PARTY_B, "publish tx_B_refund", self._tx("b_refund"), self.params.t_4 + 1
        )
        refund_node = self.miner_node(
            refund, CHAIN_B,
            lambda s: self.st_b_late_claim(replace(s, world=self._advance(s.world, s.world.round + 1))),
            expect="b_refund",
        )
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_B_refund", refund_node),
                ("leave", self.leaf(self._note(sit, PARTY_B, "leave"))),
            ),
            round=self.params.t_4 + 1,
            world=sit.world,
        )

    def st_b_late_claim(self, sit: _Sit) -> GameNode:
        """Chain B settled by refund; A's lock still sits unclaimed."""
        claim = self._publish(
            sit, PARTY_B, "publish tx_A_claim", self._tx("a_claim"), sit.world.round
        )
        claim_node = self.miner_node(claim, CHAIN_A, self.leaf, expect="a_claim")
        return Decision(
            actor=PARTY_B,
            history=sit.labels,
            actions=(
                ("publish tx_A_claim", claim_node),
                ("leave", self.leaf(self._note(sit, PARTY_B, "leave"))),
            ),
            round=sit.world.round,
            world=sit.world,
        )


def build_tree(
    params: SwapParams,
    phase: str = "full",
    prune_slash: bool = True,
    bribe_delta: int | None = None,
    miners_per_chain: int = 1,
    exchange_value: int | None = None,
) -> GameNode:
    """The extensive-form game for one phase of the four-transaction swap."""
    if phase not in PHASES:
        raise ValueError(f"phase must be one of {PHASES}")
    return GameBuilder(
        params,
        prune_slash=prune_slash,
        bribe_delta=bribe_delta,
        miners_per_chain=miners_per_chain,
        exchange_value=exchange_value,
        phase=phase,
    ).build()


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StrategyProfileResult:
    chosen: dict[tuple[str, ...], str]
    path: tuple[str, ...]
    leaf: Leaf

    @property
    def utilities(self) -> dict[str, int]:
        return self.leaf.utilities

    @property
    def payoffs(self) -> dict[str, int]:
        return self.leaf.payoffs


def backward_induction(tree: GameNode) -> StrategyProfileResult:
    """Solve the tree exactly.

    Each actor maximizes its payoff given solved children; ties break
    toward the earliest-terminating subtree, then the lexicographically
    smallest action label.
    """
    chosen: dict[tuple[str, ...], str] = {}

    def solve(node: GameNode) -> tuple[Leaf, tuple[str, ...]]:
        if isinstance(node, Leaf):
            return node, ()
        best: tuple | None = None
        for label, child in node.actions:
            leaf, path = solve(child)
            key = (-leaf.payoffs.get(node.actor, 0), leaf.terminal_round, label)
            if best is None or key < best[0]:
                best = (key, label, leaf, path)
        _, label, leaf, path = best
        chosen[node.history] = label
        return leaf, (label,) + path

    leaf, path = solve(tree)
    return StrategyProfileResult(chosen=chosen, path=path, leaf=leaf)


def play(tree: GameNode, profile: dict[tuple[str, ...], str]) -> Leaf:
    """Follow a profile from a node down to its leaf."""
    node = tree
    while isinstance(node, Decision):
        label = profile[node.history]
        for lab, child in node.actions:
            if lab == label:
                node = child
                break
        else:
            raise KeyError(f"profile picks unknown action {label!r} at {node.history}")
    return node


def verify_spne(
    tree: GameNode,
    profile: dict[tuple[str, ...], str],
    full_enumeration_cap: int = 12,
) -> bool:
    """Exhaustive check of the equilibrium condition, solver-independent.

    At every subgame, no unilateral deviation by the acting player may
    improve its payoff.  Single-node deviations are checked everywhere
    (equivalent to the subgame condition on finite trees by the one-shot
    deviation principle); on subgames where an actor has at most
    ``full_enumeration_cap`` branching nodes, every alternative pure
    continuation of that actor is additionally enumerated outright.
    """
    decisions = [n for n in iter_nodes(tree) if isinstance(n, Decision)]
    for node in decisions:
        base = play(node, profile)
        for label, _ in node.actions:
            if label == profile[node.history]:
                continue
            alt = dict(profile)
            alt[node.history] = label
            if play(node, alt).payoffs.get(node.actor, 0) > base.payoffs.get(
                node.actor, 0
            ):
                return False
    for sub in decisions:
        actors = {n.actor for n in iter_nodes(sub) if isinstance(n, Decision)}
        base = play(sub, profile)
        for actor in actors:
            nodes = [
                n
                for n in iter_nodes(sub)
                if isinstance(n, Decision) and n.actor == actor and len(n.actions) > 1
            ]
            if not nodes or len(nodes) > full_enumeration_cap:
                continue
            menus = [n.action_labels() for n in nodes]
            for combo in itertools.product(*menus):
                alt = dict(profile)
                for n, label in zip(nodes, combo):
                    alt[n.history] = label
                outcome = play(sub, alt)
                if outcome.payoffs.get(actor, 0) > base.payoffs.get(actor, 0):
                    return False
    return True


def brute_force_spne(tree: GameNode) -> StrategyProfileResult | None:
    """Enumerate all pure profiles, filter by the equilibrium condition,
    then apply the solver's tie-break ordering node by node.

    Intended for subtrees with few branching nodes; the acceptance suite
    runs it on every subtree with at most twelve of them.
    """
    nodes = [n for n in iter_nodes(tree) if isinstance(n, Decision)]
    menus = [n.action_labels() for n in nodes]
    equilibria: list[dict[tuple[str, ...], str]] = []
    for combo in itertools.product(*menus):
        profile = {n.history: label for n, label in zip(nodes, combo)}
        if _is_spne(tree, nodes, profile):
            equilibria.append(profile)
    if not equilibria:
        return None

    def node_key(profile, node):
        leaf = play(node, profile)
        return (-leaf.payoffs.get(node.actor, 0), leaf.terminal_round,
                profile[node.history])

    best = equilibria[0]
    for cand in equilibria[1:]:
        for node in nodes:
            a, b = node_key(best, node), node_key(cand, node)
            if b < a:
                best = cand
                break
            if a < b:
                break
    leaf = play(tree, best)
    path = []
    node = tree
    while isinstance(node, Decision):
        label = best[node.history]
        path.append(label)
        node = dict(node.actions)[label]
    return StrategyProfileResult(chosen=best, path=tuple(path), leaf=leaf)


def _is_spne(tree: GameNode, nodes: list[Decision], profile) -> bool:
    # one-shot deviation test at every node, equivalent to the subgame
    # condition for finite perfect-information trees
    for node in nodes:
        base = play(node, profile)
        for label, _ in node.actions:
            if label == profile[node.history]:
                continue
            alt = dict(profile)
            alt[node.history] = label
            if play(node, alt).payoffs.get(node.actor, 0) > base.payoffs.get(node.actor, 0):
                return False
    return True


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DominanceViolation:
    history: tuple[str, ...]
    slash_value: int
    alternative: str
    alternative_fee: int


def check_slashing_dominance(tree: GameNode) -> list[DominanceViolation]:
    """At every miner node where a slash is constructible, the immediate
    slash payoff must strictly beat confirming any single transaction.

    Build the tree unpruned so the alternatives are present.
    """
    violations: list[DominanceViolation] = []
    for node in iter_nodes(tree):
        if not isinstance(node, Decision) or not node.actor.startswith("m_"):
            continue
        slash_values: list[int] = []
        confirm_fees: list[tuple[str, int]] = []
        for label, child in node.actions:
            gain = _immediate_income(node, label, child)
            if label.startswith("slash"):
                slash_values.append(gain)
            else:
                confirm_fees.append((label, gain))
        if not slash_values:
            continue
        best_slash = max(slash_values)
        for label, fee in confirm_fees:
            if fee >= best_slash:
                violations.append(
                    DominanceViolation(node.history, best_slash, label, fee)
                )
    return violations


def _immediate_income(node: Decision, label: str, child: GameNode) -> int:
    """Miner income from taking this action now (fee or slash value)."""
    step = _first_step(child, node.actor, label)
    if step is None:
        return 0
    chain, decision = step.payload
    if isinstance(decision, Slash):
        leaf_world = _any_world(child)
        out = leaf_world.chain(chain).all_outputs[
            Outpoint(f"slash_{chain}_{decision.outpoint.tx_id}_{decision.outpoint.index}_r{step.round}", 0)
        ]
        return out.value
    if isinstance(decision, Confirm):
        leaf_world = _any_world(child)
        for rnd, tx in leaf_world.chain(chain).confirmed:
            if tx.id == decision.tx_id:
                total_in = sum(
                    leaf_world.chain(chain).all_outputs[i.outpoint].value
                    for i in tx.inputs
                )
                return total_in - sum(o.value for o in tx.outputs)
    return 0


def _first_step(node: GameNode, actor: str, label: str) -> HistoryStep | None:
    leaf = node
    while isinstance(leaf, Decision):
        leaf = leaf.actions[0][1]
    for step in leaf.history:
        if step.actor == actor and step.label == label and step.payload is not None:
            return step
    return None


def _any_world(node: GameNode) -> WorldState:
    leaf = node
    while isinstance(leaf, Decision):
        leaf = leaf.actions[0][1]
    return leaf.world


def multi_miner_equivalence(params: SwapParams, n_miners_per_chain: int) -> bool:
    """Party utilities must not depend on how many miners share the work."""
    single = build_tree(params, miners_per_chain=1)
    multi = build_tree(params, miners_per_chain=n_miners_per_chain)
    return _leaves_equivalent(single, multi)


def _leaves_equivalent(a: GameNode, b: GameNode) -> bool:
    if isinstance(a, Leaf) != isinstance(b, Leaf):
        return False
    if isinstance(a, Leaf):
        for party in (PARTY_A, PARTY_B):
            if a.utilities.get(party) != b.utilities.get(party):
                return False
        a_miners = sum(v for k, v in a.utilities.items() if k.startswith("m_"))
        b_miners = sum(v for k, v in b.utilities.items() if k.startswith("m_"))
        return a_miners == b_miners
    if len(a.actions) != len(b.actions):
        return False
    for (la, ca), (lb, cb) in zip(a.actions, b.actions):
        if la != lb or not _leaves_equivalent(ca, cb):
            return False
    return True


HONEST_WAYPOINTS = (
    "send tx_A_lock",
    "send tx_B_lock",
    "publish tx_A_lock",
    "confirm a_lock",
    "publish tx_B_lock",
    "confirm b_lock",
    "publish tx_A_claim",
    "publish tx_B_claim",
)


def matches_honest_path(path: tuple[str, ...]) -> bool:
    """The equilibrium path of the full game: both locks cross-published,
    both claims made, and no refund anywhere (waypoints in order)."""
    it = iter(path)
    for waypoint in HONEST_WAYPOINTS:
        for label in it:
            if label == waypoint:
                break
        else:
            return False
    return not any("refund" in label for label in path)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_tree(
    tree: GameNode, format: str = "dot", highlight: tuple[str, ...] | None = None
) -> str:
    """Deterministic DOT rendering; the highlighted path is drawn bold."""
    if format != "dot":
        raise ValueError(f"unsupported format {format!r}")
    lines = ["digraph swap_game {", '  node [fontname="monospace"];']
    counter = itertools.count()
    on_path = set()
    if highlight:
        node = tree
        for label in highlight:
            if not isinstance(node, Decision):
                break
            on_path.add((node.history, label))
            node = dict(node.actions)[label]

    def emit(node: GameNode) -> int:
        nid = next(counter)
        if isinstance(node, Leaf):
            a = node.utilities.get(PARTY_A, 0)
            b = node.utilities.get(PARTY_B, 0)
            m = sum(v for k, v in node.utilities.items() if k.startswith("m_"))
            lines.append(
                f'  n{nid} [shape=box, label="({a}, {b}, {m}) @r{node.terminal_round}"];'
            )
            return nid
        lines.append(f'  n{nid} [shape=ellipse, label="{node.actor}"];')
        for label, child in node.actions:
            cid = emit(child)
            style = ' style=bold color=red' if (node.history, label) in on_path else ""
            lines.append(f'  n{nid} -> n{cid} [label="{label}"{style}];')
        return nid

    emit(tree)
    lines.append("}")
    return "\n".join(lines)
