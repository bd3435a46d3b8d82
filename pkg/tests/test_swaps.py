import pytest

from fourswap import ledger
from fourswap.conditions import evaluate, EvalContext, Witness
from fourswap.swaps import (
    PARTY_A,
    PARTY_B,
    FeeSchedule,
    InsufficientFunds,
    PublishTx,
    SetupIncomplete,
    ShareSecret,
    SwapParams,
    Wait,
    build_baseline,
    build_lock_a,
    build_lock_b,
    bump_fee,
    generate_secrets,
    honest_action,
    run_setup,
    with_preimages,
)


@pytest.fixture
def params():
    return SwapParams()


@pytest.fixture
def driver(params):
    return build_baseline("4s", params)


@pytest.fixture
def world(driver):
    return driver.make_world()


@pytest.fixture
def setup(driver, world):
    return driver.setup(world, 0)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


def test_params_invariants():
    with pytest.raises(ValueError):
        SwapParams(p_a=15, p_b=10)  # first claimer must post more
    with pytest.raises(ValueError):
        SwapParams(p_a=1, p_b=2)  # premiums must clear the fees
    with pytest.raises(ValueError):
        SwapParams(t_1=10, t_2=40, t_4=20)
    with pytest.raises(ValueError):
        SwapParams(t_2=20, t_4=21)  # claim window between refunds
    with pytest.raises(ValueError):
        SwapParams(P_a=0)


def test_fee_schedule_overrides():
    fees = FeeSchedule(default=1, overrides=(("claim_a", 3),))
    assert fees.for_kind("claim_a") == 3
    assert fees.for_kind("lock_a") == 1
    assert fees.max_fee() == 3


def test_secrets_distinct_and_deterministic(params):
    s1 = generate_secrets(params, 7)
    s2 = generate_secrets(params, 7)
    s3 = generate_secrets(params, 8)
    assert s1 == s2
    assert s1 != s3
    values = [s1.s_m, s1.s_r2, s1.s_r1, s1.s_e, s1.s_br]
    assert len(set(values)) == 5
    assert all(len(v) == 16 for v in values)


# ---------------------------------------------------------------------------
# lock builders
# ---------------------------------------------------------------------------


def test_lock_values(params, world, setup):
    lock_a = setup.templates["a_lock"]
    lock_b = setup.templates["b_lock"]
    assert sum(o.value for o in lock_a.outputs) == 120  # P_a + p_b + x_a
    assert sum(o.value for o in lock_b.outputs) == 115  # P_b + p_a + x_b
    assert ledger.declared_fee(world, lock_a) == 1
    assert ledger.declared_fee(world, lock_b) == 1


def test_claim_split_returns_bribery_premium(params, setup):
    claim = setup.templates["a_claim"]
    values = {o.beneficiary_note: o.value for o in claim.outputs}
    assert values["claim to B"] == 115 - params.fee("claim_a")  # P_a + p_b to B
    assert values["x_a back to A"] == 5
    b_claim = setup.templates["b_claim"]
    values = {o.beneficiary_note: o.value for o in b_claim.outputs}
    assert values["claim to A"] == 110 - params.fee("claim_b")  # P_b + p_a to A
    assert values["x_b back to B"] == 5


def test_erefund_split_pays_both_sides(params, setup):
    erefund = setup.templates["a_erefund"]
    values = {o.beneficiary_note: o.value for o in erefund.outputs}
    assert values["early refund to A"] == 105 - params.fee("erefund")  # P_a + x_a
    assert values["p_b back to B"] == 15  # B made whole in the same tx


def test_build_lock_requires_funding(params):
    empty = ledger.genesis({}, session_id=params.session_id)
    digests = generate_secrets(params).digests()
    with pytest.raises(InsufficientFunds):
        build_lock_a(params, digests, empty)
    with pytest.raises(InsufficientFunds):
        build_lock_b(params, digests, empty)


def test_build_lock_requires_all_digests(params, world):
    digests = generate_secrets(params).digests()
    del digests["s_br"]
    with pytest.raises(SetupIncomplete):
        build_lock_a(params, digests, world)


def test_a_claim_needs_both_secrets_on_chain_b(params, setup):
    # the chain-B claim path demands the main and the bribery secret
    cond = setup.templates["b_lock"].outputs[0].condition
    s = setup.secrets
    ctx = EvalContext(current_round=0, session_id=params.session_id)
    with_both = Witness(preimages={s.s_m, s.s_br}, signers={PARTY_A})
    only_main = Witness(preimages={s.s_m}, signers={PARTY_A})
    assert evaluate(cond, with_both, ctx, ignore_timelocks=True)
    assert not evaluate(cond, only_main, ctx, ignore_timelocks=True)


# ---------------------------------------------------------------------------
# setup
# ---------------------------------------------------------------------------


def test_setup_transcript_three_legs(setup):
    assert len(setup.transcript) == 3
    senders = [leg[0] for leg in setup.transcript]
    assert senders == [PARTY_B, PARTY_A, PARTY_B]


def test_setup_deterministic(params, world):
    s1 = run_setup(params, world, seed=3)
    s2 = run_setup(params, world, seed=3)
    assert s1.transcript == s2.transcript
    assert s1.templates == s2.templates


def test_templates_spend_only_lock_outputs(setup):
    for name, tx in setup.templates.items():
        if name in ("a_lock", "b_lock"):
            continue
        for txin in tx.inputs:
            assert txin.outpoint.tx_id in ("a_lock", "b_lock")


def test_published_redeem_keeps_template_skeleton(driver, world, setup):
    # arming a template attaches witness data but never alters the
    # skeleton (inputs and payout splits fixed at setup)
    armed = with_preimages(setup.templates["a_refund"], [setup.secrets.s_r1])
    assert armed.skeleton() == setup.templates["a_refund"].skeleton()


def test_bump_fee_reduces_own_payout_only(setup):
    refund = setup.templates["b_refund"]
    bumped = bump_fee(refund, 10, PARTY_B)
    assert sum(o.value for o in refund.outputs) - sum(o.value for o in bumped.outputs) == 10
    assert bumped.inputs == refund.inputs
    with pytest.raises(ValueError):
        bump_fee(refund, 10_000, PARTY_B)


# ---------------------------------------------------------------------------
# honest policy
# ---------------------------------------------------------------------------


def _confirm(world, tx):
    world = ledger.publish(world, tx)
    return ledger.confirm(world, f"m_{tx.chain}", tx.id)


def test_honest_a_responds_to_confirmed_lock(driver, world, setup):
    world = _confirm(world, setup.templates["a_lock"])
    world = ledger.step_round(world)
    action = honest_action("4s", PARTY_A, world, setup)
    assert isinstance(action, PublishTx) and action.tx.id == "b_lock"


def test_honest_b_claims_immediately_with_early_secret(driver, world, setup):
    world = _confirm(world, setup.templates["a_lock"])
    world = ledger.step_round(world)
    world = _confirm(world, setup.templates["b_lock"])
    world = ledger.step_round(world)
    world = ledger.grant_secret(world, PARTY_B, setup.secrets.s_e)
    action = honest_action("4s", PARTY_B, world, setup)
    assert isinstance(action, PublishTx) and action.tx.id == "a_claim"
    witness = action.tx.inputs[0].witness
    assert setup.secrets.s_e in witness.preimages  # early path, no t_1 wait


def test_honest_b_waits_for_t1_without_secret(driver, world, setup):
    world = _confirm(world, setup.templates["a_lock"])
    world = ledger.step_round(world)
    assert isinstance(honest_action("4s", PARTY_B, world, setup), Wait)
    while world.round <= setup.params.t_1:
        world = ledger.step_round(world)
    action = honest_action("4s", PARTY_B, world, setup)
    assert isinstance(action, PublishTx) and action.tx.id == "a_claim"


def test_honest_a_shares_early_secret_after_locks(driver, world, setup):
    world = _confirm(world, setup.templates["a_lock"])
    world = ledger.step_round(world)
    world = _confirm(world, setup.templates["b_lock"])
    world = ledger.step_round(world)
    action = honest_action("4s", PARTY_A, world, setup)
    assert isinstance(action, ShareSecret) and action.name == "s_e"


def test_honest_a_refunds_after_t2(driver, world, setup):
    world = _confirm(world, setup.templates["a_lock"])
    world = ledger.step_round(world)
    world = _confirm(world, setup.templates["b_lock"])
    world = ledger.step_round(world)
    world = ledger.grant_secret(world, PARTY_B, setup.secrets.s_e)
    world = ledger.note_message(world, PARTY_A, "share:s_e")
    # B never claims; once t_2 passes A publishes the refund
    while world.round <= setup.params.t_2:
        world = ledger.step_round(world)
    action = honest_action("4s", PARTY_A, world, setup)
    assert isinstance(action, PublishTx) and action.tx.id == "a_refund"


def test_secret_placement_on_chain(params):
    """s_m shows up only in claims or slashes, s_r1 only in A's refund
    family, s_r2 only in B's refund, across the honest and refund runs."""
    from fourswap.strategies import AbandonAfter, GreedySlash, Honest, simulate

    secrets = generate_secrets(params, 0)
    placements = {
        secrets.s_m: {"a_claim", "b_claim"},
        secrets.s_r1: {"a_erefund", "a_refund"},
        secrets.s_r2: {"b_refund"},
    }
    for profile in ("honest", "refund"):
        driver = build_baseline("4s", params)
        strategies = {
            PARTY_A: Honest(driver),
            PARTY_B: Honest(driver) if profile == "honest" else AbandonAfter(driver, 1),
        }
        trace = simulate(
            "4s", params, strategies,
            {"a": GreedySlash(), "b": GreedySlash()}, horizon=50,
        )
        for chain in (trace.final.chain_a, trace.final.chain_b):
            for _, tx in chain.confirmed:
                for txin in tx.inputs:
                    for pre, allowed in placements.items():
                        if pre in txin.witness.preimages:
                            assert tx.id in allowed, (tx.id, profile)
