import itertools

from fourswap.conditions import Hashlock, SigBy, all_of
from fourswap.rpredicate import (
    KnowledgeFlags,
    Path,
    ReachState,
    execute,
    oracle_equivalence,
    r_predicate,
    reachability,
    reachable_states,
)
from fourswap.swaps import SwapParams, generate_secrets, lock_a_disjuncts, lock_b_disjuncts


def flags(**kw):
    return KnowledgeFlags(**kw)


def test_claim_rows():
    assert r_predicate(Path.CLAIM_A_B, "B", flags(h_m=True))
    assert not r_predicate(Path.CLAIM_A_B, "A", flags(h_m=True))
    assert not r_predicate(Path.CLAIM_A_B, "B", flags())
    assert r_predicate(Path.CLAIM_B_A, "A", flags(h_m=True, h_br=True))
    assert not r_predicate(Path.CLAIM_B_A, "A", flags(h_m=True))
    assert r_predicate(Path.ECLAIM_A_B, "B", flags(h_m=True, h_e=True))
    assert not r_predicate(Path.ECLAIM_A_B, "B", flags(h_m=True))


def test_refund_rows_share_the_r1_gate():
    for path in (Path.EREFUND_A_A, Path.REFUND_A_A):
        assert r_predicate(path, "A", flags(h_r1=True))
        assert not r_predicate(path, "B", flags(h_r1=True))
    assert r_predicate(Path.REFUND_B_B, "B", flags(h_r2=True))


def test_slash_rows_are_party_free():
    for party in ("A", "B", "M"):
        assert r_predicate(Path.SLASH1_A_M, party, flags(h_m=True, h_r1=True))
        assert r_predicate(Path.SLASH1_B_M, party, flags(h_m=True, h_r1=True))
        assert not r_predicate(Path.SLASH1_A_M, party, flags(h_m=True))
        assert r_predicate(
            Path.SLASH2_B_M, party, flags(h_m=True, h_br=True, h_r2=True)
        )
        assert not r_predicate(Path.SLASH2_B_M, party, flags(h_m=True, h_br=True))


def test_predicate_monotone_in_flags():
    names = ("h_m", "h_br", "h_e", "h_r1", "h_r2")
    for bits in itertools.product((False, True), repeat=5):
        f = KnowledgeFlags(**dict(zip(names, bits)))
        for j in range(5):
            if bits[j]:
                continue
            bigger = KnowledgeFlags(**{**dict(zip(names, bits)), names[j]: True})
            for path in Path:
                for party in ("A", "B", "M"):
                    if r_predicate(path, party, f):
                        assert r_predicate(path, party, bigger)


# ---------------------------------------------------------------------------
# reachability
# ---------------------------------------------------------------------------


def test_initial_state_paths():
    got = reachability(ReachState())
    assert got == {
        ("B", Path.CLAIM_A_B),
        ("B", Path.REFUND_B_B),
        ("A", Path.EREFUND_A_A),
        ("A", Path.REFUND_A_A),
    }


def test_shared_enables_early_claim():
    base = reachability(ReachState())
    with_share = reachability(ReachState(shared=True))
    assert with_share - base == {("B", Path.ECLAIM_A_B)}


def test_published_main_secret_enables_a_claim_and_slashes():
    s = ReachState(pub_m=True)
    got = reachability(s)
    assert ("A", Path.CLAIM_B_A) in got
    s2 = ReachState(pub_m=True, pub_r1=True)
    got2 = reachability(s2)
    assert ("M", Path.SLASH1_A_M) in got2 and ("M", Path.SLASH1_B_M) in got2
    s3 = ReachState(pub_m=True, pub_br=True, pub_r2=True)
    got3 = reachability(s3)
    assert ("M", Path.SLASH2_A_M) in got3 and ("M", Path.SLASH2_B_M) in got3


def test_reachable_closure_consistent_with_predicate():
    for shared in (False, True):
        states = reachable_states(shared)
        assert ReachState(shared=shared) in states
        for state in states:
            for actor, path in reachability(state):
                nxt = execute(state, actor, path)
                assert nxt in states
        # the closure flips indicators only forward
        for state in states:
            assert state.shared == shared
            if state.pub_br:
                assert state.pub_m  # a claim of B's lock needs the main secret out


# ---------------------------------------------------------------------------
# equivalence with the evaluator
# ---------------------------------------------------------------------------


def test_oracle_equivalence_default_params():
    report = oracle_equivalence(SwapParams())
    assert report.cases == 2**5 * 3 * 10
    assert report.ok, report.text()


def test_oracle_equivalence_detects_mutation():
    params = SwapParams()
    secrets = generate_secrets(params, 0)
    d = secrets.digests()
    mutated_b = dict(lock_b_disjuncts(params, d))
    # drop the bribery-secret hashlock from A's claim path
    mutated_b["claim"] = all_of(Hashlock(d["s_m"]), SigBy(["A"]))
    conditions = {"a": lock_a_disjuncts(params, d), "b": mutated_b}
    report = oracle_equivalence(params, lock_conditions=conditions)
    assert not report.ok
    assert all(dis.path is Path.CLAIM_B_A for dis in report.disagreements)
    assert "claim_B-A" in report.text()


def test_empty_flags_only_signatureless_paths_false():
    report = oracle_equivalence(SwapParams())
    assert report.ok
    empty = KnowledgeFlags()
    for path in Path:
        for party in ("A", "B", "M"):
            assert not r_predicate(path, party, empty)
