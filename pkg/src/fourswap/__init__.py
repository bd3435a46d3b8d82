"""Two-chain UTXO simulator and game-theoretic engine for atomic swaps."""

from .conditions import (
    AbsTimelock,
    AnyOf,
    AllOf,
    AnyoneCanSpend,
    Condition,
    EvalContext,
    Hashlock,
    RedeemPath,
    RelTimelock,
    SigBy,
    Witness,
    all_of,
    any_of,
    emit_script,
    evaluate,
    parse_script,
    satisfying_paths,
    session_hash,
)
from .ledger import (
    CHAIN_A,
    CHAIN_B,
    ChainState,
    Conflict,
    ConditionUnsatisfied,
    Event,
    LedgerError,
    Outpoint,
    Output,
    TimelockNotExpired,
    Transaction,
    TxInput,
    WorldState,
    balance,
    conflicts,
    confirm,
    format_trace,
    genesis,
    is_active,
    publish,
    step_round,
)
from .swaps import (
    PARTY_A,
    PARTY_B,
    FeeSchedule,
    SecretSet,
    Setup,
    SwapParams,
    build_baseline,
    build_lock_a,
    build_lock_b,
    generate_secrets,
    honest_action,
    run_setup,
)
from .strategies import (
    AbandonAfter,
    BribeRefund,
    CensorVictim,
    GreedySlash,
    Honest,
    HorizonError,
    PublishCounterpartyLockEarly,
    Trace,
    simulate,
    strategy_library,
    utility_of,
)
from .game import (
    Decision,
    Leaf,
    StrategyProfileResult,
    backward_induction,
    build_tree,
    check_slashing_dominance,
    export_tree,
    matches_honest_path,
    multi_miner_equivalence,
    verify_spne,
)
from .rpredicate import (
    KnowledgeFlags,
    Path,
    ReachState,
    oracle_equivalence,
    r_predicate,
    reachability,
)

__all__ = [name for name in dir() if not name.startswith("_")]
