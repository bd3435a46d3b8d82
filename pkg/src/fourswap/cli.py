"""Scenario runner and reporting front-end.

Subcommands: ``run`` executes one configured scenario and prints the
trace plus a utility table, ``table`` reproduces the protocol comparison
(measured worst-case transaction counts plus griefing and bribery
verdicts), ``game`` builds and solves a game-tree phase, and ``check``
runs the full property suite.

Exit codes: 0 success, 1 property violation, 2 configuration error,
3 runtime bound exceeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import game, ledger, rpredicate, strategies, swaps
from .strategies import (
    AbandonAfter,
    BribeRefund,
    CensorVictim,
    GreedySlash,
    Honest,
    HorizonError,
    MinerPolicy,
    PublishCounterpartyLockEarly,
    Strategy,
    Trace,
    simulate,
)
from .swaps import PARTY_A, PARTY_B, VARIANTS, FeeSchedule, SwapParams

CONFIG_SCHEMA = "1"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(Exception):
    pass


PRINCIPAL_LOCKS = ("a_lock", "b_lock")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ScenarioConfig:
    variant: str = "4s"
    params: SwapParams = field(default_factory=SwapParams)
    strategy_a: str = "honest"
    strategy_b: str = "honest"
    miner_a: str = "greedy"
    miner_b: str = "greedy"
    horizon: int = 50
    seed: int = 0
    miners_per_chain: int = 1


_PARAM_KEYS = {"P_a", "P_b", "p_a", "p_b", "x_a", "x_b", "t_1", "t_2", "t_4"}
_KNOWN_KEYS = _PARAM_KEYS | {
    "schema",
    "variant",
    "strategy_a",
    "strategy_b",
    "miner_a",
    "miner_b",
    "horizon",
    "seed",
    "miners",
    "fee",
}


def parse_config(text: str) -> ScenarioConfig:
    """Flat key=value scenario descriptor with a versioned schema field."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value

    if entries.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"config schema must be {CONFIG_SCHEMA!r}")
    cfg = ScenarioConfig()
    if "variant" in entries:
        cfg.variant = entries["variant"]
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {cfg.variant!r}; expected one of {VARIANTS}")

    overrides = {}
    for key in _PARAM_KEYS:
        if key in entries:
            overrides[key] = _int(entries, key)
    if "fee" in entries:
        overrides["fee_schedule"] = FeeSchedule(default=_int(entries, "fee"))
    try:
        cfg.params = SwapParams(**overrides)
    except ValueError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc

    cfg.strategy_a = entries.get("strategy_a", cfg.strategy_a)
    cfg.strategy_b = entries.get("strategy_b", cfg.strategy_b)
    cfg.miner_a = entries.get("miner_a", cfg.miner_a)
    cfg.miner_b = entries.get("miner_b", cfg.miner_b)
    cfg.horizon = _int(entries, "horizon", cfg.horizon)
    cfg.seed = _int(entries, "seed", cfg.seed)
    cfg.miners_per_chain = _int(entries, "miners", cfg.miners_per_chain)
    # fail early on unknown strategy names
    driver = swaps.build_baseline(cfg.variant, cfg.params)
    make_strategy(cfg.strategy_a, driver)
    make_strategy(cfg.strategy_b, driver)
    make_miner(cfg.miner_a)
    make_miner(cfg.miner_b)
    return cfg


def _int(entries: dict[str, str], key: str, default: int | None = None) -> int:
    if key not in entries:
        if default is None:
            raise ConfigError(f"missing integer key {key!r}")
        return default
    try:
        return int(entries[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {entries[key]!r}")


def make_strategy(name: str, driver: swaps.SwapDriver) -> Strategy:
    head, _, arg = name.partition(":")
    if head == "honest":
        return Honest(driver)
    if head == "abandon_after":
        if arg == "setup":
            return AbandonAfter(driver, 0, at_setup=True)
        try:
            return AbandonAfter(driver, int(arg))
        except ValueError:
            raise ConfigError(f"abandon_after needs an integer step, got {arg!r}")
    if head == "bribe_refund":
        try:
            return BribeRefund(driver, int(arg))
        except ValueError:
            raise ConfigError(f"bribe_refund needs an integer delta, got {arg!r}")
    if head == "publish_counterparty_lock_early":
        return PublishCounterpartyLockEarly(driver)
    raise ConfigError(f"unknown strategy {name!r}")


def make_miner(name: str) -> MinerPolicy:
    head, _, arg = name.partition(":")
    if head == "greedy":
        return GreedySlash()
    if head == "censor_victim":
        if arg not in (PARTY_A, PARTY_B):
            raise ConfigError(f"censor_victim needs a victim party, got {arg!r}")
        return CensorVictim(arg)
    raise ConfigError(f"unknown miner policy {name!r}")


def run_scenario(cfg: ScenarioConfig, batch_confirm: bool = False) -> Trace:
    driver = swaps.build_baseline(cfg.variant, cfg.params)
    profile = {
        PARTY_A: make_strategy(cfg.strategy_a, driver),
        PARTY_B: make_strategy(cfg.strategy_b, driver),
    }
    miners = {"a": make_miner(cfg.miner_a), "b": make_miner(cfg.miner_b)}
    return simulate(
        cfg.variant,
        cfg.params,
        profile,
        miners,
        horizon=cfg.horizon,
        seed=cfg.seed,
        miners_per_chain=cfg.miners_per_chain,
        batch_confirm=batch_confirm,
    )


# ---------------------------------------------------------------------------
# measurements shared by table and check
# ---------------------------------------------------------------------------


def _simulate(variant, params, make_a, make_b, miners=None, horizon=50, **kw):
    driver = swaps.build_baseline(variant, params)
    profile = {PARTY_A: make_a(driver), PARTY_B: make_b(driver)}
    if miners is None:
        miners = {"a": GreedySlash(), "b": GreedySlash()}
    return simulate(variant, params, profile, miners, horizon=horizon, **kw)


def honest_trace(variant: str, params: SwapParams, **kw) -> Trace:
    return _simulate(variant, params, Honest, Honest, **kw)


def grief_sweep(variant: str, params: SwapParams, **kw):
    """Every abandonment point for each party, with the other honest.

    Yields (party, step, trace, counted) where ``counted`` marks runs in
    which a principal-carrying lock confirmed, i.e. real griefing
    exposure rather than a setup- or premium-stage walkaway.
    """
    driver = swaps.build_baseline(variant, params)
    for party in (PARTY_A, PARTY_B):
        for k in range(driver.forward_steps(party)):
            if party == PARTY_A:
                trace = _simulate(
                    variant, params, lambda d: AbandonAfter(d, k), Honest, **kw
                )
            else:
                trace = _simulate(
                    variant, params, Honest, lambda d: AbandonAfter(d, k), **kw
                )
            confirmed = set()
            for chain in (trace.final.chain_a, trace.final.chain_b):
                confirmed |= chain.confirmed_ids()
            counted = bool(confirmed.intersection(PRINCIPAL_LOCKS))
            yield party, k, trace, counted


@dataclass(frozen=True)
class TableRow:
    variant: str
    txns: int
    griefing_resistant: bool
    bribery_safe: bool


def measure_variant(variant: str, params: SwapParams, **kw) -> TableRow:
    honest = honest_trace(variant, params, **kw)
    worst = honest.confirmations
    griefing = True
    seen_counted = False
    for party, k, trace, counted in grief_sweep(variant, params, **kw):
        worst = max(worst, trace.confirmations)
        if counted:
            seen_counted = True
            if trace.utilities[party] >= honest.utilities[party]:
                griefing = False
    return TableRow(
        variant=variant,
        txns=worst,
        griefing_resistant=griefing and seen_counted,
        bribery_safe=measure_bribery(variant, params, **kw),
    )


def measure_bribery(variant: str, params: SwapParams, delta: int = 50, **kw) -> bool:
    """Briber outcome against a self-interested miner.

    The victim chain's miner picks whichever stance (slash-greedy or
    bribed censorship) earns it more; the protocol is bribery-safe iff
    the briber still ends strictly below its honest utility.
    """
    driver = swaps.build_baseline(variant, params)
    if type(driver).bribe_refund_tx is swaps.SwapDriver.bribe_refund_tx:
        return True  # no bribery surface defined for this variant
    honest = honest_trace(variant, params, **kw)
    safe = True
    for briber in (PARTY_A, PARTY_B):
        victim = PARTY_A if briber == PARTY_B else PARTY_B
        victim_chain = driver.bribe_victim_chain(briber)
        outcomes = []
        for stance in ("greedy", "censor"):
            miners = {"a": GreedySlash(), "b": GreedySlash()}
            if stance == "censor":
                miners[victim_chain] = CensorVictim(victim)
            if briber == PARTY_A:
                trace = _simulate(
                    variant, params, lambda d: BribeRefund(d, delta), Honest,
                    miners=miners, **kw
                )
            else:
                trace = _simulate(
                    variant, params, Honest, lambda d: BribeRefund(d, delta),
                    miners=miners, **kw
                )
            fired = any(
                isinstance(act, swaps.PublishTx) and act.note == "bribe"
                for _, _, act in trace.actions
            )
            if not fired:
                continue
            miner_total = sum(
                v for k2, v in trace.utilities.items() if k2.startswith("m_")
            )
            outcomes.append((miner_total, stance, trace))
        if not outcomes:
            continue
        _, _, best = max(outcomes, key=lambda o: o[0])
        if best.utilities[briber] >= honest.utilities[briber]:
            safe = False
    return safe


def comparison_table(params: SwapParams, **kw) -> list[TableRow]:
    return [measure_variant(v, params, **kw) for v in ("tn", "hedged", "gf", "4s")]


def format_table(rows: list[TableRow]) -> str:
    names = {"tn": "Tier-Nolan", "hedged": "Hedged", "gf": "Grief-Free", "4s": "4-Swap"}
    lines = ["protocol\tgriefing_resistance\tbribery_safety\ttxns"]
    for row in rows:
        lines.append(
            f"{names[row.variant]}\t"
            f"{'Yes' if row.griefing_resistant else 'No'}\t"
            f"{'Yes' if row.bribery_safe else 'No'}\t"
            f"{row.txns}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# the property suite (cmd_check)
# ---------------------------------------------------------------------------


def slashing_grid() -> list[tuple[SwapParams, list]]:
    """Unpruned-tree dominance check on a 3x3x3 (p_a, p_b, fee) grid."""
    results = []
    for p_a in (5, 10, 20):
        for bump in (5, 10, 15):
            for fee in (1, 2, 4):
                params = SwapParams(
                    p_a=p_a, p_b=p_a + bump, fee_schedule=FeeSchedule(default=fee)
                )
                tree = game.build_tree(params, prune_slash=False)
                results.append((params, game.check_slashing_dominance(tree)))
    return results


def bribe_sweep(params: SwapParams) -> list[tuple[str, int, int, int]]:
    """(briber, delta, briber_utility, honest_utility) over the delta grid.

    The top delta is the largest in-band bribe physically possible: the
    briber's whole refund payout (locked value minus the refund fee),
    which is locked-1 at the default fee.
    """
    locked_a = params.P_a + params.p_b + params.x_a
    locked_b = params.P_b + params.p_a + params.x_b
    honest = honest_trace("4s", params)
    rows = []
    for briber, locked, fee_kind in (
        (PARTY_A, locked_a, "refund_a"),
        (PARTY_B, locked_b, "refund_b"),
    ):
        top = locked - params.fee(fee_kind)
        for delta in (1, locked // 2, top):
            if briber == PARTY_A:
                trace = _simulate(
                    "4s", params, lambda d: BribeRefund(d, delta), Honest
                )
            else:
                trace = _simulate(
                    "4s", params, Honest, lambda d: BribeRefund(d, delta)
                )
            rows.append((briber, delta, trace.utilities[briber], honest.utilities[briber]))
    return rows


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def run_checks(params: SwapParams | None = None) -> list[CheckResult]:
    params = params or SwapParams()
    results: list[CheckResult] = []

    report = rpredicate.oracle_equivalence(params)
    results.append(
        CheckResult(
            "rpredicate-oracle", report.ok,
            f"{report.cases} cases, {len(report.disagreements)} disagreements",
        )
    )

    grid = slashing_grid()
    bad = [(p, v) for p, v in grid if v]
    results.append(
        CheckResult(
            "slashing-dominance-grid", not bad,
            f"{len(grid)} parameter sets, {len(bad)} with violations",
        )
    )

    rows = bribe_sweep(params)
    bad_rows = [r for r in rows if r[2] >= r[3]]
    results.append(
        CheckResult(
            "bribery-deterrence", not bad_rows,
            f"{len(rows)} bribery runs, {len(bad_rows)} not strictly deterred",
        )
    )

    honest = honest_trace("4s", params)
    grief_bad = []
    counted_runs = 0
    for party, k, trace, counted in grief_sweep("4s", params):
        if not counted:
            continue
        counted_runs += 1
        if trace.utilities[party] >= honest.utilities[party]:
            grief_bad.append((party, k))
    results.append(
        CheckResult(
            "grief-deterrence", not grief_bad,
            f"{counted_runs} abandonment runs, offenders not penalized: {grief_bad}",
        )
    )

    mm = all(game.multi_miner_equivalence(params, n) for n in (2, 3))
    results.append(CheckResult("multi-miner-equivalence", mm, "n in {2, 3}"))

    # one confirmation per round per chain is a modeling choice; the headline
    # measurements must not depend on it
    plain = comparison_table(params)
    batch = comparison_table(params, batch_confirm=True)
    results.append(
        CheckResult(
            "batch-confirmation-insensitivity", plain == batch,
            "comparison table identical under batched confirmation",
        )
    )

    lat_4s = honest_trace("4s", params).completion_round
    lat_gf = honest_trace("gf", params).completion_round
    lat_hedged = honest_trace("hedged", params).completion_round
    results.append(
        CheckResult(
            "honest-latency-ordering",
            lat_4s < lat_gf and lat_4s < lat_hedged,
            f"4s={lat_4s} gf={lat_gf} hedged={lat_hedged}",
        )
    )
    return results


# ---------------------------------------------------------------------------
# command entry points
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _load_config(args)
    try:
        trace = run_scenario(cfg)
    except HorizonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    trace_text = ledger.format_trace(trace.final.events)
    print(trace_text)
    print()
    print(trace.utility_table())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.log").write_text(trace_text + "\n")
        (out / "utilities.txt").write_text(trace.utility_table() + "\n")
    return EXIT_OK


def cmd_table(args) -> int:
    params = _load_config(args).params if args.config else SwapParams()
    print(format_table(comparison_table(params)))
    return EXIT_OK


def cmd_game(args) -> int:
    cfg = _load_config(args)
    if cfg.variant != "4s":
        print("error: the game tree is defined for the 4s variant", file=sys.stderr)
        return EXIT_CONFIG
    tree = game.build_tree(
        cfg.params, phase=args.phase, miners_per_chain=cfg.miners_per_chain
    )
    result = game.backward_induction(tree)
    ok = game.verify_spne(tree, result.chosen)
    print(f"phase: {args.phase}")
    print("induced path:")
    for label in result.path:
        print(f"  {label}")
    print("leaf utilities:")
    for actor in sorted(result.utilities):
        print(f"  {actor}\t{result.utilities[actor]}")
    honest = game.matches_honest_path(result.path) if args.phase in ("full", "base") else None
    if honest is not None:
        print(f"SPNE = honest path: {'yes' if honest else 'no'}")
    print(f"verify_spne: {'pass' if ok else 'FAIL'}")
    print("per-node choices:")
    for history, label in sorted(result.chosen.items()):
        joined = " / ".join(history) if history else "(root)"
        print(f"  [{joined}] -> {label}")
    if args.dot:
        Path(args.dot).write_text(game.export_tree(tree, highlight=result.path) + "\n")
        print(f"dot written to {args.dot}")
    return EXIT_OK if ok and honest in (None, True) else EXIT_VIOLATION


def cmd_check(args) -> int:
    params = _load_config(args).params if args.config else SwapParams()
    results = run_checks(params)
    failed = [r for r in results if not r.ok]
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}\t{r.name}\t{r.detail}")
    if not results:
        print("warning: 0 cases")
    return EXIT_VIOLATION if failed else EXIT_OK


def _load_config(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        cfg = parse_config(Path(args.config).read_text())
    else:
        cfg = ScenarioConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "miners", None) is not None:
        cfg.miners_per_chain = args.miners
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fourswap",
        description="Two-chain atomic swap simulator and game solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario descriptor (key=value lines)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="directory for output artifacts")
        p.add_argument("--miners", type=int, default=None, help="miners per chain")

    p_run = sub.add_parser("run", help="execute one scenario")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_table = sub.add_parser("table", help="protocol comparison table")
    common(p_table)
    p_table.set_defaults(func=cmd_table)

    p_game = sub.add_parser("game", help="build and solve the game tree")
    common(p_game)
    p_game.add_argument(
        "--phase", choices=game.PHASES, default="full", help="tree phase to build"
    )
    p_game.add_argument("--dot", help="write a DOT rendering here")
    p_game.set_defaults(func=cmd_game)

    p_check = sub.add_parser("check", help="run the property suite")
    common(p_check)
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HorizonError as exc:
        print(f"runtime bound exceeded: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
