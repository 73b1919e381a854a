"""Command-line interface.

Subcommands: ``solve`` (equilibrium strategies and values per algorithm
and discount factor), ``sweep`` (value-versus-discount series for the
trap states across scenarios), ``simulate`` (Monte Carlo attacker
rollouts against a solved policy), and ``ingest`` (derive transition
probabilities from experiment records).

Exit codes: 0 on success, 1 for runtime or convergence failures, 2 for
usage and configuration errors. All outputs are deterministic functions
of the flags; CSV files carry a header row and six fractional digits.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .games import GameError, MarkovGame
from .ingest import (
    DerivedParams,
    RecordError,
    compare_with_published,
    derive_transition_probabilities,
    parse_experiment_records,
)
from .scenario import (
    PRESET_NAMES,
    ScenarioConfig,
    ScenarioError,
    build_engagement_game,
    parse_scenario_file,
    preset_text,
)
from .simulate import (
    AttackerKind,
    AttackerModel,
    export_traces,
    hypothesis_report,
    simulate_episodes,
)
from .solvers import (
    ConvergenceError,
    FixedPolicySolver,
    MarkovGameSolver,
    MaximinSolver,
    MinMaxPureSolver,
    UniformRandomSolver,
)

ALGORITHMS = {"opt": MaximinSolver, "mmp": MinMaxPureSolver, "urs": UniformRandomSolver}
TRACKED_STATES = ("s2", "s5", "s8")
STAGE_STATES = (("s0", "set_1"), ("s1", "set_2"), ("s3", "set_3"))
PARAMS_HEADER = "service,p_real_no_hp,p_trap,p_real_hp"


@dataclass(frozen=True)
class RunManifest:
    """Resolved inputs of one CLI invocation."""

    command: str
    scenarios: tuple[str, ...]
    gammas: tuple[float, ...]
    seed: int
    out_dir: Path
    algorithms: tuple[str, ...]
    attacker: str = "h1"
    policy: str = "opt"
    episodes: int = 10_000
    escape: float = 0.1
    caution: float = 0.5
    order: str | None = None
    horizon: int = 100
    traces: bool = False
    records: Path | None = None

    def __post_init__(self):
        for gamma in self.gammas:
            if not 0.0 <= gamma < 1.0:
                raise GameError(f"gamma {gamma!r} outside [0, 1)")


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _load_scenario(identifier: str, manifest: RunManifest) -> ScenarioConfig | MarkovGame:
    if identifier in PRESET_NAMES:
        text = preset_text(identifier)
    else:
        path = Path(identifier)
        if not path.is_file():
            raise ScenarioError(
                f"unknown scenario {identifier!r}; available presets: "
                + ", ".join(PRESET_NAMES)
            )
        text = path.read_text(encoding="utf-8")
    parsed = parse_scenario_file(text)
    if isinstance(parsed, ScenarioConfig) and manifest.order is not None:
        parsed = replace(parsed, attacker_order=manifest.order)
    elif isinstance(parsed, MarkovGame) and manifest.order is not None:
        print("note: --order has no effect on explicit game files", file=sys.stderr)
    return parsed


def _game_at(parsed: ScenarioConfig | MarkovGame, gamma: float) -> MarkovGame:
    if isinstance(parsed, ScenarioConfig):
        return build_engagement_game(replace(parsed, gamma=gamma))
    return replace(parsed, gamma=gamma)


def _default_gamma(parsed: ScenarioConfig | MarkovGame) -> float:
    return parsed.gamma


def _fit(algorithm: str, game: MarkovGame) -> MarkovGameSolver:
    return ALGORITHMS[algorithm]().fit(game)


def _strategy_line(game: MarkovGame, solver: MarkovGameSolver, state_name: str) -> str:
    state = game.state_by_name(state_name)
    labels = game.action_sets[state.action_set_id].defender
    strategy = solver.policy_[state.id]
    parts = " ".join(f"{label}={p:.2f}" for label, p in zip(labels, strategy))
    return f"{state_name}: {parts} | value={solver.values_[state.id]:.2f}"


def cmd_solve(manifest: RunManifest) -> int:
    parsed = _load_scenario(manifest.scenarios[0], manifest)
    gammas = manifest.gammas or (_default_gamma(parsed),)
    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for gamma in gammas:
        game = _game_at(parsed, gamma)
        for algorithm in manifest.algorithms:
            solver = _fit(algorithm, game)
            for state in game.states:
                labels = game.action_sets[state.action_set_id].defender
                for label, probability in zip(labels, solver.policy_[state.id]):
                    rows.append(
                        (
                            manifest.scenarios[0],
                            algorithm,
                            _fmt(gamma),
                            str(state.id),
                            state.label(),
                            _fmt(solver.values_[state.id]),
                            label,
                            _fmt(probability),
                        )
                    )
            print(f"[{algorithm} gamma={gamma:g}]")
            if isinstance(parsed, ScenarioConfig):
                for state_name, _ in STAGE_STATES:
                    print("  " + _strategy_line(game, solver, state_name))
            else:
                for state in game.states:
                    if not state.terminal:
                        print("  " + _strategy_line(game, solver, state.label()))
    out_file = manifest.out_dir / "strategies.csv"
    with out_file.open("w", encoding="utf-8") as stream:
        stream.write("scenario,algorithm,gamma,state,state_name,value,action,probability\n")
        for row in rows:
            stream.write(",".join(row) + "\n")
    print(f"wrote {out_file}")
    return 0


def cmd_sweep(manifest: RunManifest) -> int:
    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for identifier in manifest.scenarios:
        parsed = _load_scenario(identifier, manifest)
        for gamma in manifest.gammas:
            game = _game_at(parsed, gamma)
            if isinstance(parsed, ScenarioConfig):
                tracked = [game.state_by_name(name) for name in TRACKED_STATES]
            else:
                tracked = list(game.states)
            for algorithm in manifest.algorithms:
                solver = _fit(algorithm, game)
                for state in tracked:
                    rows.append(
                        (
                            identifier,
                            algorithm,
                            str(state.id),
                            state.label(),
                            _fmt(gamma),
                            _fmt(solver.values_[state.id]),
                        )
                    )
    out_file = manifest.out_dir / "sweep.csv"
    with out_file.open("w", encoding="utf-8") as stream:
        stream.write("scenario,algorithm,state,state_name,gamma,value\n")
        for row in rows:
            stream.write(",".join(row) + "\n")
    print(f"wrote {out_file}")
    return 0


_ATTACKER_KINDS = {
    "h1": AttackerKind.H1_CONTINUE,
    "h2": AttackerKind.H2_CHANGE,
    "best-response": AttackerKind.BEST_RESPONSE,
}


def cmd_simulate(manifest: RunManifest) -> int:
    parsed = _load_scenario(manifest.scenarios[0], manifest)
    gamma = manifest.gammas[0] if manifest.gammas else _default_gamma(parsed)
    game = _game_at(parsed, gamma)
    manifest.out_dir.mkdir(parents=True, exist_ok=True)

    policy_solver = _fit(manifest.policy, game)
    policy = policy_solver.policy_
    attacker = AttackerModel(
        kind=_ATTACKER_KINDS[manifest.attacker],
        escape_probability=manifest.escape,
        caution_probability=manifest.caution,
    )
    stats, traces = simulate_episodes(
        game,
        policy,
        attacker,
        episodes=manifest.episodes,
        seed=manifest.seed,
        horizon_cap=manifest.horizon,
        collect_traces=manifest.traces,
    )
    analytic = float(FixedPolicySolver(policy=policy).fit(game).values_[0])
    delta = stats.mean - analytic
    within = abs(delta) <= 3.0 * stats.std_error if stats.completed else False

    stats_file = manifest.out_dir / "stats.csv"
    with stats_file.open("w", encoding="utf-8") as stream:
        stream.write(
            "scenario,attacker,policy,gamma,episodes,seed,completed,capped,"
            "mean,variance,std_error,undiscounted_mean,trap_count,escape_count,"
            "analytic_value,delta,within_three_se\n"
        )
        stream.write(
            ",".join(
                [
                    manifest.scenarios[0],
                    manifest.attacker,
                    manifest.policy,
                    _fmt(gamma),
                    str(manifest.episodes),
                    str(manifest.seed),
                    str(stats.completed),
                    str(stats.capped),
                    _fmt(stats.mean),
                    _fmt(stats.variance),
                    _fmt(stats.std_error),
                    _fmt(stats.undiscounted_mean),
                    str(stats.trap_count),
                    str(stats.escape_count),
                    _fmt(analytic),
                    _fmt(delta),
                    str(within).lower(),
                ]
            )
            + "\n"
        )
    histogram_file = manifest.out_dir / "histogram.csv"
    with histogram_file.open("w", encoding="utf-8") as stream:
        stream.write("state,state_name,count\n")
        for state_id in sorted(stats.terminal_histogram):
            stream.write(
                f"{state_id},{game.state(state_id).label()},"
                f"{stats.terminal_histogram[state_id]}\n"
            )
    if manifest.traces and traces is not None:
        with (manifest.out_dir / "traces.csv").open("w", encoding="utf-8") as stream:
            export_traces(traces, stream)

    if manifest.attacker == "h2":
        baseline = AttackerModel(kind=AttackerKind.H1_CONTINUE)
        report = hypothesis_report(
            game, policy, baseline, attacker, manifest.episodes, manifest.seed,
            horizon_cap=manifest.horizon,
        )
        with (manifest.out_dir / "hypotheses.csv").open("w", encoding="utf-8") as stream:
            stream.write(
                "h1_mean,h2_mean,difference,ci_low,ci_high,"
                "h1_traps,h2_traps,h2_escapes\n"
            )
            stream.write(
                ",".join(
                    [
                        _fmt(report.baseline.mean),
                        _fmt(report.adaptive.mean),
                        _fmt(report.mean_difference),
                        _fmt(report.ci_low),
                        _fmt(report.ci_high),
                        str(report.baseline.trap_count),
                        str(report.adaptive.trap_count),
                        str(report.adaptive.escape_count),
                    ]
                )
                + "\n"
            )
        print(
            f"h1 mean {report.baseline.mean:.4f} vs h2 mean {report.adaptive.mean:.4f} "
            f"(difference CI [{report.ci_low:.4f}, {report.ci_high:.4f}])"
        )

    print(
        f"mean {stats.mean:.4f} (+/- {stats.std_error:.4f}), analytic {analytic:.4f}, "
        f"delta {delta:.4f}, within 3 SE: {str(within).lower()}"
    )
    print(f"wrote {stats_file}")
    return 0


def cmd_ingest(manifest: RunManifest) -> int:
    assert manifest.records is not None
    text = manifest.records.read_text(encoding="utf-8")
    manifest.out_dir.mkdir(parents=True, exist_ok=True)

    first = next((line.strip() for line in text.splitlines() if line.strip()), "")
    derived: dict[str, DerivedParams] = {}
    if first.replace(" ", "") == PARAMS_HEADER:
        # Re-ingesting an emitted parameter file round-trips unchanged.
        for line_no, line in enumerate(text.splitlines()[1:], start=2):
            if not line.strip():
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise RecordError(f"expected 4 fields, got {len(fields)}", line_no)
            values = [None if f.strip() == "" else float(f) for f in fields[1:]]
            derived[fields[0]] = DerivedParams(*values)
    else:
        records = parse_experiment_records(text)
        derived = derive_transition_probabilities(records)

    params_file = manifest.out_dir / "derived_params.csv"
    with params_file.open("w", encoding="utf-8") as stream:
        stream.write(PARAMS_HEADER + "\n")
        for service, params in derived.items():
            cells = [
                "" if value is None else _fmt(value)
                for value in (params.p_real_no_hp, params.p_trap, params.p_real_hp)
            ]
            stream.write(",".join([service, *cells]) + "\n")

    report = compare_with_published(derived)
    discrepancy_file = manifest.out_dir / "discrepancy.csv"
    with discrepancy_file.open("w", encoding="utf-8") as stream:
        stream.write("service,field,derived,published,mismatch\n")
        for row in report:
            derived_cell = "" if row.derived is None else _fmt(row.derived)
            stream.write(
                f"{row.service},{row.field},{derived_cell},"
                f"{_fmt(row.published)},{str(row.mismatch).lower()}\n"
            )
    flagged = [row for row in report if row.mismatch]
    for row in flagged:
        print(
            f"mismatch: {row.service} {row.field} derived="
            f"{'n/a' if row.derived is None else f'{row.derived:.4f}'} "
            f"published={row.published:.4f}"
        )
    print(f"wrote {params_file} and {discrepancy_file}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="honeygame",
        description="Zero-sum Markov game strategies for honey-patch deception engagements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, multi_scenario: bool = False) -> None:
        p.add_argument(
            "--scenario",
            action="append",
            default=None,
            help="preset name or scenario file path"
            + (" (repeatable)" if multi_scenario else ""),
        )
        p.add_argument("--gamma", action="append", type=float, default=None,
                       help="discount factor (repeatable)")
        p.add_argument("--order", choices=("free", "fixed"), default=None,
                       help="override the scenario's attacker order")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=7, help="random seed (default: 7)")

    p_solve = sub.add_parser("solve", help="compute strategies and values")
    common(p_solve)
    p_solve.add_argument("--alg", choices=("opt", "mmp", "urs", "all"), default="opt")

    p_sweep = sub.add_parser("sweep", help="value-versus-gamma series for trap states")
    common(p_sweep, multi_scenario=True)
    p_sweep.add_argument("--alg", choices=("opt", "mmp", "urs", "all"), default="all")

    p_sim = sub.add_parser("simulate", help="Monte Carlo attacker rollouts")
    common(p_sim)
    p_sim.add_argument("--attacker", choices=tuple(_ATTACKER_KINDS), default="h1")
    p_sim.add_argument("--policy", choices=("opt", "mmp", "urs", "uniform"), default="opt")
    p_sim.add_argument("--episodes", type=int, default=10_000)
    p_sim.add_argument("--escape", type=float, default=0.1,
                       help="h2 escape probability (default: 0.1)")
    p_sim.add_argument("--caution", type=float, default=0.5,
                       help="h2 caution probability (default: 0.5)")
    p_sim.add_argument("--horizon", type=int, default=100, help="horizon cap (default: 100)")
    p_sim.add_argument("--traces", action="store_true", help="also write episode traces")

    p_ingest = sub.add_parser("ingest", help="derive transition probabilities from records")
    p_ingest.add_argument("--records", required=True, help="experiment records CSV")
    p_ingest.add_argument("--out", default="out", help="output directory (default: out)")
    return parser


def _manifest_from(args: argparse.Namespace) -> RunManifest:
    scenarios = tuple(args.scenario or ("paper_expert_uniform",)) if hasattr(args, "scenario") else ()
    gammas = tuple(args.gamma) if getattr(args, "gamma", None) else ()
    alg = getattr(args, "alg", "opt")
    algorithms = ("opt", "mmp", "urs") if alg == "all" else (alg,)
    policy = getattr(args, "policy", "opt")
    return RunManifest(
        command=args.command,
        scenarios=scenarios,
        gammas=gammas,
        seed=getattr(args, "seed", 7),
        out_dir=Path(getattr(args, "out", "out")),
        algorithms=algorithms,
        attacker=getattr(args, "attacker", "h1"),
        policy="urs" if policy == "uniform" else policy,
        episodes=getattr(args, "episodes", 10_000),
        escape=getattr(args, "escape", 0.1),
        caution=getattr(args, "caution", 0.5),
        order=getattr(args, "order", None),
        horizon=getattr(args, "horizon", 100),
        traces=getattr(args, "traces", False),
        records=Path(args.records) if getattr(args, "records", None) else None,
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "sweep": cmd_sweep,
        "simulate": cmd_simulate,
        "ingest": cmd_ingest,
    }
    try:
        manifest = _manifest_from(args)
        return handlers[args.command](manifest)
    except (ScenarioError, GameError) as exc:
        if isinstance(exc, ConvergenceError):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RecordError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
