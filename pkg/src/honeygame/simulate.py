"""Monte Carlo rollouts of behavioral attacker models.

Rolls episodes of a :class:`~honeygame.games.MarkovGame` from state 0
against a fixed per-state defender strategy and estimates the defender's
discounted payoff. Three attacker behaviors are available:

* ``H1_CONTINUE`` - works through the vulnerabilities in a fixed
  preference order and never reacts to being trapped in a decoy.
* ``H2_CHANGE`` - on entering a trap, attempts to escape back to the
  pre-trap state (retrying the same vulnerability) with
  ``escape_probability``; after a failed escape it turns cautious and
  substitutes ``no_op`` for its next exploit with ``caution_probability``
  at each subsequent step.
* ``BEST_RESPONSE`` - plays the attacker's optimal stationary response
  to the defender strategy, computed analytically.

Episodes are seeded per index (``seed + episode``), so any parallel
split of the episode range reproduces the sequential results exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .games import NO_OP, GameError, MarkovGame
from .scenario import VULNERABILITIES
from .solvers import DefenderPolicy, FixedPolicySolver, check_policy, q_values

OUTCOME_REAL = "real_flag"
OUTCOME_TRAP = "honeypot_flag"
OUTCOME_NONE = "no_flag"
OUTCOME_IDLE = "no_op"
OUTCOME_ESCAPE = "escaped_trap"


class AttackerKind(enum.Enum):
    H1_CONTINUE = "h1"
    H2_CHANGE = "h2"
    BEST_RESPONSE = "best_response"


@dataclass(frozen=True)
class AttackerModel:
    """Behavioral attacker description.

    ``order`` lists vulnerability names in preference order and must be a
    permutation of the scenario's vulnerabilities. ``escape_probability``
    and ``caution_probability`` apply to ``H2_CHANGE`` only.
    """

    kind: AttackerKind
    order: tuple[str, ...] = VULNERABILITIES
    escape_probability: float = 0.1
    caution_probability: float = 0.5

    def __post_init__(self):
        for name in ("escape_probability", "caution_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise GameError(f"{name}={value!r} outside [0, 1]")


@dataclass(frozen=True)
class TraceStep:
    """One transition of an episode, recorded before the state advances."""

    state_id: int
    attacker_action: str
    defender_action: str
    outcome: str
    payoff: float


@dataclass(frozen=True)
class EpisodeTrace:
    steps: tuple[TraceStep, ...]
    real_flags: int
    hp_flags: int
    traps: int
    escapes: int
    final_state: int
    capped: bool
    discounted_payoff: float
    undiscounted_payoff: float


@dataclass(frozen=True)
class PayoffStats:
    """Aggregate payoff estimate over completed episodes.

    Episodes that hit the horizon cap are counted in ``capped`` and kept
    out of every mean; ``sum(terminal_histogram.values()) + capped``
    equals ``episodes``.
    """

    episodes: int
    completed: int
    capped: int
    mean: float
    variance: float
    std_error: float
    undiscounted_mean: float
    terminal_histogram: dict[int, int]
    trap_count: int
    escape_count: int


@dataclass(frozen=True)
class HypothesisReport:
    """Paired comparison of two attacker models against one defender."""

    baseline: PayoffStats
    adaptive: PayoffStats
    mean_difference: float
    ci_low: float
    ci_high: float


def _sample(rng: np.random.Generator, cumulative: np.ndarray) -> int:
    return int(np.searchsorted(cumulative, rng.random(), side="right"))


def _exploit_label(name: str, names: Sequence[str]) -> str:
    return f"exp_{names.index(name) + 1}"


def _vulnerability_index(label: str) -> int | None:
    """1-based position from an ``exp_<i>`` label; None for foreign labels."""
    head, _, tail = label.rpartition("_")
    return int(tail) if head and tail.isdigit() else None


class _EpisodeRunner:
    """Shared immutable context for one simulation run."""

    def __init__(
        self,
        game: MarkovGame,
        policy: list[np.ndarray],
        attacker: AttackerModel,
        names: Sequence[str],
        horizon_cap: int,
    ):
        self.game = game
        self.attacker = attacker
        self.names = list(names)
        self.horizon_cap = horizon_cap
        self.policy_cum = [np.cumsum(p) for p in policy]
        self.kernel_cum: dict[tuple[int, str, str], tuple[list[int], np.ndarray]] = {}
        self.preference = [_exploit_label(name, self.names) for name in attacker.order]
        self.best_action: list[str] | None = None
        if attacker.kind is AttackerKind.BEST_RESPONSE:
            values = FixedPolicySolver(policy=policy).fit(game).values_
            self.best_action = []
            for state in game.states:
                table = q_values(game, state.id, values)
                expected = table @ policy[state.id]
                labels = game.action_sets[state.action_set_id].attacker
                self.best_action.append(labels[int(np.argmin(expected))])

    def _successors(self, key: tuple[int, str, str]) -> tuple[list[int], np.ndarray]:
        cached = self.kernel_cum.get(key)
        if cached is None:
            entry = self.game.transitions.kernel[key]
            cached = ([s for s, _ in entry], np.cumsum([p for _, p in entry]))
            self.kernel_cum[key] = cached
        return cached

    def _mark_resolved(self, label: str, resolved: set[str]) -> None:
        index = _vulnerability_index(label)
        if index is not None and 1 <= index <= len(self.names):
            resolved.add(self.names[index - 1])

    def _choose(self, state_id: int, resolved: set[str], cautious: bool,
                rng: np.random.Generator) -> str:
        if self.best_action is not None:
            return self.best_action[state_id]
        attacker = self.attacker
        if (
            cautious
            and attacker.caution_probability > 0.0
            and rng.random() < attacker.caution_probability
        ):
            return NO_OP
        available = self.game.action_sets[self.game.states[state_id].action_set_id].attacker
        for name, label in zip(attacker.order, self.preference):
            if name not in resolved and label in available:
                return label
        if len(available) > 1:  # preferences exhausted: take whatever exploit remains
            return available[1]
        return NO_OP

    def run(self, rng: np.random.Generator, collect: bool) -> EpisodeTrace:
        game = self.game
        gamma = game.gamma
        state = game.states[0]
        resolved: set[str] = set()
        cautious = False
        real_tally = hp_tally = traps = escapes = 0
        discounted = undiscounted = 0.0
        steps: list[TraceStep] = []

        for t in range(self.horizon_cap):
            if state.terminal:
                break
            actions = game.action_sets[state.action_set_id]
            attacker_action = self._choose(state.id, resolved, cautious, rng)
            attacker_index = actions.attacker.index(attacker_action)
            defender_index = _sample(rng, self.policy_cum[state.id])
            defender_action = actions.defender[defender_index]
            payoff = float(game.utilities[state.action_set_id][attacker_index, defender_index])
            discounted += (gamma**t) * payoff
            undiscounted += payoff

            ids, cumulative = self._successors((state.id, attacker_action, defender_action))
            successor = game.states[ids[_sample(rng, cumulative)]]

            if attacker_action == NO_OP:
                outcome = OUTCOME_IDLE
            elif successor.real_flags == state.real_flags + 1:
                outcome = OUTCOME_REAL
                real_tally += 1
                self._mark_resolved(attacker_action, resolved)
            elif successor.hp_flags == state.hp_flags + 1:
                outcome = OUTCOME_TRAP
                traps += 1
                hp_tally += 1
                if self.attacker.kind is AttackerKind.H2_CHANGE:
                    escaped = (
                        self.attacker.escape_probability > 0.0
                        and rng.random() < self.attacker.escape_probability
                    )
                    if escaped:
                        escapes += 1
                        hp_tally -= 1
                        successor = state  # back out of the decoy, retry
                        outcome = OUTCOME_ESCAPE
                    else:
                        cautious = True
                        self._mark_resolved(attacker_action, resolved)
                else:
                    self._mark_resolved(attacker_action, resolved)
            else:
                outcome = OUTCOME_NONE

            if collect:
                steps.append(
                    TraceStep(state.id, attacker_action, defender_action, outcome, payoff)
                )
            state = successor

        return EpisodeTrace(
            steps=tuple(steps),
            real_flags=real_tally,
            hp_flags=hp_tally,
            traps=traps,
            escapes=escapes,
            final_state=state.id,
            capped=not state.terminal,
            discounted_payoff=discounted,
            undiscounted_payoff=undiscounted,
        )


def simulate_episodes(
    game: MarkovGame,
    policy: DefenderPolicy,
    attacker: AttackerModel,
    episodes: int,
    seed: int,
    horizon_cap: int = 100,
    collect_traces: bool = False,
    vulnerability_names: Sequence[str] = VULNERABILITIES,
) -> tuple[PayoffStats, list[EpisodeTrace] | None]:
    """Roll seeded episodes and aggregate defender payoffs.

    Returns the payoff statistics and, when ``collect_traces`` is set,
    the full per-episode traces. Results are a pure function of the
    arguments; episode ``i`` always consumes the stream seeded with
    ``seed + i``.
    """
    if episodes < 1:
        raise GameError("episodes must be at least 1")
    if horizon_cap < 1:
        raise GameError("horizon_cap must be at least 1")
    if sorted(attacker.order) != sorted(vulnerability_names):
        raise GameError(
            f"attacker order {attacker.order!r} is not a permutation of {tuple(vulnerability_names)!r}"
        )
    checked = check_policy(game, policy)
    runner = _EpisodeRunner(game, checked, attacker, vulnerability_names, horizon_cap)

    traces: list[EpisodeTrace] = []
    payoffs: list[float] = []
    undiscounted: list[float] = []
    histogram: dict[int, int] = {}
    capped = traps = escapes = 0
    for episode in range(episodes):
        trace = runner.run(np.random.default_rng(seed + episode), collect_traces)
        if collect_traces:
            traces.append(trace)
        if trace.capped:
            capped += 1
        else:
            payoffs.append(trace.discounted_payoff)
            undiscounted.append(trace.undiscounted_payoff)
            histogram[trace.final_state] = histogram.get(trace.final_state, 0) + 1
        traps += trace.traps
        escapes += trace.escapes

    completed = len(payoffs)
    if completed:
        mean = float(np.mean(payoffs))
        variance = float(np.var(payoffs, ddof=1)) if completed > 1 else 0.0
        std_error = math.sqrt(variance / completed)
        undiscounted_mean = float(np.mean(undiscounted))
    else:
        mean = variance = std_error = undiscounted_mean = float("nan")
    stats = PayoffStats(
        episodes=episodes,
        completed=completed,
        capped=capped,
        mean=mean,
        variance=variance,
        std_error=std_error,
        undiscounted_mean=undiscounted_mean,
        terminal_histogram=histogram,
        trap_count=traps,
        escape_count=escapes,
    )
    return stats, (traces if collect_traces else None)


def hypothesis_report(
    game: MarkovGame,
    policy: DefenderPolicy,
    h1: AttackerModel,
    h2: AttackerModel,
    episodes: int,
    seed: int,
    horizon_cap: int = 100,
    vulnerability_names: Sequence[str] = VULNERABILITIES,
) -> HypothesisReport:
    """Compare two attacker models against one defender strategy.

    Both runs consume the same per-episode seeds, so models that behave
    identically produce identical statistics and a zero-width mean
    difference.
    """
    stats: list[PayoffStats] = []
    for model in (h1, h2):
        result, _ = simulate_episodes(
            game,
            policy,
            model,
            episodes,
            seed,
            horizon_cap=horizon_cap,
            vulnerability_names=vulnerability_names,
        )
        stats.append(result)
    baseline, adaptive = stats
    difference = adaptive.mean - baseline.mean
    combined = math.sqrt(baseline.std_error**2 + adaptive.std_error**2)
    return HypothesisReport(
        baseline=baseline,
        adaptive=adaptive,
        mean_difference=difference,
        ci_low=difference - 1.96 * combined,
        ci_high=difference + 1.96 * combined,
    )


def export_traces(traces: Iterable[EpisodeTrace], stream: TextIO) -> None:
    """Write traces as CSV, one step per line."""
    stream.write("episode,step,state,attacker_action,defender_action,outcome,payoff\n")
    for episode, trace in enumerate(traces):
        for step_index, step in enumerate(trace.steps):
            stream.write(
                f"{episode},{step_index},{step.state_id},{step.attacker_action},"
                f"{step.defender_action},{step.outcome},{step.payoff:.6f}\n"
            )
