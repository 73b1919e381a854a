"""Domain types for finite two-player zero-sum Markov games.

A :class:`MarkovGame` bundles states, per-state action sets, defender
utility matrices, a stochastic transition kernel, and a shared discount
factor. Utilities are defender payoffs throughout; the attacker's payoff
is the negation of every entry (zero-sum convention). Utility matrices
are oriented attacker actions x defender actions.

Instances are immutable after construction and safe to share across any
number of threads; construction happens in builder code (see
:mod:`honeygame.scenario`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

# Canonical "do nothing" labels; always index 0 of their action list.
NO_OP = "no_op"
NO_MITIGATION = "no_mitigation"

# Tolerance for probability-distribution normalization checks.
PROB_TOL = 1e-9


class GameError(ValueError):
    """Problem with game data or its use."""


class UnknownStateError(GameError):
    """A state id does not exist in the game."""


class UnknownActionError(GameError):
    """An action label is not part of the state's action set."""


@dataclass(frozen=True)
class GameState:
    """One node of the engagement graph.

    ``real_flags`` and ``hp_flags`` count captured real and honeypot
    flags. Terminal states expose exactly one joint action
    (``no_op``/``no_mitigation``) and absorb with probability one.
    """

    id: int
    real_flags: int
    hp_flags: int
    action_set_id: str
    terminal: bool
    name: str = ""

    def label(self) -> str:
        return self.name or f"state_{self.id}"


@dataclass(frozen=True)
class ActionSet:
    """Ordered attacker and defender action labels for a state class."""

    attacker: tuple[str, ...]
    defender: tuple[str, ...]

    def attacker_index(self, label: str) -> int:
        try:
            return self.attacker.index(label)
        except ValueError:
            raise UnknownActionError(f"unknown attacker action {label!r}") from None

    def defender_index(self, label: str) -> int:
        try:
            return self.defender.index(label)
        except ValueError:
            raise UnknownActionError(f"unknown defender action {label!r}") from None


# Successor distribution: ((state id, probability), ...)
Distribution = tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class TransitionModel:
    """Probability kernel over successors given (state, joint action)."""

    kernel: Mapping[tuple[int, str, str], Distribution]

    def successors(
        self, state_id: int, attacker_action: str, defender_action: str
    ) -> Distribution:
        key = (state_id, attacker_action, defender_action)
        if key not in self.kernel:
            raise UnknownActionError(
                f"no transition entry for state {state_id}, joint action "
                f"({attacker_action!r}, {defender_action!r})"
            )
        return self.kernel[key]


@dataclass(frozen=True, eq=False)
class MarkovGame:
    """Finite two-player zero-sum Markov game.

    ``utilities`` maps an action-set id to the defender payoff matrix
    shared by all states using that action set. ``max_flags`` bounds
    ``real_flags + hp_flags`` per state (``None`` disables the check for
    generic games).
    """

    states: tuple[GameState, ...]
    action_sets: Mapping[str, ActionSet]
    utilities: Mapping[str, np.ndarray]
    transitions: TransitionModel
    gamma: float
    max_flags: int | None = 3

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state(self, state_id: int) -> GameState:
        if not 0 <= state_id < len(self.states):
            raise UnknownStateError(f"unknown state id {state_id}")
        return self.states[state_id]

    def state_by_name(self, name: str) -> GameState:
        for state in self.states:
            if state.name == name:
                return state
        raise UnknownStateError(f"no state named {name!r}")

    def action_set(self, state_id: int) -> ActionSet:
        return self.action_sets[self.state(state_id).action_set_id]

    def available_actions(self, state_id: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """Attacker and defender action labels available at a state."""
        actions = self.action_set(state_id)
        return actions.attacker, actions.defender

    def utility_matrix(self, state_id: int) -> np.ndarray:
        return self.utilities[self.state(state_id).action_set_id]

    def successor_distribution(
        self, state_id: int, attacker_action: str, defender_action: str
    ) -> Distribution:
        """Normalized successor distribution for a joint action.

        Raises :class:`UnknownActionError` if either action is not part
        of the state's action set.
        """
        actions = self.action_set(state_id)
        actions.attacker_index(attacker_action)
        actions.defender_index(defender_action)
        return self.transitions.successors(state_id, attacker_action, defender_action)


@dataclass(frozen=True)
class Violation:
    """One violated invariant, with coordinates where applicable."""

    code: str
    message: str
    state_id: int | None = None

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


def _check_action_list(
    violations: list[Violation], labels: tuple[str, ...], side: str, anchor: str, set_id: str
) -> None:
    if len(set(labels)) != len(labels):
        violations.append(
            Violation("duplicate_action", f"action set {set_id!r}: duplicate {side} labels {labels}")
        )
    if not labels or labels[0] != anchor:
        violations.append(
            Violation(
                "anchor_action",
                f"action set {set_id!r}: {side} action 0 must be {anchor!r}, got {labels[:1]}",
            )
        )


def validate_game(game: MarkovGame) -> list[Violation]:
    """Check every structural invariant; an empty report means valid.

    Data problems are returned, not raised, so callers can surface the
    full report at once.
    """
    violations: list[Violation] = []

    if not 0.0 <= game.gamma < 1.0:
        violations.append(
            Violation("gamma_range", f"discount out of range: gamma={game.gamma!r} not in [0, 1)")
        )

    for index, state in enumerate(game.states):
        if state.id != index:
            violations.append(
                Violation("state_id", f"state at position {index} has id {state.id}", state.id)
            )
        if game.max_flags is not None and state.real_flags + state.hp_flags > game.max_flags:
            violations.append(
                Violation(
                    "flag_budget",
                    f"state {state.label()}: real+hp flags exceed {game.max_flags}",
                    state.id,
                )
            )
        if state.action_set_id not in game.action_sets:
            violations.append(
                Violation(
                    "unknown_action_set",
                    f"state {state.label()}: action set {state.action_set_id!r} not defined",
                    state.id,
                )
            )

    for set_id, actions in game.action_sets.items():
        _check_action_list(violations, actions.attacker, "attacker", NO_OP, set_id)
        _check_action_list(violations, actions.defender, "defender", NO_MITIGATION, set_id)
        matrix = game.utilities.get(set_id)
        if matrix is None:
            violations.append(Violation("missing_utilities", f"action set {set_id!r}: no utility matrix"))
            continue
        expected = (len(actions.attacker), len(actions.defender))
        if matrix.shape != expected:
            violations.append(
                Violation(
                    "utility_shape",
                    f"action set {set_id!r}: utility shape {matrix.shape} != {expected}",
                )
            )
            continue
        if not np.all(np.isfinite(matrix)):
            violations.append(Violation("utility_finite", f"action set {set_id!r}: non-finite utility"))
        if abs(float(matrix[0, 0])) > 0.0:
            violations.append(
                Violation(
                    "origin_utility",
                    f"action set {set_id!r}: utility({NO_OP}, {NO_MITIGATION}) must be 0",
                )
            )

    for state in game.states:
        if state.action_set_id not in game.action_sets:
            continue
        actions = game.action_sets[state.action_set_id]
        if state.terminal and (len(actions.attacker), len(actions.defender)) != (1, 1):
            violations.append(
                Violation(
                    "terminal_actions",
                    f"terminal state {state.label()} must expose exactly one joint action",
                    state.id,
                )
            )
        for attacker_action in actions.attacker:
            for defender_action in actions.defender:
                key = (state.id, attacker_action, defender_action)
                entry = game.transitions.kernel.get(key)
                joint = f"({attacker_action}, {defender_action})"
                if entry is None:
                    violations.append(
                        Violation(
                            "missing_transition",
                            f"state {state.label()}, joint action {joint}: no distribution",
                            state.id,
                        )
                    )
                    continue
                total = 0.0
                for successor, probability in entry:
                    if not 0 <= successor < game.n_states:
                        violations.append(
                            Violation(
                                "bad_successor",
                                f"state {state.label()}, joint action {joint}: "
                                f"successor {successor} does not exist",
                                state.id,
                            )
                        )
                    if not 0.0 <= probability <= 1.0:
                        violations.append(
                            Violation(
                                "bad_probability",
                                f"state {state.label()}, joint action {joint}: "
                                f"probability {probability!r} outside [0, 1]",
                                state.id,
                            )
                        )
                    total += probability
                if abs(total - 1.0) > PROB_TOL:
                    violations.append(
                        Violation(
                            "distribution_sum",
                            f"state {state.label()}, joint action {joint}: "
                            f"probabilities sum to {total!r}",
                            state.id,
                        )
                    )
                if state.terminal and entry != ((state.id, 1.0),):
                    violations.append(
                        Violation(
                            "terminal_absorbing",
                            f"terminal state {state.label()} must self-loop with probability 1",
                            state.id,
                        )
                    )

    return violations


def require_valid(game: MarkovGame) -> MarkovGame:
    """Raise :class:`GameError` with the full report if the game is invalid."""
    violations = validate_game(game)
    if violations:
        summary = "; ".join(str(v) for v in violations[:8])
        more = f" (+{len(violations) - 8} more)" if len(violations) > 8 else ""
        raise GameError(f"invalid game: {summary}{more}")
    return game


def check_simplex(vector: np.ndarray, size: int, where: str) -> np.ndarray:
    """Validate a probability vector of the given size; returns it as float64."""
    array = np.asarray(vector, dtype=float)
    if array.shape != (size,):
        raise GameError(f"{where}: expected {size} probabilities, got shape {array.shape}")
    if np.any(array < -PROB_TOL):
        raise GameError(f"{where}: negative probability")
    if abs(float(array.sum()) - 1.0) > PROB_TOL:
        raise GameError(f"{where}: probabilities sum to {array.sum()!r}")
    return np.clip(array, 0.0, None)
