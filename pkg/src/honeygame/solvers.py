"""Defender strategy solvers with a scikit-learn style estimator API.

All solvers share one synchronous value-iteration loop; they differ only
in the per-state backup that turns a table of action values into a
defender strategy and a state value:

* :class:`MaximinSolver` - optimal mixed strategy (matrix-game LP backup).
* :class:`MinMaxPureSolver` - best pure defender action per state.
* :class:`UniformRandomSolver` - defender fixed to the uniform strategy.
* :class:`FixedPolicySolver` - evaluates a caller-supplied strategy.

Values are always the attacker best response to the (implied) defender
strategy, so ``values_`` of an evaluator is the defender's guaranteed
payoff under that policy. ``fit`` takes a validated
:class:`~honeygame.games.MarkovGame`; fitted attributes follow the
scikit-learn trailing-underscore convention so the estimators compose
with ``get_params`` / ``clone`` and the rest of the ecosystem.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .games import GameError, MarkovGame, check_simplex, require_valid
from .zerosum import solve_matrix_game

DefenderPolicy = Sequence[np.ndarray]


class ConvergenceError(GameError):
    """Raised when value iteration does not converge; carries the residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def q_values(game: MarkovGame, state_id: int, values: np.ndarray) -> np.ndarray:
    """One-step action-value table for a state given a value function.

    Entry (a, d) is the immediate defender payoff of the joint action plus
    the discounted expected value of the successor distribution. With
    ``gamma == 0`` this is exactly the state's utility matrix.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (game.n_states,):
        raise GameError(f"value function must cover all {game.n_states} states")
    state = game.state(state_id)
    actions = game.action_sets[state.action_set_id]
    table = np.array(game.utilities[state.action_set_id], dtype=float)
    if game.gamma > 0.0:
        for row, attacker_action in enumerate(actions.attacker):
            for col, defender_action in enumerate(actions.defender):
                successors = game.transitions.successors(
                    state_id, attacker_action, defender_action
                )
                table[row, col] += game.gamma * sum(
                    probability * values[successor] for successor, probability in successors
                )
    return table


def check_policy(game: MarkovGame, policy: DefenderPolicy) -> list[np.ndarray]:
    """Validate a per-state defender strategy profile against a game."""
    if len(policy) != game.n_states:
        raise GameError(f"policy must cover all {game.n_states} states, got {len(policy)}")
    checked = []
    for state in game.states:
        size = len(game.action_sets[state.action_set_id].defender)
        checked.append(check_simplex(policy[state.id], size, f"policy[{state.label()}]"))
    return checked


class MarkovGameSolver(BaseEstimator):
    """Base value-iteration estimator; subclasses define the state backup.

    Parameters
    ----------
    tolerance : float
        Sup-norm change between sweeps at which iteration stops.
    max_iterations : int
        Sweep budget; exceeding it raises :class:`ConvergenceError`.

    Attributes
    ----------
    values_ : ndarray of shape (n_states,)
        Converged defender value per state.
    policy_ : list of ndarray
        Defender strategy per state (a simplex vector over that state's
        defender actions).
    iterations_ : int
        Number of sweeps performed.
    residual_ : float
        Final sup-norm change.
    residual_history_ : ndarray
        Sup-norm change after each sweep.
    """

    def __init__(self, tolerance: float = 1e-6, max_iterations: int = 10_000):
        self.tolerance = tolerance
        self.max_iterations = max_iterations

    def _backup(self, state_id: int, table: np.ndarray) -> tuple[np.ndarray, float]:
        raise NotImplementedError

    def _prepare(self, game: MarkovGame) -> None:
        """Hook for subclasses that validate fit-time inputs."""

    def fit(self, game: MarkovGame, y=None) -> "MarkovGameSolver":
        """Run value iteration on a game until the residual drops below tolerance."""
        require_valid(game)
        if not 0.0 <= game.gamma < 1.0:
            raise GameError(f"discount out of range: {game.gamma!r}")
        self._prepare(game)

        values = np.zeros(game.n_states)
        history: list[float] = []
        for _ in range(self.max_iterations):
            updated = np.empty_like(values)
            for state in game.states:
                _, updated[state.id] = self._backup(state.id, q_values(game, state.id, values))
            residual = float(np.abs(updated - values).max())
            history.append(residual)
            values = updated
            if residual < self.tolerance:
                break
        else:
            raise ConvergenceError(
                f"no convergence after {self.max_iterations} sweeps "
                f"(residual {history[-1]:.3e} > tolerance {self.tolerance:.3e})",
                residual=history[-1],
            )

        # Final extraction pass so the reported strategies match the
        # converged value function.
        policy: list[np.ndarray] = [np.empty(0)] * game.n_states
        for state in game.states:
            strategy, value = self._backup(state.id, q_values(game, state.id, values))
            policy[state.id] = strategy
            values[state.id] = value

        self.game_ = game
        self.values_ = values
        self.policy_ = policy
        self.iterations_ = len(history)
        self.residual_ = history[-1]
        self.residual_history_ = np.array(history)
        return self

    def state_value(self, state_id: int) -> float:
        check_is_fitted(self, "values_")
        self.game_.state(state_id)
        return float(self.values_[state_id])

    def state_strategy(self, state_id: int) -> np.ndarray:
        check_is_fitted(self, "policy_")
        self.game_.state(state_id)
        return self.policy_[state_id]

    def predict(self, state_ids: Sequence[int]) -> list[np.ndarray]:
        """Defender strategies for a sequence of state ids."""
        check_is_fitted(self, "policy_")
        return [self.state_strategy(int(state_id)) for state_id in state_ids]


class MaximinSolver(MarkovGameSolver):
    """Optimal mixed defender strategy via a matrix-game LP per state."""

    def _backup(self, state_id: int, table: np.ndarray) -> tuple[np.ndarray, float]:
        return solve_matrix_game(table)


class MinMaxPureSolver(MarkovGameSolver):
    """Best pure defender action per state (each column judged by its worst row)."""

    def _backup(self, state_id: int, table: np.ndarray) -> tuple[np.ndarray, float]:
        column_worst = table.min(axis=0)
        best = int(np.argmax(column_worst))  # ties resolve to the lowest index
        strategy = np.zeros(table.shape[1])
        strategy[best] = 1.0
        return strategy, float(column_worst[best])


class UniformRandomSolver(MarkovGameSolver):
    """Attacker best-response value of the uniform defender strategy."""

    def _backup(self, state_id: int, table: np.ndarray) -> tuple[np.ndarray, float]:
        cols = table.shape[1]
        strategy = np.full(cols, 1.0 / cols)
        return strategy, float((table @ strategy).min())


class FixedPolicySolver(MarkovGameSolver):
    """Attacker best-response value of a caller-supplied stationary policy.

    Parameters
    ----------
    policy : sequence of ndarray
        One defender strategy per state id.
    """

    def __init__(
        self,
        policy: DefenderPolicy | None = None,
        tolerance: float = 1e-6,
        max_iterations: int = 10_000,
    ):
        super().__init__(tolerance=tolerance, max_iterations=max_iterations)
        self.policy = policy

    def _prepare(self, game: MarkovGame) -> None:
        if self.policy is None:
            raise GameError("FixedPolicySolver requires a policy")
        self._checked_policy = check_policy(game, self.policy)

    def _backup(self, state_id: int, table: np.ndarray) -> tuple[np.ndarray, float]:
        strategy = self._checked_policy[state_id]
        return strategy, float((table @ strategy).min())
