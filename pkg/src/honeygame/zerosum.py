"""Maximin mixed strategies for two-player zero-sum matrix games.

The defender mixes over columns of a payoff matrix (rows are attacker
actions, entries are defender payoffs) to maximize the worst case over
rows. The standard linear program is

    maximize v  subject to  sum_j pi_j * U[i, j] >= v  for every row i,
                            sum_j pi_j = 1,  pi >= 0.

Solved with scipy's HiGHS backend. A second pass picks, among optimal
strategies, the one that lexicographically minimizes probability mass on
higher-indexed defender actions, so results are deterministic across runs
and platforms.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .games import GameError

# Allowed optimality slack when refining among optimal strategies.
VALUE_SLACK = 1e-9


def _lexicographic_refinement(matrix: np.ndarray, value: float) -> np.ndarray:
    """Among strategies achieving ``value``, minimize mass on high columns.

    Geometric weights 2**j implement the lexicographic order exactly for
    mass-conserving moves on the simplex.
    """
    rows, cols = matrix.shape
    weights = np.power(2.0, np.arange(cols))
    result = linprog(
        weights,
        A_ub=-matrix,
        b_ub=np.full(rows, -(value - VALUE_SLACK)),
        A_eq=np.ones((1, cols)),
        b_eq=[1.0],
        bounds=[(0.0, None)] * cols,
        method="highs",
    )
    if not result.success:
        raise GameError(f"matrix game refinement failed: {result.message}")
    strategy = np.clip(result.x, 0.0, None)
    return strategy / strategy.sum()


def solve_matrix_game(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    """Return the defender's maximin mixed strategy and the game value.

    The returned strategy pi satisfies, for every attacker row a,
    ``sum_j pi[j] * matrix[a, j] >= value - 1e-9``.
    """
    payoff = np.asarray(matrix, dtype=float)
    if payoff.ndim != 2 or payoff.size == 0:
        raise GameError(f"matrix game needs a 2-D non-empty matrix, got shape {payoff.shape}")
    if not np.all(np.isfinite(payoff)):
        raise GameError("matrix game entries must be finite")

    rows, cols = payoff.shape
    if cols == 1:
        # Degenerate game: the defender has a single action.
        return np.array([1.0]), float(payoff.min())

    objective = np.zeros(cols + 1)
    objective[-1] = -1.0  # maximize v
    inequality = np.hstack([-payoff, np.ones((rows, 1))])  # v - U @ pi <= 0
    equality = np.zeros((1, cols + 1))
    equality[0, :cols] = 1.0
    result = linprog(
        objective,
        A_ub=inequality,
        b_ub=np.zeros(rows),
        A_eq=equality,
        b_eq=[1.0],
        bounds=[(0.0, None)] * cols + [(None, None)],
        method="highs",
    )
    if not result.success:
        raise GameError(f"matrix game LP failed: {result.message}")
    value = float(result.x[-1])
    strategy = _lexicographic_refinement(payoff, value)
    return strategy, value


def best_response_value(matrix: np.ndarray, strategy: np.ndarray) -> float:
    """Attacker best-response payoff (to the defender) against ``strategy``."""
    payoff = np.asarray(matrix, dtype=float)
    return float((payoff @ np.asarray(strategy, dtype=float)).min())
