"""Minimal noise fraction admitting a local hidden-variable model.

The hidden model is a nonnegative joint distribution P(k,m;l,n) over the
outcomes of both observables on both sides.  Its four pairwise marginals
must reproduce the noisy quantum table ``F/N**2 + (1-F)*P_pure``; the
smallest such F is found by a linear program with N**4 + 1 unknowns (the
hidden probabilities plus F itself) and 4*N**2 + 1 equality rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import ProbabilityTable
from .simplex import (
    OPTIMAL,
    LpProblem,
    LpSolution,
    solve_columns,
    solve_lp,
)


@dataclass(frozen=True)
class LhvThreshold:
    """Threshold noise fraction plus the hidden joint distribution achieving it.

    ``hidden`` has shape (N, N, N, N) with axes ordered (k, m, l, n): the
    outcomes of A1, A2, B1, B2.
    """

    f_min: float
    hidden: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.f_min <= 1.0:
            raise ValueError(f"f_min must lie in [0, 1], got {self.f_min}")
        hidden = np.asarray(self.hidden, dtype=float)
        n = hidden.shape[0]
        if hidden.shape != (n, n, n, n):
            raise ValueError(f"hidden distribution must be N^4, got shape {hidden.shape}")
        if np.any(hidden < 0.0):
            raise ValueError("hidden probabilities must be nonnegative")
        total = float(hidden.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"hidden probabilities must sum to 1, got {total}")
        object.__setattr__(self, "hidden", hidden)


def build_lp(table: ProbabilityTable) -> LpProblem:
    """Assemble the threshold LP in dense form.

    Variables are the N**4 hidden probabilities (row-major over (k, m, l, n))
    followed by the noise fraction f.  Each marginal row reads
    ``sum(hidden marginal) + f*(Q - 1/N**2) = Q``; the final row is the
    normalization ``sum(hidden) = 1``.  The objective minimizes f.
    """
    n = table.dim
    nv = n**4 + 1
    rows = 4 * n**2 + 1
    q = table.blocks.reshape(-1)
    a = np.zeros((rows, nv))
    x_index = np.arange(n**4).reshape(n, n, n, n)
    for first in range(n):
        for second in range(n):
            a[0 * n**2 + first * n + second, x_index[first, :, second, :].ravel()] = 1.0
            a[1 * n**2 + first * n + second, x_index[first, :, :, second].ravel()] = 1.0
            a[2 * n**2 + first * n + second, x_index[:, first, second, :].ravel()] = 1.0
            a[3 * n**2 + first * n + second, x_index[:, first, :, second].ravel()] = 1.0
    a[: 4 * n**2, -1] = q - 1.0 / n**2
    a[-1, : n**4] = 1.0
    rhs = np.concatenate([q, [1.0]])
    objective = np.zeros(nv)
    objective[-1] = 1.0
    return LpProblem(a, rhs, objective)


class _ThresholdColumns:
    """Column provider for the threshold LP, avoiding the dense N^4 matrix.

    Every hidden-probability column holds a 1 in exactly five rows (its four
    marginal rows plus normalization), so reduced costs reduce to a
    broadcast sum of the four blocks of the pricing vector.
    """

    def __init__(self, dim: int, q: np.ndarray):
        self.dim = dim
        self.q = q
        self.f_col = q - 1.0 / dim**2  # marginal-row coefficients of f
        self.num_rows = 4 * dim**2 + 1
        self.num_cols = dim**4 + 1

    def price_row(self, y: np.ndarray) -> np.ndarray:
        """y @ A: broadcast the four pricing blocks over the hidden tensor."""
        n = self.dim
        blocks = y[: 4 * n**2].reshape(4, n, n)
        # pair the blocks sharing an observer before the full n^4 broadcast
        a_side = blocks[0][:, :, None] + blocks[1][:, None, :]  # (k, l, n)
        b_side = blocks[2][:, :, None] + blocks[3][:, None, :] + y[-1]  # (m, l, n)
        out = np.empty(self.num_cols)
        np.add(
            a_side[:, None, :, :],
            b_side[None, :, :, :],
            out=out[:-1].reshape(n, n, n, n),
        )
        out[-1] = y[: 4 * n**2] @ self.f_col
        return out

    def _rows_of(self, j: int) -> list[int]:
        n = self.dim
        j, last = divmod(j, n)
        j, third = divmod(j, n)
        first, second = divmod(j, n)
        return [
            0 * n**2 + first * n + third,
            1 * n**2 + first * n + last,
            2 * n**2 + second * n + third,
            3 * n**2 + second * n + last,
            4 * n**2,
        ]

    def apply_binv(self, binv: np.ndarray, j: int) -> np.ndarray:
        if j == self.num_cols - 1:
            return binv[:, : 4 * self.dim**2] @ self.f_col
        return binv[:, self._rows_of(j)].sum(axis=1)

    def column(self, j: int) -> np.ndarray:
        out = np.zeros(self.num_rows)
        if j == self.num_cols - 1:
            out[: 4 * self.dim**2] = self.f_col
        else:
            out[self._rows_of(j)] = 1.0
        return out

    def basis_matrix(self, basis: np.ndarray) -> np.ndarray:
        m = self.num_rows
        out = np.zeros((m, m))
        for pos, j in enumerate(basis):
            if j >= self.num_cols:
                out[j - self.num_cols, pos] = 1.0
            else:
                out[:, pos] = self.column(int(j))
        return out

    def residual(self, x: np.ndarray, b: np.ndarray) -> float:
        n = self.dim
        ax = np.empty(self.num_rows)
        ax[: 4 * n**2] = _hidden_marginals(x[:-1].reshape(n, n, n, n)).reshape(-1)
        ax[: 4 * n**2] += x[-1] * self.f_col
        ax[-1] = x[:-1].sum()
        return float(np.max(np.abs(ax - b)))


def _hidden_marginals(hidden: np.ndarray) -> np.ndarray:
    """The four observed pairwise marginals of the hidden joint distribution."""
    return np.stack(
        [
            hidden.sum(axis=(1, 3)),  # (A1, B1)
            hidden.sum(axis=(1, 2)),  # (A1, B2)
            hidden.sum(axis=(0, 3)),  # (A2, B1)
            hidden.sum(axis=(0, 2)),  # (A2, B2)
        ]
    )


def critical_noise_fraction(table: ProbabilityTable, pricing: str = "devex") -> LhvThreshold:
    """Minimal noise fraction at which the table still has a hidden-variable model.

    Always solvable: at f = 1 the uniform hidden distribution reproduces the
    uniform noisy table.
    """
    n = table.dim
    q = table.blocks.reshape(-1)
    rhs = np.concatenate([q, [1.0]])
    objective = np.zeros(n**4 + 1)
    objective[-1] = 1.0
    sol = solve_columns(_ThresholdColumns(n, q), rhs, objective, pricing=pricing)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"threshold LP reported {sol.status}; it is feasible at f = 1")
    f_min = float(min(max(sol.objective_value, 0.0), 1.0))
    hidden = np.maximum(sol.variable_values[: n**4], 0.0).reshape(n, n, n, n)
    threshold = LhvThreshold(f_min, hidden, residual=0.0)
    return LhvThreshold(f_min, hidden, residual=verify_lhv_model(threshold, table))


def verify_lhv_model(threshold: LhvThreshold, table: ProbabilityTable) -> float:
    """Maximum deviation of the hidden model's marginals from the noisy table.

    Recomputed directly from the hidden tensor; shares nothing with the LP
    solver.
    """
    n = table.dim
    if threshold.hidden.shape[0] != n:
        raise ValueError("hidden distribution and table dimensions do not match")
    f = threshold.f_min
    target = f / n**2 + (1.0 - f) * table.blocks.reshape(4, n, n)
    marginals = _hidden_marginals(threshold.hidden)
    return float(np.max(np.abs(marginals - target)))


def has_lhv_model(table: ProbabilityTable, noise_fraction: float) -> bool:
    """Feasibility probe: does a hidden model exist at this fixed noise level?"""
    if not 0.0 <= noise_fraction <= 1.0:
        raise ValueError(f"noise fraction must lie in [0, 1], got {noise_fraction}")
    full = build_lp(table)
    a = full.constraint_matrix[:, :-1]
    rhs = full.rhs - noise_fraction * full.constraint_matrix[:, -1]
    sol = solve_lp(LpProblem(a, rhs, np.zeros(a.shape[1])))
    return sol.status == OPTIMAL


def chsh_oracle_threshold(table: ProbabilityTable) -> float:
    """Analytic two-outcome threshold from the strongest CHSH combination.

    With correlation functions ``E_ij = sum (-1)**(k+l) P(k,l|i,j)`` the
    noisy state admits a hidden model exactly when every signed CHSH sum
    stays within 2, giving ``f = max(0, 1 - 2/S)`` for the largest sum S.
    Serves as an independent cross-check of the LP at N = 2.
    """
    if table.dim != 2:
        raise ValueError(f"CHSH oracle requires N = 2, got N = {table.dim}")
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])
    e = np.einsum("ijkl,kl->ij", table.blocks, sign)
    combos = np.array(
        [
            e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1],
            e[0, 0] + e[0, 1] - e[1, 0] + e[1, 1],
            e[0, 0] - e[0, 1] + e[1, 0] + e[1, 1],
            -e[0, 0] + e[0, 1] + e[1, 0] + e[1, 1],
        ]
    )
    strongest = float(np.max(np.abs(combos)))
    if strongest <= 2.0:
        return 0.0
    return min(1.0, 1.0 - 2.0 / strongest)


__all__ = [
    "LhvThreshold",
    "LpProblem",
    "LpSolution",
    "build_lp",
    "chsh_oracle_threshold",
    "critical_noise_fraction",
    "has_lhv_model",
    "solve_lp",
    "verify_lhv_model",
]
