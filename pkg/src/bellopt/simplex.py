"""Self-contained dense two-phase primal simplex for equality-form LPs.

Solves ``min c.x  s.t.  A x = b, x >= 0``.  Phase 1 starts from an
all-artificial basis and tolerates linearly dependent rows: artificials
stuck on dependent rows simply stay basic at zero.

Three pricing rules are available.  ``devex`` (the default) uses Harris
reference weights and handles the heavy degeneracy of marginal-constraint
polytopes well; ``dantzig`` picks the most negative reduced cost; ``bland``
picks the lowest eligible index.  The non-Bland rules switch to Bland's
rule permanently after a long run of degenerate pivots, so every mode
inherits its termination guarantee.  All modes are deterministic.

The pivoting core works against a column provider so that structured
problems can supply reduced costs and columns without materializing a
dense matrix; ``solve_lp`` wraps it for explicit dense problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg.blas import dger

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# Accepting pivots much smaller than the accumulated error of the basis
# inverse (~1e-12 after hundreds of updates) turns exact zeros into pivot
# candidates and produces singular bases on rank-deficient tables.
PIVOT_TOL = 1e-8
FEASIBILITY_TOL = 1e-9
REDUCED_COST_TOL = 1e-9
_DRIVE_OUT_TOL = 1e-7
_RATIO_TIE_TOL = 1e-10
_REFACTOR_PERIOD = 500
_DEGENERATE_STALL_LIMIT = 1000
_WEIGHT_RESET = 1e10

PRICING_RULES = ("devex", "dantzig", "bland")


class SimplexStallError(RuntimeError):
    """The pivot count exceeded the anti-cycling safety cap."""


@dataclass(frozen=True)
class LpProblem:
    """Equality-constrained LP with implicitly nonnegative variables.

    Rows may be linearly dependent; the solver absorbs redundancy.
    """

    constraint_matrix: np.ndarray  # (num_rows, num_vars)
    rhs: np.ndarray
    objective: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.constraint_matrix, dtype=float)
        b = np.asarray(self.rhs, dtype=float)
        c = np.asarray(self.objective, dtype=float)
        if a.ndim != 2:
            raise ValueError("constraint matrix must be two-dimensional")
        if b.shape != (a.shape[0],) or c.shape != (a.shape[1],):
            raise ValueError("rhs/objective shapes do not match the constraint matrix")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "constraint_matrix", a)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "objective", c)

    @property
    def num_rows(self) -> int:
        return self.constraint_matrix.shape[0]

    @property
    def num_vars(self) -> int:
        return self.constraint_matrix.shape[1]


@dataclass(frozen=True)
class LpSolution:
    status: str
    objective_value: float
    variable_values: np.ndarray
    iterations: int


class _DenseColumns:
    """Column provider view of an explicit dense constraint matrix."""

    def __init__(self, a: np.ndarray):
        self.a = a
        self.num_rows, self.num_cols = a.shape

    def price_row(self, y: np.ndarray) -> np.ndarray:
        """y @ A over the real (non-artificial) columns."""
        return y @ self.a

    def apply_binv(self, binv: np.ndarray, j: int) -> np.ndarray:
        return binv @ self.a[:, j]

    def basis_matrix(self, basis: np.ndarray) -> np.ndarray:
        m = self.num_rows
        out = np.zeros((m, m))
        real = basis < self.num_cols
        out[:, real] = self.a[:, basis[real]]
        for pos in np.flatnonzero(~real):
            out[basis[pos] - self.num_cols, pos] = 1.0
        return out

    def residual(self, x: np.ndarray, b: np.ndarray) -> float:
        return float(np.max(np.abs(self.a @ x - b)))


class _Tableau:
    """Basis state shared by both simplex phases."""

    def __init__(self, cols, b: np.ndarray):
        m, n = cols.num_rows, cols.num_cols
        self.cols = cols
        self.b = b
        self.basis = np.arange(n, n + m)
        self.binv = np.eye(m)
        self.xb = b.copy()
        self.in_basis = np.zeros(n, dtype=bool)
        self.iterations = 0
        self._pivot_row = np.empty(m)

    def refactor(self) -> None:
        try:
            self.binv = np.linalg.inv(self.cols.basis_matrix(self.basis))
        except np.linalg.LinAlgError as exc:
            raise SimplexStallError("basis matrix became singular") from exc
        self.xb = self.binv @ self.b
        np.maximum(self.xb, 0.0, out=self.xb)

    def pivot(self, row: int, col: int, u: np.ndarray) -> None:
        old = self.basis[row]
        if old < self.cols.num_cols:
            self.in_basis[old] = False
        piv = u[row]
        self.binv[row, :] /= piv
        u = u.copy()
        u[row] = 0.0
        np.copyto(self._pivot_row, self.binv[row])
        # rank-1 update binv -= u (x) pivot_row; the C-ordered binv is the
        # Fortran-ordered transpose, so dger updates it in place.
        dger(-1.0, self._pivot_row, u, a=self.binv.T, overwrite_a=1)
        step = self.xb[row] / piv
        self.xb -= step * u
        self.xb[row] = step
        np.maximum(self.xb, 0.0, out=self.xb)
        self.basis[row] = col
        self.in_basis[col] = True
        self.iterations += 1
        if self.iterations % _REFACTOR_PERIOD == 0:
            self.refactor()

    def ratio_test(self, u: np.ndarray, bland: bool) -> int:
        """Leaving row by minimum ratio.

        Ties go to the lowest basis index under Bland's rule (the
        anti-cycling requirement); otherwise to the largest pivot element,
        which keeps the basis well conditioned on degenerate vertices.
        Returns -1 when no component of u is positive (unbounded direction).
        """
        positive = np.flatnonzero(u > PIVOT_TOL)
        if positive.size == 0:
            return -1
        ratios = self.xb[positive] / u[positive]
        rmin = float(ratios.min())
        ties = positive[ratios <= rmin + _RATIO_TIE_TOL * (1.0 + abs(rmin))]
        if bland:
            return int(ties[np.argmin(self.basis[ties])])
        return int(ties[np.argmax(u[ties])])

    def basis_costs(self, c: np.ndarray, artificial_cost: float) -> np.ndarray:
        n = self.cols.num_cols
        cb = np.full(self.basis.shape, artificial_cost)
        real = self.basis < n
        cb[real] = c[self.basis[real]]
        return cb


def _run_phase(tab: _Tableau, c: np.ndarray, artificial_cost: float, pricing: str, cap: int) -> str:
    """Pivot until optimal or unbounded.  Returns the terminal status."""
    cols = tab.cols
    n = cols.num_cols
    bland = pricing == "bland"
    devex = pricing == "devex"
    weights = np.ones(n) if devex else None
    degenerate_run = 0
    cb = tab.basis_costs(c, artificial_cost)  # updated in place on every pivot
    while True:
        if tab.iterations > cap:
            raise SimplexStallError(f"exceeded {cap} pivots")
        y = cb @ tab.binv
        d = c - cols.price_row(y)
        eligible = (d < -REDUCED_COST_TOL) & ~tab.in_basis
        if not eligible.any():
            return OPTIMAL
        if bland:
            j = int(eligible.argmax())
        elif devex:
            score = np.where(eligible, d * d / weights, -1.0)
            j = int(score.argmax())
        else:
            j = int(np.where(eligible, d, 0.0).argmin())
        u = cols.apply_binv(tab.binv, j)
        row = tab.ratio_test(u, bland)
        if row < 0:
            return UNBOUNDED
        if devex:
            # Harris reference weights: compare candidate columns by their
            # component along the current steepest direction.
            alpha = cols.price_row(tab.binv[row])
            pivot_alpha = alpha[j]
            scale = weights[j] / (pivot_alpha * pivot_alpha)
            np.maximum(weights, alpha * alpha * scale, out=weights)
            leaving = tab.basis[row]
            if leaving < n:
                weights[leaving] = max(scale, 1.0)
            if float(weights.max()) > _WEIGHT_RESET:
                weights.fill(1.0)
        step_degenerate = tab.xb[row] <= PIVOT_TOL
        tab.pivot(row, j, u)
        cb[row] = c[j]
        if not bland:
            # Degenerate stretches can in principle cycle under Devex or
            # Dantzig pricing; fall back to Bland's rule, which cannot.
            degenerate_run = degenerate_run + 1 if step_degenerate else 0
            if degenerate_run > _DEGENERATE_STALL_LIMIT:
                bland, devex = True, False


def _drive_out_artificials(tab: _Tableau) -> None:
    """Replace basic artificials by real columns via degenerate pivots.

    Rows whose artificial cannot be replaced are linearly dependent on the
    rest; their binv row annihilates every real column, so the artificial
    stays harmlessly basic at zero.
    """
    for row in np.flatnonzero(tab.basis >= tab.cols.num_cols):
        w = tab.cols.price_row(tab.binv[row])  # row of binv @ A
        candidates = np.flatnonzero((np.abs(w) > _DRIVE_OUT_TOL) & ~tab.in_basis)
        if candidates.size == 0:
            continue
        j = int(candidates[0])
        u = tab.cols.apply_binv(tab.binv, j)
        tab.pivot(row, j, u)


def _run_certified_phase(tab: _Tableau, c: np.ndarray, artificial_cost: float, pricing: str, cap: int) -> str:
    """Run a phase, then refactor and re-price until the exact basis agrees.

    The incremental basis-inverse updates drift by ~1e-12 per few hundred
    pivots, enough to stop a phase one pivot early or to distort the
    terminal infeasibility measure; certifying against a freshly inverted
    basis costs one extra pricing pass.
    """
    while True:
        status = _run_phase(tab, c, artificial_cost=artificial_cost, pricing=pricing, cap=cap)
        if status != OPTIMAL:
            return status
        before = tab.iterations
        tab.refactor()
        status = _run_phase(tab, c, artificial_cost=artificial_cost, pricing=pricing, cap=cap)
        if status != OPTIMAL or tab.iterations == before:
            return status


def solve_columns(cols, b: np.ndarray, c: np.ndarray, pricing: str = "devex") -> LpSolution:
    """Two-phase simplex against a column provider.  Requires b >= 0."""
    if pricing not in PRICING_RULES:
        raise ValueError(f"unknown pricing rule {pricing!r}")
    m, n = cols.num_rows, cols.num_cols
    cap = 10_000 + 20 * (m + n)
    tab = _Tableau(cols, np.asarray(b, dtype=float))

    status = _run_certified_phase(tab, np.zeros(n), artificial_cost=1.0, pricing=pricing, cap=cap)
    if status != OPTIMAL:
        raise SimplexStallError("phase 1 is bounded by construction; numerical failure")
    artificial_rows = tab.basis >= n
    infeasibility = float(tab.xb[artificial_rows].sum())
    if infeasibility > FEASIBILITY_TOL:
        return LpSolution(INFEASIBLE, float("nan"), np.zeros(n), tab.iterations)

    _drive_out_artificials(tab)
    c = np.asarray(c, dtype=float)
    status = _run_certified_phase(tab, c, artificial_cost=0.0, pricing=pricing, cap=cap)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, float("-inf"), np.zeros(n), tab.iterations)

    x = np.zeros(n)
    real = tab.basis < n
    x[tab.basis[real]] = tab.xb[real]
    residual = cols.residual(x, tab.b)
    if residual > FEASIBILITY_TOL:
        raise SimplexStallError(f"solution residual {residual:.3e} exceeds tolerance")
    return LpSolution(OPTIMAL, float(c @ x), x, tab.iterations)


def solve_lp(problem: LpProblem, pricing: str = "devex") -> LpSolution:
    """Solve a dense equality-form LP; status is optimal, infeasible or unbounded."""
    a = problem.constraint_matrix
    b = problem.rhs
    negative = b < 0
    if negative.any():
        a = a.copy()
        b = b.copy()
        a[negative] *= -1.0
        b[negative] *= -1.0
    return solve_columns(_DenseColumns(a), b, problem.objective, pricing=pricing)
