"""Downhill-simplex maximization of the noise threshold over settings.

The objective (LP threshold as a function of measurement settings) is
piecewise smooth with kinks wherever the optimal LP basis changes, which
is exactly the regime the Nelder-Mead simplex handles without gradients.

Searches restart from seeded random settings.  The first pass of a restart
runs on a simplex of D+1 independently drawn settings: the classical
region (threshold identically zero, no slope anywhere) covers most of the
space in higher dimensions, and a domain-spanning simplex finds a
violating vertex far more often than a small one around a single draw.
Each restart then re-seeds a local simplex at its own incumbent until the
value stops improving, which recovers the progress lost when the simplex
collapses onto a kink.

Restarts draw from independently spawned seed streams, so they may run
concurrently; results are identical for any worker count.  Set
BELLOPT_WORKERS to parallelize across processes.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .lhv import critical_noise_fraction, verify_lhv_model
from .quantum import (
    ObservableParams,
    PhaseSettings,
    SgDirections,
    probability_table_general,
    probability_table_multiport,
    probability_table_sg_spin1,
    unitary_from_params,
)

_INITIAL_STEP = 0.5  # radians; local polish scale around an incumbent
_WIDE_STEP = np.pi  # radians; basin-hop scale, spans the whole angle domain
_RESEED_GAIN_TOL = 1e-9
_MAX_RESEEDS = 12
_MAX_WIDE_RESEEDS = 3
_CERT_RESIDUAL_TOL = 1e-8


class SearchAbortError(RuntimeError):
    """The objective returned a non-finite value; carries the point."""

    def __init__(self, message: str, point: np.ndarray):
        super().__init__(message)
        self.point = np.asarray(point, dtype=float)


@dataclass(frozen=True)
class AmoebaConfig:
    """Controls for the downhill-simplex search and its restarts."""

    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    max_evals: int = 20000
    spread_tol: float = 1e-7
    restarts: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.reflection <= 0:
            raise ValueError("reflection coefficient must be positive")
        if self.expansion <= 1:
            raise ValueError("expansion coefficient must exceed 1")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must lie in (0, 1)")
        if self.restarts < 1:
            raise ValueError("at least one restart is required")
        if self.spread_tol <= 0:
            raise ValueError("spread tolerance must be positive")
        if self.max_evals < 1:
            raise ValueError("evaluation budget must be positive")


@dataclass(frozen=True)
class SearchResult:
    """Best settings found, with per-restart diagnostics."""

    best_settings: object
    best_f: float
    evaluations: int
    restart_bests: list[float] = field(default_factory=list)
    seed: int = 0


def nelder_mead(
    objective,
    x0: np.ndarray,
    cfg: AmoebaConfig,
    initial_simplex: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize ``objective`` from ``x0``; returns (best point, best value).

    Standard reflect/expand/contract/shrink moves on D+1 vertices built from
    x0 plus one 0.5-step per coordinate, or on ``initial_simplex`` when
    given.  Stops when the vertex values agree within ``cfg.spread_tol`` or
    the evaluation budget runs out.  A non-finite objective value aborts the
    search.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    evals = 0

    def value(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        v = float(objective(x))
        if not np.isfinite(v):
            raise SearchAbortError(f"objective returned {v}", x)
        return -v  # minimize internally

    if initial_simplex is None:
        simplex = np.tile(x0, (dim + 1, 1))
        for i in range(dim):
            simplex[i + 1, i] += _INITIAL_STEP
    else:
        simplex = np.array(initial_simplex, dtype=float)
        if simplex.shape != (dim + 1, dim):
            raise ValueError(f"initial simplex must have shape {(dim + 1, dim)}, got {simplex.shape}")
    values = np.array([value(v) for v in simplex])

    while evals < cfg.max_evals:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if values[-1] - values[0] < cfg.spread_tol:
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = centroid + cfg.reflection * (centroid - worst)
        f_reflected = value(reflected)
        if f_reflected < values[0]:
            expanded = centroid + cfg.expansion * (reflected - centroid)
            f_expanded = value(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + cfg.contraction * (reflected - centroid)
            else:
                contracted = centroid + cfg.contraction * (worst - centroid)
            f_contracted = value(contracted)
            if f_contracted < min(f_reflected, values[-1]):
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                # shrink toward the best vertex
                for i in range(1, dim + 1):
                    simplex[i] = simplex[0] + cfg.shrink * (simplex[i] - simplex[0])
                    values[i] = value(simplex[i])
                    if evals >= cfg.max_evals:
                        break

    best = int(np.argmin(values))
    return simplex[best].copy(), -float(values[best])


def _multiport_objective(dim: int):
    def objective(vec: np.ndarray) -> float:
        settings = PhaseSettings.from_vector(dim, vec)
        return critical_noise_fraction(probability_table_multiport(settings)).f_min

    return objective


def _general_observables(dim: int, vec: np.ndarray) -> tuple[ObservableParams, ...]:
    block = dim**2 - 1
    return tuple(ObservableParams(dim, vec[i * block : (i + 1) * block]) for i in range(4))


def _general_objective(dim: int):
    def objective(vec: np.ndarray) -> float:
        mats = [unitary_from_params(p) for p in _general_observables(dim, vec)]
        return critical_noise_fraction(probability_table_general(*mats)).f_min

    return objective


def _sg_directions(vec: np.ndarray) -> SgDirections:
    return SgDirections(vec[:4].reshape(2, 2), vec[4:].reshape(2, 2))


def _sg_objective(dim: int):
    def objective(vec: np.ndarray) -> float:
        return critical_noise_fraction(probability_table_sg_spin1(_sg_directions(vec))).f_min

    return objective


def _uniform_angles(count: int):
    def draw(rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 2.0 * np.pi, count)

    return draw


def _sg_axis_draw(rng: np.random.Generator) -> np.ndarray:
    thetas = rng.uniform(0.0, np.pi, 4)
    phis = rng.uniform(0.0, 2.0 * np.pi, 4)
    return np.column_stack([thetas, phis]).reshape(-1)


_FAMILIES = {
    "multiport": (_multiport_objective, lambda dim: _uniform_angles(4 * (dim - 1))),
    "general": (_general_objective, lambda dim: _uniform_angles(4 * (dim**2 - 1))),
    "stern-gerlach": (_sg_objective, lambda dim: _sg_axis_draw),
}


def _run_restart(task) -> tuple[float, np.ndarray, int]:
    """One seeded restart: exploration simplex, local reseeds, wide hops.

    A reseed that fails to improve at the local scale is retried once per
    allowance with a simplex of pi-scale offsets around the incumbent.
    Those hops escape the embedded lower-dimensional optima (a two-level
    structure inside an N-level problem is a genuine local maximum), and
    around a still-classical incumbent they amount to a second exploration
    simplex at negligible cost.
    """
    family, dim, child, cfg = task
    make_objective, make_draw = _FAMILIES[family]
    objective = make_objective(dim)
    draw_start = make_draw(dim)

    evals = 0

    def counting_objective(v):
        nonlocal evals
        evals += 1
        return objective(v)

    rng = np.random.default_rng(child)
    first = draw_start(rng)
    cloud = np.vstack([first] + [draw_start(rng) for _ in range(first.size)])
    x, f = first, -np.inf
    simplex: np.ndarray | None = cloud
    budget = cfg.max_evals
    wide_left = _MAX_WIDE_RESEEDS
    for _ in range(_MAX_RESEEDS):
        used_before = evals
        x_new, f_new = nelder_mead(
            counting_objective, x, replace(cfg, max_evals=budget), initial_simplex=simplex
        )
        budget -= evals - used_before
        improved = f_new > f + _RESEED_GAIN_TOL
        if f_new > f:
            x, f = x_new, f_new
        if budget <= 0:
            break
        if improved:
            simplex = None  # polish locally around the new incumbent
        elif wide_left > 0:
            wide_left -= 1
            offsets = rng.uniform(-_WIDE_STEP, _WIDE_STEP, (x.size, x.size))
            simplex = np.vstack([x, x + offsets])
        else:
            break
    return f, x, evals


def _worker_count() -> int:
    raw = os.environ.get("BELLOPT_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _search_restarts(family: str, dim: int, cfg: AmoebaConfig) -> tuple[np.ndarray, float, int, list[float]]:
    """Seeded random restarts; concurrent when BELLOPT_WORKERS > 1.

    Restart seed streams are pre-split, so the outcome is identical for any
    worker count; aggregation is an order-independent argmax.
    """
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    tasks = [(family, dim, child, cfg) for child in seeds]
    workers = min(_worker_count(), cfg.restarts)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_restart, tasks))
    else:
        outcomes = [_run_restart(task) for task in tasks]

    restart_bests = [f for f, _, _ in outcomes]
    total_evals = sum(evals for _, _, evals in outcomes)
    winner = int(np.argmax(restart_bests))
    best_f = restart_bests[winner]
    best_x = outcomes[winner][1]
    return best_x, best_f, total_evals, restart_bests


def _certify(table, best_f: float) -> None:
    threshold = critical_noise_fraction(table)
    residual = verify_lhv_model(threshold, table)
    if residual > _CERT_RESIDUAL_TOL or abs(threshold.f_min - best_f) > 1e-9:
        raise RuntimeError(
            f"recertification failed: threshold {threshold.f_min} vs search {best_f}, residual {residual:.3e}"
        )


def optimize_multiport(dim: int, cfg: AmoebaConfig) -> SearchResult:
    """Maximize the threshold over gauge-fixed phase settings, 4*(N-1) parameters."""
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    x, f, evals, bests = _search_restarts("multiport", dim, cfg)
    settings = PhaseSettings.from_vector(dim, x)
    _certify(probability_table_multiport(settings), f)
    return SearchResult(settings, f, evals, bests, cfg.seed)


def optimize_general(dim: int, cfg: AmoebaConfig) -> SearchResult:
    """Maximize the threshold over four independent general unitaries,
    4*(N**2 - 1) parameters."""
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    x, f, evals, bests = _search_restarts("general", dim, cfg)
    observables = _general_observables(dim, x)
    mats = [unitary_from_params(p) for p in observables]
    _certify(probability_table_general(*mats), f)
    return SearchResult(observables, f, evals, bests, cfg.seed)


def optimize_sg_spin1(cfg: AmoebaConfig) -> SearchResult:
    """Maximize the threshold over four Stern-Gerlach axes, 8 parameters."""
    x, f, evals, bests = _search_restarts("stern-gerlach", 3, cfg)
    dirs = _sg_directions(x)
    _certify(probability_table_sg_spin1(dirs), f)
    return SearchResult(dirs, f, evals, bests, cfg.seed)
