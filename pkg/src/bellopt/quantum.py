"""Measurement models for two maximally entangled N-level systems.

Observables come in three families: an unbiased N-port beamsplitter
preceded by one phase shifter per input mode, a fully general unitary per
side, and spin-1 Stern-Gerlach analyzers.  Each family produces the joint
outcome probabilities for the pure entangled state; isotropic noise is
mixed in as ``F/N**2 + (1-F)*p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# Probabilities below -_NEG_RESIDUE are treated as genuinely negative;
# anything in [-_NEG_RESIDUE, 0) is floating-point residue and clamped to 0.
_NEG_RESIDUE = 1e-14
_BLOCK_SUM_TOL = 1e-12
_MARGINAL_TOL = 1e-10


def _readonly(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PhaseSettings:
    """Two settings per observer, one phase shift per input mode (radians)."""

    dim: int
    phases_a: np.ndarray  # shape (2, dim)
    phases_b: np.ndarray  # shape (2, dim)

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"dimension must be at least 2, got {self.dim}")
        for name in ("phases_a", "phases_b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (2, self.dim):
                raise ValueError(f"{name} must have shape (2, {self.dim}), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite angles")
            object.__setattr__(self, name, _readonly(arr))

    def canonical(self) -> "PhaseSettings":
        """Reduce every phase modulo 2*pi into [0, 2*pi)."""
        return PhaseSettings(self.dim, self.phases_a % TWO_PI, self.phases_b % TWO_PI)

    def gauge_fixed(self) -> "PhaseSettings":
        """Shift each setting so its first phase is 0, then reduce mod 2*pi.

        Only the per-mode phase sums enter the joint probabilities, and only
        through their differences, so a constant offset per setting is
        unobservable.
        """
        a = (self.phases_a - self.phases_a[:, :1]) % TWO_PI
        b = (self.phases_b - self.phases_b[:, :1]) % TWO_PI
        return PhaseSettings(self.dim, a, b)

    def to_vector(self) -> np.ndarray:
        """Gauge-fixed free parameters, length 4*(dim-1)."""
        fixed = self.gauge_fixed()
        return np.concatenate([fixed.phases_a[:, 1:].ravel(), fixed.phases_b[:, 1:].ravel()])

    @classmethod
    def from_vector(cls, dim: int, vec: np.ndarray) -> "PhaseSettings":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (4 * (dim - 1),):
            raise ValueError(f"expected {4 * (dim - 1)} parameters, got {vec.shape}")
        blocks = vec.reshape(4, dim - 1)
        padded = np.hstack([np.zeros((4, 1)), blocks])
        return cls(dim, padded[:2], padded[2:])


@dataclass(frozen=True)
class ProbabilityTable:
    """Joint outcome probabilities P(k,l | A_i,B_j) for the pure entangled state.

    ``blocks[i, j]`` is the N x N outcome table for setting pair (i+1, j+1).
    Every block sums to 1 and has flat single-observer marginals 1/N.
    """

    dim: int
    blocks: np.ndarray  # shape (2, 2, dim, dim)

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"dimension must be at least 2, got {self.dim}")
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.shape != (2, 2, self.dim, self.dim):
            raise ValueError(f"blocks must have shape (2, 2, {self.dim}, {self.dim})")
        if np.any(blocks < -_NEG_RESIDUE) or np.any(blocks > 1.0 + _NEG_RESIDUE):
            raise ValueError("probabilities outside [0, 1]")
        blocks = np.maximum(blocks, 0.0)
        sums = blocks.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > _BLOCK_SUM_TOL:
            raise ValueError(f"setting-pair blocks must sum to 1, worst sum {sums.flat[np.argmax(np.abs(sums - 1.0))]}")
        flat = 1.0 / self.dim
        row = blocks.sum(axis=3)
        col = blocks.sum(axis=2)
        if max(np.max(np.abs(row - flat)), np.max(np.abs(col - flat))) > _MARGINAL_TOL:
            raise ValueError("single-observer marginals must equal 1/N")
        object.__setattr__(self, "blocks", _readonly(blocks))


@dataclass(frozen=True)
class NoisyTable:
    """Probability table mixed with isotropic noise of weight ``noise_fraction``."""

    base: ProbabilityTable
    noise_fraction: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ValueError(f"noise fraction must lie in [0, 1], got {self.noise_fraction}")

    @property
    def blocks(self) -> np.ndarray:
        f = self.noise_fraction
        return f / self.base.dim**2 + (1.0 - f) * self.base.blocks


@dataclass(frozen=True)
class ObservableParams:
    """Parameter vector for one general unitary observable, length dim**2 - 1."""

    dim: int
    params: np.ndarray

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"dimension must be at least 2, got {self.dim}")
        arr = np.asarray(self.params, dtype=float)
        if arr.shape != (self.dim**2 - 1,):
            raise ValueError(f"expected {self.dim**2 - 1} parameters, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("parameters contain non-finite values")
        object.__setattr__(self, "params", _readonly(arr))


@dataclass(frozen=True)
class SgDirections:
    """Stern-Gerlach quantization axes, one (theta, phi) pair per setting."""

    dir_a: np.ndarray  # shape (2, 2), rows (theta, phi)
    dir_b: np.ndarray

    def __post_init__(self) -> None:
        for name in ("dir_a", "dir_b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (2, 2):
                raise ValueError(f"{name} must have shape (2, 2), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite angles")
            object.__setattr__(self, name, _readonly(arr))

    def canonical(self) -> "SgDirections":
        """Map each axis through its unit vector so theta in [0, pi], phi in [0, 2*pi)."""

        def fix(pairs: np.ndarray) -> np.ndarray:
            out = np.empty_like(pairs)
            for row, (theta, phi) in enumerate(pairs):
                v = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
                new_theta = np.arccos(np.clip(v[2], -1.0, 1.0))
                new_phi = np.arctan2(v[1], v[0]) % TWO_PI if abs(v[0]) + abs(v[1]) > 1e-15 else 0.0
                out[row] = (new_theta, new_phi)
            return out

        return SgDirections(fix(self.dir_a), fix(self.dir_b))


def bell_multiport(dim: int) -> np.ndarray:
    """Unbiased multiport transition matrix with entries g**((j-1)*(i-1)) / sqrt(N).

    ``g = exp(2j*pi/N)`` is the N-th root of unity; the result is the
    unitary DFT matrix.
    """
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    powers = np.outer(np.arange(dim), np.arange(dim))
    return np.exp(2j * np.pi * powers / dim) / np.sqrt(dim)


def joint_probability_multiport(
    settings: PhaseSettings,
    setting_pair: tuple[int, int],
    k: int,
    l: int,
    noise_fraction: float = 0.0,
) -> float:
    """Probability of detecting outcomes (k, l) for setting pair (i, j), 1-based.

    Returns ``F/N**2 + ((1-F)/N) * |sum_m exp(i(phi_A^m + phi_B^m)) U_mk U_ml|**2``
    with U the unbiased multiport matrix.  Equivalently, with the combined
    phases ``Phi_m = phi_A^m + phi_B^m + m*(k + l - 2)*2*pi/N`` the value is
    ``(N + 2*(1-F) * sum_{m>n} cos(Phi_m - Phi_n)) / N**3``; the test suite
    checks both forms against each other.
    """
    n = settings.dim
    i, j = setting_pair
    if i not in (1, 2) or j not in (1, 2):
        raise IndexError(f"setting indices must be 1 or 2, got {setting_pair}")
    if not (1 <= k <= n and 1 <= l <= n):
        raise IndexError(f"outcomes must lie in 1..{n}, got ({k}, {l})")
    if not 0.0 <= noise_fraction <= 1.0:
        raise ValueError(f"noise fraction must lie in [0, 1], got {noise_fraction}")
    u = bell_multiport(n)
    z = np.exp(1j * (settings.phases_a[i - 1] + settings.phases_b[j - 1]))
    amp = np.sum(z * u[:, k - 1] * u[:, l - 1])
    return noise_fraction / n**2 + (1.0 - noise_fraction) / n * float(np.abs(amp) ** 2)


def probability_table_multiport(settings: PhaseSettings) -> ProbabilityTable:
    """All 4*N**2 pure-state joint probabilities for phase-shifter settings.

    Each block depends on the outcomes only through (k + l - 2) mod N, so the
    N distinct values per block are read off an inverse DFT of the phase
    factors.
    """
    n = settings.dim
    outcome_sum = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    blocks = np.empty((2, 2, n, n))
    for i in range(2):
        for j in range(2):
            z = np.exp(1j * (settings.phases_a[i] + settings.phases_b[j]))
            amp = n * np.fft.ifft(z)  # amp[s] = sum_m z_m exp(2j*pi*m*s/N)
            values = np.abs(amp) ** 2 / n**3
            blocks[i, j] = values[outcome_sum]
    return ProbabilityTable(n, blocks)


def unitary_from_params(p: ObservableParams) -> np.ndarray:
    """Unitary from a triangular chart: one (angle, phase) per mode pair plus
    dim-1 diagonal phases, dim**2 - 1 real parameters in total.

    The chart covers every unitary up to an unobservable global phase; the
    all-zero vector maps to the identity.
    """
    n = p.dim
    params = p.params
    u = np.eye(n, dtype=complex)
    pos = 0
    for q in range(1, n):
        for r in range(q):
            theta, phi = params[pos], params[pos + 1]
            pos += 2
            rot = np.eye(n, dtype=complex)
            c, s, e = np.cos(theta), np.sin(theta), np.exp(1j * phi)
            rot[r, r] = e * c
            rot[r, q] = -s
            rot[q, r] = e * s
            rot[q, q] = c
            u = u @ rot
    diag = np.ones(n, dtype=complex)
    diag[1:] = np.exp(1j * params[pos:])
    return diag[:, None] * u


def probability_table_general(
    u_a1: np.ndarray,
    u_a2: np.ndarray,
    u_b1: np.ndarray,
    u_b2: np.ndarray,
) -> ProbabilityTable:
    """Joint probabilities when each side applies an arbitrary unitary.

    ``entry(k,l | i,j) = (1/N) |sum_m (U_Ai)_mk (U_Bj)_ml|**2``; feeding
    ``diag(exp(i*phi)) @ bell_multiport(N)`` per side reproduces the
    phase-shifter tables.
    """
    mats = [np.asarray(m, dtype=complex) for m in (u_a1, u_a2, u_b1, u_b2)]
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise ValueError(f"all four matrices must share shape ({n}, {n}), got {m.shape}")
    a_side, b_side = mats[:2], mats[2:]
    blocks = np.empty((2, 2, n, n))
    for i in range(2):
        for j in range(2):
            overlap = a_side[i].T @ b_side[j]
            blocks[i, j] = np.abs(overlap) ** 2 / n
    return ProbabilityTable(n, blocks)


def _spin1_rotation(theta: float, phi: float) -> np.ndarray:
    """Spin-1 rotation taking the z basis to the (theta, phi) axis basis.

    Basis order is m = (+1, 0, -1); the matrix is exp(-i*phi*Sz) exp(-i*theta*Sy)
    in closed form.
    """
    c, s = np.cos(theta), np.sin(theta)
    r2 = np.sqrt(2.0)
    tilt = np.array(
        [
            [(1 + c) / 2, -s / r2, (1 - c) / 2],
            [s / r2, c, -s / r2],
            [(1 - c) / 2, s / r2, (1 + c) / 2],
        ]
    )
    phase = np.exp(-1j * phi * np.array([1.0, 0.0, -1.0]))
    return phase[:, None] * tilt


# Two-particle spin-1 singlet, coefficients (-1)^(1-m)/sqrt(3) on |m>|-m>.
_SPIN1_SINGLET = np.array(
    [
        [0.0, 0.0, 1.0],
        [0.0, -1.0, 0.0],
        [1.0, 0.0, 0.0],
    ]
) / np.sqrt(3.0)


def probability_table_sg_spin1(dirs: SgDirections) -> ProbabilityTable:
    """Joint probabilities for two spin-1 particles in a singlet state, each
    analyzed by a Stern-Gerlach device along its own axis.

    Row k of the analysis matrix is the bra of the axis eigenstate with
    eigenvalue m_k, i.e. the conjugate transpose of the axis rotation; this
    makes the table invariant under rotating all four axes together.
    """
    ana_a = [_spin1_rotation(theta, phi).conj().T for theta, phi in dirs.dir_a]
    ana_b = [_spin1_rotation(theta, phi).conj().T for theta, phi in dirs.dir_b]
    blocks = np.empty((2, 2, 3, 3))
    for i in range(2):
        for j in range(2):
            amp = ana_a[i] @ _SPIN1_SINGLET @ ana_b[j].T
            blocks[i, j] = np.abs(amp) ** 2
    return ProbabilityTable(3, blocks)
