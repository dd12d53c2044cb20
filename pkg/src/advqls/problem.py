"""Forward-Euler block linear system for 1-D periodic advection-diffusion.

The velocity field u(x, t) obeys u_t = -u u_x + nu u_xx on x in [0, L]
with u(x, 0) = sin(kappa x), kappa = 2 pi / L. At linearization order one
the quadratic advection term drops out, leaving the periodic diffusion
stencil M with -2 nu / dx^2 on the diagonal and nu / dx^2 on the (cyclic)
neighbours, on the grid x_j = j L / (n - 1).

All N_T time levels are stacked into one block lower-bidiagonal system
A u = b (identity diagonal blocks, -(I + M dt) subdiagonal blocks), which
a single linear solve inverts into the full trajectory. Because the first
block row only restates the initial condition, it is dropped together
with its column, reducing the dimension from N_T * n to (N_T - 1) * n and
moving (I + M dt) u0 into the right-hand side.

The closed-form reference implemented here is u(x, t) =
exp(-kappa^2 nu t) sin(kappa x): the kappa^2 rate is the one that
actually solves the linearized equation (pure diffusion of a single
Fourier mode).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProblemSpec",
    "BlockSystem",
    "build_m",
    "initial_condition",
    "build_block_system",
    "classical_solve",
    "solve_unit_lower_triangular",
    "analytic_solution",
    "rmse",
    "relative_error",
    "fit_phi_degrees",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Grid and physics parameters of one advection-diffusion run.

    kappa defaults to the fundamental wavenumber 2 pi / length of the
    periodic domain; override it only to probe other initial modes.
    """

    n: int = 4
    nu: float = 0.05
    length: float = 1.0
    dt: float = 0.25
    n_t: int = 3
    kappa: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 grid points, got n={self.n}")
        if self.n_t < 2:
            raise ValueError(f"need at least 2 time levels, got n_t={self.n_t}")
        if self.dt <= 0:
            raise ValueError(f"time step must be positive, got dt={self.dt}")
        if self.nu < 0:
            raise ValueError(f"diffusion coefficient must be >= 0, got nu={self.nu}")
        if self.length <= 0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if self.kappa is None:
            object.__setattr__(self, "kappa", 2.0 * np.pi / self.length)

    @property
    def dx(self) -> float:
        return self.length / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n) * self.dx


@dataclass(frozen=True)
class BlockSystem:
    """The stacked time-stepping system and its reduced form."""

    spec: ProblemSpec
    a_full: np.ndarray      # (n_t * n) x (n_t * n), block lower bidiagonal
    a_reduced: np.ndarray   # ((n_t - 1) * n) square, initial block dropped
    b_raw: np.ndarray       # ((I + M dt) u0, 0, ..., 0), unnormalized
    b_state: np.ndarray     # b_raw / ||b_raw||
    b_norm: float
    u0: np.ndarray


def build_m(spec: ProblemSpec) -> np.ndarray:
    """Periodic second-difference stencil scaled by the diffusion coefficient."""
    if spec.n < 3:
        raise ValueError(f"the periodic stencil needs n >= 3, got n={spec.n}")
    coupling = spec.nu / spec.dx**2
    m = np.zeros((spec.n, spec.n))
    for i in range(spec.n):
        m[i, i] = -2.0 * coupling
        m[i, (i + 1) % spec.n] += coupling
        m[i, (i - 1) % spec.n] += coupling
    return m


def initial_condition(spec: ProblemSpec) -> np.ndarray:
    """sin(kappa x_j) on the grid."""
    return np.sin(spec.kappa * spec.grid)


def build_block_system(spec: ProblemSpec) -> BlockSystem:
    n, n_t = spec.n, spec.n_t
    m = build_m(spec)
    step = np.eye(n) + m * spec.dt
    eye = np.eye(n)

    a_full = np.zeros((n_t * n, n_t * n))
    for k in range(n_t):
        a_full[k * n:(k + 1) * n, k * n:(k + 1) * n] = eye
        if k:
            a_full[k * n:(k + 1) * n, (k - 1) * n:k * n] = -step

    a_reduced = a_full[n:, n:].copy()
    u0 = initial_condition(spec)
    b_raw = np.zeros((n_t - 1) * n)
    b_raw[:n] = step @ u0
    b_norm = float(np.linalg.norm(b_raw))
    return BlockSystem(
        spec=spec,
        a_full=a_full,
        a_reduced=a_reduced,
        b_raw=b_raw,
        b_state=b_raw / b_norm,
        b_norm=b_norm,
        u0=u0,
    )


def solve_unit_lower_triangular(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Forward substitution for a unit lower-triangular matrix."""
    n = rhs.size
    x = np.zeros(n)
    for i in range(n):
        x[i] = rhs[i] - lower[i, :i] @ x[:i]
    return x


def classical_solve(system: BlockSystem) -> np.ndarray:
    """Exact solution of the reduced system (concatenated u at t = dt, 2dt, ...)."""
    return solve_unit_lower_triangular(system.a_reduced, system.b_raw)


def analytic_solution(spec: ProblemSpec, t: float) -> np.ndarray:
    """Decaying single-mode reference: exp(-kappa^2 nu t) sin(kappa x)."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    return np.exp(-spec.kappa**2 * spec.nu * t) * initial_condition(spec)


def rmse(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """rmse(a, b) normalized by the RMS of the reference b."""
    b = np.asarray(b, dtype=float)
    reference_rms = float(np.sqrt(np.mean(b**2)))
    if reference_rms == 0.0:
        raise ValueError("reference vector is identically zero")
    return rmse(a, b) / reference_rms


def fit_phi_degrees(b_state: np.ndarray) -> float:
    """Invert the two-block template for its rotation angle, in degrees.

    The template is (cos phi/2, -sin phi/2, sin phi/2, -cos phi/2, 0...0)
    / sqrt(2); averaging the paired components gives cos and sin of phi/2
    up to the common 1/sqrt(2) factor.
    """
    b_state = np.asarray(b_state, dtype=float)
    if b_state.size < 4:
        raise ValueError("need at least the four leading components")
    half_cos = (b_state[0] - b_state[3]) / np.sqrt(2.0)
    half_sin = (b_state[2] - b_state[1]) / np.sqrt(2.0)
    return float(np.degrees(2.0 * np.arctan2(half_sin, half_cos)))
