"""Qubit-resource estimates for global forecast-scale linear systems.

Sizing follows the linearization bookkeeping: n coupled equations
truncated at monomial order tau over N_T time levels span

    N = N_T * n * (n^tau - 1) / (n - 1)

states. The geometric-sum factor is exact integer arithmetic (the
dimensions at sub-degree resolutions overflow 64-bit floats), and the
register size is ceil(log2 N). The time step comes from the CFL
condition at the chosen grid spacing and maximum signal speed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

__all__ = [
    "ForecastConfig",
    "SweepRow",
    "SWEEP_CSV_HEADER",
    "cfl_timestep",
    "grid_points",
    "vector_dimension",
    "qubit_count",
    "sweep",
]

SECONDS_PER_DAY = 86_400.0

SWEEP_CSV_HEADER = ["resolution_deg", "dt_s", "n_t", "n", "dimension", "qubits"]


@dataclass(frozen=True)
class ForecastConfig:
    """Global forecast model shape driving the estimate.

    tau has no default on purpose: the truncation order dominates the
    dimension and must be chosen explicitly.
    """

    horizontal_resolution_deg: float
    tau: int
    vertical_levels: int = 1
    prognostic_variables: int = 5
    forecast_length_s: float = 10 * SECONDS_PER_DAY
    u_max: float = 100.0
    cfl: float = 1.0
    km_per_degree: float = 111.32

    def __post_init__(self):
        if self.horizontal_resolution_deg <= 0:
            raise ValueError("resolution must be positive")
        if self.tau < 1:
            raise ValueError("truncation order tau must be >= 1")
        if self.vertical_levels < 1 or self.prognostic_variables < 1:
            raise ValueError("level and variable counts must be >= 1")
        if self.forecast_length_s <= 0 or self.cfl <= 0 or self.km_per_degree <= 0:
            raise ValueError("forecast length, CFL number and km/degree must be positive")

    def at_resolution(self, resolution_deg: float) -> "ForecastConfig":
        return replace(self, horizontal_resolution_deg=resolution_deg)


def cfl_timestep(cfg: ForecastConfig) -> tuple[float, int]:
    """(dt seconds, number of time levels including zero)."""
    if cfg.u_max <= 0:
        raise ValueError("u_max must be positive")
    grid_spacing_m = cfg.horizontal_resolution_deg * cfg.km_per_degree * 1000.0
    dt = cfg.cfl * grid_spacing_m / cfg.u_max
    n_t = int(cfg.forecast_length_s // dt) + 1
    return dt, n_t


def grid_points(cfg: ForecastConfig) -> int:
    """Unknowns per time level: variables x levels x lon cells x lat cells."""
    lon = round(360.0 / cfg.horizontal_resolution_deg)
    lat = round(180.0 / cfg.horizontal_resolution_deg)
    return cfg.prognostic_variables * cfg.vertical_levels * lon * lat


def vector_dimension(n: int, tau: int, n_t: int) -> int:
    """Exact N = n_t * n * (n^tau - 1) / (n - 1)."""
    if n < 2:
        raise ValueError(f"need n >= 2 coupled equations, got {n}")
    if tau < 1:
        raise ValueError(f"truncation order must be >= 1, got {tau}")
    if n_t < 1:
        raise ValueError(f"need n_t >= 1 time levels, got {n_t}")
    numerator = n**tau - 1
    quotient, remainder = divmod(numerator, n - 1)
    if remainder:
        raise ArithmeticError("geometric sum (n^tau - 1)/(n - 1) is not integral")
    return n_t * n * quotient


def qubit_count(dimension: int) -> int:
    """Smallest register whose Hilbert space holds `dimension` states."""
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    return (dimension - 1).bit_length() if dimension > 1 else 0


@dataclass(frozen=True)
class SweepRow:
    resolution_deg: float
    dt_s: float
    n_t: int
    n: int
    dimension: int
    qubits: int

    def as_csv_row(self) -> list:
        return [self.resolution_deg, self.dt_s, self.n_t, self.n, self.dimension, self.qubits]


def sweep(cfg_template: ForecastConfig, resolutions: list[float]) -> list[SweepRow]:
    """Apply the estimate at each horizontal resolution."""
    if not resolutions:
        raise ValueError("resolution list is empty")
    rows = []
    for resolution in resolutions:
        cfg = cfg_template.at_resolution(resolution)
        dt, n_t = cfl_timestep(cfg)
        n = grid_points(cfg)
        dimension = vector_dimension(n, cfg.tau, n_t)
        rows.append(
            SweepRow(
                resolution_deg=resolution,
                dt_s=dt,
                n_t=n_t,
                n=n,
                dimension=dimension,
                qubits=qubit_count(dimension),
            )
        )
    return rows
