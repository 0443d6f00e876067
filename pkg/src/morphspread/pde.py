"""Explicit finite-difference simulation of the reaction-diffusion system,
front tracking and empirical front-speed estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import stats

from . import equilibria, model, spectral
from .errors import BlowUpError, ValidationError
from .model import ModelParams

NEUMANN = "neumann"
DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class Grid1D:
    L: float
    nx: int

    def __post_init__(self):
        if self.nx < 16:
            raise ValidationError(f"grid needs at least 16 points, got {self.nx}")
        if not self.L > 0:
            raise ValidationError(f"domain length must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return self.L / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.nx)

    @classmethod
    def from_spacing(cls, L: float, dx: float) -> "Grid1D":
        return cls(L, int(round(L / dx)) + 1)


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    cfl_safety: float = 0.4
    boundary: str = NEUMANN
    left_value: tuple[float, float] | None = None  # pinned densities for DIRICHLET
    sample_stride: int = 100
    threshold: float | None = None  # None: threshold_frac * (n_e* + n_d*)
    threshold_frac: float = 0.1

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValidationError("t_end must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ValidationError("cfl_safety must lie in (0, 1]")
        if self.boundary not in (NEUMANN, DIRICHLET):
            raise ValidationError(f"unknown boundary {self.boundary!r}")
        if self.boundary == DIRICHLET and self.left_value is None:
            raise ValidationError("Dirichlet boundary needs left_value")
        if self.sample_stride < 1:
            raise ValidationError("sample_stride must be >= 1")
        if self.threshold is not None and not self.threshold > 0:
            raise ValidationError("threshold must be positive")
        if not self.threshold_frac > 0:
            raise ValidationError("threshold_frac must be positive")

    def dt(self, p: ModelParams, dx: float) -> float:
        return self.cfl_safety * dx * dx / (2.0 * max(p.D_e, p.D_d))

    def resolve_threshold(self, p: ModelParams) -> float:
        if self.threshold is not None:
            return self.threshold
        return self.threshold_frac * float(np.sum(equilibria.coexistence_of_g(p)))


@dataclass
class FieldState:
    t: float
    n_e: np.ndarray
    n_d: np.ndarray

    def __post_init__(self):
        if self.n_e.shape != self.n_d.shape or self.n_e.ndim != 1:
            raise ValidationError("n_e and n_d must be 1-d arrays of equal length")

    @property
    def total(self) -> np.ndarray:
        return self.n_e + self.n_d


@dataclass
class FrontTrace:
    threshold: float
    t: list = field(default_factory=list)
    x_front: list = field(default_factory=list)
    missing: int = 0  # samples where no crossing existed

    def __len__(self):
        return len(self.t)

    @property
    def empty(self) -> bool:
        return not self.t

    def append(self, t: float, x: float | None):
        if x is None:
            self.missing += 1
            return
        if self.t and t <= self.t[-1]:
            raise ValidationError("front samples must have strictly increasing time")
        self.t.append(t)
        self.x_front.append(x)


@dataclass(frozen=True)
class BoundsReport:
    min_e: float
    max_e: float
    min_d: float
    max_d: float
    upper: np.ndarray  # k_plus
    violation: bool


@dataclass(frozen=True)
class SpeedEstimate:
    speed: float
    stderr: float
    window: float
    boundary_contaminated: bool
    n_used: int


def heaviside_ic(grid: Grid1D, x0: float, left) -> FieldState:
    if not 0 < x0 < grid.L:
        raise ValidationError(f"step position x0={x0} outside (0, {grid.L})")
    left = np.asarray(left, dtype=float)
    mask = grid.x <= x0
    return FieldState(0.0, np.where(mask, left[0], 0.0), np.where(mask, left[1], 0.0))


@numba.njit(cache=True)
def _euler_kernel(ne, nd, out_e, out_d, coef, dx, dt, dirichlet, left_e, left_d):
    # coef = (D_e, D_d, r_e, r_d, m_ee, m_dd, m_ed, m_de, mu_e, mu_d)
    D_e, D_d, r_e, r_d, m_ee, m_dd, m_ed, m_de, mu_e, mu_d = (
        coef[0], coef[1], coef[2], coef[3], coef[4], coef[5], coef[6], coef[7], coef[8], coef[9])
    n = ne.shape[0]
    inv = 1.0 / (dx * dx)
    for i in range(n):
        # zero-flux ends via reflected ghost values
        im = i - 1 if i > 0 else 1
        ip = i + 1 if i < n - 1 else n - 2
        e, d = ne[i], nd[i]
        lap_e = (ne[im] - 2.0 * e + ne[ip]) * inv
        lap_d = (nd[im] - 2.0 * d + nd[ip]) * inv
        fe = r_e * e * (1.0 - m_ee * e - m_ed * d) - mu_e * e + mu_d * d
        fd = r_d * d * (1.0 - m_de * e - m_dd * d) + mu_e * e - mu_d * d
        out_e[i] = e + dt * (D_e * lap_e + fe)
        out_d[i] = d + dt * (D_d * lap_d + fd)
    if dirichlet:
        out_e[0] = left_e
        out_d[0] = left_d


def _coefficients(p: ModelParams) -> np.ndarray:
    return np.array([getattr(p, name) for name in model.PARAM_NAMES])


def _advance(coef, ne, nd, out_e, out_d, dx, dt, boundary, left):
    dirichlet = boundary == DIRICHLET
    le, ld = left if dirichlet else (0.0, 0.0)
    _euler_kernel(ne, nd, out_e, out_d, coef, dx, dt, dirichlet, float(le), float(ld))


def _check_cfl(p, dx, dt):
    limit = dx * dx / (2.0 * max(p.D_e, p.D_d))
    if not 0 < dt <= limit * (1 + 1e-12):
        raise ValidationError(f"time step {dt:.4g} violates the stability limit {limit:.4g}")


def step(p: ModelParams, state: FieldState, dx: float, dt: float,
         boundary: str = NEUMANN, left_value=None) -> FieldState:
    """One explicit Euler step of the method-of-lines system."""
    _check_cfl(p, dx, dt)
    if boundary == DIRICHLET and left_value is None:
        raise ValidationError("Dirichlet boundary needs left_value")
    ne = np.ascontiguousarray(state.n_e, dtype=float)
    nd = np.ascontiguousarray(state.n_d, dtype=float)
    out_e, out_d = np.empty_like(ne), np.empty_like(nd)
    _advance(_coefficients(p), ne, nd, out_e, out_d, dx, dt, boundary, left_value)
    return FieldState(state.t + dt, out_e, out_d)


def track_front(state: FieldState, grid: Grid1D, threshold: float) -> float | None:
    """Rightmost crossing of ``threshold`` by ``n_e + n_d``, linearly interpolated."""
    if not threshold > 0:
        raise ValidationError("threshold must be positive")
    above = state.total >= threshold
    changes = np.flatnonzero(above[:-1] != above[1:])
    if changes.size == 0:
        return None
    i = int(changes[-1])
    total = state.total
    x = grid.x
    t0, t1 = total[i], total[i + 1]
    return float(x[i] + (threshold - t0) / (t1 - t0) * (x[i + 1] - x[i]))


def simulate(p: ModelParams, grid: Grid1D, cfg: SimConfig, ic: FieldState):
    """Integrate to ``cfg.t_end``; returns ``(final_state, trace, bounds_report)``.

    The front and the density range are sampled every ``cfg.sample_stride``
    steps (and at the start and end).
    """
    if ic.n_e.shape != (grid.nx,):
        raise ValidationError("initial condition does not match the grid")
    dx = grid.dx
    dt = cfg.dt(p, dx)
    _check_cfl(p, dx, dt)
    n_steps = int(math.ceil(cfg.t_end / dt - 1e-9))
    threshold = cfg.resolve_threshold(p)
    left = None if cfg.left_value is None else tuple(float(v) for v in cfg.left_value)
    upper = equilibria.k_plus(p)

    trace = FrontTrace(threshold)
    lo = np.array([np.inf, np.inf])
    hi = -lo
    ne = np.array(ic.n_e, dtype=float)
    nd = np.array(ic.n_d, dtype=float)
    out_e, out_d = np.empty_like(ne), np.empty_like(nd)
    coef = _coefficients(p)
    t = ic.t

    def sample(t, ne, nd):
        if not (np.all(np.isfinite(ne)) and np.all(np.isfinite(nd))):
            raise BlowUpError(f"non-finite density at t={t:.6g}", t)
        lo[:] = np.minimum(lo, (ne.min(), nd.min()))
        hi[:] = np.maximum(hi, (ne.max(), nd.max()))
        trace.append(t, track_front(FieldState(t, ne, nd), grid, threshold))

    sample(t, ne, nd)
    for k in range(1, n_steps + 1):
        _advance(coef, ne, nd, out_e, out_d, dx, dt, cfg.boundary, left)
        ne, out_e = out_e, ne
        nd, out_d = out_d, nd
        t = ic.t + k * dt
        if k % cfg.sample_stride == 0 or k == n_steps:
            sample(t, ne, nd)

    violation = bool(np.any(lo < -1e-10) or np.any(hi > upper + 1e-8))
    bounds = BoundsReport(lo[0], hi[0], lo[1], hi[1], upper, violation)
    return FieldState(t, ne, nd), trace, bounds


def estimate_speed(trace: FrontTrace, grid: Grid1D, window: float = 0.5,
                   min_samples: int = 10) -> SpeedEstimate:
    """Least-squares slope of front position against time over the trailing
    ``window`` fraction of the samples."""
    if not 0 < window <= 1:
        raise ValidationError("window must lie in (0, 1]")
    n_used = int(math.ceil(window * len(trace)))
    if n_used < min_samples:
        raise ValidationError(f"need at least {min_samples} front samples in the window, have {n_used}")
    t = np.asarray(trace.t[-n_used:])
    x = np.asarray(trace.x_front[-n_used:])
    fit = stats.linregress(t, x)
    contaminated = bool(np.any(x > grid.L - 10 * grid.dx))
    return SpeedEstimate(float(fit.slope), float(fit.stderr), window, contaminated, n_used)


@dataclass(frozen=True)
class DeterminacyReport:
    measured: float
    stderr: float
    c_star: float
    rel_error: float
    tolerance: float
    passed: bool
    inconclusive: bool
    bounds: BoundsReport
    estimate: SpeedEstimate

    @property
    def status(self) -> str:
        if self.inconclusive:
            return "INCONCLUSIVE"
        return "PASS" if self.passed else "FAIL"


def verify_linear_determinacy(p: ModelParams, grid: Grid1D, cfg: SimConfig, x0: float = 50.0,
                              left=None, tolerance: float = 0.03, window: float = 0.5,
                              return_run: bool = False):
    """Compare the simulated front speed with the linear spreading speed.

    ``left`` defaults to the mutation-free coexistence point.  A front that
    reaches the last ten cells of the domain makes the result inconclusive.
    """
    c_star = spectral.min_speed(p).c_star
    if left is None:
        left = equilibria.coexistence_of_g(p)
    ic = heaviside_ic(grid, x0, left)
    final, trace, bounds = simulate(p, grid, cfg, ic)
    est = estimate_speed(trace, grid, window)
    rel = est.speed / c_star - 1.0
    report = DeterminacyReport(
        measured=est.speed, stderr=est.stderr, c_star=c_star, rel_error=rel, tolerance=tolerance,
        passed=abs(rel) <= tolerance and not est.boundary_contaminated,
        inconclusive=est.boundary_contaminated, bounds=bounds, estimate=est,
    )
    if return_run:
        return report, final, trace
    return report
