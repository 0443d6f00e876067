"""Linear spreading speed from the Perron-Frobenius dispersion relation.

For a decay rate ``beta`` the leading edge ``exp(-beta*xi) q`` travels at the
Perron-Frobenius eigenvalue of ``H(beta) = beta*A + f'(0)/beta``.  The linear
spreading speed is the minimum of that eigenvalue over ``beta``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, ConditionError, RegimeError, ValidationError
from .model import ModelParams, MutationScaling

SCAN_POINTS = 200
SCAN_RANGE = (1e-3, 1e3)
GOLDEN_RTOL = 1e-10

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Regime(enum.Enum):
    ESTABLISHER = "establisher"
    DISPERSER = "disperser"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class DispersionPoint:
    beta: float
    eta: float
    q: np.ndarray | None  # None when mu_e = mu_d = 0 (envelope mode)

    @property
    def envelope(self) -> bool:
        return self.q is None

    @property
    def q_ratio(self) -> float:
        if self.q is None:
            raise ValidationError("no leading-edge eigenvector without mutation")
        return float(self.q[1] / self.q[0])


@dataclass(frozen=True)
class SpeedPoint:
    c_star: float
    beta_min: float
    q: np.ndarray | None
    mu: float | None = None

    @property
    def q_ratio(self) -> float:
        if self.q is None:
            raise ValidationError("no leading-edge eigenvector without mutation")
        return float(self.q[1] / self.q[0])


@dataclass(frozen=True)
class SpeedLimits:
    v_e: float
    v_d: float
    v_f: float | None


# ---------------------------------------------------------------------------
# Perron-Frobenius engine


def h_matrix(p: ModelParams, beta: float) -> np.ndarray:
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    return np.array([
        [beta * p.D_e + (p.r_e - p.mu_e) / beta, p.mu_d / beta],
        [p.mu_e / beta, beta * p.D_d + (p.r_d - p.mu_d) / beta],
    ])


def _pf_parts(h11, h12, h21, h22):
    """Largest eigenvalue and the two gaps ``eta - h11``, ``eta - h22``.

    Each gap is formed without cancellation: the larger one as a sum, the
    smaller one through ``gap_small * gap_large = h12*h21``.
    """
    half = 0.5 * (h11 - h22)
    root = math.sqrt(h12) * math.sqrt(h21)  # avoids underflow of h12*h21
    disc = math.hypot(half, root)
    if half >= 0:
        gap1 = disc + half  # eta - h22
        gap0 = root * (root / gap1) if gap1 > 0 else 0.0  # eta - h11
        eta = h11 + gap0
    else:
        gap0 = disc - half
        gap1 = root * (root / gap0)
        eta = h22 + gap1
    return eta, gap0, gap1


def pf_eigenpair(H) -> tuple[float, np.ndarray]:
    """Perron-Frobenius eigenvalue and unit-norm non-negative eigenvector of a
    2x2 matrix with non-negative off-diagonal entries."""
    H = np.asarray(H, dtype=float)
    h11, h12, h21, h22 = H[0, 0], H[0, 1], H[1, 0], H[1, 1]
    if h12 < 0 or h21 < 0:
        raise ValidationError("off-diagonal entries must be non-negative")
    if h12 == 0 and h21 == 0:
        raise ValidationError("matrix is reducible (both off-diagonals zero); use envelope mode")
    # exact power-of-two rescaling keeps extreme magnitudes out of the subnormal range
    exp = math.frexp(float(np.max(np.abs(H))))[1]
    h11, h12, h21, h22 = (math.ldexp(h, -exp) for h in (h11, h12, h21, h22))
    eta, gap0, gap1 = _pf_parts(h11, h12, h21, h22)
    eta = math.ldexp(eta, exp)
    # (h12, gap0) and (gap1, h21) both span the eigenspace; take the better conditioned one.
    first, second = np.array([gap1, h21]), np.array([h12, gap0])
    q = first if h11 >= h22 else second
    if not q.any():  # triangular with equal diagonal: the preferred vector vanishes
        q = second if h11 >= h22 else first
    q = q / math.hypot(q[0], q[1])
    return eta, q


def q_ratio(q) -> float:
    return float(q[1] / q[0])


def _eta(p: ModelParams, beta: float) -> float:
    if p.has_mutation:
        h11 = beta * p.D_e + (p.r_e - p.mu_e) / beta
        h22 = beta * p.D_d + (p.r_d - p.mu_d) / beta
        return _pf_parts(h11, p.mu_d / beta, p.mu_e / beta, h22)[0]
    return max(beta * p.D_e + p.r_e / beta, beta * p.D_d + p.r_d / beta)


def _deta_dbeta(p: ModelParams, beta: float) -> float:
    """Analytic slope of the dispersion relation (mutation on)."""
    ae, ad = p.r_e - p.mu_e, p.r_d - p.mu_d
    mean_slope = 0.5 * (p.D_e + p.D_d) - 0.5 * (ae + ad) / beta**2
    half = 0.5 * beta * (p.D_e - p.D_d) + 0.5 * (ae - ad) / beta
    half_slope = 0.5 * (p.D_e - p.D_d) - 0.5 * (ae - ad) / beta**2
    prod = p.mu_e * p.mu_d / beta**2
    disc = math.sqrt(half * half + prod)
    return mean_slope + (half * half_slope - prod / beta) / disc


def dispersion(p: ModelParams, beta: float) -> DispersionPoint:
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    if p.has_mutation:
        eta, q = pf_eigenpair(h_matrix(p, beta))
        return DispersionPoint(beta, eta, q)
    return DispersionPoint(beta, _eta(p, beta), None)


def dispersion_curve(p: ModelParams, betas) -> np.ndarray:
    return np.array([_eta(p, float(b)) for b in betas])


# ---------------------------------------------------------------------------
# minimisation over beta


def golden_section(f, a: float, b: float, rtol: float = GOLDEN_RTOL, maxiter: int = 500):
    """Golden-section search on ``[a, b]``; returns ``(x, f(x), (lo, hi))``.

    Stops once the bracket width falls below ``rtol * |x|`` or stops shrinking.
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= rtol * abs(0.5 * (a + b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        if not a < c < d < b:
            break
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return x, fx, (a, b)


def _bisect_root(g, a: float, b: float, maxiter: int = 200) -> float | None:
    ga, gb = g(a), g(b)
    if ga == 0:
        return a
    if gb == 0:
        return b
    if ga * gb > 0:
        return None
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        gm = g(m)
        if gm == 0:
            return m
        if (gm < 0) == (ga < 0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def _scan_and_refine(f, rtol: float):
    grid = np.geomspace(*SCAN_RANGE, SCAN_POINTS)
    vals = np.array([f(float(b)) for b in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == len(grid) - 1:
        raise BracketError(f"dispersion minimum lies on the scan boundary (beta={grid[i]:.3g})")
    return golden_section(f, float(grid[i - 1]), float(grid[i + 1]), rtol=rtol)


def min_speed(p: ModelParams, mu: float | None = None) -> SpeedPoint:
    """Linear spreading speed ``c* = min_beta eta(beta)``.

    A logarithmic scan brackets the minimum, golden-section search narrows
    it, and with mutation on the slope root inside the final bracket is
    polished by bisection (the minimum has curvature ~ 1/mu, so the eigenvector
    at the minimiser needs beta to near machine precision).
    """
    if not (p.mu_e < p.r_e and p.mu_d < p.r_d):
        raise ConditionError("min_speed needs mu_e < r_e and mu_d < r_d", ["mu_e < r_e", "mu_d < r_d"])
    f = lambda b: _eta(p, b)  # noqa: E731
    beta, eta, (lo, hi) = _scan_and_refine(f, GOLDEN_RTOL)
    if not p.has_mutation:
        return SpeedPoint(eta, beta, None, mu)
    width = hi - lo
    root = _bisect_root(lambda b: _deta_dbeta(p, b), max(lo - width, 0.5 * lo), hi + width)
    if root is not None:
        eta_root = f(root)
        if eta_root <= eta:
            beta, eta = root, eta_root
    _, q = pf_eigenpair(h_matrix(p, beta))
    return SpeedPoint(eta, beta, q, mu)


def envelope_minimum(p: ModelParams) -> tuple[float, float]:
    """Numerical minimum over beta of the mutation-free envelope
    ``max(beta*D_e + r_e/beta, beta*D_d + r_d/beta)``; returns ``(eta, beta)``."""
    p0 = p.replace(mu_e=0.0, mu_d=0.0)
    beta, eta, _ = _scan_and_refine(lambda b: _eta(p0, b), rtol=1e-15)
    return eta, beta


# ---------------------------------------------------------------------------
# mutation-free limits


def speed_limits(p: ModelParams) -> SpeedLimits:
    v_e = 2.0 * math.sqrt(p.r_e * p.D_e)
    v_d = 2.0 * math.sqrt(p.r_d * p.D_d)
    rad = (p.r_e - p.r_d) * (p.D_d - p.D_e)
    v_f = abs(p.r_e * p.D_d - p.r_d * p.D_e) / math.sqrt(rad) if rad > 0 else None
    return SpeedLimits(v_e, v_d, v_f)


def in_anomalous_zone(r_ratio: float, D_ratio: float) -> bool:
    """Both fast-front inequalities in ratio form (``r = r_d/r_e``, ``D = D_e/D_d``)."""
    return 1.0 / D_ratio + r_ratio > 2.0 and D_ratio + 1.0 / r_ratio > 2.0


def classify_regime(p: ModelParams) -> Regime:
    if not (p.r_e > p.r_d and p.D_d > p.D_e):
        raise ConditionError("regime classification assumes r_e > r_d and D_d > D_e", ["parms_rD"])
    if p.D_d / p.D_e + p.r_d / p.r_e > 2 and p.D_e / p.D_d + p.r_e / p.r_d > 2:
        return Regime.ANOMALOUS
    lim = speed_limits(p)
    return Regime.ESTABLISHER if lim.v_e >= lim.v_d else Regime.DISPERSER


def limiting_speed(p: ModelParams, regime: Regime | None = None) -> float:
    regime = regime or classify_regime(p)
    lim = speed_limits(p)
    return lim.v_f if regime is Regime.ANOMALOUS else max(lim.v_e, lim.v_d)


@dataclass(frozen=True)
class LimitSummary:
    beta_star: float
    eta_0: float
    eta_0_alt: float  # same speed from the disperser branch
    v_e: float
    v_d: float
    v_f: float
    a: float
    b: float
    q_ratio: float
    eta_prime_0: float
    beta_prime_0: float
    disperser_row_residual: float  # unused row of the first-order eigen-equation
    regime: Regime


def limit_summary(p: ModelParams, s: MutationScaling) -> LimitSummary:
    """Small-mutation limit of the minimal speed, its minimiser and the
    leading-edge composition, plus their first derivatives in ``mu``.

    Only the diffusion and growth rates of ``p`` enter; mutation comes from ``s``.
    """
    regime = classify_regime(p)
    if regime is not Regime.ANOMALOUS:
        raise RegimeError(f"limit summary needs the anomalous regime, got {regime.value}")
    De, Dd, re, rd = p.D_e, p.D_d, p.r_e, p.r_d
    e, d = s.e, s.d
    bs = math.sqrt((re - rd) / (Dd - De))
    eta_e = bs * De + re / bs
    eta_d = bs * Dd + rd / bs
    a = bs * bs * Dd - rd
    b = re - bs * bs * De
    qr = math.sqrt(b * e / (a * d))
    # Unknowns (beta', eta'): establisher row of the eigen-equation and the
    # mu-derivative of the stationarity condition.
    lhs = np.array([
        [bs * (De - re / bs**2), -bs],
        [2 * bs * (b * Dd - a * De) + eta_e * (a - b), bs * (a - b)],
    ])
    rhs = np.array([e - d * qr, b * d - a * e])
    beta_p, eta_p = np.linalg.solve(lhs, rhs)
    res = bs * (Dd * beta_p - rd * beta_p / bs**2 - eta_p) * qr - d * qr + e
    lim = speed_limits(p)
    return LimitSummary(
        beta_star=bs, eta_0=eta_e, eta_0_alt=eta_d, v_e=lim.v_e, v_d=lim.v_d, v_f=lim.v_f,
        a=a, b=b, q_ratio=qr, eta_prime_0=float(eta_p), beta_prime_0=float(beta_p),
        disperser_row_residual=float(res), regime=regime,
    )


def q_ratio_from_ratios(r: float, D: float, m: float) -> float:
    """Leading-edge ratio q_d/q_e from ``r = r_d/r_e``, ``D = D_e/D_d``, ``m = e/d``."""
    num = 2 * D - r * D - 1
    den = 2 * r - r * D - 1
    if not (num < 0 and den < 0) or m <= 0:
        raise RegimeError(f"(r={r}, D={D}) outside the anomalous zone")
    return math.sqrt(num / den * m)


# ---------------------------------------------------------------------------
# mu-continuation


@dataclass(frozen=True)
class MuCurve:
    mu: np.ndarray
    eta: np.ndarray
    beta: np.ndarray
    q_ratio: np.ndarray
    eta_prime: np.ndarray
    beta_prime: np.ndarray

    COLUMNS = ("mu", "eta", "beta", "q_ratio", "eta_prime", "beta_prime")

    def rows(self):
        return list(zip(*(getattr(self, c).tolist() for c in self.COLUMNS)))

    def __len__(self):
        return len(self.mu)


def _speed_at(args):
    p, s, mu = args
    sp = min_speed(s.apply(p, mu), mu=mu)
    return sp.c_star, sp.beta_min, sp.q_ratio


def mu_curve(p_base: ModelParams, s: MutationScaling, mu_grid, jobs: int = 1) -> MuCurve:
    """Minimal speed, minimiser and leading-edge ratio along a grid of ``mu``.

    Derivative columns are second-order finite differences on the (possibly
    non-uniform) grid.
    """
    mus = np.asarray(mu_grid, dtype=float)
    if mus.ndim != 1 or len(mus) < 3:
        raise ValidationError("mu grid needs at least 3 points")
    if np.any(mus <= 0) or np.any(np.diff(mus) <= 0):
        raise ValidationError("mu grid must be positive and strictly ascending")
    tasks = [(p_base, s, float(m)) for m in mus]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_speed_at, tasks))
    else:
        results = [_speed_at(t) for t in tasks]
    eta, beta, qr = (np.array(col) for col in zip(*results))
    return MuCurve(mus, eta, beta, qr, np.gradient(eta, mus), np.gradient(beta, mus))
