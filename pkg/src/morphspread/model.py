"""Two-morph Lotka-Volterra reaction terms with linear mutation.

Morph ``e`` (establisher) grows faster, morph ``d`` (disperser) diffuses
faster.  Densities are passed as arrays whose leading axis has length 2,
``n = (n_e, n_d)``; every reaction accepts extra trailing axes so the same
code evaluates a single point, a grid, or a whole PDE state.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditionError, ValidationError

PARAM_NAMES = ("D_e", "D_d", "r_e", "r_d", "m_ee", "m_dd", "m_ed", "m_de", "mu_e", "mu_d")
# Coupling terms may be switched off (decoupled / mutation-free limits).
_MAY_BE_ZERO = frozenset({"m_ed", "m_de", "mu_e", "mu_d"})


@dataclass(frozen=True)
class ModelParams:
    D_e: float
    D_d: float
    r_e: float
    r_d: float
    m_ee: float
    m_dd: float
    m_ed: float
    m_de: float
    mu_e: float
    mu_d: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ValidationError(f"{name} must be a real number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
            if name in _MAY_BE_ZERO:
                if value < 0:
                    raise ValidationError(f"{name} must be non-negative, got {value}")
            elif value <= 0:
                raise ValidationError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @property
    def has_mutation(self) -> bool:
        return self.mu_e > 0 or self.mu_d > 0

    @property
    def diffusion(self) -> np.ndarray:
        return np.array([self.D_e, self.D_d])


@dataclass(frozen=True)
class MutationScaling:
    """Mutation written as ``mu * (e, d)``, so ``mu_e = mu*e`` and ``mu_d = mu*d``."""

    mu: float
    e: float
    d: float

    def __post_init__(self):
        for name in ("mu", "e", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.mu < 0:
            raise ValidationError(f"mu must be non-negative, got {self.mu}")
        if self.e <= 0 or self.d <= 0:
            raise ValidationError("mutation coefficients e, d must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[-self.e, self.d], [self.e, -self.d]])

    def apply(self, p: ModelParams, mu: float | None = None) -> ModelParams:
        mu = self.mu if mu is None else mu
        return p.replace(mu_e=mu * self.e, mu_d=mu * self.d)

    @classmethod
    def from_params(cls, p: ModelParams, mu: float = 1.0) -> "MutationScaling":
        return cls(mu=mu, e=p.mu_e / mu, d=p.mu_d / mu)


def _split(n):
    n = np.asarray(n, dtype=float)
    if n.shape[:1] != (2,):
        raise ValidationError(f"density must have leading dimension 2, got shape {n.shape}")
    return n[0], n[1]


def reaction_f_parts(p: ModelParams, ne, nd):
    """``reaction_f`` on separate component arrays, without stacking."""
    fe = p.r_e * ne * (1.0 - p.m_ee * ne - p.m_ed * nd) - p.mu_e * ne + p.mu_d * nd
    fd = p.r_d * nd * (1.0 - p.m_de * ne - p.m_dd * nd) + p.mu_e * ne - p.mu_d * nd
    return fe, fd


def reaction_f(p: ModelParams, n) -> np.ndarray:
    """Growth, competition and mutation terms of the full system."""
    return np.array(reaction_f_parts(p, *_split(n)))


def reaction_g(p: ModelParams, n) -> np.ndarray:
    """Mutation-free Lotka-Volterra competition."""
    ne, nd = _split(n)
    return np.array([
        p.r_e * ne * (1.0 - p.m_ee * ne - p.m_ed * nd),
        p.r_d * nd * (1.0 - p.m_de * ne - p.m_dd * nd),
    ])


def reaction_f_plus(p: ModelParams, n) -> np.ndarray:
    """Cooperative upper bound: ``reaction_f`` with inter-morph competition removed."""
    ne, nd = _split(n)
    return np.array([
        p.r_e * ne * (1.0 - p.m_ee * ne) - p.mu_e * ne + p.mu_d * nd,
        p.r_d * nd * (1.0 - p.m_dd * nd) + p.mu_e * ne - p.mu_d * nd,
    ])


def cutoff_gamma(x, lo: float, hi: float):
    """Smooth switch from 1 (``x <= lo``) to 0 (``x >= hi``).

    Uses the quintic smoothstep, which is C2 rather than C-infinity.
    """
    if not lo < hi:
        raise ValidationError(f"cutoff bracket needs lo < hi, got lo={lo}, hi={hi}")
    t = np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
    out = 1.0 - t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    return float(out) if out.ndim == 0 else out


def cutoff_thresholds(p: ModelParams) -> dict:
    """Switching intervals of the two cut-offs.

    ``gamma_d`` acts on ``n_e`` and ``gamma_e`` acts on ``n_d``.
    """
    if p.m_ed <= 0 or p.m_de <= 0:
        raise ConditionError("cut-off thresholds need m_ed > 0 and m_de > 0", ["m_ed", "m_de"])
    se = p.mu_d / (p.r_e * p.m_ed)
    sd = p.mu_e / (p.r_d * p.m_de)
    if se <= 0 or sd <= 0:
        raise ConditionError("cut-off thresholds need mu_e > 0 and mu_d > 0", ["mu_e", "mu_d"])
    return {"gamma_d": (se / 4.0, se / 2.0), "gamma_e": (sd / 4.0, sd / 2.0)}


def reaction_f_minus(p: ModelParams, n) -> np.ndarray:
    """Cooperative lower bound.

    The competitor density inside each inter-morph term is blended towards the
    cap ``N`` from :func:`density_bounds` once the own density passes the
    cut-off window, which keeps the off-diagonal Jacobian entries non-negative.
    """
    ne, nd = _split(n)
    thr = cutoff_thresholds(p)
    big_e, big_d = density_bounds(p)
    gd = cutoff_gamma(ne, *thr["gamma_d"])
    ge = cutoff_gamma(nd, *thr["gamma_e"])
    hd = gd * nd + (1.0 - gd) * big_d
    he = ge * ne + (1.0 - ge) * big_e
    return np.array([
        p.r_e * ne * (1.0 - p.m_ee * ne - p.m_ed * hd) - p.mu_e * ne + p.mu_d * nd,
        p.r_d * nd * (1.0 - p.m_de * he - p.m_dd * nd) + p.mu_e * ne - p.mu_d * nd,
    ])


def reaction_f_minus_star(p: ModelParams, n) -> np.ndarray:
    """``reaction_f_minus`` with both cut-offs fully switched (h = N)."""
    ne, nd = _split(n)
    big_e, big_d = density_bounds(p)
    return np.array([
        p.r_e * ne * (1.0 - p.m_ee * ne - p.m_ed * big_d) - p.mu_e * ne + p.mu_d * nd,
        p.r_d * nd * (1.0 - p.m_de * big_e - p.m_dd * nd) + p.mu_e * ne - p.mu_d * nd,
    ])


def jacobian_f(p: ModelParams, n) -> np.ndarray:
    ne, nd = (float(v) for v in np.asarray(n, dtype=float))
    return np.array([
        [p.r_e * (1 - 2 * p.m_ee * ne - p.m_ed * nd) - p.mu_e, p.mu_d - p.r_e * p.m_ed * ne],
        [p.mu_e - p.r_d * p.m_de * nd, p.r_d * (1 - p.m_de * ne - 2 * p.m_dd * nd) - p.mu_d],
    ])


def jacobian_g(p: ModelParams, n) -> np.ndarray:
    ne, nd = (float(v) for v in np.asarray(n, dtype=float))
    return np.array([
        [p.r_e * (1 - 2 * p.m_ee * ne - p.m_ed * nd), -p.r_e * p.m_ed * ne],
        [-p.r_d * p.m_de * nd, p.r_d * (1 - p.m_de * ne - 2 * p.m_dd * nd)],
    ])


def jacobian_f_plus(p: ModelParams, n) -> np.ndarray:
    ne, nd = (float(v) for v in np.asarray(n, dtype=float))
    return np.array([
        [p.r_e * (1 - 2 * p.m_ee * ne) - p.mu_e, p.mu_d],
        [p.mu_e, p.r_d * (1 - 2 * p.m_dd * nd) - p.mu_d],
    ])


def jacobian_f_minus_star(p: ModelParams, n) -> np.ndarray:
    ne, nd = (float(v) for v in np.asarray(n, dtype=float))
    big_e, big_d = density_bounds(p)
    return np.array([
        [p.r_e * (1 - 2 * p.m_ee * ne - p.m_ed * big_d) - p.mu_e, p.mu_d],
        [p.mu_e, p.r_d * (1 - p.m_de * big_e - 2 * p.m_dd * nd) - p.mu_d],
    ])


def linearisation_at_zero(p: ModelParams) -> np.ndarray:
    return np.array([[p.r_e - p.mu_e, p.mu_d], [p.mu_e, p.r_d - p.mu_d]])


def density_bounds(p: ModelParams) -> tuple[float, float]:
    """Closed-form caps ``(N_e, N_d)`` on the positive equilibrium of ``reaction_f_plus``."""
    big_d = (1.0 + math.sqrt(1.0 + p.r_e * p.m_dd / (p.r_d * p.m_ee))) / (2.0 * p.m_dd)
    big_e = (1.0 + math.sqrt(1.0 + p.r_d * p.m_ee / (p.r_e * p.m_dd))) / (2.0 * p.m_ee)
    return big_e, big_d


# ---------------------------------------------------------------------------
# parameter predicates


@dataclass(frozen=True)
class Condition:
    ok: bool
    margin: float

    @classmethod
    def from_margin(cls, margin: float) -> "Condition":
        return cls(ok=bool(margin > 0), margin=float(margin))


@dataclass(frozen=True)
class ConditionReport:
    parms_rD: Condition
    compe: Condition
    asymproot: Condition
    fastersp: Condition
    intersmall: Condition
    musmall: Condition
    rootswitch: Condition
    N_e: float
    N_d: float

    NAMES = ("parms_rD", "compe", "asymproot", "fastersp", "intersmall", "musmall", "rootswitch")

    @property
    def theorem3_satisfied(self) -> bool:
        return self.intersmall.ok and self.musmall.ok

    def violated(self) -> list[str]:
        return [name for name in self.NAMES if not getattr(self, name).ok]

    def items(self):
        return [(name, getattr(self, name)) for name in self.NAMES]


def _ratio(num: float, den: float) -> float:
    # x/0 for the predicates: a vanishing coupling makes the bound unreachable.
    if den == 0:
        return math.inf if num > 0 else (0.0 if num == 0 else -math.inf)
    return num / den


def mutation_caps(p: ModelParams) -> tuple[float, float]:
    """Upper limits on ``mu_e`` and ``mu_d`` for the lower-bound construction."""
    big_e, big_d = density_bounds(p)
    cap_e = min(p.r_e * (1 - p.m_ed * big_d) / 2, p.r_d * p.m_de * (1 - p.m_de * big_e) / p.m_dd)
    cap_d = min(p.r_d * (1 - p.m_de * big_e) / 2, p.r_e * p.m_ed * (1 - p.m_ed * big_d) / p.m_ee)
    return cap_e, cap_d


def check_conditions(p: ModelParams) -> ConditionReport:
    """Evaluate every parameter inequality with a signed margin (``> 0`` means it holds)."""
    big_e, big_d = density_bounds(p)
    cap_e, cap_d = mutation_caps(p)
    asym = min(
        (p.r_e - p.mu_e) / (p.r_e * p.m_ee) - _ratio(p.mu_d, p.r_e * p.m_ed),
        (p.r_d - p.mu_d) / (p.r_d * p.m_dd) - _ratio(p.mu_e, p.r_d * p.m_de),
    )
    switch = min(
        (p.r_e - p.mu_e - p.r_e * p.m_ed * big_d) / (p.r_e * p.m_ee) - _ratio(p.mu_d, 2 * p.r_e * p.m_ed),
        (p.r_d - p.mu_d - p.r_d * p.m_de * big_e) / (p.r_d * p.m_dd) - _ratio(p.mu_e, 2 * p.r_d * p.m_de),
    )
    return ConditionReport(
        parms_rD=Condition.from_margin(min(p.r_e - p.r_d, p.D_d - p.D_e)),
        compe=Condition.from_margin(min(p.m_dd - p.m_ed, p.m_ee - p.m_de)),
        asymproot=Condition.from_margin(asym),
        fastersp=Condition.from_margin(min(p.D_d / p.D_e + p.r_d / p.r_e - 2,
                                           p.D_e / p.D_d + p.r_e / p.r_d - 2)),
        intersmall=Condition.from_margin(min(1 / big_d - p.m_ed, 1 / big_e - p.m_de)),
        musmall=Condition.from_margin(min(cap_e - p.mu_e, cap_d - p.mu_d)),
        rootswitch=Condition.from_margin(switch),
        N_e=big_e,
        N_d=big_d,
    )
