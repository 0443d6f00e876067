"""Equilibria of the reaction terms: closed forms, Newton searches, stability."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import ConditionError, ConvergenceError, ValidationError
from .model import ModelParams, MutationScaling

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 100
DEGENERATE_DET = 1e-12


class Kind(enum.Enum):
    EXTINCTION = "extinction"
    AXIS_E = "axis_e"
    AXIS_D = "axis_d"
    COEXISTENCE = "coexistence"


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Equilibrium:
    point: np.ndarray
    kind: Kind
    stability: Stability
    residual: float

    @property
    def n_e(self) -> float:
        return float(self.point[0])

    @property
    def n_d(self) -> float:
        return float(self.point[1])

    def is_nonnegative(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.point >= -tol))


def classify_stability(jac: np.ndarray) -> Stability:
    tr = jac[0, 0] + jac[1, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    if abs(det) <= DEGENERATE_DET:
        return Stability.DEGENERATE
    if det < 0:
        return Stability.SADDLE
    if tr < 0:
        return Stability.STABLE
    return Stability.UNSTABLE


def classify_kind(point, tol: float = 1e-9) -> Kind:
    present = np.asarray(point) > tol
    if present.all():
        return Kind.COEXISTENCE
    if present[0]:
        return Kind.AXIS_E
    if present[1]:
        return Kind.AXIS_D
    return Kind.EXTINCTION


def newton(func, jac, x0, tol: float = NEWTON_TOL, maxiter: int = NEWTON_MAXITER) -> np.ndarray:
    """Plain Newton iteration in R^2, stopping on step norm below ``tol``.

    Raises ConvergenceError on a singular Jacobian, non-finite iterate or
    exhausted iterations.
    """
    x = np.array(x0, dtype=float)
    for _ in range(maxiter):
        J = jac(x)
        try:
            dx = np.linalg.solve(J, -func(x))
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian at {x}") from exc
        x = x + dx
        if not np.all(np.isfinite(x)):
            raise ConvergenceError("Newton iterate left the finite range")
        if np.linalg.norm(dx) <= tol:
            return x
    raise ConvergenceError(f"Newton did not converge in {maxiter} iterations (last x={x})")


def _make(p, point, reaction, jacobian) -> Equilibrium:
    point = np.asarray(point, dtype=float)
    return Equilibrium(
        point=point,
        kind=classify_kind(point),
        stability=classify_stability(jacobian(p, point)),
        residual=float(np.max(np.abs(reaction(p, point)))),
    )


def coexistence_of_g(p: ModelParams) -> np.ndarray:
    det = p.m_ee * p.m_dd - p.m_ed * p.m_de
    if abs(det) <= 1e-14 * p.m_ee * p.m_dd:
        raise ValidationError("competition determinant m_ee*m_dd - m_ed*m_de vanishes")
    return np.array([(p.m_dd - p.m_ed) / det, (p.m_ee - p.m_de) / det])


def equilibria_of_g(p: ModelParams) -> list[Equilibrium]:
    """The four equilibria of the mutation-free system, in the order
    extinction, e-axis, d-axis, coexistence."""
    points = [np.zeros(2), np.array([1 / p.m_ee, 0.0]), np.array([0.0, 1 / p.m_dd]), coexistence_of_g(p)]
    out = [_make(p, x, model.reaction_g, model.jacobian_g) for x in points]
    # Kinds are fixed by construction even if the coexistence point leaves the quadrant.
    kinds = (Kind.EXTINCTION, Kind.AXIS_E, Kind.AXIS_D, Kind.COEXISTENCE)
    return [Equilibrium(eq.point, k, eq.stability, eq.residual) for eq, k in zip(out, kinds)]


def perturbation_theta(p: ModelParams, s: MutationScaling, eq) -> np.ndarray:
    """First-order shift ``d(equilibrium)/d(mu)`` of a g-equilibrium once
    mutation ``mu * M`` is switched on: ``-J_g(eq)^-1 M eq``."""
    eq = np.asarray(eq, dtype=float)
    res = np.max(np.abs(model.reaction_g(p, eq)))
    if res > 1e-9:
        raise ValidationError(f"{eq} is not an equilibrium of g (residual {res:.3g})")
    J = model.jacobian_g(p, eq)
    if abs(np.linalg.det(J)) <= DEGENERATE_DET:
        raise ValidationError(f"Jacobian of g is singular at {eq}")
    return -np.linalg.solve(J, s.matrix @ eq)


def default_box(p: ModelParams) -> tuple[tuple[float, float], tuple[float, float]]:
    big_e, big_d = model.density_bounds(p)
    return (-0.05, 1.1 * big_e), (-0.05, 1.1 * big_d)


def find_equilibria(p, reaction, jacobian, box=None, grid_n: int = 25) -> list[Equilibrium]:
    """Grid-seeded Newton search for roots of ``reaction`` inside ``box``."""
    if grid_n < 10:
        raise ValidationError("grid_n must be at least 10")
    (lo_e, hi_e), (lo_d, hi_d) = box if box is not None else default_box(p)
    diam = math.hypot(hi_e - lo_e, hi_d - lo_d)
    radius = 1e-6 * diam
    slack = 1e-9 * diam

    def func(x):
        return reaction(p, x)

    def jac(x):
        return jacobian(p, x)

    roots: list[np.ndarray] = []
    for se in np.linspace(lo_e, hi_e, grid_n):
        for sd in np.linspace(lo_d, hi_d, grid_n):
            try:
                x = newton(func, jac, (se, sd))
            except ConvergenceError:
                continue
            if not (lo_e - slack <= x[0] <= hi_e + slack and lo_d - slack <= x[1] <= hi_d + slack):
                continue
            if any(np.linalg.norm(x - r) <= radius for r in roots):
                continue
            roots.append(x)
    roots.sort(key=lambda r: (r[0], r[1]))
    return [_make(p, r, reaction, jacobian) for r in roots]


def find_equilibria_of_f(p: ModelParams, box=None, grid_n: int = 25) -> list[Equilibrium]:
    return find_equilibria(p, model.reaction_f, model.jacobian_f, box, grid_n)


def coexistence_of_f(p: ModelParams) -> np.ndarray:
    """Coexistence equilibrium of the full reaction, continued from that of g."""
    return newton(lambda x: model.reaction_f(p, x), lambda x: model.jacobian_f(p, x), coexistence_of_g(p))


def _nullcline_roots(p: ModelParams) -> np.ndarray:
    return np.array([(p.r_e - p.mu_e) / (p.r_e * p.m_ee), (p.r_d - p.mu_d) / (p.r_d * p.m_dd)])


def k_plus(p: ModelParams) -> np.ndarray:
    """Positive equilibrium of the upper bound ``reaction_f_plus``."""
    if not (p.mu_e < p.r_e and p.mu_d < p.r_d):
        raise ConditionError("k_plus needs mu_e < r_e and mu_d < r_d", ["mu_e < r_e", "mu_d < r_d"])
    x = newton(lambda x: model.reaction_f_plus(p, x), lambda x: model.jacobian_f_plus(p, x),
               1.1 * _nullcline_roots(p))
    if np.any(x <= 0):
        raise ConvergenceError(f"Newton for k_plus converged to non-positive point {x}")
    return x


def k_minus(p: ModelParams) -> np.ndarray:
    """Coexistence equilibrium of the lower bound ``reaction_f_minus``.

    Found as the equilibrium of the fully switched lower bound, then checked to
    sit past both cut-off windows so it is an equilibrium of the blended one too.
    """
    report = model.check_conditions(p)
    if not report.theorem3_satisfied:
        bad = [name for name in ("intersmall", "musmall") if not getattr(report, name).ok]
        detail = ", ".join(f"{name} (margin {getattr(report, name).margin:.6g})" for name in bad)
        raise ConditionError(f"lower-bound equilibrium requires: {detail} violated", bad)
    big_e, big_d = report.N_e, report.N_d
    start = np.array([
        (p.r_e - p.mu_e - p.r_e * p.m_ed * big_d) / (p.r_e * p.m_ee),
        (p.r_d - p.mu_d - p.r_d * p.m_de * big_e) / (p.r_d * p.m_dd),
    ])
    x = newton(lambda x: model.reaction_f_minus_star(p, x),
               lambda x: model.jacobian_f_minus_star(p, x), 1.1 * start)
    thr = model.cutoff_thresholds(p)
    if not (x[0] > thr["gamma_d"][1] and x[1] > thr["gamma_e"][1]):
        raise ConditionError(f"k_minus={x} lies inside a cut-off window", ["rootswitch"])
    return x
