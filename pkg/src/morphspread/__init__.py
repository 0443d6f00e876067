"""Spreading speeds, equilibria and leading-edge composition for a
two-morph Lotka-Volterra reaction-diffusion system with linear mutation."""

from .model import ModelParams, MutationScaling, check_conditions, density_bounds
from .equilibria import equilibria_of_g, find_equilibria_of_f, k_minus, k_plus, perturbation_theta
from .spectral import (
    classify_regime,
    dispersion,
    limit_summary,
    min_speed,
    mu_curve,
    pf_eigenpair,
    q_ratio_from_ratios,
    speed_limits,
)

# Parameter set used throughout the examples: establisher grows faster,
# disperser spreads faster, weak mutation.
P1 = ModelParams(D_e=0.3, D_d=1.5, r_e=1.1, r_d=0.2, m_ee=1 / 1.2, m_dd=1.0,
                 m_ed=0.8, m_de=0.7, mu_e=0.001, mu_d=0.00025)
# Weak inter-morph competition variant of P1.
P2 = P1.replace(m_ee=1.0, m_dd=1.0, m_ed=0.1, m_de=0.1)

__all__ = [
    "ModelParams", "MutationScaling", "check_conditions", "density_bounds",
    "equilibria_of_g", "find_equilibria_of_f", "k_minus", "k_plus", "perturbation_theta",
    "classify_regime", "dispersion", "limit_summary", "min_speed", "mu_curve", "pf_eigenpair",
    "q_ratio_from_ratios", "speed_limits", "P1", "P2",
]
