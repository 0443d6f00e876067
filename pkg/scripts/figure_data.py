"""Write the CSV tables behind each figure into an output directory.

    python scripts/figure_data.py --out figure_data [--jobs 4] [--skip-pde]
"""

import argparse
from pathlib import Path

import numpy as np

from morphspread import P1, pde, spectral
from morphspread.cli import CSV_HEADERS, q_ratio_rows, sweep_rows, write_csv
from morphspread.equilibria import coexistence_of_g
from morphspread.model import MutationScaling

RATES = MutationScaling(1.0, 0.001, 0.00025)


def regime_map(out, jobs):
    write_csv(out / "fig1_regimes.csv", CSV_HEADERS["sweep"], sweep_rows(100, jobs=jobs))


def front_profiles(out):
    grid = pde.Grid1D(400.0, 4001)
    state = pde.heaviside_ic(grid, 50.0, coexistence_of_g(P1))
    rows = []
    for _ in range(4):
        state, _, _ = pde.simulate(P1, grid, pde.SimConfig(t_end=50.0), state)
        rows += [(state.t, x, e, d) for x, e, d in zip(grid.x[::10], state.n_e[::10], state.n_d[::10])]
    write_csv(out / "fig2_profiles.csv", ("t", "x", "n_e", "n_d"), rows)


def dispersion_curves(out):
    betas = np.geomspace(0.1, 5.0, 400)
    for mu in (1.0, 100.0):
        p = RATES.apply(P1, mu)
        write_csv(out / f"fig4_dispersion_mu{mu:g}.csv", CSV_HEADERS["dispersion"],
                  zip(betas, spectral.dispersion_curve(p, betas)))
    p0 = P1.replace(mu_e=0.0, mu_d=0.0)
    rows = [(b, b * p0.D_e + p0.r_e / b, b * p0.D_d + p0.r_d / b) for b in betas]
    write_csv(out / "fig5_envelope.csv", ("beta", "eta_e", "eta_d"), rows)


def q_ratio_sweeps(out):
    r0, D0, m0 = 0.2 / 1.1, 0.3 / 1.5, 4.0
    grid = np.linspace(0.01, 0.99, 197)

    def safe(r, D, m):
        return spectral.q_ratio_from_ratios(r, D, m) if spectral.in_anomalous_zone(r, D) else ""

    write_csv(out / "fig6_vary_r.csv", ("r_ratio", "q_ratio"), [(r, safe(r, D0, m0)) for r in grid])
    write_csv(out / "fig6_vary_D.csv", ("D_ratio", "q_ratio"), [(D, safe(r0, D, m0)) for D in grid])
    ms = np.geomspace(1e-2, 1e2, 200)
    write_csv(out / "fig6_vary_m.csv", ("m_ratio", "q_ratio"), [(m, safe(r0, D0, m)) for m in ms])
    write_csv(out / "fig6_map.csv", CSV_HEADERS["q-ratio"], q_ratio_rows(100, m0))


def mu_convergence(out, jobs):
    curve = spectral.mu_curve(P1, RATES, np.logspace(-6, 1, 71), jobs=jobs)
    write_csv(out / "fig7_fig8_mu_curve.csv", CSV_HEADERS["mu-curve"], curve.rows())
    lim = spectral.limit_summary(P1, RATES)
    write_csv(out / "fig7_fig8_limits.csv", ("eta_0", "beta_star", "q_ratio", "eta_prime_0", "beta_prime_0"),
              [(lim.eta_0, lim.beta_star, lim.q_ratio, lim.eta_prime_0, lim.beta_prime_0)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figure_data")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--skip-pde", action="store_true", help="skip the front profiles (slowest part)")
    args = ap.parse_args()
    out = Path(args.out)
    regime_map(out, args.jobs)
    dispersion_curves(out)
    q_ratio_sweeps(out)
    mu_convergence(out, args.jobs)
    if not args.skip_pde:
        front_profiles(out)
    print(f"wrote {len(list(out.glob('*.csv')))} tables to {out}/")


if __name__ == "__main__":
    main()
