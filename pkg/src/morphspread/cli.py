"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 inconclusive (front reached the domain boundary).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import equilibria, model, pde, spectral
from .errors import ConditionError, NumericalError, ValidationError
from .model import PARAM_NAMES, ModelParams, MutationScaling

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_INCONCLUSIVE = 0, 1, 2, 3

SIM_DEFAULTS = {
    "L": 400.0,
    "nx": 4001,
    "t_end": 200.0,
    "cfl_safety": 0.4,
    "threshold_frac": 0.1,
    "x0": 50.0,
    "boundary": "neumann",
    "sample_stride": 100,
    "left": None,
}

CSV_HEADERS = {
    "mu-curve": ("mu", "eta", "beta", "q_ratio", "eta_prime", "beta_prime"),
    "dispersion": ("beta", "eta"),
    "sweep": ("r_ratio", "D_ratio", "regime", "v_limit"),
    "q-ratio": ("r_ratio", "D_ratio", "m_ratio", "q_ratio"),
    "trace": ("t", "x_front"),
    "profile": ("x", "n_e", "n_d"),
}


class ConfigError(ValidationError):
    pass


@dataclass
class RunConfig:
    params: ModelParams
    scaling: MutationScaling | None = None
    sim: dict = field(default_factory=lambda: dict(SIM_DEFAULTS))
    out: Path | None = None

    def mutation_scaling(self) -> MutationScaling:
        """Explicit ``mu, e, d`` if given, else ``mu = 1`` with ``e, d = mu_e, mu_d``."""
        if self.scaling is not None:
            return self.scaling
        return MutationScaling(1.0, self.params.mu_e, self.params.mu_d)


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    allowed = set(PARAM_NAMES) | {"mu", "e", "d", "sim"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    scaling = None
    has_rates = {"mu_e", "mu_d"} & set(data)
    has_scaling = {"mu", "e", "d"} & set(data)
    if has_rates and has_scaling:
        raise ConfigError("give either mu_e, mu_d or mu, e, d, not both")
    if has_scaling:
        missing = {"mu", "e", "d"} - set(data)
        if missing:
            raise ConfigError(f"missing config key(s): {', '.join(sorted(missing))}")
        scaling = MutationScaling(*(_number(k, data[k]) for k in ("mu", "e", "d")))
        rates = {"mu_e": scaling.mu * scaling.e, "mu_d": scaling.mu * scaling.d}
    else:
        rates = {}
    values = {}
    for name in PARAM_NAMES:
        if name in rates:
            values[name] = rates[name]
        elif name in data:
            values[name] = _number(name, data[name])
        else:
            raise ConfigError(f"missing config key: {name}")
    try:
        params = ModelParams(**values)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc

    sim = dict(SIM_DEFAULTS)
    raw_sim = data.get("sim", {})
    if not isinstance(raw_sim, dict):
        raise ConfigError("sim must be a JSON object")
    unknown = sorted(set(raw_sim) - set(SIM_DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown sim key(s): {', '.join(unknown)}")
    for key, value in raw_sim.items():
        if key == "boundary":
            if value not in (pde.NEUMANN, pde.DIRICHLET):
                raise ConfigError(f"sim.boundary must be 'neumann' or 'dirichlet', got {value!r}")
            sim[key] = value
        elif key == "left":
            if not (isinstance(value, list) and len(value) == 2):
                raise ConfigError("sim.left must be a list of two densities")
            sim[key] = [_number("sim.left", v) for v in value]
        elif key in ("nx", "sample_stride"):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"sim.{key} must be an integer")
            sim[key] = value
        else:
            sim[key] = _number(f"sim.{key}", value)
    return RunConfig(params, scaling, sim)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(data)


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.value
    return obj


def write_json(path: Path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _out(args) -> Path | None:
    return Path(args.out) if args.out else None


# ---------------------------------------------------------------------------
# commands


def cmd_speed(cfg: RunConfig, args) -> int:
    p = cfg.params
    sp = spectral.min_speed(p)
    qr = sp.q_ratio if sp.q is not None else None
    print(f"c*={sp.c_star:.10g} beta={sp.beta_min:.10g} q_ratio={'n/a' if qr is None else f'{qr:.10g}'}")
    out = _out(args)
    if out:
        betas = np.geomspace(args.beta_min, args.beta_max, args.beta_points)
        write_csv(out / "dispersion.csv", CSV_HEADERS["dispersion"],
                  zip(betas, spectral.dispersion_curve(p, betas)))
        write_json(out / "speed.json", {"c_star": sp.c_star, "beta_min": sp.beta_min,
                                        "q": sp.q, "q_ratio": qr})
    return EXIT_OK


def cmd_limits(cfg: RunConfig, args) -> int:
    s = cfg.mutation_scaling()
    lim = spectral.limit_summary(cfg.params, s)
    print(f"regime={lim.regime.value} beta*={lim.beta_star:.10g} eta0={lim.eta_0:.10g} "
          f"q_ratio={lim.q_ratio:.10g} eta'(0)={lim.eta_prime_0:.6g} beta'(0)={lim.beta_prime_0:.6g}")
    out = _out(args)
    if out:
        write_json(out / "limits.json", dict(vars(lim)))
    return EXIT_OK


def cmd_classify(cfg: RunConfig, args) -> int:
    p = cfg.params
    regime = spectral.classify_regime(p)
    lim = spectral.speed_limits(p)
    env_eta, env_beta = spectral.envelope_minimum(p)
    v = spectral.limiting_speed(p, regime)
    print(f"regime={regime.value} v_limit={v:.10g} envelope_min={env_eta:.10g}")
    out = _out(args)
    if out:
        write_json(out / "classify.json", {"regime": regime, "v_e": lim.v_e, "v_d": lim.v_d, "v_f": lim.v_f,
                                           "v_limit": v, "envelope_min": env_eta,
                                           "envelope_argmin": env_beta})
    return EXIT_OK


def _eq_json(eq: equilibria.Equilibrium):
    return {"point": eq.point, "kind": eq.kind, "stability": eq.stability, "residual": eq.residual}


def cmd_equilibria(cfg: RunConfig, args) -> int:
    p = cfg.params
    g_eqs = equilibria.equilibria_of_g(p)
    f_eqs = equilibria.find_equilibria_of_f(p, grid_n=args.grid_n)
    nonneg = [eq for eq in f_eqs if eq.is_nonnegative()]
    payload = {"g": [_eq_json(e) for e in g_eqs], "f": [_eq_json(e) for e in f_eqs]}
    try:
        payload["k_plus"] = equilibria.k_plus(p)
    except ConditionError as exc:
        payload["k_plus"] = None
        payload["k_plus_error"] = str(exc)
    try:
        payload["k_minus"] = equilibria.k_minus(p)
    except ConditionError as exc:
        payload["k_minus"] = None
        payload["k_minus_error"] = str(exc)
    desc = ", ".join(f"({e.n_e:.6g}, {e.n_d:.6g}) {e.stability.value}" for e in nonneg)
    km = payload["k_minus"]
    print(f"non-negative equilibria of f: {len(nonneg)} [{desc}]; "
          f"k_minus={'unavailable' if km is None else np.array2string(km, precision=6)}")
    out = _out(args)
    if out:
        write_json(out / "equilibria.json", payload)
    return EXIT_OK


def cmd_conditions(cfg: RunConfig, args) -> int:
    report = model.check_conditions(cfg.params)
    parts = [f"{name} {'OK' if c.ok else 'FAIL'} ({c.margin:+.6g})" for name, c in report.items()]
    parts.append(f"theorem3 {'OK' if report.theorem3_satisfied else 'FAIL'}")
    print("; ".join(parts))
    out = _out(args)
    if out:
        payload = {name: {"ok": c.ok, "margin": c.margin} for name, c in report.items()}
        payload.update(N_e=report.N_e, N_d=report.N_d, theorem3_satisfied=report.theorem3_satisfied)
        write_json(out / "conditions.json", payload)
    return EXIT_OK


def cmd_mu_curve(cfg: RunConfig, args) -> int:
    s = cfg.mutation_scaling()
    mus = np.geomspace(args.mu_min, args.mu_max, args.points)
    curve = spectral.mu_curve(cfg.params, s, mus, jobs=args.jobs)
    print(f"mu-curve: {len(curve)} points, eta from {curve.eta[0]:.10g} to {curve.eta[-1]:.10g}")
    out = _out(args)
    if out:
        write_csv(out / "mu_curve.csv", CSV_HEADERS["mu-curve"], curve.rows())
    return EXIT_OK


def _sweep_point(args):
    r, D, r_e, D_d = args
    p = ModelParams(D_e=D * D_d, D_d=D_d, r_e=r_e, r_d=r * r_e, m_ee=1.0, m_dd=1.0,
                    m_ed=0.0, m_de=0.0, mu_e=0.0, mu_d=0.0)
    regime = spectral.classify_regime(p)
    return r, D, regime.value, spectral.limiting_speed(p, regime)


def sweep_rows(n: int, r_e: float = 1.0, D_d: float = 1.0, jobs: int = 1):
    """Regime and limiting speed on an ``n x n`` cell-centred grid of
    ``(r_d/r_e, D_e/D_d)`` in the open unit square."""
    ticks = (np.arange(n) + 0.5) / n
    tasks = [(float(r), float(D), r_e, D_d) for r in ticks for D in ticks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks, chunksize=64))
    return [_sweep_point(t) for t in tasks]


def q_ratio_rows(n: int, m: float):
    ticks = (np.arange(n) + 0.5) / n
    rows = []
    for r in ticks:
        for D in ticks:
            if spectral.in_anomalous_zone(r, D):
                rows.append((float(r), float(D), m, spectral.q_ratio_from_ratios(r, D, m)))
            else:
                rows.append((float(r), float(D), m, ""))
    return rows


def cmd_sweep(cfg: RunConfig | None, args) -> int:
    r_e = cfg.params.r_e if cfg else 1.0
    D_d = cfg.params.D_d if cfg else 1.0
    rows = sweep_rows(args.n, r_e, D_d, jobs=args.jobs)
    n_anom = sum(1 for row in rows if row[2] == spectral.Regime.ANOMALOUS.value)
    print(f"sweep: {len(rows)} points, {n_anom} anomalous")
    out = _out(args)
    if out:
        write_csv(out / "sweep.csv", CSV_HEADERS["sweep"], rows)
        m = args.m
        if m is None:
            s = cfg.mutation_scaling() if cfg and cfg.params.has_mutation else None
            m = s.e / s.d if s else 4.0
        write_csv(out / "q_ratio.csv", CSV_HEADERS["q-ratio"], q_ratio_rows(args.n, m))
    return EXIT_OK


def _sim_settings(cfg: RunConfig, args):
    sim = dict(cfg.sim)
    for key in ("L", "nx", "t_end", "x0", "cfl_safety", "threshold_frac"):
        value = getattr(args, key, None)
        if value is not None:
            sim[key] = value
    p = cfg.params
    left = sim["left"] if sim["left"] is not None else equilibria.coexistence_of_g(p)
    left = tuple(float(v) for v in left)
    grid = pde.Grid1D(float(sim["L"]), int(sim["nx"]))
    sc = pde.SimConfig(
        t_end=float(sim["t_end"]), cfl_safety=float(sim["cfl_safety"]), boundary=sim["boundary"],
        left_value=left if sim["boundary"] == pde.DIRICHLET else None,
        sample_stride=int(sim["sample_stride"]), threshold_frac=float(sim["threshold_frac"]),
    )
    return grid, sc, float(sim["x0"]), left


def _write_run(out: Path, grid, final, trace):
    write_csv(out / "trace.csv", CSV_HEADERS["trace"], zip(trace.t, trace.x_front))
    write_csv(out / "profile.csv", CSV_HEADERS["profile"], zip(grid.x, final.n_e, final.n_d))


def cmd_simulate(cfg: RunConfig, args) -> int:
    grid, sc, x0, left = _sim_settings(cfg, args)
    ic = pde.heaviside_ic(grid, x0, left)
    final, trace, bounds = pde.simulate(cfg.params, grid, sc, ic)
    msg = f"simulated to t={final.t:.6g}: {len(trace)} front samples"
    if trace.empty:
        msg += " (no threshold crossing)"
    else:
        msg += f", final front x={trace.x_front[-1]:.6g}"
    print(msg + f", bounds {'VIOLATED' if bounds.violation else 'ok'}")
    out = _out(args)
    if out:
        _write_run(out, grid, final, trace)
        write_json(out / "simulate.json", {"t": final.t, "samples": len(trace), "missing": trace.missing,
                                           "threshold": trace.threshold, "bounds": vars(bounds)})
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    grid, sc, x0, left = _sim_settings(cfg, args)
    report, final, trace = pde.verify_linear_determinacy(
        cfg.params, grid, sc, x0=x0, left=left, tolerance=args.tolerance, return_run=True)
    print(f"{report.status}: measured={report.measured:.8g} c*={report.c_star:.8g} "
          f"rel_error={report.rel_error:+.4%} (tolerance {report.tolerance:.2%})")
    out = _out(args)
    if out:
        _write_run(out, grid, final, trace)
        payload = {k: v for k, v in vars(report).items() if k not in ("bounds", "estimate")}
        payload.update(status=report.status, bounds=vars(report.bounds), estimate=vars(report.estimate))
        write_json(out / "verify.json", payload)
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


COMMANDS = {
    "speed": cmd_speed,
    "limits": cmd_limits,
    "classify": cmd_classify,
    "equilibria": cmd_equilibria,
    "conditions": cmd_conditions,
    "mu-curve": cmd_mu_curve,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morphspread", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON parameter file")
    common.add_argument("--out", help="directory for CSV/JSON output")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("speed", parents=[common], help="linear spreading speed c*")
    sp.add_argument("--beta-min", type=float, default=0.05)
    sp.add_argument("--beta-max", type=float, default=5.0)
    sp.add_argument("--beta-points", type=int, default=400)

    sub.add_parser("limits", parents=[common], help="small-mutation limit quantities")
    sub.add_parser("classify", parents=[common], help="spreading regime")
    eq = sub.add_parser("equilibria", parents=[common], help="equilibria and bounding equilibria")
    eq.add_argument("--grid-n", type=int, default=25)
    sub.add_parser("conditions", parents=[common], help="parameter conditions with margins")

    mc = sub.add_parser("mu-curve", parents=[common], help="minimal speed along mu")
    mc.add_argument("--mu-min", type=float, default=1e-6)
    mc.add_argument("--mu-max", type=float, default=10.0)
    mc.add_argument("--points", type=int, default=25)

    sw = sub.add_parser("sweep", parents=[common], help="regime map over growth/dispersal ratios")
    sw.add_argument("--n", type=int, default=50)
    sw.add_argument("--m", type=float, default=None, help="mutation ratio e/d for q_ratio.csv")

    for name, help_ in (("simulate", "run the PDE"), ("verify", "simulated vs linear speed")):
        sim = sub.add_parser(name, parents=[common], help=help_)
        sim.add_argument("--L", type=float)
        sim.add_argument("--nx", type=int)
        sim.add_argument("--t-end", dest="t_end", type=float)
        sim.add_argument("--x0", type=float)
        sim.add_argument("--cfl-safety", dest="cfl_safety", type=float)
        sim.add_argument("--threshold-frac", dest="threshold_frac", type=float)
        if name == "verify":
            sim.add_argument("--tolerance", type=float, default=0.03)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.config is None and args.command != "sweep":
            raise ConfigError(f"{args.command} needs --config")
        cfg = load_config(args.config) if args.config else None
        return COMMANDS[args.command](cfg, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
