"""Command-line front end: every experiment as a subcommand.

Each run takes a JSON config (defaults are built in and any file values
are merged over them; unknown keys are rejected), writes CSV for sweeps
and JSON for scalar reports into the output directory, and always writes a
manifest echoing the fully resolved configuration plus the tool version.
Identical config and seed produce byte-identical artifacts.

Exit codes: 0 success, 1 numeric failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from importlib import metadata

import numpy as np

from . import acceptance
from . import elliptic as ell
from . import geometry as geo
from . import helicoid as hl
from . import kernel1d as k1
from . import parabolic as par
from . import wkb
from .errors import ConfigError, TwoPhaseError
from .medium import TwoPhaseMedium


def _version() -> str:
    try:
        return metadata.version("twophase")
    except metadata.PackageNotFoundError:
        return "0.0.dev"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _merge_config(defaults: dict, override: dict, context: str) -> dict:
    out = dict(defaults)
    for key, val in override.items():
        if key not in defaults:
            raise ConfigError(f"unknown key {key!r} in {context} config "
                              f"(known: {sorted(defaults)})")
        out[key] = val
    return out


def _medium_from(spec) -> TwoPhaseMedium:
    spec = _merge_config({"sigma_s": 1.0, "sigma_m": 4.0}, dict(spec), "medium")
    return TwoPhaseMedium(float(spec["sigma_s"]), float(spec["sigma_m"]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _surface_from(spec: dict) -> geo.Surface:
    spec = dict(spec)
    variant = spec.pop("variant", None)
    try:
        if variant in ("hyperplane", "plane"):
            return geo.Hyperplane(N=int(spec.pop("N", 3)), **spec)
        if variant == "sphere":
            return geo.Sphere(R=float(spec.pop("R", 1.0)),
                              N=int(spec.pop("N", 3)), **spec)
        if variant == "cylinder":
            return geo.Cylinder(R=float(spec.pop("R", 1.0)),
                                N=int(spec.pop("N", 3)), **spec)
        if variant == "helicoid":
            return geo.Helicoid(**spec)
        if variant == "catenoid":
            return geo.Catenoid(c=float(spec.pop("c", 1.0)), **spec)
        if variant == "graph":
            Q = np.asarray(spec.pop("quadratic"), dtype=float)
            lin = np.asarray(spec.pop("linear", np.zeros(len(Q))), dtype=float)
            const = float(spec.pop("constant", 0.0))
            box = spec.pop("box")

            def phi(y):
                return 0.5 * float(y @ Q @ y) + float(lin @ y) + const

            def grad(y):
                return Q @ y + lin

            def hess(y):
                return Q

            return geo.Graph(phi, box, N=len(Q) + 1, grad=grad, hess=hess)
    except TypeError as exc:
        raise ConfigError(f"bad surface spec: {exc}")
    raise ConfigError(f"unknown surface variant {variant!r}")


def _write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: str, payload) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


_INVOCATION = {}


def _manifest(outdir: str, subcommand: str, config: dict, outputs: list) -> None:
    _write_json(os.path.join(outdir, "manifest.json"), {
        "tool": "twophase",
        "version": _version(),
        "subcommand": subcommand,
        "config": config,
        "invocation": dict(_INVOCATION),
        "outputs": outputs,
    })


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def run_kernel1d(config: dict, outdir: str) -> int:
    defaults = {
        "medium": {"sigma_s": 1.0, "sigma_m": 4.0},
        "x1": [0.0],
        "t": list(np.geomspace(1e-3, 1e3, 13)),
        "tolerance": 1e-10,
    }
    cfg = _merge_config(defaults, config, "kernel1d")
    med = _medium_from(cfg["medium"])
    rows = []
    worst = 0.0
    for x1 in cfg["x1"]:
        for t in cfg["t"]:
            uq = k1.halfline_quadrature(float(x1), float(t), med)
            uc = k1.halfline_closed_form(float(x1), float(t), med)
            worst = max(worst, abs(uq - uc))
            rows.append((x1, t, uq, uc, abs(uq - uc)))
    path = os.path.join(outdir, "kernel1d.csv")
    _write_csv(path, ["x1", "t", "u_quadrature", "u_closed_form", "abs_diff"],
               rows)
    _manifest(outdir, "kernel1d", cfg, [path])
    print(f"kernel1d: {len(rows)} points, max two-way diff {worst:.3e}")
    return 0 if worst < cfg["tolerance"] else 1


def run_simulate(config: dict, outdir: str) -> int:
    defaults = {
        "medium": {"sigma_s": 1.0, "sigma_m": 4.0},
        "kind": "plane",
        "R": 1.0,
        "t_grid": list(np.geomspace(1e-2, 1.0, 9)),
        "probes": ["interface"],
        "h_fine": 2e-3,
        "t_start": 1e-6,
    }
    cfg = _merge_config(defaults, config, "simulate")
    med = _medium_from(cfg["medium"])
    t_grid = np.asarray(cfg["t_grid"], dtype=float)
    far = 8.0 * math.sqrt(2.0 * med.M * t_grid.max()) + 2.0
    grid = par.interface_grid(cfg["kind"], med, R=cfg["R"],
                              h_fine=cfg["h_fine"], far=far)
    times = par.geometric_times(cfg["t_start"], float(t_grid.max()),
                                include=t_grid)
    series = par.evolve(grid, times, kind=cfg["kind"], R=cfg["R"])
    mask = np.isin(series.times, t_grid)
    rows = []
    for pid, x in enumerate(cfg["probes"]):
        vals = (series.interface_values()[mask] if x == "interface"
                else series.probe(float(x))[mask])
        for t, u in zip(series.times[mask], vals):
            rows.append((t, pid, u))
    path = os.path.join(outdir, "simulate.csv")
    _write_csv(path, ["t", "probe_id", "u"], rows)
    _manifest(outdir, "simulate", cfg, [path])
    print(f"simulate: {cfg['kind']} interface, {len(rows)} samples")
    return 0


def run_transform(config: dict, outdir: str) -> int:
    defaults = {
        "medium": {"sigma_s": 1.0, "sigma_m": 4.0},
        "lambdas": [25.0, 50.0, 100.0, 200.0],
        "probes": [-0.4, -0.1, 0.0, 0.05, 0.3],
        "t_end": 0.8,
        "h_fine": 1e-3,
        "tolerance": 1e-5,
    }
    cfg = _merge_config(defaults, config, "transform")
    med = _medium_from(cfg["medium"])
    k = med.k
    grid = par.interface_grid("plane", med, h_fine=cfg["h_fine"], far=10.0)
    times = par.geometric_times(1e-7, cfg["t_end"], ratio=1.05)
    series = par.evolve(grid, times, kind="plane")
    rows = []
    worst = 0.0
    for lam in cfg["lambdas"]:
        tr = par.laplace_stieltjes(series, float(lam), cfg["probes"],
                                   tol=cfg["tolerance"])
        for pid, (x, w_time) in enumerate(zip(tr.probes, tr.values)):
            if x >= 0.0:
                w_ell = k * math.exp(-x * math.sqrt(lam / med.sigma_s))
            else:
                w_ell = 1.0 - (1.0 - k) * math.exp(x * math.sqrt(lam / med.sigma_m))
            worst = max(worst, abs(w_time - w_ell))
            rows.append((lam, pid, w_time, w_ell, abs(w_time - w_ell)))
    path = os.path.join(outdir, "transform.csv")
    _write_csv(path, ["lambda", "probe_id", "w_time", "w_elliptic", "diff"],
               rows)
    _manifest(outdir, "transform", cfg, [path])
    print(f"transform: max |w_time - w_elliptic| = {worst:.3e}")
    return 0 if worst < 2e-3 else 1


def run_wkb(config: dict, outdir: str) -> int:
    defaults = {
        "surface": {"variant": "sphere", "R": 1.0, "N": 3},
        "side": -1,
        "order": 2,
        "q": 0.0,
        "n_points": 33,
    }
    cfg = _merge_config(defaults, config, "wkb")
    surf = _surface_from(cfg["surface"])
    side = int(cfg["side"])
    n = int(cfg["order"])
    eng = wkb.coefficient_engine(surf, side)
    taus = np.linspace(0.0, eng.delta0, int(cfg["n_points"]))
    table = wkb.compute_coefficients(surf, cfg["q"], n, side=side, taus=taus,
                                     engine=eng)
    header = (["tau"] + [f"A{j}" for j in range(n)]
              + [f"A{n}_plus", f"A{n}_minus", "residual_max"])
    rows = []
    h = 1e-3
    for i, tau in enumerate(taus):
        row = [tau] + [table.A[j][i] for j in range(n)]
        row += [table.An_plus[i], table.An_minus[i]]
        if tau > 2 * h and tau < eng.delta0 - 2 * h:
            p = eng.ray_points(cfg["q"], np.array([tau]))[0]
            res = max(wkb.gradient_identity_residual(surf, j, p, side=side,
                                                     h=h, engine=eng)
                      for j in range(min(n, eng.table_order) + 1))
            row.append(res)
        else:
            row.append(float("nan"))
        rows.append(row)
    path = os.path.join(outdir, "wkb.csv")
    _write_csv(path, header, rows)
    _manifest(outdir, "wkb", cfg, [path])
    print(f"wkb: order-{n} ray table with {len(taus)} samples")
    return 0


def run_extract_curvature(config: dict, outdir: str) -> int:
    defaults = {
        "medium": {"sigma_s": 1.0, "sigma_m": 4.0},
        "geometry": {"kind": "sphere", "R": 1.0, "N": 3},
        "lambda_range": [1e2, 1e6],
        "per_decade": 12,
    }
    cfg = _merge_config(defaults, config, "extract-curvature")
    med = _medium_from(cfg["medium"])
    gspec = dict(cfg["geometry"])
    geometry = ell.RadialGeometry(gspec.pop("kind"), **gspec)
    lo, hi = cfg["lambda_range"]
    grid = ell.default_lambda_grid(lo, hi, cfg["per_decade"])
    fit = ell.extract_mean_curvature(geometry, med, grid)
    k = med.k
    rows = []
    for lam, det in zip(fit.lambda_grid, fit.detrended):
        dn = det + k * math.sqrt(med.sigma_s) * math.sqrt(lam)
        rows.append((lam, dn / med.sigma_s, det, fit.constant_term,
                     fit.sum_kappa_estimate))
    path = os.path.join(outdir, "extract_curvature.csv")
    _write_csv(path, ["lambda", "normal_derivative", "detrended",
                      "fit_constant", "sigma_kappa_estimate"], rows)
    _manifest(outdir, "extract-curvature", cfg, [path])
    print(f"extract-curvature: sum kappa = {fit.sum_kappa_estimate:.6f} "
          f"(target {geometry.sum_kappa})")
    return 0


def run_maxprinciple(config: dict, outdir: str, seed=None) -> int:
    defaults = {
        "lam": 10.0,
        "trials": 100,
        "seed": 99,
        "n": 32,
        "sigma_range": [0.5, 4.0],
        "counterexample": True,
    }
    cfg = _merge_config(defaults, config, "maxprinciple")
    if seed is not None:
        cfg["seed"] = seed
    rep = ell.discrete_max_principle_check(cfg["lam"], cfg["trials"],
                                           cfg["seed"], n=cfg["n"],
                                           sigma_range=tuple(cfg["sigma_range"]))
    payload = dict(rep)
    if cfg["counterexample"]:
        payload["lambda0_counterexample"] = ell.annulus_counterexample()
    path = os.path.join(outdir, "maxprinciple.json")
    _write_json(path, payload)
    _manifest(outdir, "maxprinciple", cfg, [path])
    print(f"maxprinciple: min value {rep['min_value']:.3e} over "
          f"{rep['trials']} trials")
    return 0 if rep["min_value"] >= -1e-10 else 1


def run_helicoid(config: dict, outdir: str, seed=None, jobs: int = 1) -> int:
    defaults = {
        "n_samples": 10 ** 6,
        "seed": 1234,
        "t_values": [0.1, 1.0, 10.0],
        "r_values": [0.5, 1.0, 2.0],
        "symmetry_samples": 10 ** 4,
    }
    cfg = _merge_config(defaults, config, "helicoid")
    if seed is not None:
        cfg["seed"] = seed
    x0 = np.zeros(3)
    records = []
    n, s0 = int(cfg["n_samples"]), int(cfg["seed"])
    for i, t in enumerate(cfg["t_values"]):
        est = hl.u_gaussian_mc(x0, float(t), n, rng_seed=s0 + i, n_jobs=jobs)
        records.append({"test": f"u_on_surface_t_{t}", "estimate": est.mean,
                        "stderr": est.stderr, "n": est.n_samples,
                        "seed": est.rng_seed, "pass": est.within(0.5)})
    for i, r in enumerate(cfg["r_values"]):
        cap = hl.sphere_cap_density(x0, float(r), n, rng_seed=s0 + 10 + i,
                                    n_jobs=jobs)
        ball = hl.ball_density(x0, float(r), n, rng_seed=s0 + 20 + i,
                               n_jobs=jobs)
        records.append({"test": f"cap_density_r_{r}", "estimate": cap.mean,
                        "stderr": cap.stderr, "n": n, "seed": cap.rng_seed,
                        "pass": cap.within(0.5)})
        records.append({"test": f"ball_density_r_{r}", "estimate": ball.mean,
                        "stderr": ball.stderr, "n": n, "seed": ball.rng_seed,
                        "pass": ball.within(0.5)})
    sym = hl.symmetry_identities_check(int(cfg["symmetry_samples"]),
                                       rng_seed=s0)
    records.append({"test": "symmetry_identities",
                    "estimate": sym["surface_coincidence_max"],
                    "stderr": 0.0, "n": sym["n_samples"], "seed": sym["seed"],
                    "pass": sym["screw_violations"] == 0
                    and sym["flip_violations"] == 0
                    and sym["surface_coincidence_max"] < 1e-12})
    path = os.path.join(outdir, "helicoid.json")
    _write_json(path, records)
    _manifest(outdir, "helicoid", cfg, [path])
    n_fail = sum(not r["pass"] for r in records)
    print(f"helicoid: {len(records)} checks, {n_fail} failures")
    return 0 if n_fail == 0 else 1


def run_acceptance(config: dict, outdir: str, tolerance_scale: float = 1.0) -> int:
    defaults = {"criteria": None}
    cfg = _merge_config(defaults, config, "all")
    if cfg["criteria"] is not None:
        known = {name for name, _ in acceptance.CRITERIA}
        unknown = set(cfg["criteria"]) - known
        if unknown:
            raise ConfigError(f"unknown criteria {sorted(unknown)} "
                              f"(known: {sorted(known)})")
    records = acceptance.run_all(names=cfg["criteria"],
                                 tolerance_scale=tolerance_scale)
    # runtimes go to stdout only, so the artifact is seed-deterministic
    payload = [{
        "name": r.name, "pass": r.passed, "expected": r.expected,
        "measured": r.measured, "tolerance": r.tolerance,
    } for r in records]
    path = os.path.join(outdir, "acceptance.json")
    _write_json(path, payload)
    _manifest(outdir, "all", cfg, [path])
    return 0 if all(r.passed for r in records) else 1


# ---------------------------------------------------------------------------

_RUNNERS = {
    "kernel1d": run_kernel1d,
    "simulate": run_simulate,
    "transform": run_transform,
    "wkb": run_wkb,
    "extract-curvature": run_extract_curvature,
    "maxprinciple": run_maxprinciple,
    "helicoid": run_helicoid,
    "all": run_acceptance,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twophase",
        description="Two-phase heat-conduction numerical laboratory")
    parser.add_argument("subcommand", choices=sorted(_RUNNERS))
    parser.add_argument("--config", help="JSON config file", default=None)
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config RNG seed")
    parser.add_argument("--jobs", type=int, default=os.cpu_count(),
                        help="worker hint for batched computations")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply all acceptance tolerances")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            with open(args.config) as fh:
                config = json.load(fh)
            if not isinstance(config, dict):
                raise ConfigError("config root must be a JSON object")
        else:
            config = {}
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out, exist_ok=True)
    _INVOCATION.clear()
    _INVOCATION.update({"seed": args.seed, "jobs": args.jobs,
                        "tolerance_scale": args.tolerance_scale})
    runner = _RUNNERS[args.subcommand]
    try:
        if args.subcommand == "helicoid":
            return runner(config, args.out, seed=args.seed,
                          jobs=max(1, args.jobs or 1))
        if args.subcommand == "maxprinciple":
            return runner(config, args.out, seed=args.seed)
        if args.subcommand == "all":
            return runner(config, args.out,
                          tolerance_scale=args.tolerance_scale)
        return runner(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TwoPhaseError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
