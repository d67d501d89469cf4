"""Command-line driver: one subcommand per experiment, deterministic reports.

Configuration is a single JSON document (no environment variables); every
report echoes the full effective config, so a report is reproducible from
its own header.  Exit status is nonzero iff any acceptance check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict

import numpy as np

from .basis import BasisTruncation, QuadratureGrid
from .darboux import darboux_factor, pfaffian4, sigma_matrix, validate_admissible
from .errors import NCPlaneError
from .functions import gaussian2d
from .gauge import (
    CutoffProfile,
    commutator_probe,
    convergence_sweep,
    cutoff_tail_norms,
    local_compactness_probe,
    moyal_dirac,
)
from .kinematics import dirac_spectrum, distinct_levels
from .moyal import PolynomialFunction2D, StarConfig, star
from .params import ParameterSet
from .reports import Report
from .twisted import (
    Grid4D,
    GridSampledFunction4D,
    SeparableFunction4D,
    TwistedStructure,
    integrated_rep,
    involution4,
    l1_norm,
    separable_product_samples,
    twisted_product,
)

DEFAULT_CONFIG = {
    "params": {
        "hbar0": 1.0, "theta0": 0.5, "b0": 1.0,
        "r": 1.5, "s": 1.0, "rho": 0.5, "e": 1.0, "b_ext": 0.2,
    },
    "level_L": 20,
    "grid": {"half_width": 10.0, "points_per_axis": 128},
    "sweep": {"radii": [2.0, 4.0, 6.0, 8.0], "levels": [10, 14, 18]},
    "spectrum_level": 40,
    "n_random": 20,
    "seed": 0,
}


def load_config(path: str | None) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if path:
        with open(path) as fh:
            user = json.load(fh)
        for key, val in user.items():
            if key not in cfg:
                raise NCPlaneError(f"unknown config field '{key}'")
            if isinstance(val, dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    return cfg


def _params(cfg: dict) -> ParameterSet:
    return ParameterSet(**cfg["params"])


def _star_config(cfg: dict, params: ParameterSet) -> StarConfig:
    g = cfg["grid"]
    return StarConfig(theta_eff=params.theta_eff, rho=params.rho, backend="grid",
                      grid=QuadratureGrid(g["half_width"], g["points_per_axis"]))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: dict) -> Report:
    params = _params(cfg)
    rep = Report("spectrum", cfg)
    L = int(cfg["spectrum_level"])
    t0 = time.perf_counter()
    spec = dirac_spectrum(params, BasisTruncation(L))
    rep.timings["eigensolve_s"] = time.perf_counter() - t0
    vals = spec["below_edge"]
    k = min(11, len(vals))
    target = np.array([math.copysign(math.sqrt(abs(round(v * v))), v) for v in vals[:k]])
    dev = float(np.abs(vals[:k] - target).max())
    rep.results["eigenvalues"] = sorted((float(v) for v in vals), key=abs)
    rep.results["distinct_smallest"] = [float(v) for v in vals[:k]]
    rep.results["targets"] = [float(v) for v in target]
    rep.add_check("dirac_spectrum_matches_pm_sqrt_n", dev, 1e-6)
    listed = {0.0, 1.0, -1.0, math.sqrt(2), -math.sqrt(2), math.sqrt(3), -math.sqrt(3), 2.0, -2.0}
    got9 = {round(float(v), 6) for v in vals[:9]}
    want9 = {round(v, 6) for v in listed}
    rep.add_check("first_nine_distinct_values", 0.0 if got9 == want9 else 1.0, 0.5)
    return rep


def cmd_converge(cfg: dict) -> Report:
    params = _params(cfg)
    rep = Report("converge", cfg)
    basis = BasisTruncation(int(cfg["level_L"]))
    scfg = _star_config(cfg, params)
    radii = [float(r) for r in cfg["sweep"]["radii"]]
    t0 = time.perf_counter()
    sweep = convergence_sweep(params, basis, radii, cfg=scfg)
    rep.timings["sweep_s"] = time.perf_counter() - t0
    rows = sweep["rows"]
    rep.results["rows"] = rows
    errs = [row["err_resolvent"] for row in rows]
    floor = 10.0 * 1e-12
    monotone = all(errs[i + 1] <= errs[i] or errs[i] < 2.0 * floor for i in range(len(errs) - 1))
    rep.add_check("resolvent_error_monotone", 0.0 if monotone else 1.0, 0.5)
    rep.add_check("final_resolvent_error", errs[-1], 1e-3)
    return rep


def cmd_algebra(cfg: dict) -> Report:
    params = _params(cfg)
    rep = Report("algebra", cfg)
    rng = np.random.default_rng(int(cfg["seed"]))
    ts = TwistedStructure(params)

    def narrow_packet():
        factors = []
        for _ in range(4):
            a = rng.uniform(40.0, 60.0)
            c = rng.uniform(-0.05, 0.05)
            k = rng.uniform(-0.3, 0.3)
            amp = rng.uniform(0.6, 1.2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            factors.append(lambda t, a=a, c=c, k=k, amp=amp:
                           amp * np.exp(-a * (t - c) ** 2 + 1j * k * t))
        return SeparableFunction4D(factors, box_half_width=0.45)

    # twisted product identities on wide packets
    from .twisted import gaussian_packet4

    f = gaussian_packet4(rng)
    g = gaussian_packet4(rng)
    grid_q = Grid4D(6.0, 33)
    fg = twisted_product(f, g, ts, grid_q)
    gsfs = twisted_product(involution4(g), involution4(f), ts, grid_q)
    pts = rng.uniform(-1.5, 1.5, (6, 4))
    inv_dev = float(np.abs(gsfs(pts) - np.conj(fg(-pts))).max())
    rep.add_check("involution_antihomomorphism", inv_dev, 1e-6)

    grid_p = Grid4D(6.0, 25)
    samples = separable_product_samples(f, g, ts, grid_p, Grid4D(6.0, 33))
    ratio = l1_norm(samples, grid_p) / (l1_norm(f, grid_p) * l1_norm(g, grid_p))
    rep.add_check("l1_submultiplicative_ratio", ratio, 1.0 + 1e-6)

    # desk-scale representation homomorphism (interior comparison)
    basis = BasisTruncation(6)
    g2 = QuadratureGrid(10.0, 96)
    gridf = Grid4D(0.45, 13)
    gridp = Grid4D(0.9, 17)
    t0 = time.perf_counter()
    fn = narrow_packet()
    gn = narrow_packet()
    Rf = integrated_rep(fn, params, basis, gridf, g2)
    Rg = integrated_rep(gn, params, basis, gridf, g2)
    prod = GridSampledFunction4D(
        separable_product_samples(fn, gn, ts, gridp, Grid4D(0.7, 41)), gridp)
    Rfg = integrated_rep(prod, params, basis, gridp, g2, max_nodes=20**4)
    ii = basis.interior_indices(2)
    RR = (Rf.mat @ Rg.mat)[np.ix_(ii, ii)]
    hom = float(np.linalg.norm(Rfg.mat[np.ix_(ii, ii)] - RR, 2) / np.linalg.norm(RR, 2))
    rep.timings["representation_s"] = time.perf_counter() - t0
    rep.add_check("representation_homomorphism_rel", hom, 1e-2)

    # star-product identities (series backend, exact)
    scfg = StarConfig(theta_eff=params.theta_eff, rho=params.rho, backend="series")
    x = PolynomialFunction2D.coordinate("x")
    y = PolynomialFunction2D.coordinate("y")
    comm = star(x, y, scfg) + star(y, x, scfg).scale(-1)
    dev = abs(comm.coeffs.get((0, 0), 0.0) - 1j * params.theta_eff)
    dev += sum(abs(v) for k_, v in comm.coeffs.items() if k_ != (0, 0))
    rep.add_check("coordinate_star_commutator", float(dev), 1e-12)
    rep.results["residuals"] = {
        "involution": inv_dev,
        "l1_ratio": ratio,
        "homomorphism": hom,
        "star_commutator": float(dev),
    }
    return rep


def cmd_darboux(cfg: dict) -> Report:
    params = _params(cfg)
    rep = Report("darboux", cfg)
    rng = np.random.default_rng(int(cfg["seed"]))
    sig = sigma_matrix(params)
    pf = pfaffian4(sig)
    expected = -params.hbar0 * (params.hbar0 - params.theta0 * params.b0)
    rep.results["pfaffian"] = pf
    rep.results["admissibility"] = validate_admissible(params)["constraints"]
    rep.add_check("pfaffian_closed_form", abs(pf - expected) / abs(expected), 1e-12)
    rep.add_check("det_is_pf_squared", abs(np.linalg.det(sig) - pf**2), 1e-10)
    worst = 0.0
    n_ok = 0
    while n_ok < int(cfg["n_random"]):
        trial = ParameterSet(
            hbar0=rng.uniform(0.5, 2.0), theta0=rng.uniform(-1.0, 1.0),
            b0=rng.uniform(0.5, 2.0), r=rng.uniform(-2.0, 2.0), s=rng.uniform(-2.0, 2.0),
        )
        if not trial.is_admissible:
            continue
        n_ok += 1
        data = darboux_factor(sigma_matrix(trial), hbar_eff=trial.hbar0)
        worst = max(worst, data.residual / max(np.linalg.norm(data.sigma), 1.0))
    rep.results["n_random_factored"] = n_ok
    rep.add_check("darboux_residual_rel", worst, 1e-10)
    return rep


def cmd_commutators(cfg: dict) -> Report:
    params = _params(cfg)
    rep = Report("commutators", cfg)
    scfg = _star_config(cfg, params)
    levels = [int(v) for v in cfg["sweep"]["levels"]]
    a_fun = gaussian2d(0.5, 0.5, 0.3, -0.2, half_width=scfg.grid.half_width)
    t0 = time.perf_counter()
    probe = commutator_probe(params, a_fun, scfg, levels)
    rep.timings["probe_s"] = time.perf_counter() - t0
    rep.results["rows"] = probe["rows"]
    rep.add_check("interior_commutator_residual",
                  max(r["interior_residual"] for r in probe["rows"]), 1e-4)
    norms = [r["commutator_norm"] for r in probe["rows"]]
    drift = (max(norms) - min(norms)) / max(norms)
    rep.add_check("commutator_norm_plateau", drift, 0.05)
    return rep


def cmd_localcompact(cfg: dict) -> Report:
    params = _params(cfg)
    rep = Report("localcompact", cfg)
    scfg = _star_config(cfg, params)
    levels = [int(v) for v in cfg["sweep"]["levels"]]
    a_fun = gaussian2d(0.5, 0.5, half_width=scfg.grid.half_width)
    t0 = time.perf_counter()
    probe = local_compactness_probe(params, a_fun, scfg, levels)
    rep.timings["probe_s"] = time.perf_counter() - t0
    rows = []
    for row in probe["rows"]:
        sv = row["singular_values"]
        rows.append({
            "L": row["L"],
            "sigma_1": float(sv[0]),
            "sigma_20": float(sv[19]) if len(sv) > 19 else float(sv[-1]),
            "tail_ratio": float(sv[min(19, len(sv) - 1)] / sv[0]),
        })
    rep.results["rows"] = rows
    rep.add_check("singular_value_decay", max(r["tail_ratio"] for r in rows), 1e-2)
    return rep


COMMANDS = {
    "spectrum": cmd_spectrum,
    "converge": cmd_converge,
    "algebra": cmd_algebra,
    "darboux": cmd_darboux,
    "commutators": cmd_commutators,
    "localcompact": cmd_localcompact,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ncplane",
        description="Noncommutative-plane numerical experiments",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--format", default="json", choices=["json", "csv"])
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = int(args.seed)
        report = COMMANDS[args.command](cfg)
    except NCPlaneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    payload = report.to_json() if args.format == "json" else report.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
