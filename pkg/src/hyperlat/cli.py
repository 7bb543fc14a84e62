"""Command-line driver: one subcommand per experiment, deterministic seeding,
CSV/JSON emission with a manifest per run.

Exit codes: 0 success, 1 violated acceptance check, 2 configuration error.
The environment variable HYPERLAT_NODE_BUDGET overrides the enumeration node
budget.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, config_hash, load_config
from .hypgeom import RHO_COMPLEX, RHO_REAL, RhoParam, ball_volume, h2_point
from .latenum import (
    CSV_HEADER,
    EnumerationBudgetError,
    config_key,
    elements_to_rows,
    enumerate_units,
    load_cache,
    save_cache,
)
from .diophantine import (
    SplitShape,
    approx_search,
    exponent_estimate,
    pigeonhole_exponent,
    sample_pairs,
    schedule_r,
    window_coverage_radius,
)
from .spectral import (
    SphericalParam,
    decay_table,
    f2_decay_table,
    f2_integral,
    make_f1_profile,
    make_omega_profile,
    spherical_phi,
    transform_cartan,
    tau_grid,
)
from .tracesim import (
    run_trace_experiment,
    spectrum_to_jsonl,
    stieltjes_integrate,
    synth_spectrum,
    zaremba_rhs,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _manifest(out: Path, subcommand: str, cfg: RunConfig, outputs: list[str],
              status: str = "ok", extra: dict | None = None) -> None:
    doc = {
        "subcommand": subcommand,
        "status": status,
        "config": cfg.as_dict(),
        "config_sha256": config_hash(cfg),
        "versions": {
            "hyperlat": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
        "outputs": sorted(outputs),
    }
    if extra:
        doc.update(extra)
    write_json(out / "manifest.json", doc)


def _node_budget(cfg: RunConfig) -> int:
    env = os.environ.get("HYPERLAT_NODE_BUDGET")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"HYPERLAT_NODE_BUDGET must be an integer: {env!r}") from exc
    return cfg.enumeration.node_budget


def _split_shape(cfg: RunConfig) -> SplitShape:
    return SplitShape(k=1, ell=len(cfg.algebra.places),
                      rho_list=tuple(cfg.algebra.places))


def _ensure_cache(cfg: RunConfig, out: Path, budget: int):
    """Build or reuse the binary enumeration cache for the configured box."""
    A = cfg.algebra_desc()
    R1, R2 = cfg.enumeration.R1, cfg.enumeration.R2
    q = cfg.congruence.q
    key = config_key(A, R1, R2, q)
    cache_dir = out / "cache"
    cache_path = cache_dir / f"units-{key[:16]}.bin"
    if cache_path.exists():
        return load_cache(cache_path, A), cache_path
    cache = enumerate_units(A, R1, R2, q=q, node_budget=budget)
    cache_dir.mkdir(parents=True, exist_ok=True)
    save_cache(cache, cache_path)
    return cache, cache_path


# ----------------------------------------------------------------------------
# subcommands

def cmd_enumerate(cfg: RunConfig, out: Path) -> int:
    budget = _node_budget(cfg)
    cache, cache_path = _ensure_cache(cfg, out, budget)
    write_csv(out / "elements.csv", CSV_HEADER, elements_to_rows(cache.elements))
    edges = np.linspace(0.0, cfg.enumeration.R1 + cfg.enumeration.R2, 64)
    sums = sorted(el.t1 + el.t2 for el in cache.elements)
    maxs = sorted(max(el.t1, el.t2) for el in cache.elements)
    rows = []
    for e in edges[1:]:
        rows.append((float(e),
                     int(np.searchsorted(sums, e, side="right")),
                     int(np.searchsorted(maxs, e, side="right"))))
    write_csv(out / "counts.csv", ("edge", "cum_sum_radius", "cum_max_radius"), rows)
    _manifest(out, "enumerate", cfg,
              ["elements.csv", "counts.csv", cache_path.name],
              extra={"n_elements": len(cache.elements), "nodes": cache.nodes})
    return EXIT_OK


def cmd_approx(cfg: RunConfig, out: Path) -> int:
    budget = _node_budget(cfg)
    cache, _ = _ensure_cache(cfg, out, budget)
    pair = sample_pairs(cfg.diophantine.window, 1, cfg.diophantine.seed)[0]
    eps = cfg.diophantine.eps_list[0]
    res = approx_search(pair[0], pair[1], eps, cfg.enumeration.R2, cache)
    rows = []
    if res is not None:
        rows.append((pair[0].x, pair[0].y, pair[1].x, pair[1].y,
                     eps, res.R_found, res.achieved_d1, *res.gamma.coords))
    write_csv(out / "approx.csv",
              ("x_re", "x_im", "y_re", "y_im", "eps", "R_found", "achieved_d1",
               *CSV_HEADER[:8]), rows)
    _manifest(out, "approx", cfg, ["approx.csv"],
              extra={"solved": res is not None})
    return EXIT_OK


def cmd_exponent(cfg: RunConfig, out: Path) -> int:
    budget = _node_budget(cfg)
    cache, _ = _ensure_cache(cfg, out, budget)
    dio = cfg.diophantine
    need_r1 = window_coverage_radius(dio.window, max(dio.eps_list))
    if cache.R1 < need_r1 - 1e-12:
        raise ConfigError(
            f"enumeration.R1 = {cache.R1} does not cover the window "
            f"(need >= {need_r1:.4f})"
        )
    pairs = sample_pairs(dio.window, dio.pairs, dio.seed)
    rows = []
    fits = []
    for x, y in pairs:
        fit = exponent_estimate(x, y, list(dio.eps_list), cache)
        fits.append(fit)
        for eps, r_found in fit.points:
            rows.append((x.x, x.y, y.x, y.y, eps, r_found, fit.zeta_hat))
    write_csv(out / "exponent.csv",
              ("x_re", "x_im", "y_re", "y_im", "eps", "R_found", "zeta_hat"), rows)
    zetas = [f.zeta_hat for f in fits if not math.isnan(f.zeta_hat)]
    shape = _split_shape(cfg)
    write_json(out / "exponent_summary.json", {
        "kappa_theoretical": pigeonhole_exponent(shape),
        "pairs": dio.pairs,
        "zeta_hat_values": zetas,
        "zeta_hat_mean": float(np.mean(zetas)) if zetas else None,
        "residuals": [f.residual for f in fits if not math.isnan(f.zeta_hat)],
        "excluded_eps_counts": [len(f.excluded) for f in fits],
    })
    _manifest(out, "exponent", cfg, ["exponent.csv", "exponent_summary.json"])
    return EXIT_OK


def cmd_volumes(cfg: RunConfig, out: Path) -> int:
    shape = _split_shape(cfg)
    rows = []
    for R in np.linspace(0.5, 10.0, 20):
        r = schedule_r(float(R), shape)
        vol_small = ball_volume(RhoParam(shape.rho_list[0]), r)
        vol_big = 1.0
        for rho in shape.rho_list[shape.k:]:
            vol_big *= ball_volume(RhoParam(rho), float(R))
        rows.append((float(R), r, vol_small, vol_big, vol_small * vol_big))
    write_csv(out / "volumes.csv",
              ("R", "r_of_R", "vol_small", "vol_big", "product"), rows)
    rows2 = []
    for rho in (RHO_REAL, RHO_COMPLEX):
        for R in np.linspace(0.0, 20.0, 21):
            rows2.append((rho.value, float(R), ball_volume(rho, float(R))))
    write_csv(out / "ball_volumes.csv", ("rho", "R", "volume"), rows2)
    _manifest(out, "volumes", cfg, ["volumes.csv", "ball_volumes.csv"],
              extra={"kappa": pigeonhole_exponent(shape)})
    return EXIT_OK


def cmd_spherical(cfg: RunConfig, out: Path) -> int:
    rows = []
    t_grid = np.linspace(0.0, 5.0, 26)
    z_points = [(0.5, 0.0), (0.25, 0.0), (0.0, 1.0), (0.0, 2.0)]
    for rho in (RHO_REAL, RHO_COMPLEX):
        for sigma, tau in z_points:
            z = SphericalParam(sigma, tau, rho)
            for t in t_grid:
                val = spherical_phi(z, float(t))
                rows.append((rho.value, sigma, tau, float(t), val.real, val.imag))
    write_csv(out / "spherical.csv",
              ("rho", "sigma", "tau", "t", "phi_re", "phi_im"), rows)
    dp = cfg.spectral.delta_prime
    rows2 = []
    for rho in (RHO_REAL, RHO_COMPLEX):
        prof = make_f1_profile(rho, 0.3, dp)
        for tau in tau_grid(0.3, min(cfg.spectral.grid, 32)):
            val = transform_cartan(prof, SphericalParam(0.0, float(tau), rho))
            rows2.append((rho.value, 0.3, float(tau), val.real, val.imag))
    write_csv(out / "transforms.csv",
              ("rho", "r", "tau", "fhat_re", "fhat_im"), rows2)
    _manifest(out, "spherical", cfg, ["spherical.csv", "transforms.csv"])
    return EXIT_OK


def cmd_decay(cfg: RunConfig, out: Path) -> int:
    dp = cfg.spectral.delta_prime
    n_grid = cfg.spectral.grid
    N_list = (2, 4)
    small_scales = (0.5, 0.1, 0.02)
    big_scales = (2.0, 4.0, 8.0)
    rows = []
    constants = []

    for rho in (RHO_REAL, RHO_COMPLEX):
        tab = decay_table(make_f1_profile, rho, small_scales, N_list, dp,
                          sigma=0.0, n_grid=n_grid,
                          normalizer=lambda r, _rho=rho: r ** ((2 * _rho.value + 1) / 2))
        for scale, tau, val in tab["rows"]:
            rows.append(("f1", rho.value, 0.0, scale, tau, val))
        for (scale, N), cval in sorted(tab["constants"].items()):
            constants.append(("f1", rho.value, 0.0, scale, N, cval))

    tab = f2_decay_table(RHO_REAL, big_scales, N_list, dp, n_grid=n_grid)
    for scale, tau, val in tab["rows"]:
        rows.append(("f2", RHO_REAL.value, 0.0, scale, tau, val))
    for (scale, N), cval in sorted(tab["constants"].items()):
        constants.append(("f2", RHO_REAL.value, 0.0, scale, N, cval))

    for sigma in (0.0, 0.25, 0.5):
        tab = decay_table(make_omega_profile, RHO_REAL, small_scales, N_list, dp,
                          sigma=sigma, n_grid=n_grid)
        for scale, tau, val in tab["rows"]:
            rows.append(("omega", RHO_REAL.value, sigma, scale, tau, val))
        for (scale, N), cval in sorted(tab["constants"].items()):
            constants.append(("omega", RHO_REAL.value, sigma, scale, N, cval))

    write_csv(out / "decay.csv",
              ("family", "rho", "sigma", "scale", "tau", "abs_fhat"), rows)
    write_csv(out / "decay_constants.csv",
              ("family", "rho", "sigma", "scale", "N", "C_N"), constants)

    stability = {}
    for fam in ("f1", "f2", "omega"):
        for N in N_list:
            vals = [c for (f, _rho, _s, _scale, n, c) in constants
                    if f == fam and n == N]
            if vals:
                stability[f"{fam}_N{N}_ratio"] = max(vals) / min(vals)
    write_json(out / "decay_summary.json", stability)
    _manifest(out, "decay", cfg,
              ["decay.csv", "decay_constants.csv", "decay_summary.json"])
    return EXIT_OK


def cmd_tracesim(cfg: RunConfig, out: Path) -> int:
    t = cfg.trace
    result = run_trace_experiment(
        seed=t.seed, ell=t.ell, k=t.k, dims=tuple(t.dims),
        N=t.N, R_list=list(t.R_list),
    )
    rows = [(R, r, s, result.fitted_exponent) for (R, r, s) in result.rows]
    write_csv(out / "trace_scaling.csv",
              ("R", "r", "trace_sum", "fitted_exponent"), rows)
    shape_rho = tuple({2: 0.5, 3: 1.0}[d] for d in t.dims)
    shape = SplitShape(k=t.k, ell=t.ell, rho_list=shape_rho)
    T_max = 2.0 * math.exp((shape.a_rest / shape.d_first) * max(t.R_list))
    spectrum = synth_spectrum(t.seed, t.ell, tuple(t.dims), T_max)
    _atomic_write(out / "spectrum.jsonl", spectrum_to_jsonl(spectrum))
    write_json(out / "trace_summary.json", {
        "fitted_exponent": result.fitted_exponent,
        "worst_partition_share": result.worst_partition_share,
        "spectrum_size": result.spectrum_size,
    })
    _manifest(out, "tracesim", cfg,
              ["trace_scaling.csv", "spectrum.jsonl", "trace_summary.json"])
    return EXIT_OK


def cmd_zaremba(cfg: RunConfig, out: Path) -> int:
    rng = np.random.default_rng(cfg.trace.seed)
    worst = 0.0
    checks = []
    for ell, n_cases in ((1, 100), (2, 20), (3, 20)):
        box = [(0.0, 1.0)] * ell
        for _ in range(n_cases):
            n_atoms = int(rng.integers(1, 8))
            atoms = [(tuple(rng.uniform(0.05, 0.95, size=ell)),
                      float(rng.uniform(0.1, 3.0))) for _ in range(n_atoms)]
            coef = rng.uniform(-1.0, 1.0, size=4)

            def f(*xs, c=coef):
                s = sum(xs)
                return c[0] + c[1] * s + c[2] * s * s + c[3] * math.sin(s)

            lhs = stieltjes_integrate(f, atoms, box, ell)
            rhs = zaremba_rhs(f, atoms, box, ell)
            err = abs(lhs - rhs)
            worst = max(worst, err)
            checks.append((ell, n_atoms, lhs, rhs, err))
    passed = worst <= 1e-9
    write_csv(out / "zaremba.csv", ("ell", "n_atoms", "lhs", "rhs", "abs_err"),
              checks)
    _manifest(out, "zaremba", cfg, ["zaremba.csv"],
              status="PASS" if passed else "FAIL",
              extra={"worst_abs_err": worst})
    return EXIT_OK if passed else EXIT_CHECK_FAILED


_SUBCOMMANDS = {
    "enumerate": cmd_enumerate,
    "approx": cmd_approx,
    "exponent": cmd_exponent,
    "volumes": cmd_volumes,
    "spherical": cmd_spherical,
    "decay": cmd_decay,
    "tracesim": cmd_tracesim,
    "zaremba": cmd_zaremba,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hyperlat",
        description="Quaternion-lattice experiments on products of hyperbolic spaces.",
    )
    p.add_argument("subcommand", choices=sorted(_SUBCOMMANDS))
    p.add_argument("--config", default=None, help="JSON run configuration")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="override the configured seeds")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (outputs are independent of this)")
    return p


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            from dataclasses import replace
            cfg = replace(
                cfg,
                diophantine=replace(cfg.diophantine, seed=args.seed),
                trace=replace(cfg.trace, seed=args.seed),
            )
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _SUBCOMMANDS[args.subcommand](cfg, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationBudgetError as exc:
        print(f"error: {exc} (partial results: {len(exc.partial)} elements)",
              file=sys.stderr)
        return EXIT_CHECK_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
