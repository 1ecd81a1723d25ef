"""Experiment command line: scene generation, recovery, verification sweeps.

Subcommands (each takes ``--config <json> --out <dir>`` and an optional
``--seed`` override): ``generate``, ``solve``, ``certify``, ``mc-table``,
``flatten-check``, ``naf-sweep``.  Exit codes: 0 on success, 2 for an
invalid configuration, 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .adversarial import empirical_naf, mc_limit_constant, mc_lower_bound
from .certificates import (
    build_2d_certificate,
    build_separated_certificate,
    product_certificate,
    stability_constant,
    stability_constant_alpha,
)
from .errors import NumericalError
from .flattening import build_flattening_filter
from .grid import Grid, GridSignal
from .io import (
    atomic_write_text,
    certificate_to_dict,
    flattening_filter_to_dict,
    read_json,
    read_signal_csv,
    sha256_file,
    support_to_dict,
    support_from_dict,
    write_json,
    write_signal_csv,
    write_signal_pgm,
)
from .operators import add_poisson_noise, flat_operator, triangular_operator
from .rayleigh import SupportSet
from .scenes import (
    match_radius,
    multi_density_scene,
    points_scene,
    random_scene,
    region_scores,
    scaled_poisson_noise,
)
from .solver import SolverConfig, solve

_MODELS = {
    "flat_1d": (1, flat_operator),
    "tri_1d": (1, triangular_operator),
    "flat_2d": (2, flat_operator),
    "tri_2d": (2, triangular_operator),
}


def _grid_from_config(cfg: dict) -> Grid:
    model = cfg["model"]
    if model not in _MODELS:
        raise ValueError(f"unknown model {model!r}")
    dim = _MODELS[model][0]
    fc = int(cfg["fc"])
    if "N" in cfg:
        n_grid = int(cfg["N"])
    else:
        srf = Fraction(str(cfg["srf"]))
        n_grid = srf * (2 * fc + 1)
        if n_grid.denominator != 1:
            raise ValueError(f"srf {cfg['srf']} gives non-integer N = {float(n_grid)}")
        n_grid = int(n_grid)
    return Grid(dim, n_grid, fc)


def _operator_from_config(cfg: dict, grid: Grid):
    return _MODELS[cfg["model"]][1](grid)


def _solver_config(cfg: dict) -> SolverConfig:
    solver = cfg.get("solver", {})
    kwargs = {}
    for key in (
        "mu0_scale",
        "continuation_factors",
        "inner_tol",
        "inner_max_iter",
        "final_iter",
        "mu0",
    ):
        if key in solver:
            value = solver[key]
            kwargs[key] = tuple(value) if key == "continuation_factors" else value
    return SolverConfig(**kwargs)


def _write_manifest(outdir: Path, command: str, cfg: dict, metrics: dict, seed) -> None:
    files = {
        p.name: sha256_file(p)
        for p in sorted(outdir.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    write_json(
        outdir / "manifest.json",
        {
            "command": command,
            "version": __version__,
            "seed": seed,
            "config": cfg,
            "metrics": metrics,
            "files": files,
        },
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_generate(cfg: dict, outdir: Path, seed) -> dict:
    grid = _grid_from_config(cfg)
    op = _operator_from_config(cfg, grid)
    seed = int(cfg.get("seed", 0) if seed is None else seed)
    scene = cfg.get("scene", {})
    kind = scene.get("kind", "points")
    regions = None

    if kind == "points":
        signal, support = points_scene(grid, scene["points"], scene["amplitudes"])
    elif kind == "random":
        signal, support = random_scene(
            grid,
            float(scene.get("d", 3.74)),
            int(scene.get("r", 1)),
            int(scene["count"]),
            scene.get("amplitude", 1.0),
            seed,
        )
    elif kind == "figure4":
        signal, regions = multi_density_scene(
            grid, seed, amplitude=float(scene.get("amplitude", 10000.0)),
            counts=scene.get("counts"),
        )
        support = SupportSet(grid, [p for reg in regions for p in reg.points])
    else:
        raise ValueError(f"unknown scene kind {kind!r}")

    clean = op.apply(signal)
    noise_kind = cfg.get("noise", "none")
    if noise_kind == "poisson":
        observed = add_poisson_noise(clean, seed + 7919)
    elif noise_kind == "none":
        observed = clean
    else:
        raise ValueError(f"unknown noise kind {noise_kind!r}")

    write_signal_csv(outdir / "x.csv", signal)
    write_signal_csv(outdir / "s_clean.csv", clean)
    write_signal_csv(outdir / "s.csv", observed)
    write_json(outdir / "support.json", support_to_dict(support))
    if grid.dimension == 2:
        write_signal_pgm(outdir / "x.pgm", signal)
        write_signal_pgm(outdir / "s.pgm", observed)
    if regions is not None:
        write_json(
            outdir / "scene.json",
            {
                "regions": [
                    {
                        "name": reg.name,
                        "box": [list(b) for b in reg.box],
                        "d": None if reg.d == float("inf") else reg.d,
                        "r": reg.r,
                        "points": [list(p) for p in reg.points],
                    }
                    for reg in regions
                ]
            },
        )
    metrics = {
        "x_l1": signal.l1(),
        "s_l1": observed.l1(),
        "noise_l1": float(np.abs(observed.values - clean.values).sum()),
        "spikes": len(support),
    }
    return metrics


def _load_regions(path: Path):
    from .scenes import Region

    payload = read_json(path)
    return [
        Region(
            name=reg["name"],
            box=tuple(tuple(b) for b in reg["box"]),
            d=float("inf") if reg["d"] is None else reg["d"],
            r=reg["r"],
            points=tuple(tuple(p) for p in reg["points"]),
        )
        for reg in payload["regions"]
    ]


def _cmd_solve(cfg: dict, outdir: Path, seed) -> dict:
    grid = _grid_from_config(cfg)
    op = _operator_from_config(cfg, grid)
    scene_dir = Path(cfg["scene_dir"])
    if not (scene_dir / "s.csv").exists():
        raise ValueError(f"no observation file in {scene_dir}")
    observed = read_signal_csv(scene_dir / "s.csv", grid)
    result = solve(op, observed, _solver_config(cfg))

    write_signal_csv(outdir / "x_hat.csv", result.x_hat)
    if grid.dimension == 2:
        write_signal_pgm(outdir / "x_hat.pgm", result.x_hat)

    log_lines = []
    for stage, (objs, resids) in enumerate(zip(result.objectives, result.residuals)):
        stride = max(1, len(objs) // 200)
        for it in range(0, len(objs), stride):
            log_lines.append(
                json.dumps(
                    {
                        "stage": stage,
                        "iter": it,
                        "objective": float(objs[it]),
                        "residual": float(resids[it]),
                    },
                    sort_keys=True,
                )
            )
        if len(objs) and (len(objs) - 1) % stride != 0:
            log_lines.append(
                json.dumps(
                    {
                        "stage": stage,
                        "iter": len(objs) - 1,
                        "objective": float(objs[-1]),
                        "residual": float(resids[-1]),
                    },
                    sort_keys=True,
                )
            )
    atomic_write_text(outdir / "runlog.jsonl", "\n".join(log_lines) + "\n")

    metrics = {
        "residual_l1": result.residual_l1,
        "iterations": result.iterations,
        "fft_equivalents": 4 * result.total_iterations,
    }
    if (scene_dir / "x.csv").exists():
        truth = read_signal_csv(scene_dir / "x.csv", grid)
        err = float(np.abs(result.x_hat.values - truth.values).sum())
        metrics["error_l1"] = err
        metrics["error_rel"] = err / truth.l1() if truth.l1() > 0 else 0.0
        if (scene_dir / "scene.json").exists():
            regions = _load_regions(scene_dir / "scene.json")
            metrics["regions"] = region_scores(result.x_hat, regions)
            metrics["match_radius"] = match_radius(grid)
    return metrics


def _cmd_certify(cfg: dict, outdir: Path, seed) -> dict:
    support_payload = read_json(cfg["support_file"])
    fc = int(cfg["fc"])
    support = support_from_dict(support_payload, fc)
    r = int(cfg.get("r", 1))
    min_sep = float(cfg.get("min_separation", 3.74 if support.grid.dimension == 1 else 4.76))

    if support.grid.dimension == 2:
        cert = build_2d_certificate(support, int(cfg.get("band_limit", fc)), min_sep)
    elif r == 1:
        cert = build_separated_certificate(support, int(cfg.get("band_limit", fc)), min_sep)
    else:
        cert = product_certificate(support, r, min_sep)

    write_json(outdir / "certificate.json", certificate_to_dict(cert))
    if support.grid.dimension == 1:
        dense = cert.dense_values(oversample=16)
        tt = np.arange(len(dense)) / len(dense)
        lines = [f"{t:.12g},{v:.17g}" for t, v in zip(tt, dense)]
        atomic_write_text(outdir / "evaluation.csv", "\n".join(lines) + "\n")
    metrics = {
        "rho": cert.rho,
        "sup_norm": cert.sup_norm,
        "min_value": cert.min_value,
        "root_residual": cert.root_residual,
        "growth_c1": cert.growth_c1,
    }
    if "noise_l1" in cfg:
        metrics["noise_l1"] = float(cfg["noise_l1"])
        metrics["error_bound"] = cert.error_bound(float(cfg["noise_l1"]))
    write_json(outdir / "bound.json", metrics)
    return metrics


def _cmd_mc_table(cfg: dict, outdir: Path, seed) -> dict:
    r_values = [int(r) for r in cfg.get("r_values", [1, 2, 3])]
    srf_values = [float(s) for s in cfg.get("srf_values", [4, 8, 16])]
    n_grid = int(cfg.get("N", 8192))
    want_limits = bool(cfg.get("limit_constants", True))
    limits = {r: (mc_limit_constant(r) if want_limits and r <= 5 else None) for r in r_values}

    rows = ["r,srf_requested,srf_actual,N,fc,ratio,g_estimate,c_r,bound"]
    for r in r_values:
        for srf in srf_values:
            fc = max(1, round((n_grid / srf - 1) / 2))
            grid = Grid(1, n_grid, fc)
            est = mc_lower_bound(grid, r, limit_constant=limits[r])
            rows.append(
                f"{r},{srf:.6g},{est.srf:.10g},{n_grid},{fc},"
                f"{est.ratio:.12g},{est.g_estimate:.12g},"
                f"{'' if limits[r] is None else format(limits[r], '.10g')},"
                f"{'' if est.bound is None else format(est.bound, '.10g')}"
            )
    atomic_write_text(outdir / "mc_table.csv", "\n".join(rows) + "\n")
    return {"rows": len(rows) - 1, "limit_constants": {str(k): v for k, v in limits.items()}}


def _cmd_flatten_check(cfg: dict, outdir: Path, seed) -> dict:
    alphas = [float(a) for a in cfg.get("alphas", [0.5, 0.75])]
    grids = cfg.get("grids", [{"N": 512, "srf": 4}])
    report = []
    worst_margin = -float("inf")
    for spec_entry in grids:
        n_grid = int(spec_entry["N"])
        srf = float(spec_entry["srf"])
        for alpha in alphas:
            divisor = Fraction(str(alpha)).limit_denominator(64).denominator
            fc = max(divisor, round(n_grid / (2 * srf * divisor)) * divisor)
            grid = Grid(1, n_grid, fc)
            filt = build_flattening_filter(grid, alpha)
            flat = filt.flattened_multiplier()
            k = grid.frequencies()
            cut = int(round(alpha * fc))
            flat_err = float(np.abs(flat.coeffs[np.abs(k) <= cut] - 1.0).max())
            beyond = float(np.abs(flat.coeffs[np.abs(k) > fc]).max())
            margin = filt.norm_budget - filt.one_norm
            worst_margin = max(worst_margin, -margin)
            write_json(
                outdir / f"filter_N{n_grid}_fc{fc}_a{alpha}.json",
                flattening_filter_to_dict(filt),
            )
            report.append(
                {
                    "N": n_grid,
                    "srf": srf,
                    "fc": fc,
                    "alpha": alpha,
                    "one_norm": filt.one_norm,
                    "c_alpha": filt.norm_budget,
                    "norm_within_budget": bool(filt.one_norm <= filt.norm_budget),
                    "flat_region_error": flat_err,
                    "max_beyond_cutoff": beyond,
                }
            )
    write_json(outdir / "flatten_report.json", {"entries": report})
    return {
        "entries": len(report),
        "all_within_budget": all(e["norm_within_budget"] for e in report),
        "worst_excess": worst_margin,
    }


def _cmd_naf_sweep(cfg: dict, outdir: Path, seed) -> dict:
    grid = _grid_from_config(cfg)
    op = _operator_from_config(cfg, grid)
    r = int(cfg.get("r", 1))
    d = float(cfg.get("d", 3.74 * r))
    count = int(cfg.get("count", 2 * r))
    amplitude = float(cfg.get("amplitude", 1.0))
    seeds = [int(s) for s in cfg.get("seeds", range(5))]
    noise_scales = [float(v) for v in cfg.get("noise_scales", [1e-3])]
    alpha = float(cfg.get("alpha", 0.5))
    solver_cfg = _solver_config(cfg)
    base_seed = int(cfg.get("seed", 0) if seed is None else seed)

    srf = float(grid.srf)
    bound_flat = stability_constant(r) * srf ** (2 * r)
    bound_tri = stability_constant_alpha(r, alpha) * srf ** (2 * r)

    rows = ["noise_scale,delta,naf,bound_flat,bound_flattened"]
    for scale in noise_scales:
        records = []
        delta = 0.0
        for s in seeds:
            signal, _ = random_scene(grid, d, r, count, amplitude, base_seed + 1000 * s)
            target = scale * signal.l1()
            noise = scaled_poisson_noise(signal, target, base_seed + 1000 * s + 1)
            observed = GridSignal(grid, op.apply(signal).values + noise)
            result = solve(op, observed, solver_cfg)
            records.append((signal, result.x_hat))
            delta = max(delta, float(np.abs(noise).sum()))
        naf = empirical_naf(records, delta)
        rows.append(
            f"{scale:.6g},{delta:.12g},{naf:.12g},{bound_flat:.12g},{bound_tri:.12g}"
        )
    atomic_write_text(outdir / "naf.csv", "\n".join(rows) + "\n")
    return {"rows": len(rows) - 1, "bound_flat": bound_flat, "bound_flattened": bound_tri}


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "mc-table": _cmd_mc_table,
    "flatten-check": _cmd_flatten_check,
    "naf-sweep": _cmd_naf_sweep,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spikesr", description="spike super-resolution experiments"
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    args = parser.parse_args(argv)

    try:
        cfg = read_json(args.config)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        metrics = _COMMANDS[args.command](cfg, outdir, args.seed)
        _write_manifest(outdir, args.command, cfg, metrics, args.seed)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
