"""Experiment runner: scene generation, unmixing, sweeps, band-mask studies.

Exit codes: 0 success, 2 usage error, 3 data validation error,
4 numerical failure.

Solver settings follow the precedence flags > config file > defaults.
The config file is flat ``key=value`` text using the keys ``lambda``,
``alpha``, ``outer_tol``, ``max_outer``, ``inner_tol``, ``max_inner``,
``denom_eps``, ``sigma2_floor`` and ``seed``.

Sweep cells run in a thread pool whose size is capped by the
``ROBUST_UNMIX_THREADS`` environment variable; every cell is seeded
independently of scheduling order, so parallelism never changes results.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from types import SimpleNamespace

import numpy as np

from . import io as mat_io
from .baselines import l1_nmf_solve, l12_nmf_solve, nmf_solve
from .errors import FormatError, NumericalError, UnmixError, ValidationError
from .metrics import evaluate_run
from .model import SolverConfig, SpectraMatrix, validate
from .solver import cenmf_solve, estimate_lambda
from .svgplot import line_plot
from .synth import SceneSpec, builtin_endmember_library, generate_scene

METHODS = ("nmf", "l1nmf", "l12nmf", "cenmf")

_CONFIG_KEYS = {
    "lambda": str,
    "alpha": float,
    "outer_tol": float,
    "max_outer": int,
    "inner_tol": float,
    "max_inner": int,
    "denom_eps": float,
    "sigma2_floor": float,
    "seed": int,
}


def _read_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.strip()
            if not body or body.startswith("#"):
                continue
            if "=" not in body:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in body.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value
    return values


def _lambda_value(text):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("lambda must be >= 0")
    return value


def _add_solver_flags(sub):
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--lambda", dest="lam", type=_lambda_value, default=None,
                     metavar="VALUE|auto", help="l1 penalty weight (default auto)")
    sub.add_argument("--alpha", type=float, default=None, help="kernel scale factor")
    sub.add_argument("--outer-tol", type=float, default=None)
    sub.add_argument("--max-outer", type=int, default=None)
    sub.add_argument("--inner-tol", type=float, default=None)
    sub.add_argument("--max-inner", type=int, default=None)
    sub.add_argument("--denom-eps", type=float, default=None)
    sub.add_argument("--sigma2-floor", type=float, default=None)
    sub.add_argument("--seed", type=int, default=None)


def _solver_config(args):
    file_values = _read_config_file(args.config) if getattr(args, "config", None) else {}
    merged = {}
    for key, cast in _CONFIG_KEYS.items():
        attr = "lam" if key == "lambda" else key
        flag = getattr(args, attr, None)
        if flag is not None:
            merged[key] = flag
        elif key in file_values:
            raw = file_values[key]
            merged[key] = raw if key == "lambda" and raw == "auto" else cast(raw)
    kwargs = {("lam" if k == "lambda" else k): v for k, v in merged.items()}
    return SolverConfig(**kwargs)


def _load_library(spec, fmt):
    if spec == "builtin":
        return builtin_endmember_library()
    from .model import Endmembers

    return Endmembers(mat_io.load_matrix(spec, fmt))


def _write_trace_csv(path, report):
    with open(path, "w", encoding="utf-8") as fh:
        if report.sigma2_trace.size:
            fh.write("# columns: iteration,objective,objective_start,sigma2\n")
            rows = zip(report.objective_trace, report.objective_start_trace,
                       report.sigma2_trace)
            for i, (g, g_start, s2) in enumerate(rows):
                fh.write(f"{i},{g!r},{g_start!r},{s2!r}\n")
        else:
            fh.write("# columns: iteration,objective\n")
            for i, g in enumerate(report.objective_trace):
                fh.write(f"{i},{g!r}\n")


def _effective_rank(matrix, axis):
    scale = float(np.max(matrix, initial=0.0))
    if scale == 0.0:
        return 0
    return int(np.sum(np.max(matrix, axis=axis) > 1e-12 * scale))


def _run_method(method, Y, k, lam, config):
    if method == "nmf":
        return nmf_solve(Y, k, config)
    if method == "l1nmf":
        return l1_nmf_solve(Y, k, lam, config)
    if method == "l12nmf":
        return l12_nmf_solve(Y, k, lam, config)
    if method == "cenmf":
        return cenmf_solve(Y, k, replace(config, lam=lam))
    raise ValidationError(f"unknown method {method!r}")


def _ext(fmt):
    return "csv" if fmt == "csv" else "raw"


# ---------------------------------------------------------------- generate


def cmd_generate(args, parser):
    if args.k < 2:
        parser.error("--k must be >= 2 (the purity step needs a mixing partner)")
    library = _load_library(args.endmember_lib, args.format)
    if args.endmember_lib == "builtin":
        library = builtin_endmember_library(args.k)
    elif library.n_endmembers != args.k:
        parser.error(
            f"--k {args.k} does not match the library's {library.n_endmembers} columns"
        )
    spec = SceneSpec(
        endmember_library=library,
        mean_snr_db=args.mean_snr,
        snr_std_db=args.snr_std,
        z=args.z,
        purity_threshold=args.purity_threshold,
        seed=args.seed if args.seed is not None else 0,
    )
    scene = generate_scene(spec)

    os.makedirs(args.out_dir, exist_ok=True)
    ext = _ext(args.format)
    meta = {"seed": spec.seed, "z": spec.z, "k": args.k,
            "mean_snr_db": spec.mean_snr_db, "snr_std_db": spec.snr_std_db,
            "purity_threshold": spec.purity_threshold}
    out = lambda name: os.path.join(args.out_dir, f"{name}.{ext}")
    mat_io.save_matrix(scene.noisy.data, out("Y_noisy"), args.format, meta)
    mat_io.save_matrix(scene.clean.data, out("Y_clean"), args.format, meta)
    mat_io.save_matrix(scene.endmembers.data, out("X_true"), args.format, meta)
    mat_io.save_matrix(scene.abundances.data, out("W_true"), args.format, meta)
    mat_io.save_matrix(scene.band_snr_db.reshape(-1, 1), out("band_snr"), args.format, meta)
    with open(os.path.join(args.out_dir, "scene_meta.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"layout=bands_by_pixels\nformat={args.format}\n")
        fh.write(f"d_bands={scene.noisy.n_bands}\nn_pixels={scene.noisy.n_pixels}\n")
        for key, value in meta.items():
            fh.write(f"{key}={value}\n")
        fh.write(f"endmember_lib={args.endmember_lib}\n")
    print(f"wrote scene ({scene.noisy.n_bands}x{scene.noisy.n_pixels}) to {args.out_dir}")
    return 0


# ------------------------------------------------------------------- unmix


def cmd_unmix(args, parser):
    config = _solver_config(args)
    Y = SpectraMatrix(mat_io.load_matrix(args.input, args.format))
    validate(Y, args.k)
    lam = args.lam if args.lam is not None else config.lam
    started = time.perf_counter()
    report = _run_method(args.method, Y, args.k, lam, config)
    elapsed = time.perf_counter() - started

    os.makedirs(args.out_dir, exist_ok=True)
    ext = _ext(args.out_format)
    out = lambda name: os.path.join(args.out_dir, f"{name}.{ext}")
    W_est = report.abundances.data
    if args.normalize_abundances:
        sums = W_est.sum(axis=0, keepdims=True)
        W_est = np.divide(W_est, sums, out=np.zeros_like(W_est), where=sums > 0)
    mat_io.save_matrix(report.endmembers.data, out("X_est"), args.out_format)
    mat_io.save_matrix(W_est, out("W_est"), args.out_format)
    if args.method == "cenmf":
        mat_io.save_matrix(report.band_weights.u.reshape(-1, 1),
                           out("band_weights"), args.out_format)
    _write_trace_csv(os.path.join(args.out_dir, "objective_trace.csv"), report)
    with open(os.path.join(args.out_dir, "run_summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"method={args.method}\nk={args.k}\ninput={args.input}\n")
        fh.write(f"lambda={report.lambda_used!r}\n")
        fh.write(f"termination={report.termination.value}\n")
        fh.write(f"iterations={report.n_iterations}\n")
        fh.write(f"wall_time_s={elapsed:.3f}\n")
        fh.write(f"final_objective={report.objective_trace[-1]!r}\n")
        fh.write(f"effective_rank_w={_effective_rank(report.abundances.data, axis=1)}\n")
        fh.write(f"effective_rank_x={_effective_rank(report.endmembers.data, axis=0)}\n")
        fh.write(f"normalized_abundances={int(bool(args.normalize_abundances))}\n")
    print(f"{args.method}: lambda={report.lambda_used:.6g} "
          f"iters={report.n_iterations} ({report.termination.value}) "
          f"objective={report.objective_trace[-1]:.6g} [{elapsed:.2f}s]")
    return 0


# ------------------------------------------------------------------- sweep


def _cell_seeds(seed_base, snr_index, repeat):
    stream = np.random.SeedSequence([int(seed_base), int(snr_index), int(repeat)])
    scene_seed, solver_seed = (int(v) for v in stream.generate_state(2, np.uint64))
    return scene_seed, solver_seed


def _sweep_cell(args, config, library, snr_index, snr, method, repeat):
    scene_seed, solver_seed = _cell_seeds(args.seed_base, snr_index, repeat)
    scene = generate_scene(SceneSpec(
        endmember_library=library, mean_snr_db=snr, snr_std_db=args.snr_std,
        z=args.z, seed=scene_seed,
    ))
    lam = args.lam if args.lam is not None else config.lam
    report = _run_method(method, scene.noisy, library.n_endmembers, lam,
                         replace(config, seed=solver_seed))
    table = evaluate_run(scene, report, renormalize=args.normalize_abundances)
    rows = [
        (snr, method, repeat, i, float(s), float(r))
        for i, (s, r) in enumerate(zip(table.sad_values, table.rmse_values))
    ]
    weights = report.band_weights.u if method == "cenmf" and repeat == 0 else None
    return rows, weights


def cmd_sweep(args, parser):
    config = _solver_config(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method not in METHODS:
            parser.error(f"unknown method {method!r} (choose from {', '.join(METHODS)})")
    snrs = [float(s) for s in args.snr_list.split(",") if s.strip()]
    if not snrs or args.repeats < 1:
        parser.error("--snr-list must be non-empty and --repeats >= 1")
    library = _load_library(args.endmember_lib, "csv")
    if args.endmember_lib == "builtin":
        library = builtin_endmember_library(args.k)

    os.makedirs(os.path.join(args.out_dir, "cells"), exist_ok=True)
    cells = [
        (si, snr, method, rep)
        for si, snr in enumerate(snrs)
        for method in methods
        for rep in range(args.repeats)
    ]
    workers = int(os.environ.get("ROBUST_UNMIX_THREADS", "0")) or min(4, os.cpu_count() or 1)

    results = {}
    weight_curves = {}
    failure = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(_sweep_cell, args, config, library, si, snr, method, rep):
            (si, snr, method, rep)
            for si, snr, method, rep in cells
        }
        for future, key in futures.items():
            si, snr, method, rep = key
            try:
                rows, weights = future.result()
            except UnmixError as exc:
                failure = failure or exc
                continue
            results[key] = rows
            cell_path = os.path.join(
                args.out_dir, "cells", f"cell_snr{snr:g}_{method}_r{rep}.csv"
            )
            with open(cell_path, "w", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["snr", "method", "repeat", "endmember", "sad", "rmse"])
                writer.writerows(rows)
            if weights is not None:
                weight_curves[(si, snr)] = weights

    ordered = [results[key] for key in sorted(results) if key in results]
    with open(os.path.join(args.out_dir, "results.csv"), "w", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr", "method", "repeat", "endmember", "sad", "rmse"])
        for rows in ordered:
            writer.writerows(rows)

    # Mean over repeats, per (snr, method, endmember).
    sums = {}
    for rows in ordered:
        for snr, method, rep, em, s, r in rows:
            acc = sums.setdefault((snr, method, em), [0.0, 0.0, 0])
            acc[0] += s
            acc[1] += r
            acc[2] += 1
    with open(os.path.join(args.out_dir, "summary.csv"), "w", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr", "method", "endmember", "mean_sad", "mean_rmse"])
        for (snr, method, em), (s, r, cnt) in sorted(sums.items()):
            writer.writerow([snr, method, em, s / cnt, r / cnt])

    k = library.n_endmembers
    for em in range(k):
        for metric, idx in (("sad", 0), ("rmse", 1)):
            series = []
            for method in methods:
                xs = sorted(snrs)
                ys = [sums.get((snr, method, em), [np.nan, np.nan, 1])[idx]
                      / max(sums.get((snr, method, em), [0, 0, 1])[2], 1)
                      for snr in xs]
                series.append((method, xs, ys))
            line_plot(
                series,
                os.path.join(args.out_dir, f"{metric}_em{em}.svg"),
                title=f"{metric.upper()} vs SNR, endmember {em}",
                x_label="mean SNR (dB)", y_label=metric.upper(),
            )
    for (si, snr), weights in sorted(weight_curves.items()):
        line_plot(
            [("band weight", list(range(len(weights))), list(weights))],
            os.path.join(args.out_dir, f"band_weights_snr{snr:g}.svg"),
            title=f"Learned band weights, SNR {snr:g} dB (repeat 0)",
            x_label="band index", y_label="weight", log_y=True,
        )

    if failure is not None:
        print(f"sweep incomplete: {failure}", file=sys.stderr)
        raise failure
    print(f"wrote sweep results for {len(cells)} cells to {args.out_dir}")
    return 0


# ------------------------------------------------------- bandmask-compare


def _read_mask(path, n_bands):
    indices = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            body = line.split("#", 1)[0].replace(",", " ")
            indices.extend(int(tok) for tok in body.split())
    for idx in indices:
        if not 0 <= idx < n_bands:
            raise ValidationError(f"mask index {idx} out of range for {n_bands} bands")
    return sorted(set(indices))


def cmd_bandmask_compare(args, parser):
    config = _solver_config(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method not in METHODS:
            parser.error(f"unknown method {method!r}")
    Y = mat_io.load_matrix(args.input, args.format)
    X_true = mat_io.load_matrix(args.x_true, args.format)
    W_true = mat_io.load_matrix(args.w_true, args.format)
    mask = _read_mask(args.mask, Y.shape[0])
    keep = np.setdiff1d(np.arange(Y.shape[0]), np.asarray(mask, dtype=int))

    k = args.k
    validate(SpectraMatrix(Y), k)
    validate(SpectraMatrix(Y[keep]), k)

    lam = args.lam if args.lam is not None else config.lam
    rows = []
    for method in methods:
        for variant, band_idx in (("full", np.arange(Y.shape[0])), ("masked", keep)):
            data = Y[band_idx]
            report = _run_method(method, data, k, lam, config)
            truth = SimpleNamespace(endmembers=X_true[band_idx], abundances=W_true)
            # Angles always exclude the masked bands so both variants
            # compare spectra over the same retained band set.
            exclude = None if variant == "masked" else mask
            table = evaluate_run(truth, report, renormalize=args.normalize_abundances,
                                 band_mask=exclude)
            for em, (s, r) in enumerate(zip(table.sad_values, table.rmse_values)):
                rows.append((variant, method, em, float(s), float(r)))
            rows.append((variant, method, "mean", table.mean_sad, table.mean_rmse))

    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "bandmask_results.csv")
    with open(out_path, "w", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "method", "endmember", "sad", "rmse"])
        writer.writerows(rows)
    print(f"wrote {out_path} ({len(mask)} masked bands)")
    return 0


# -------------------------------------------------------------------- main


def build_parser():
    parser = argparse.ArgumentParser(
        prog="robust-unmix",
        description="Robust hyperspectral unmixing experiments (matrices are bands x pixels).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic scene")
    g.add_argument("--z", type=int, default=8, help="block size (image is z^2 x z^2)")
    g.add_argument("--k", type=int, default=6, help="number of endmembers (>= 2)")
    g.add_argument("--endmember-lib", default="builtin",
                   help="'builtin' or a path to a D x K matrix")
    g.add_argument("--mean-snr", type=float, default=30.0)
    g.add_argument("--snr-std", type=float, default=5.0)
    g.add_argument("--purity-threshold", type=float, default=0.8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=mat_io.FORMATS, default="csv")
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_generate)

    u = sub.add_parser("unmix", help="run one solver on a data matrix")
    u.add_argument("--input", required=True, help="D x N matrix file")
    u.add_argument("--format", choices=mat_io.FORMATS, default="csv")
    u.add_argument("--method", choices=METHODS, required=True)
    u.add_argument("--k", type=int, required=True)
    u.add_argument("--out-format", choices=mat_io.FORMATS, default="csv")
    u.add_argument("--normalize-abundances", action="store_true",
                   help="rescale each saved pixel abundance to sum to one (reporting only)")
    u.add_argument("--out-dir", required=True)
    _add_solver_flags(u)
    u.set_defaults(func=cmd_unmix)

    s = sub.add_parser("sweep", help="scene/method/repeat grid with plots")
    s.add_argument("--snr-list", required=True, help="comma list of mean SNRs in dB")
    s.add_argument("--methods", default=",".join(METHODS))
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--seed-base", type=int, default=0)
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--z", type=int, default=8)
    s.add_argument("--snr-std", type=float, default=5.0)
    s.add_argument("--endmember-lib", default="builtin")
    s.add_argument("--normalize-abundances", action="store_true",
                   help="evaluate abundance error after per-pixel sum-to-one rescaling")
    s.add_argument("--out-dir", required=True)
    _add_solver_flags(s)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bandmask-compare",
                       help="same methods on full-band and masked-band data")
    b.add_argument("--input", required=True)
    b.add_argument("--format", choices=mat_io.FORMATS, default="csv")
    b.add_argument("--x-true", required=True)
    b.add_argument("--w-true", required=True)
    b.add_argument("--mask", required=True, help="text file of band indices to remove")
    b.add_argument("--methods", default="nmf,cenmf")
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--normalize-abundances", action="store_true")
    b.add_argument("--out-dir", required=True)
    _add_solver_flags(b)
    b.set_defaults(func=cmd_bandmask_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (ValidationError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
