"""Command-line benchmark harness.

Subcommands: ``phantom`` (generate test images), ``project`` (simulate
measurements), ``reconstruct`` (run one method), ``compare`` (run the
proximal and classic methods side by side), ``info`` (describe a file).

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric or
configuration error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import io as stio
from .driver import SuperConfig, mse, res, superiorize, tv_value, write_history_csv
from .perturbation import make_perturber
from .phantoms import shepp_logan
from .projector import (
    Grid,
    add_noise,
    build_system,
    forward_project,
    make_parallel_geometry,
)

__all__ = ["main", "entry_point", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

METHODS = ("tv-pps", "tv-s", "art")

_METHOD_KIND = {"tv-pps": "prox-tv", "tv-s": "classic-subgrad-tv", "art": None}


class _Parser(argparse.ArgumentParser):
    # argparse defaults to exit code 2 on usage errors; this harness reserves
    # 2 for I/O problems.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="supertomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", parents=[], help="generate a phantom image file")
    p.add_argument("--shepp-logan", nargs=2, type=int, metavar=("ROWS", "COLS"),
                   required=True, help="generate the built-in head phantom")
    p.add_argument("-o", "--output", required=True, help="output image (.srim)")
    p.add_argument("--pgm", help="also write an 8-bit PGM preview")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("project", help="simulate parallel-beam measurements")
    p.add_argument("--config", help="key-value config file; flags override it")
    p.add_argument("-i", "--input", required=True, help="phantom image (.srim)")
    p.add_argument("-o", "--output", required=True,
                   help="projection base path (writes .f64 and .json)")
    p.add_argument("--views", type=int, required=True, help="number of view angles")
    p.add_argument("--angle-start", type=float, default=0.0, help="first angle (deg)")
    p.add_argument("--angle-step", type=float, required=True, help="angle step (deg)")
    p.add_argument("--rays", type=int, default=201, help="rays per view")
    p.add_argument("--offset-min", type=float, default=-1.0)
    p.add_argument("--offset-max", type=float, default=1.0)
    p.add_argument("--noise-variance", type=float, default=0.0,
                   help="additive Gaussian noise variance (0 = noiseless)")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--save-matrix", help="also dump the system matrix (.srsm)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("reconstruct", help="reconstruct an image from projections")
    _add_recon_arguments(p)
    p.add_argument("--method", choices=METHODS, default="tv-pps")
    p.add_argument("-o", "--output", required=True, help="output image (.srim)")
    p.add_argument("--history", help="per-iteration history CSV")
    p.add_argument("--pgm", help="also write an 8-bit PGM preview")
    p.add_argument("--profile-column", type=int, nargs="?", const=-1, default=None,
                   metavar="COL", help="extract an image column (default: center) "
                   "to CSV for profile plots")
    p.add_argument("--profile-out", help="profile CSV path "
                   "(default: output stem + '_profile.csv')")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("compare", help="run tv-s and tv-pps on identical inputs")
    _add_recon_arguments(p)
    p.add_argument("-o", "--outdir", required=True, help="output directory")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("info", help="describe a supertomo file")
    p.add_argument("path", help=".srim, .srsm, .f64 or .json file")
    p.set_defaults(func=cmd_info)

    return parser


def _add_recon_arguments(p):
    p.add_argument("--config", help="key-value config file; flags override it")
    p.add_argument("-p", "--projections", required=True,
                   help="projection base path (reads .f64 and .json)")
    p.add_argument("--phantom", help="ground-truth image for error reporting")
    p.add_argument("--grid", type=int, nargs=2, metavar=("ROWS", "COLS"),
                   help="reconstruction grid (defaults to the sidecar's)")
    p.add_argument("--beta0", type=float, default=10.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.0,
                   help="absolute residual threshold")
    p.add_argument("--eps-rel", type=float, default=None,
                   help="relative residual threshold (fraction of ||b||)")
    p.add_argument("--max-outer", type=int, default=300)
    p.add_argument("--max-inner", type=int, default=50)
    p.add_argument("--tv-tau", type=float, default=0.12)
    p.add_argument("--tv-iters", type=int, default=50)
    p.add_argument("--box", type=float, nargs=2, metavar=("LO", "HI"),
                   default=(0.0, 1.1), help="admissible intensity range")


def _config_tokens(path) -> list[str]:
    """Turn a key-value config file into CLI tokens.

    Lines are ``key value`` or ``key = value``; '#' starts a comment. Keys
    use the long flag spelling without the leading dashes.
    """
    tokens = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = line.split("=", 1)
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'key value', got {raw!r}")
            key, value = parts
        key = key.strip().replace("_", "-")
        tokens.append(f"--{key}")
        tokens.extend(value.split())
    return tokens


def _merge_config_argv(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    tokens = _config_tokens(argv[i + 1])
    rest = argv[1:i] + argv[i + 2:]
    # Config tokens come first so explicit flags override them.
    return argv[:1] + tokens + rest


def _load_system_for_reconstruction(args):
    b, meta = stio.load_projections(args.projections)
    truth = stio.load_image(args.phantom) if args.phantom else None
    if args.grid:
        grid = Grid(*args.grid)
    elif "grid_rows" in meta and "grid_cols" in meta:
        grid = Grid(int(meta["grid_rows"]), int(meta["grid_cols"]))
    elif truth is not None:
        grid = Grid(*truth.shape)
    else:
        raise ValueError("grid size unknown: pass --grid or --phantom, or use a "
                         "sidecar with grid_rows/grid_cols")
    if truth is not None and truth.shape != grid.shape:
        raise ValueError(f"phantom shape {truth.shape} does not match grid {grid.shape}")
    rays = make_parallel_geometry(
        int(meta["views"]),
        float(meta.get("angle_start_deg", 0.0)),
        float(meta["angle_step_deg"]),
        int(meta["rays_per_view"]),
        float(meta.get("offset_min", -1.0)),
        float(meta.get("offset_max", 1.0)),
    )
    system = build_system(rays, grid, box=tuple(args.box)).with_b(b)
    return system, truth


def _run_method(system, truth, method, args):
    kind = _METHOD_KIND[method]
    perturber = None
    if kind is not None:
        perturber = make_perturber(kind, tau=args.tv_tau, iters=args.tv_iters)
    config = SuperConfig(
        beta0=args.beta0,
        gamma=args.gamma,
        epsilon=args.eps,
        epsilon_rel=args.eps_rel,
        max_outer=args.max_outer,
        max_inner_attempts=args.max_inner,
        perturber=perturber,
    )
    x0 = np.zeros(system.grid.shape)
    t0 = time.perf_counter()
    result = superiorize(system, x0, config, ground_truth=truth)
    runtime = time.perf_counter() - t0
    return result, runtime


def _summary_line(method, result, runtime, system, truth):
    final_res = res(result.image, system)
    parts = [
        f"method={method}",
        f"iterations={len(result.records)}",
        f"res={final_res:.6g}",
    ]
    if truth is not None:
        parts.append(f"mse={mse(result.image, truth):.6g}")
    parts.append(f"tv={tv_value(result.image):.6g}")
    parts.append(f"runtime_s={runtime:.3f}")
    parts.append(f"termination={result.termination}")
    return "  ".join(parts)


def cmd_phantom(args) -> int:
    rows, cols = args.shepp_logan
    image = shepp_logan(rows, cols)
    stio.save_image(image, args.output)
    if args.pgm:
        stio.save_pgm(image, args.pgm)
    print(f"wrote {args.output} ({rows}x{cols})")
    return EXIT_OK


def cmd_project(args) -> int:
    image = stio.load_image(args.input)
    grid = Grid(*image.shape)
    rays = make_parallel_geometry(args.views, args.angle_start, args.angle_step,
                                  args.rays, args.offset_min, args.offset_max)
    system = build_system(rays, grid)
    b = forward_project(system, image)
    if args.noise_variance > 0.0:
        b = add_noise(b, args.noise_variance, args.seed)
    elif args.noise_variance < 0.0:
        raise ValueError(f"noise variance must be nonnegative, got {args.noise_variance}")
    meta = {
        "views": args.views,
        "rays_per_view": args.rays,
        "angle_start_deg": args.angle_start,
        "angle_step_deg": args.angle_step,
        "offset_min": args.offset_min,
        "offset_max": args.offset_max,
        "noise_variance": args.noise_variance,
        "seed": args.seed if args.noise_variance > 0.0 else None,
        "grid_rows": grid.rows,
        "grid_cols": grid.cols,
    }
    stio.save_projections(b, args.output, meta)
    if args.save_matrix:
        stio.save_system(system, args.save_matrix)
    print(f"wrote {stio._projection_base(args.output)}.f64 (m={b.size})")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    system, truth = _load_system_for_reconstruction(args)
    result, runtime = _run_method(system, truth, args.method, args)
    stio.save_image(result.image, args.output)
    if args.pgm:
        stio.save_pgm(result.image, args.pgm)
    if args.history:
        write_history_csv(result.records, args.history)
    if args.profile_column is not None:
        col = args.profile_column if args.profile_column >= 0 else system.grid.cols // 2
        profile_path = args.profile_out or str(Path(args.output).with_suffix("")) + "_profile.csv"
        _write_profile(result.image, truth, col, profile_path)
    print(_summary_line(args.method, result, runtime, system, truth))
    return EXIT_OK


def _write_profile(image, truth, col, path):
    if not 0 <= col < image.shape[1]:
        raise ValueError(f"profile column {col} outside image width {image.shape[1]}")
    lines = ["row,value" if truth is None else "row,value,reference,difference"]
    for i in range(image.shape[0]):
        if truth is None:
            lines.append(f"{i},{image[i, col]!r}")
        else:
            d = image[i, col] - truth[i, col]
            lines.append(f"{i},{image[i, col]!r},{truth[i, col]!r},{d!r}")
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def cmd_compare(args) -> int:
    system, truth = _load_system_for_reconstruction(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = ["method,iterations,res,mse,tv,runtime_s,termination"]
    for method in ("tv-s", "tv-pps"):
        result, runtime = _run_method(system, truth, method, args)
        stio.save_image(result.image, outdir / f"{method}.srim")
        write_history_csv(result.records, outdir / f"history_{method}.csv")
        _write_mse_curve(result.records, outdir / f"mse_curve_{method}.csv")
        final_res = res(result.image, system)
        mse_text = repr(mse(result.image, truth)) if truth is not None else ""
        summary.append(",".join([
            method,
            str(len(result.records)),
            repr(final_res),
            mse_text,
            repr(tv_value(result.image)),
            f"{runtime:.3f}",
            result.termination,
        ]))
        print(_summary_line(method, result, runtime, system, truth))
    with open(outdir / "compare.csv", "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(summary) + "\n")
    return EXIT_OK


def _write_mse_curve(records, path):
    lines = ["k,mse"]
    for r in records:
        lines.append(f"{r.k},{'' if r.mse is None else repr(float(r.mse))}")
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def cmd_info(args) -> int:
    path = Path(args.path)
    if not path.exists() and path.suffix not in (".f64", ".json"):
        raise FileNotFoundError(f"{path}: no such file")
    if path.suffix == ".srim":
        image = stio.load_image(path)
        print(f"image rows={image.shape[0]} cols={image.shape[1]} "
              f"min={image.min():.6g} max={image.max():.6g}")
    elif path.suffix == ".srsm":
        rows, (m, n) = stio.load_system(path)
        nnz = sum(r.nnz for r in rows)
        print(f"system-matrix m={m} n={n} nnz={nnz}")
    elif path.suffix in (".f64", ".json"):
        b, meta = stio.load_projections(path)
        fields = " ".join(f"{k}={meta[k]}" for k in sorted(meta))
        print(f"projections m={b.size} {fields}")
    else:
        raise ValueError(f"{path}: unrecognized extension {path.suffix!r}")
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        argv = _merge_config_argv(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit:
        raise
    except (stio.MalformedFileError, stio.DimensionOverflowError, OSError) as exc:
        print(f"supertomo: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"supertomo: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry_point():
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
