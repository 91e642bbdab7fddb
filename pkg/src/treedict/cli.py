"""Command-line frontend for tree-based dictionary learning and OMP reconstruction.

Exit codes: 0 success, 1 runtime failure, 2 usage or input validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
import warnings

import numpy as np

from .checks import haar_check
from .clustering import ClusteringMethod
from .data import DataSet, load_csv
from .dictionary import Dictionary, RepresentativePolicy, extract_haar, extract_leaves, subdictionary_by_depth
from .imaging import PGMError, atom_mosaic, extract_grid_patches, extract_random_patches, load_pgm, psnr, reassemble, save_pgm
from .omp import SparseCode, encode_all, reconstruct, usage_stats
from .tree import BuildConfig, build

log = logging.getLogger("treedict")

CLUSTERING_ALIASES = {
    "2means": "two_means",
    "2maxoids": "two_maxoids",
    "1d": "one_d_feature",
    "spectral": "spectral",
}


class UsageError(Exception):
    pass


def _write_csv(path, header, rows):
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def _write_json(path, obj):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _require_file(path, what):
    if path is None or not os.path.isfile(path):
        raise UsageError(f"{what} not found: {path}")


def _sparsities(text) -> list:
    out = []
    for part in str(text).split(","):
        lo, sep, hi = part.partition("-")
        vals = range(int(lo), int(hi) + 1) if sep else [int(lo)]
        out.extend(vals)
    if not out or min(out) < 1:
        raise UsageError("sparsity must be >= 1")
    return sorted(set(out))


def _load_training(args) -> DataSet:
    if args.csv:
        _require_file(args.csv, "dataset CSV")
        return load_csv(args.csv)
    _require_file(args.image, "image")
    img = load_pgm(args.image)
    m1, m2 = args.patch
    return extract_random_patches(img, m1, m2, args.num_patches, args.seed)


def _build_config(args, n) -> BuildConfig:
    K = args.cardinality or math.ceil(1.5 * n)
    cm = ClusteringMethod(CLUSTERING_ALIASES[args.clustering], lloyd_iters=args.lloyd_iters,
                          rng_seed=args.seed)
    try:
        return BuildConfig(args.strategy, args.mincard, args.epsilon, max(K, 2), cm,
                           RepresentativePolicy.parse(args.representative))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _train(data, cfg, out):
    t0 = time.perf_counter()
    tree = build(data, cfg)
    t1 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        haar = extract_haar(tree, data)
        t2 = time.perf_counter()
        leaves = extract_leaves(tree, data)
        t3 = time.perf_counter()
    for w in caught:
        log.warning("%s", w.message)
    tree.save(os.path.join(out, "tree.json"))
    haar.save(os.path.join(out, "dict_haar.json"))
    leaves.save(os.path.join(out, "dict_leaves.json"))
    haar.save_matrix_csv(os.path.join(out, "dict_haar.csv"))
    leaves.save_matrix_csv(os.path.join(out, "dict_leaves.csv"))
    return tree, haar, leaves, {"tree": t1 - t0, "haar": t2 - t1, "leaves": t3 - t2, "total": t3 - t0}


def cmd_train(args):
    data = _load_training(args)
    cfg = _build_config(args, data.n)
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "config.json"), _echo(args, build=cfg.describe()))
    t0 = time.perf_counter()
    tree, haar, leaves, times = _train(data, cfg, args.out)
    rows = [(phase, f"{sec:.6f}", data.N, haar.K) for phase, sec in times.items()]
    _write_csv(os.path.join(args.out, "timing.csv"), ["phase", "seconds", "N", "K"], rows)
    log.info("trained on %d samples: %d nodes, |D^H| = %d, |D^L| = %d in %.3fs",
             data.N, len(tree.nodes), haar.K, leaves.K, time.perf_counter() - t0)
    return 0


def cmd_bench(args):
    _require_file(args.image, "image")
    img = load_pgm(args.image)
    m1, m2 = args.patch
    sizes = sorted(set(args.sizes))
    os.makedirs(args.out, exist_ok=True)
    cfg = _build_config(args, m1 * m2)
    _write_json(os.path.join(args.out, "config.json"), _echo(args, build=cfg.describe()))
    rows, medians = [], []
    for N in sizes:
        data = extract_random_patches(img, m1, m2, N, args.seed)
        runs = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            build(data, cfg)
            runs.append(time.perf_counter() - t0)
        medians.append(float(np.median(runs)))
        rows.append((N, cfg.K, f"{medians[-1]:.6f}", f"{min(runs):.6f}", args.repeats))
    _write_csv(os.path.join(args.out, "timing.csv"), ["N", "K", "median_seconds", "min_seconds", "repeats"], rows)
    if not args.no_figures:
        from .plotting import plot_timing
        plot_timing(sizes, medians, os.path.join(args.out, "timing.png"))
    return 0


def _load_dictionary(path) -> Dictionary:
    _require_file(path, "dictionary")
    return Dictionary.load(path)


def cmd_reconstruct(args):
    sparsities = _sparsities(args.sparsity)
    d = _load_dictionary(args.dictionary)
    _require_file(args.image, "image")
    img = load_pgm(args.image)
    if d.kind == "haar" and args.max_level is not None:
        d = subdictionary_by_depth(d, args.max_level)
    if len(d.shape) != 2:
        raise UsageError("reconstruction needs a patch-shaped dictionary")
    m1, m2 = d.shape
    patches, grid = extract_grid_patches(img, m1, m2)
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "config.json"), _echo(args))
    rows, values = [], []
    for S in sparsities:
        code = encode_all(patches, d, S)
        rec = reassemble(reconstruct(code, d), grid, *img.shape)
        p = psnr(img, rec)
        used = int(np.count_nonzero(usage_stats(code).eta))
        values.append(p)
        rows.append((S, d.K, used, "inf" if math.isinf(p) else f"{p:.6f}",
                     f"{float(np.mean(code.residual_norms)):.9g}"))
        if len(sparsities) > 1:
            save_pgm(rec, os.path.join(args.out, f"reconstructed_S{S}.pgm"))
    save_pgm(rec, os.path.join(args.out, "reconstructed.pgm"))
    code.save_csv(os.path.join(args.out, "code.csv"))
    _write_csv(os.path.join(args.out, "report.csv"), ["S", "K", "atoms_used", "psnr", "mean_residual"], rows)
    if len(sparsities) > 1 and not args.no_figures:
        from .plotting import plot_psnr
        plot_psnr(sparsities, values, os.path.join(args.out, "psnr.png"))
    for S, _, _, p, _ in rows:
        print(f"S={S} PSNR={p}")
    return 0


def cmd_stats(args):
    d = _load_dictionary(args.dictionary)
    if args.code:
        _require_file(args.code, "code CSV")
        code = SparseCode.load_csv(args.code, d.K)
    else:
        S = _sparsities(args.sparsity)[-1]
        if args.csv:
            _require_file(args.csv, "dataset CSV")
            data = load_csv(args.csv)
        elif args.image:
            _require_file(args.image, "image")
            data, _ = extract_grid_patches(load_pgm(args.image), *d.shape)
        else:
            raise UsageError("stats needs --code, --csv or --image")
        code = encode_all(data, d, S)
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "config.json"), _echo(args))
    stats = usage_stats(code, d)
    stats.save_csv(os.path.join(args.out, "eta.csv"))
    if not args.code:
        code.save_csv(os.path.join(args.out, "code.csv"))
    if not args.no_figures:
        from .plotting import plot_eta
        plot_eta(stats.eta, stats.levels, os.path.join(args.out, "eta.png"))
    if args.top and len(d.shape) == 2:
        order = np.argsort(-stats.eta, kind="stable")[:args.top]
        save_pgm(atom_mosaic(d, args.columns, order), os.path.join(args.out, "mosaic.pgm"))
    return 0


def cmd_haar_check(args):
    if not 0 <= args.levels <= 16:
        raise UsageError("--levels must be in 0..16")
    results = haar_check(args.levels, args.seed, args.trials, corrupt=args.inject_fault)
    for r in results:
        print(json.dumps({"check": r.name, "passed": r.passed, "detail": r.detail}))
    ok = all(r.passed for r in results)
    print(json.dumps({"check": "all", "passed": ok}))
    return 0 if ok else 1


def _echo(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg.update(extra)
    return cfg


def _add_build_flags(p):
    p.add_argument("--strategy", choices=("fifo", "priority"), default="priority")
    p.add_argument("--mincard", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=1.0, help="branching threshold (fifo)")
    p.add_argument("--cardinality", type=int, default=None,
                   help="dictionary cardinality K (priority); default 1.5 x patch dimension")
    p.add_argument("--clustering", choices=tuple(CLUSTERING_ALIASES), default="2means")
    p.add_argument("--representative", default="centroid",
                   help="centroid, maxoid, rank_r:R or dct_mterm:M")
    p.add_argument("--lloyd-iters", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treedict", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    # also accepted after the subcommand without clobbering the top-level value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="build the partition tree and both dictionaries")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="training image (PGM)")
    src.add_argument("--csv", help="training dataset CSV")
    p.add_argument("--patch", type=int, nargs=2, default=(8, 8), metavar=("M1", "M2"))
    p.add_argument("--num-patches", type=int, default=2000)
    _add_build_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench", parents=[common], help="learning time as a function of the number of patches")
    p.add_argument("--image", required=True)
    p.add_argument("--patch", type=int, nargs=2, default=(8, 8), metavar=("M1", "M2"))
    p.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000, 4000])
    p.add_argument("--repeats", type=int, default=3)
    _add_build_flags(p)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("reconstruct", parents=[common], help="OMP reconstruction of an image from non-overlapping patches")
    p.add_argument("--dictionary", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--sparsity", default="4", help="S, a list '1,2,4' or a range '1-8'")
    p.add_argument("--max-level", type=int, default=None, help="prune a Haar dictionary to this depth")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("stats", parents=[common], help="atom usage eta_k and top-atom mosaic")
    p.add_argument("--dictionary", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--code", help="sparse code triplet CSV")
    src.add_argument("--csv", help="dataset CSV to encode")
    src.add_argument("--image", help="image whose grid patches are encoded")
    p.add_argument("--sparsity", default="4")
    p.add_argument("--top", type=int, default=20, help="atoms in the mosaic (0 disables it)")
    p.add_argument("--columns", type=int, default=10)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("haar-check", parents=[common], help="classical Haar oracle and tree equivalence checks")
    p.add_argument("--levels", "-L", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_haar_check)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"treedict: error: {exc}", file=sys.stderr)
        return 2
    except (PGMError, ValueError) as exc:
        print(f"treedict: invalid input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"treedict: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
