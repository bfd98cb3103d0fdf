"""Command-line interface: ``xyz import|export|search|lasso|bench|oracle``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 guard exceeded,
5 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__, bench
from .bitmatrix import rescale_rows
from .io import DataFormatError, DatasetFile, import_csv, load_response, read_csv_matrix
from .lasso import LassoPathConfig, SolverError, auto_lambda_grid, lasso_path, normalized_test_error
from .oracle import ORACLE_MAX_P, OracleGuardExceeded, brute_force_search
from .search import (
    SearchConfig,
    choose_parameters,
    default_sample_size,
    sample_strengths,
    xyz_search,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GUARD, EXIT_SOLVER = 0, 2, 3, 4, 5

# desk-scale limits for the benchmark suites
BENCH_MAX_P = 32_000
BENCH_MAX_N = 20_000
BENCH_MAX_DRAWS = 1_000_000


class UsageError(Exception):
    pass


class GuardExceeded(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("XYZ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"XYZ_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _auto_or_int(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    return [int(float(t)) for t in text.split(",") if t]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions() -> dict:
    import scipy
    import sklearn

    return {"xyzsearch": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "scikit-learn": sklearn.__version__}


def _write_manifest(args, config: dict, outputs: list, wall: float, extra: dict | None = None) -> None:
    path = getattr(args, "manifest", None)
    if path is None:
        real = [o for o in outputs if o != "-"]
        if not real:
            return
        path = real[0] + ".manifest.json"
    manifest = {
        "command": args.command,
        "argv": sys.argv[1:],
        "seed": getattr(args, "seed", None),
        "config": config,
        "wall_time_seconds": wall,
        "versions": _versions(),
        "outputs": {o: _sha256(o) for o in outputs if o != "-"},
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


class _Output:
    """File or stdout, opened for text writing."""

    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        self.fh = sys.stdout if self.path == "-" else open(self.path, "w", newline="")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not sys.stdout:
            self.fh.close()
        else:
            self.fh.flush()


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_rows(path: str, rows: list[dict]) -> None:
    if not rows:
        return
    with _Output(path) as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


# ---------------------------------------------------------------- commands

def cmd_import(args) -> int:
    t0 = time.perf_counter()
    ds = import_csv(args.csv, binary=args.binary, zero_one=args.zero_one, header=not args.no_header)
    ds.write(args.out)
    n, p = ds.shape
    X = ds.dense()
    kind = "binary" if ds.binary else "real"
    _info(f"wrote {args.out}: {kind}, n={n}, p={p}, min={X.min():g}, max={X.max():g}, mean={X.mean():.6g}")
    _write_manifest(args, {"binary": ds.binary, "zero_one": args.zero_one, "n": n, "p": p},
                    [args.out], time.perf_counter() - t0)
    return EXIT_OK


def cmd_export(args) -> int:
    ds = DatasetFile.read(args.dataset)
    X = ds.dense()
    with _Output(args.out) as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j + 1}" for j in range(X.shape[1])])
        if ds.binary:
            w.writerows(X.tolist())
        else:
            w.writerows([[repr(float(v)) for v in row] for row in X])
    return EXIT_OK


def _load_pair(dataset_path, response_path):
    ds = DatasetFile.read(dataset_path)
    y = load_response(response_path)
    if y.shape[0] != ds.shape[0]:
        raise DataFormatError(f"response has {y.shape[0]} rows, dataset has {ds.shape[0]}")
    return ds, y


def cmd_search(args) -> int:
    t0 = time.perf_counter()
    ds, y = _load_pair(args.dataset, args.response)
    n, p = ds.shape
    if p < 2:
        raise DataFormatError("need at least two columns")
    mode = args.mode
    if mode == "auto":
        if not ds.binary:
            mode = "continuous-xy"
        elif np.all((y == 1) | (y == -1)):
            mode = "binary"
        else:
            mode = "continuous-y"
    if mode == "binary":
        if not ds.binary or not np.all((y == 1) | (y == -1)):
            raise UsageError("binary mode needs a binary dataset and a +/-1 response")
        X, y = ds.data, y.astype(np.int8)
    elif mode == "continuous-y":
        if not ds.binary:
            raise UsageError("continuous-y mode needs a binary dataset")
        X = ds.data
    else:
        X = ds.dense().astype(float)
        if args.rescale:
            X, y = rescale_rows(X, y)
    transform = args.transform if mode == "continuous-xy" else None
    if not 0 < args.gamma <= 1:
        raise UsageError("--gamma must lie in (0, 1]")
    if not 0 < args.eta < 1:
        raise UsageError("--eta must lie in (0, 1)")
    if args.M is not None and not 1 <= args.M <= 64:
        raise UsageError("--M must be 'auto' or an integer in [1, 64]")
    if args.L is not None and args.L < 1:
        raise UsageError("--L must be 'auto' or a positive integer")

    rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(99,)))
    size = args.sample_size or default_sample_size(p)
    sample = sample_strengths(X, y, size, rng, mode, transform)
    choice = choose_parameters(args.gamma, args.eta, sample, n, p, M=args.M, L=args.L)
    exponent = "n/a" if choice.exponent is None else f"{choice.exponent:.4f}"
    if args.M is None:
        _info(f"M*={choice.M} gamma0={choice.gamma0:.4f} predicted_exponent={exponent} "
              f"objective_rel_error={choice.objective_rel_error:.3g}")
    _info(f"M={choice.M} L={choice.L} mode={mode}")

    cfg = SearchConfig(M=choice.M, L=choice.L, gamma=args.gamma, mode=mode, transform=transform,
                       search_negatives=args.negatives, seed=args.seed,
                       max_candidates_per_rep=args.max_candidates, threads=_threads(args.threads))
    report = xyz_search(X, y, cfg)

    with _Output(args.out) as fh:
        if args.format == "jsonl":
            for h in report.hits:
                fh.write(json.dumps({"j": h.j, "k": h.k, "strength": h.strength,
                                     "repetition": h.found_at_repetition, "sign": h.sign}) + "\n")
        else:
            w = csv.writer(fh)
            w.writerow(["j", "k", "strength", "repetition", "sign"])
            for h in report.hits:
                w.writerow([h.j, h.k, repr(h.strength), h.found_at_repetition, h.sign])
    unique = sorted({(h.j, h.k, h.sign) for h in report.hits})
    _info(f"hits={len(unique)} repetitions={report.repetitions_run} "
          f"candidates_checked={report.candidates_checked} aborted={len(report.aborted_repetitions)}")
    for j, k, s in unique:
        _info(f"  ({j}, {k}) sign={s:+d}")
    config = {"mode": mode, "transform": transform, "gamma": args.gamma, "eta": args.eta,
              "M": choice.M, "L": choice.L, "gamma0": choice.gamma0, "predicted_exponent": choice.exponent,
              "negatives": args.negatives, "sample_size": size, "rescale": args.rescale,
              "max_candidates_per_rep": args.max_candidates, "format": args.format,
              "dataset": args.dataset, "response": args.response}
    _write_manifest(args, config, [args.out], time.perf_counter() - t0,
                    {"aborted_repetitions": report.aborted_repetitions})
    return EXIT_OK


def cmd_lasso(args) -> int:
    t0 = time.perf_counter()
    ds, y = _load_pair(args.dataset, args.response)
    X = ds.dense().astype(float)
    if args.lambdas:
        values, _ = read_csv_matrix(args.lambdas, header=False)
        lambdas = values.ravel()
        if np.any(lambdas <= 0):
            raise UsageError("lambdas must be positive")
        lambdas = np.sort(lambdas)[::-1]
    else:
        try:
            T, eps = args.grid.split(",")
            T, eps = int(T), float(eps)
        except ValueError as exc:
            raise UsageError("--grid expects T,eps such as 10,0.05") from exc
        lambdas = auto_lambda_grid(X, y, T, eps, penalty_multiplier=args.penalty_multiplier)
    config = LassoPathConfig(lambdas=tuple(float(v) for v in lambdas), xyz_L=args.xyz_L, eta=args.eta,
                             seed=args.seed, penalty_multiplier=args.penalty_multiplier,
                             certify=args.certify)
    path = lasso_path(X, y, config)
    with _Output(args.out) as fh:
        for i, fit in enumerate(path.fits):
            rec = {
                "index": i,
                "lambda": fit.lam,
                "beta": [[j, fit.beta[j]] for j in sorted(fit.beta)],
                "theta": [[j, k, fit.theta[(j, k)]] for j, k in sorted(fit.theta)],
                "objective": fit.objective,
                "kkt_residual_max": fit.kkt_residual_max,
                "certified": fit.certified,
                "outer_iterations": fit.outer_iterations,
                "train_error": normalized_test_error(y, path.predict(X, i)),
            }
            fh.write(json.dumps(rec) + "\n")
    n_cert = sum(1 for f in path.fits if f.certified)
    _info(f"lambdas={len(path.fits)} certified={n_cert} "
          f"final_support={len(path.fits[-1].beta)} mains, {len(path.fits[-1].theta)} pairs")
    cfg = {"lambdas": [float(v) for v in lambdas], "xyz_L": args.xyz_L, "eta": args.eta,
           "penalty_multiplier": args.penalty_multiplier, "certify": args.certify,
           "dataset": args.dataset, "response": args.response}
    _write_manifest(args, cfg, [args.out], time.perf_counter() - t0)
    return EXIT_OK


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    ps = args.p
    if not args.force:
        if ps and max(ps) > BENCH_MAX_P:
            raise GuardExceeded(f"p={max(ps)} exceeds the desk-scale limit {BENCH_MAX_P}; pass --force")
        if args.n > BENCH_MAX_N:
            raise GuardExceeded(f"n={args.n} exceeds the desk-scale limit {BENCH_MAX_N}; pass --force")
        if args.draws > BENCH_MAX_DRAWS:
            raise GuardExceeded(f"draws={args.draws} exceeds the limit {BENCH_MAX_DRAWS}; pass --force")
    summary = {}
    if args.suite == "scaling":
        rows, summary = bench.scaling_suite(ps or (1000, 2000, 4000, 8000, 16000),
                                            gamma=args.gamma[0] if args.gamma else 0.9,
                                            gamma0=args.gamma0, n=args.n, repeats=args.repeats,
                                            seed=args.seed)
        summary["medians"] = {str(k): v for k, v in summary["medians"].items()}
        _info(f"slope={summary['slope']:.4f} predicted={summary['predicted']:.4f}")
    elif args.suite == "gauss-vs-minimal":
        gammas = args.gamma or (0.6, 0.7, 0.8, 0.9, 0.95)
        rows = [dict(kind="analytic", draws=0, freq_minimal="", freq_gauss="", **r)
                for r in bench.gauss_vs_minimal_analytic(ps or (100, 1000, 10000), gammas, args.n)]
        for r in bench.gauss_vs_minimal_empirical(args.empirical_p, gammas, args.n, args.draws, args.seed):
            rows.append(dict(kind="empirical", draws=r["draws"], freq_minimal=r["freq_minimal"],
                             freq_gauss=r["freq_gauss"], p=r["p"], n=r["n"], gamma=r["gamma"],
                             M="", tau="", eta_minimal=r["eta_minimal"], eta_gauss=r["eta_gauss"]))
        keys = ["kind", "p", "n", "gamma", "M", "tau", "eta_minimal", "eta_gauss", "draws",
                "freq_minimal", "freq_gauss"]
        rows = [{k: r[k] for k in keys} for r in rows]
    else:
        rows = bench.naive_baseline(n=args.n, p=(ps or [2000])[0],
                                    strength=args.gamma[0] if args.gamma else 0.8,
                                    L=args.L, seed=args.seed)
    _write_rows(args.out, rows)
    cfg = {"suite": args.suite, "p": ps, "n": args.n, "gamma": args.gamma, "repeats": args.repeats,
           "draws": args.draws, "gamma0": args.gamma0, "L": args.L}
    _write_manifest(args, cfg, [args.out], time.perf_counter() - t0, {"summary": summary})
    return EXIT_OK


def cmd_oracle(args) -> int:
    ds, y = _load_pair(args.dataset, args.response)
    if ds.shape[1] > ORACLE_MAX_P and not args.force:
        raise GuardExceeded(f"p={ds.shape[1]} exceeds the oracle limit {ORACLE_MAX_P}; pass --force")
    if ds.binary and np.all((y == 1) | (y == -1)):
        mode, transform = "binary", None
    elif ds.binary:
        mode, transform = "continuous-y", None
    else:
        mode, transform = "continuous-xy", "unbiased"
    res = brute_force_search(ds.dense(), y, gamma=args.gamma, top_k=args.top_k, mode=mode,
                             transform=transform, force=args.force)
    with _Output(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(["j", "k", "strength"])
        for j, k, s in res.selected:
            w.writerow([j, k, repr(s)])
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xyz", description="Fast search for strong pairwise interactions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import", help="convert a CSV matrix to a dataset file")
    p.add_argument("csv")
    p.add_argument("out")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--binary", action="store_true", help="entries must be +/-1")
    kind.add_argument("--real", action="store_true")
    p.add_argument("--zero-one", action="store_true", help="map 0/1 entries to -1/+1")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("export", help="write a dataset file back to CSV")
    p.add_argument("dataset")
    p.add_argument("out", nargs="?", default="-")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("search", help="find pairs with interaction strength >= gamma")
    p.add_argument("dataset")
    p.add_argument("response", help="one-column CSV (with header) or dataset file")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--eta", type=float, default=0.99, help="target discovery probability")
    p.add_argument("--M", type=_auto_or_int, default=None, metavar="auto|N")
    p.add_argument("--L", type=_auto_or_int, default=None, metavar="auto|N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--negatives", action=argparse.BooleanOptionalAction, default=True,
                   help="also search -y (default on)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--mode", choices=("auto", "binary", "continuous-y", "continuous-xy"), default="auto")
    p.add_argument("--transform", choices=("sign", "unbiased"), default="sign")
    p.add_argument("--rescale", action="store_true", help="rescale rows of real X into [-1, 1] first")
    p.add_argument("--sample-size", type=int, default=None, help="pairs sampled to choose M")
    p.add_argument("--max-candidates", type=int, default=None, help="per-repetition candidate cap")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="-")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("lasso", help="interaction Lasso path with xyz-based screening")
    p.add_argument("dataset")
    p.add_argument("response")
    grid = p.add_mutually_exclusive_group()
    grid.add_argument("--grid", default="10,0.05", metavar="T,EPS")
    grid.add_argument("--lambdas", metavar="FILE", help="one lambda per line")
    p.add_argument("--xyz-L", type=int, default=None)
    p.add_argument("--eta", type=float, default=0.99)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--penalty-multiplier", type=float, default=1.0)
    p.add_argument("--certify", action=argparse.BooleanOptionalAction, default=None,
                   help="exhaustive KKT scan after each lambda (default: when p <= 100)")
    p.add_argument("--out", default="-")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_lasso)

    p = sub.add_parser("bench", help="benchmark suites emitting CSV")
    p.add_argument("suite", choices=("scaling", "gauss-vs-minimal", "naive-baseline"))
    p.add_argument("--p", type=_int_list, default=None, help="comma-separated dimensions")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--gamma", type=_float_list, default=None, help="comma-separated strengths")
    p.add_argument("--gamma0", type=float, default=0.55)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--draws", type=int, default=20_000)
    p.add_argument("--L", type=int, default=50, help="repetitions for naive-baseline")
    p.add_argument("--empirical-p", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true", help="lift desk-scale guards")
    p.add_argument("--out", default="-")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="exhaustive strengths for small instances")
    p.add_argument("dataset")
    p.add_argument("response")
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--gamma", type=float)
    sel.add_argument("--top-k", type=int)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _info(f"usage error: {exc}")
        return EXIT_USAGE
    except (GuardExceeded, OracleGuardExceeded) as exc:
        _info(f"guard exceeded: {exc}")
        return EXIT_GUARD
    except SolverError as exc:
        _info(f"solver failure: {exc}")
        return EXIT_SOLVER
    except (DataFormatError, ValueError, OSError) as exc:
        _info(f"data error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
