"""Command-line front end: simulate, fit, summarize, predict, evaluate, diagnose.

Every table is written as UTF-8 CSV with a header row.  A fit writes
``trace.jsonl`` and ``manifest.json`` into its output directory (one
sub-directory ``seed-<n>`` per seed when several seeds are given); the other
commands locate ``manifest.json`` next to the trace they are given.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .data import (GeneratorSpec, generate_luts_mimic, generate_synthetic,
                   load_dataset, save_dataset)
from .evaluation import (QUARTILES, UndefinedStatisticError, brier_statistic,
                         gelman_rubin)
from .model import Hyperparameters, SamplerConfig
from .sampler import run_chain
from .summaries import (binder_partition, coclustering,
                        global_exclusion_probability, inclusion_probabilities,
                        posterior_k, predict_cluster,
                        predict_coefficients_and_response)
from .traceio import read_manifest, read_trace, write_manifest, write_trace

logger = logging.getLogger("rpms")

HYPER_KEYS = Hyperparameters.SCALARS + ("M",)
DEFAULTS = {
    "response": "y",
    "log_transform": False,
    "delimiter": ",",
    "mode": "rpms",
    "iterations": 10_000,
    "burn_in": 1_000,
    "thin": 1,
    "seed": [0],
    "grid_size": 1000,
    "out": ".",
}
DIAGNOSED = ("lambda", "alpha", "k", "mean_abs_beta")


class CLIError(Exception):
    pass


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8")
                                  .splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CLIError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise CLIError(f"not a boolean: {value!r}")


def _settings(args) -> dict:
    """Merge built-in defaults, the config file and command-line flags."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None and key not in ("func", "config", "hyper"):
            merged[key] = value
    for item in getattr(args, "hyper", None) or []:
        if "=" not in item:
            raise CLIError(f"--hyper expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        merged[key.strip()] = value.strip()
    return merged


def _hyper_from(settings: dict) -> Hyperparameters:
    kwargs = {}
    for key in HYPER_KEYS:
        if key in settings:
            kwargs[key] = float(settings[key]) if key != "M" else int(
                settings[key])
    if "m" in settings and settings["m"] not in (None, ""):
        kwargs["m"] = tuple(float(v) for v in str(settings["m"]).split(","))
    unknown = [k for k in settings if k.startswith(("a_", "b_"))
               and k not in HYPER_KEYS]
    if unknown:
        raise CLIError(f"unknown hyperparameter(s): {', '.join(unknown)}")
    return Hyperparameters(**kwargs)


def _seeds(value) -> list:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(v) for v in str(value).replace(",", " ").split()]


def _write_table(path, header, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def _load_run(trace_path):
    trace_path = Path(trace_path)
    manifest_path = trace_path.with_name("manifest.json")
    if not trace_path.exists():
        raise CLIError(f"{trace_path}: no such trace file")
    if not manifest_path.exists():
        raise CLIError(f"{manifest_path}: manifest not found next to trace")
    manifest = read_manifest(manifest_path)
    return read_trace(trace_path, manifest), manifest


def _load_run_data(manifest, data_path=None):
    path = data_path or manifest.get("data_path")
    if not path:
        raise CLIError("no dataset given and none recorded in the manifest")
    data = load_dataset(path, manifest.get("response", "y"),
                        manifest.get("log_transform", False),
                        manifest.get("delimiter", ","))
    if data.checksum() != manifest["dataset_checksum"]:
        raise CLIError(
            f"{path}: dataset checksum does not match the trace manifest")
    return data


# -- simulate -----------------------------------------------------------------

def default_generator(n: int, seed: int) -> GeneratorSpec:
    """Three well-separated clusters on eight covariates.

    Each cluster has four exact-zero coefficients; covariates 7 and 8 have no
    effect in any cluster.
    """
    zeta = np.array([
        [0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.5, 0.5],
        [0.1, 0.1, 0.9, 0.9, 0.9, 0.1, 0.5, 0.5],
        [0.1, 0.9, 0.1, 0.1, 0.9, 0.9, 0.5, 0.5],
    ])
    beta = np.array([
        [3.0, -2.0, 2.0, 0.0, 0.0, 2.5, 0.0, 0.0],
        [0.0, 0.0, -2.5, 3.0, 2.0, 0.0, 0.0, 0.0],
        [-3.0, 3.0, 0.0, 0.0, -2.0, 2.0, 0.0, 0.0],
    ])
    return GeneratorSpec(n=n, cluster_weights=(0.4, 0.35, 0.25),
                         zeta_true=zeta, beta_true=beta, lambda_true=4.0,
                         seed=seed)


def cmd_simulate(args) -> None:
    settings = _settings(args)
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    n = int(settings.get("n", 300))
    seed = _seeds(settings["seed"])[0]
    kind = settings.get("kind", "synthetic")
    if kind == "luts":
        data = generate_luts_mimic(n, seed)
        save_dataset(data, out / "data.csv")
    elif kind == "synthetic":
        data, labels = generate_synthetic(default_generator(n, seed))
        save_dataset(data, out / "data.csv")
        _write_table(out / "labels.csv", ["observation", "cluster"],
                     enumerate(labels.tolist()))
    else:
        raise CLIError(f"unknown simulation kind {kind!r}")
    logger.info("wrote %d rows to %s", data.n, out / "data.csv")


# -- fit ----------------------------------------------------------------------

def cmd_fit(args) -> None:
    settings = _settings(args)
    if not settings.get("data"):
        raise CLIError("fit needs --data (or data = ... in the config file)")
    data_path = Path(settings["data"]).resolve()
    response = settings["response"]
    log_transform = _as_bool(settings["log_transform"])
    delimiter = settings["delimiter"]
    data = load_dataset(data_path, response, log_transform, delimiter)
    hyper = _hyper_from(settings)
    seeds = _seeds(settings["seed"])
    out = Path(settings["out"])
    for seed in seeds:
        config = SamplerConfig(
            iterations=int(settings["iterations"]),
            burn_in=int(settings["burn_in"]),
            thinning=int(settings["thin"]),
            seed=seed,
            mode=str(settings["mode"]).lower(),
            grid_size=int(settings["grid_size"]),
        )
        run_dir = out if len(seeds) == 1 else out / f"seed-{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        trace = run_chain(data, hyper, config)
        elapsed = time.perf_counter() - start
        write_trace(trace, run_dir / "trace.jsonl")
        write_manifest(
            run_dir / "manifest.json", config=config, hyper=hyper,
            dataset_checksum=data.checksum(), wall_time=elapsed,
            data_path=str(data_path), response=response,
            log_transform=log_transform, delimiter=delimiter,
            n=data.n, D=data.D, covariates=list(data.names),
            trace_file="trace.jsonl")
        logger.info("seed %d: %d samples in %.1fs -> %s", seed, len(trace),
                    elapsed, run_dir)


# -- summarize ----------------------------------------------------------------

def cmd_summarize(args) -> None:
    trace, manifest = _load_run(args.trace)
    data = _load_run_data(manifest, args.data)
    out = Path(args.out or Path(args.trace).parent)
    out.mkdir(parents=True, exist_ok=True)
    names = list(data.names)

    _write_table(out / "k_posterior.csv", ["k", "probability"],
                 [(k, _fmt(p)) for k, p in posterior_k(trace).items()])

    gamma = coclustering(trace)
    _write_table(out / "coclustering.csv",
                 ["observation"] + [str(i) for i in range(data.n)],
                 [[i] + [_fmt(g) for g in row]
                  for i, row in enumerate(gamma.gamma)])

    part = binder_partition(trace, args.l1, args.l2, gamma=gamma)
    _write_table(out / "binder_partition.csv", ["observation", "cluster"],
                 enumerate(part.labels.tolist()))
    by_size = np.argsort(-part.sizes, kind="stable")
    rows = []
    for rank, j in enumerate(by_size):
        for i in np.flatnonzero(part.labels == j):
            rows.append([rank, j, i, *data.X[i].astype(int).tolist()])
    _write_table(out / "binder_profiles.csv",
                 ["size_rank", "cluster", "observation", *names], rows)

    config = replace(SamplerConfig(**manifest["config"]),
                     seed=manifest["config"]["seed"] + 1)
    if args.inclusion_iterations is not None:
        config = replace(config, iterations=args.inclusion_iterations,
                         burn_in=min(config.burn_in,
                                     args.inclusion_iterations // 10))
    incl = inclusion_probabilities(data, trace.hyper, part, config)
    _write_table(out / "inclusion.csv", ["cluster", "size", *names],
                 [[j, part.sizes[j], *(_fmt(p) for p in incl[j])]
                  for j in by_size])

    _write_table(out / "global_exclusion.csv", ["covariate", "probability"],
                 [(name, _fmt(global_exclusion_probability(trace, d)))
                  for d, name in enumerate(names)])
    logger.info("summaries written to %s (Binder k=%d)", out, part.k)


# -- predict ------------------------------------------------------------------

def parse_profiles(spec: str, D: int) -> list:
    """Profiles from a file of 0/1 rows, a 0/1 list, or ``idx:1,2,4`` (1-based)."""
    path = Path(spec)
    if path.is_file():
        lines = [ln.strip() for ln in path.read_text(encoding="utf-8")
                 .splitlines() if ln.strip()]
        if lines and not set(lines[0].replace(",", "")) <= {"0", "1", " "}:
            lines = lines[1:]
        profiles = [parse_profiles(ln, D)[0] for ln in lines]
        if not profiles:
            raise CLIError(f"{path}: no profiles")
        return profiles
    if spec.startswith("idx:"):
        x = np.zeros(D)
        for tok in spec[4:].split(","):
            d = int(tok)
            if not 1 <= d <= D:
                raise CLIError(f"covariate index {d} outside 1..{D}")
            x[d - 1] = 1.0
        return [x]
    try:
        x = np.array([int(v) for v in spec.split(",")], dtype=float)
    except ValueError:
        raise CLIError(f"cannot parse profile {spec!r}") from None
    if x.size != D:
        raise CLIError(f"profile has {x.size} entries, expected {D}")
    if not np.all((x == 0) | (x == 1)):
        raise CLIError("profile entries must be 0 or 1")
    return [x]


def cmd_predict(args) -> None:
    trace, manifest = _load_run(args.trace)
    D = trace.samples[0].beta.shape[1]
    names = manifest.get("covariates") or [f"x{d + 1}" for d in range(D)]
    profiles = parse_profiles(args.profile, D)
    out = Path(args.out or Path(args.trace).parent)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(_seeds(args.seed)[0] if args.seed else 0)
    for p, x in enumerate(profiles, start=1):
        rows = []
        for t, st in enumerate(trace):
            w = predict_cluster(x, st, trace.hyper)
            sizes = np.append(st.sizes, 0)
            rows.extend([t, j, sizes[j], _fmt(w[j])] for j in range(st.k + 1))
        _write_table(out / f"predict-{p}-weights.csv",
                     ["sample", "cluster", "size", "weight"], rows)
        draws = predict_coefficients_and_response(x, trace, trace.hyper, rng)
        _write_table(out / f"predict-{p}-beta.csv",
                     ["sample", "cluster", "new_cluster", *names],
                     [[t, draws.cluster_label[t], int(draws.new_cluster[t]),
                       *(_fmt(b) for b in draws.beta_tilde[t])]
                      for t in range(len(trace))])
        _write_table(out / f"predict-{p}-y.csv", ["sample", "y_tilde"],
                     [(t, _fmt(v)) for t, v in enumerate(draws.y_tilde)])
    logger.info("predictions for %d profile(s) written to %s",
                len(profiles), out)


# -- evaluate -----------------------------------------------------------------

def cmd_evaluate(args) -> None:
    runs = [_load_run(path) for path in args.traces]
    data = None
    if args.data:
        first = runs[0][1]
        data = load_dataset(args.data, first.get("response", "y"),
                            first.get("log_transform", False),
                            first.get("delimiter", ","))
    else:
        data = _load_run_data(runs[0][1])
    for path, (_, manifest) in zip(args.traces, runs):
        if manifest["dataset_checksum"] != data.checksum():
            raise CLIError(f"{path}: trace was fitted to a different dataset")
    quartiles = args.quartile or ["q1", "q2", "q3"]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary, samples = [], []
    for path, (trace, _) in zip(args.traces, runs):
        for q in quartiles:
            res = brier_statistic(trace, data, q)
            lo, mid, hi = np.quantile(res.per_sample_scores,
                                      [0.025, 0.5, 0.975])
            summary.append([path, trace.mode, res.quartile,
                            _fmt(res.threshold), _fmt(res.mean), _fmt(lo),
                            _fmt(mid), _fmt(hi)])
            samples.extend([path, trace.mode, res.quartile, t, _fmt(v)]
                           for t, v in enumerate(res.per_sample_scores))
    _write_table(out / "brier.csv",
                 ["trace", "mode", "quartile", "threshold", "mean", "q2.5",
                  "median", "q97.5"], summary)
    _write_table(out / "brier_samples.csv",
                 ["trace", "mode", "quartile", "sample", "score"], samples)


# -- diagnose -----------------------------------------------------------------

def cmd_diagnose(args) -> None:
    if len(args.traces) < 2:
        raise CLIError("diagnose needs at least two traces")
    traces = [_load_run(path)[0] for path in args.traces]
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise CLIError(f"traces have unequal lengths {sorted(lengths)}")
    rows = []
    for name in DIAGNOSED:
        try:
            value = _fmt(gelman_rubin([t.scalar_series(name) for t in traces]))
        except UndefinedStatisticError:
            logger.warning("%s is constant and identical across chains; "
                           "R-hat undefined", name)
            value = "nan"
        rows.append((name, value))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_table(out / "rhat.csv", ["parameter", "rhat"], rows)
    for name, value in rows:
        print(f"{name}\t{value}")


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpms", description="Covariate-dependent DP mixture regression "
        "with spike-and-slab selection (RPMS) and the SSP competitor.")
    parser.add_argument("-q", "--quiet", action="store_true",
                        help="only report errors")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--seed", nargs="+", type=int)
        p.add_argument("--out")

    p = sub.add_parser("simulate", help="write a synthetic dataset")
    common(p)
    p.add_argument("--kind", choices=["synthetic", "luts"])
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="run the Gibbs sampler")
    common(p)
    p.add_argument("--data")
    p.add_argument("--response")
    p.add_argument("--log-transform", action="store_const", const=True,
                   dest="log_transform")
    p.add_argument("--delimiter")
    p.add_argument("--mode", choices=["rpms", "ssp"])
    p.add_argument("--iterations", type=int)
    p.add_argument("--burn-in", type=int, dest="burn_in")
    p.add_argument("--thin", type=int)
    p.add_argument("--grid-size", type=int, dest="grid_size")
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE",
                   help="override a hyperparameter (repeatable)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("summarize", help="posterior summary tables")
    p.add_argument("trace")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--l1", type=float, default=1.0)
    p.add_argument("--l2", type=float, default=1.0)
    p.add_argument("--inclusion-iterations", type=int,
                   help="length of the frozen-partition chain")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("predict", help="predictive tables for new profiles")
    p.add_argument("trace")
    p.add_argument("--profile", required=True,
                   help="0/1 list, idx:1,2,4, or a file of 0/1 rows")
    p.add_argument("--seed", nargs="+", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="Brier comparison of fitted traces")
    p.add_argument("traces", nargs="+")
    p.add_argument("--data")
    p.add_argument("--quartile", nargs="+", choices=sorted(QUARTILES))
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("diagnose", help="Gelman-Rubin across chains")
    p.add_argument("traces", nargs="+")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (CLIError, ValueError, OSError, KeyError) as exc:
        print(f"rpms {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
