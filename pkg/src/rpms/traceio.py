"""Line-delimited JSON trace files and run manifests.

Each trace line is one retained chain state::

    {"schema": 1, "iteration": 11, "s": [...], "beta": [[...], ...],
     "zeta": [[...], ...], "lambda": ..., "alpha": ..., "pi": [...],
     "tau": [...]}

``zeta`` is absent for SSP runs.  Labels in ``s`` are 0-based.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .model import ChainState, Hyperparameters, SamplerConfig
from .sampler import Trace

SCHEMA_VERSION = 1

__all__ = ["TraceFormatError", "SCHEMA_VERSION", "state_to_record",
           "record_to_state", "write_trace", "read_trace", "write_manifest",
           "read_manifest"]


class TraceFormatError(ValueError):
    """A trace record or manifest could not be decoded."""


def state_to_record(state: ChainState, iteration: int) -> dict:
    rec = {
        "schema": SCHEMA_VERSION,
        "iteration": int(iteration),
        "s": state.s.tolist(),
        "beta": state.beta.tolist(),
    }
    if state.zeta is not None:
        rec["zeta"] = state.zeta.tolist()
    rec["lambda"] = float(state.lam)
    rec["alpha"] = float(state.alpha)
    rec["pi"] = state.pi.tolist()
    rec["tau"] = state.tau.tolist()
    return rec


def record_to_state(rec: dict) -> ChainState:
    if rec.get("schema") != SCHEMA_VERSION:
        raise TraceFormatError(f"unsupported schema {rec.get('schema')!r}")
    zeta = rec.get("zeta")
    state = ChainState(
        s=np.array(rec["s"], dtype=np.int64),
        beta=np.array(rec["beta"], dtype=float),
        zeta=None if zeta is None else np.array(zeta, dtype=float),
        lam=float(rec["lambda"]),
        alpha=float(rec["alpha"]),
        pi=np.array(rec["pi"], dtype=float),
        tau=np.array(rec["tau"], dtype=float),
    )
    state.validate()
    return state


def write_trace(trace: Trace, path) -> None:
    iterations = trace.iterations or range(1, len(trace) + 1)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for st, t in zip(trace.samples, iterations):
            fh.write(json.dumps(state_to_record(st, t), separators=(",", ":")))
            fh.write("\n")


def read_trace(path, manifest: dict | None = None) -> Trace:
    """Load a trace; config and hyperparameters come from ``manifest`` if given."""
    samples, iterations = [], []
    with Path(path).open(encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                samples.append(record_to_state(rec))
                iterations.append(int(rec["iteration"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise TraceFormatError(
                    f"{path}: record {index}: {exc}") from None
    if manifest is not None:
        config = SamplerConfig(**manifest["config"])
        hyper = Hyperparameters(**manifest["hyperparameters"])
        dataset_hash = manifest["dataset_checksum"]
    else:
        mode = "ssp" if samples and samples[0].zeta is None else "rpms"
        last = iterations[-1] if iterations else 1
        config = SamplerConfig(iterations=max(last, 1), burn_in=0, mode=mode)
        hyper, dataset_hash = None, ""
    return Trace(samples, config, dataset_hash, hyper, iterations)


def write_manifest(path, *, config: SamplerConfig, hyper: Hyperparameters,
                   dataset_checksum: str, wall_time: float, **extra) -> None:
    manifest = {
        "schema": SCHEMA_VERSION,
        "config": asdict(config),
        "hyperparameters": hyper.to_dict(),
        "seed": config.seed,
        "dataset_checksum": dataset_checksum,
        "wall_time_seconds": wall_time,
        **extra,
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n",
                          encoding="utf-8")


def read_manifest(path) -> dict:
    try:
        manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise TraceFormatError(f"{path}: {exc}") from None
    for key in ("config", "hyperparameters", "dataset_checksum"):
        if key not in manifest:
            raise TraceFormatError(f"{path}: manifest lacks {key!r}")
    return manifest
