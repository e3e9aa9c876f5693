"""Dataset files and synthetic data generators."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Dataset

__all__ = ["DatasetFormatError", "DatasetDomainError", "load_dataset",
           "save_dataset", "GeneratorSpec", "generate_synthetic",
           "generate_luts_mimic", "LUTS_SYMPTOMS", "LUTS_RESPONSE_MIXTURE"]


class DatasetFormatError(ValueError):
    """A cell of a dataset file could not be parsed."""


class DatasetDomainError(ValueError):
    """A response value is outside the domain required by the transform."""


# Symptom names and their frequency of occurrence among the 1341 LUTS patients.
LUTS_SYMPTOMS = (
    ("urgency_incontinence", 0.4146),
    ("latchkey_urgency", 0.4280),
    ("latchkey_incontinence", 0.2304),
    ("waking_urgency", 0.5496),
    ("waking_incontinence", 0.2595),
    ("running_water_urgency", 0.2901),
    ("running_water_incontinence", 0.1365),
    ("premenstrual_aggravation", 0.0515),
    ("exercise_incontinence", 0.1462),
    ("laughing_incontinence", 0.1536),
    ("passive_incontinence", 0.0783),
    ("positional_incontinence", 0.0850),
    ("standing_incontinence", 0.0895),
    ("lifting_incontinence", 0.1104),
    ("hesitancy", 0.1797),
    ("reduced_stream", 0.1909),
    ("intermittent_stream", 0.1514),
    ("straining_to_void", 0.0828),
    ("terminal_dribbling", 0.1641),
    ("post_void_dribbling", 0.0820),
    ("double_voiding", 0.1193),
    ("suprapubic_pain", 0.1611),
    ("filling_bladder_pain", 0.2148),
    ("voiding_bladder_pain", 0.0567),
    ("post_void_bladder_pain", 0.0723),
    ("pain_fully_relieved_by_voiding", 0.0634),
    ("pain_partially_relieved_by_voiding", 0.1260),
    ("pain_unrelieved_by_voiding", 0.0164),
    ("loin_pain", 0.2081),
    ("iliac_fossa_pain", 0.0895),
    ("pain_radiating_to_genitals", 0.0865),
    ("pain_radiating_to_legs", 0.0649),
    ("dysuria", 0.1484),
    ("urethral_pain", 0.0507),
)

# (weight, mean, sd) of the log-WBC mixture used by the mimic; y is floored at 0.
LUTS_RESPONSE_MIXTURE = ((0.5, 1.0, 0.6), (0.3, 2.5, 0.8), (0.2, 4.5, 1.0))


def load_dataset(path, response_column: str = "y", log_transform: bool = False,
                 delimiter: str = ",") -> Dataset:
    """Read a delimited file with a header row.

    Every column other than ``response_column`` is a 0/1 covariate.  With
    ``log_transform`` the response is replaced by its natural log and every
    raw value must be at least 1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file") from None
        if response_column not in header:
            raise DatasetFormatError(
                f"{path}: no response column {response_column!r} in header")
        r_idx = header.index(response_column)
        cov_idx = [c for c in range(len(header)) if c != r_idx]
        if not cov_idx:
            raise DatasetFormatError(f"{path}: no covariate columns")
        ys, rows = [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DatasetFormatError(
                    f"{path}: row {row_no} has {len(row)} fields, "
                    f"expected {len(header)}")
            try:
                raw = float(row[r_idx])
            except ValueError:
                raise DatasetFormatError(
                    f"{path}: row {row_no}, column {response_column!r}: "
                    f"not a number: {row[r_idx]!r}") from None
            if not math.isfinite(raw):
                raise DatasetFormatError(
                    f"{path}: row {row_no}: non-finite response")
            if log_transform:
                if raw < 1:
                    raise DatasetDomainError(
                        f"{path}: row {row_no}: response {raw} < 1 cannot be "
                        "log-transformed")
                raw = math.log(raw)
            xs = []
            for c in cov_idx:
                cell = row[c].strip()
                if cell not in ("0", "1"):
                    raise DatasetFormatError(
                        f"{path}: row {row_no}, column {header[c]!r}: "
                        f"expected 0 or 1, got {cell!r}")
                xs.append(int(cell))
            ys.append(raw)
            rows.append(xs)
    if not ys:
        raise DatasetFormatError(f"{path}: no data rows")
    return Dataset(np.array(ys), np.array(rows, dtype=float),
                   tuple(header[c] for c in cov_idx))


def save_dataset(data: Dataset, path, response_column: str = "y",
                 delimiter: str = ",") -> None:
    """Write ``data`` so that :func:`load_dataset` reads it back unchanged."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        writer.writerow([response_column, *data.names])
        for yi, xi in zip(data.y, data.X.astype(int)):
            writer.writerow([repr(float(yi)), *xi.tolist()])


@dataclass(frozen=True)
class GeneratorSpec:
    """Ground truth for a synthetic mixture of regressions on binary profiles."""

    n: int
    cluster_weights: tuple
    zeta_true: np.ndarray
    beta_true: np.ndarray
    lambda_true: float
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.cluster_weights, dtype=float)
        zeta = np.atleast_2d(np.asarray(self.zeta_true, dtype=float))
        beta = np.atleast_2d(np.asarray(self.beta_true, dtype=float))
        if self.n < 1:
            raise ValueError("n must be positive")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("cluster weights must be a probability vector")
        if zeta.shape != (w.size, zeta.shape[1]) or beta.shape != zeta.shape:
            raise ValueError("zeta_true and beta_true must both be k x D")
        if np.any((zeta <= 0) | (zeta >= 1)):
            raise ValueError("zeta_true entries must lie in (0, 1)")
        if not self.lambda_true > 0:
            raise ValueError("lambda_true must be positive")
        object.__setattr__(self, "cluster_weights", tuple(w))
        object.__setattr__(self, "zeta_true", zeta)
        object.__setattr__(self, "beta_true", beta)

    @property
    def k_true(self) -> int:
        return len(self.cluster_weights)

    @property
    def D(self) -> int:
        return self.zeta_true.shape[1]


def generate_synthetic(spec: GeneratorSpec):
    """Draw a dataset from ``spec``; returns ``(dataset, true 0-based labels)``."""
    rng = np.random.default_rng(spec.seed)
    labels = rng.choice(spec.k_true, size=spec.n, p=spec.cluster_weights)
    X = (rng.random((spec.n, spec.D)) < spec.zeta_true[labels]).astype(float)
    mean = np.einsum("ij,ij->i", X, spec.beta_true[labels])
    y = mean + rng.standard_normal(spec.n) / np.sqrt(spec.lambda_true)
    return Dataset(y, X), labels


def generate_luts_mimic(n: int, seed: int = 0) -> Dataset:
    """Synthetic stand-in for the LUTS data.

    The 34 symptoms are independent Bernoullis at their published marginal
    frequencies; log-WBC comes from :data:`LUTS_RESPONSE_MIXTURE` independently
    of the symptoms.  Joint symptom structure is not reproduced.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    freq = np.array([f for _, f in LUTS_SYMPTOMS])
    X = (rng.random((n, freq.size)) < freq).astype(float)
    w, mu, sd = (np.array(col) for col in zip(*LUTS_RESPONSE_MIXTURE))
    comp = rng.choice(w.size, size=n, p=w)
    y = np.maximum(mu[comp] + sd[comp] * rng.standard_normal(n), 0.0)
    return Dataset(y, X, tuple(name for name, _ in LUTS_SYMPTOMS))
