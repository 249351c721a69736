"""
Data toolkit: synthetic consortium generation, CSV ingestion and horizontal
partitioning across simulated institutions
"""
import hashlib
import logging
import math
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from secure_logreg.errors import (
    CSVParseError,
    DataError,
    InvalidParamsError,
    InvalidSpecError,
    MissingColumnError,
    NonBinaryResponseError,
    TooManyPartitionsError,
)
from secure_logreg.regression import sigmoid
from secure_logreg.types import LocalDataset

logger = logging.getLogger("secure_logreg.data")


def institution_name(j: int) -> str:
    return f"institution-{j}"


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Synthetic consortium: d coefficients (intercept included), one entry of
    `sizes` per institution
    """
    d: int
    sizes: tuple[int, ...]
    mu: float = 0.0
    sigma: float = 1.0
    beta_range: tuple[float, float] = (-1.0, 1.0)
    seed: int = 0
    true_beta: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "beta_range", tuple(float(b) for b in self.beta_range))
        if self.d < 2:
            raise InvalidSpecError(f"d must be >= 2 (intercept + covariates), got {self.d}")
        if not self.sizes:
            raise InvalidSpecError("at least one institution is required")
        if min(self.sizes) < 1:
            raise InvalidSpecError(f"every institution needs >= 1 record, got sizes {list(self.sizes)}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidSpecError(f"sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise InvalidSpecError(f"mu must be finite, got {self.mu}")
        if len(self.beta_range) != 2 or not self.beta_range[0] <= self.beta_range[1]:
            raise InvalidSpecError(f"beta_range must be (lo, hi) with lo <= hi, got {self.beta_range}")
        if self.true_beta is not None:
            beta = tuple(float(b) for b in self.true_beta)
            if len(beta) != self.d or not all(math.isfinite(b) for b in beta):
                raise InvalidSpecError(f"true_beta must hold {self.d} finite values")
            object.__setattr__(self, "true_beta", beta)

    @classmethod
    def even(cls, records: int, d: int, institutions: int, **kwargs: Any) -> "SyntheticSpec":
        """`records` rows split into near-equal institution sizes (differ by <= 1)"""
        if institutions < 1 or records < institutions:
            raise InvalidSpecError(f"cannot split {records} records across {institutions} institutions")
        base, extra = divmod(records, institutions)
        sizes = tuple([base + 1] * extra + [base] * (institutions - extra))
        return cls(d=d, sizes=sizes, **kwargs)

    @property
    def S(self) -> int:
        return len(self.sizes)

    @property
    def records(self) -> int:
        return sum(self.sizes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": self.d,
            "sizes": list(self.sizes),
            "mu": self.mu,
            "sigma": self.sigma,
            "beta_range": list(self.beta_range),
            "seed": self.seed,
            "true_beta": list(self.true_beta) if self.true_beta is not None else None,
        }


def generate_synthetic(spec: SyntheticSpec) -> tuple[list[LocalDataset], NDArray[np.float64]]:
    """
    Draw true beta once, then per institution: covariates ~ N(mu, sigma^2),
    X = [1 cov], y ~ Bernoulli(sigmoid(X beta))

    Each institution uses its own child stream of the seed, so adding an
    institution leaves the others' rows unchanged.
    """
    beta_seed, *inst_seeds = np.random.SeedSequence(spec.seed).spawn(spec.S + 1)
    if spec.true_beta is not None:
        beta = np.array(spec.true_beta, dtype=np.float64)
    else:
        lo, hi = spec.beta_range
        beta = np.random.default_rng(beta_seed).uniform(lo, hi, size=spec.d)

    datasets = []
    for j, (n_j, seed) in enumerate(zip(spec.sizes, inst_seeds)):
        rng = np.random.default_rng(seed)
        cov = rng.normal(spec.mu, spec.sigma, size=(n_j, spec.d - 1))
        X = np.hstack([np.ones((n_j, 1)), cov])
        p = np.atleast_1d(sigmoid(X @ beta))
        y = rng.binomial(1, p).astype(np.float64)
        datasets.append(LocalDataset(X=X, y=y, institution_id=institution_name(j)))

    logger.info(f"🧪 [Data] generated {spec.records} records, d={spec.d}, S={spec.S} (seed={spec.seed})")
    return datasets, beta


@dataclass(frozen=True)
class TabularSource:
    """
    CSV file with a header row; covariates default to every column but the response

    `response_mapping` translates textual labels (e.g. {"yes": 1, "no": 0});
    without it the response must already read as 0/1.
    """
    path: Path
    response: str
    covariates: Optional[tuple[str, ...]] = None
    delimiter: str = ","
    response_mapping: Optional[Mapping[str, int]] = field(default=None, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))
        if self.covariates is not None:
            covariates = tuple(self.covariates)
            if self.response in covariates:
                raise InvalidSpecError(f"response column {self.response!r} is also listed as a covariate")
            if len(set(covariates)) != len(covariates):
                raise InvalidSpecError(f"duplicate covariate columns in {list(covariates)}")
            object.__setattr__(self, "covariates", covariates)
        if self.response_mapping is not None:
            bad = {k: v for k, v in self.response_mapping.items() if v not in (0, 1)}
            if bad:
                raise InvalidSpecError(f"response_mapping must map onto 0/1, got {bad}")


def _line_of(error: Exception) -> Optional[int]:
    match = re.search(r"line (\d+)", str(error))
    return int(match.group(1)) if match else None


def _cell_to_float(cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        return math.nan


def _parse_numeric(raw: pd.Series) -> NDArray[np.float64]:
    """
    Correctly rounded text -> float64; unparseable cells become NaN

    pd.to_numeric is off by one ulp on many 17-digit values, so %.17g files
    would not load back bit-identically.
    """
    try:
        return raw.astype(np.float64).to_numpy()
    except (TypeError, ValueError):
        return np.array([_cell_to_float(c) for c in raw], dtype=np.float64)


def load_csv(src: TabularSource, institution_id: Optional[str] = None) -> LocalDataset:
    """
    Read a CSV into a dataset with an intercept column prepended

    Row order is preserved. Parse errors carry the file line (header = line 1)
    and the column name.
    """
    if not src.path.is_file():
        raise DataError(f"dataset file not found: {src.path}")
    try:
        df = pd.read_csv(src.path, sep=src.delimiter, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise CSVParseError(f"{src.path}: empty file or missing header row") from e
    except pd.errors.ParserError as e:
        raise CSVParseError(f"{src.path}: {e}", row=_line_of(e)) from e

    columns = [str(c) for c in df.columns]
    if src.response not in columns:
        raise MissingColumnError(f"{src.path}: response column {src.response!r} not in {columns}")
    covariates = list(src.covariates) if src.covariates is not None else [c for c in columns if c != src.response]
    missing = [c for c in covariates if c not in columns]
    if missing:
        raise MissingColumnError(f"{src.path}: covariate columns {missing} not found")
    if df.empty:
        raise CSVParseError(f"{src.path}: no data rows")

    cov = np.empty((len(df), len(covariates)), dtype=np.float64)
    for k, col in enumerate(covariates):
        values = _parse_numeric(df[col].str.strip())
        bad = ~np.isfinite(values)
        if bad.any():
            i = int(np.argmax(bad))
            raise CSVParseError(
                f"{src.path}: line {i + 2}, column {col!r}: cannot parse {df[col].iloc[i]!r} as a number",
                row=i + 2,
                column=col,
            )
        cov[:, k] = values

    y = _parse_response(df[src.response].str.strip(), src)
    X = np.hstack([np.ones((len(df), 1)), cov])
    dataset = LocalDataset(X=X, y=y, institution_id=institution_id or src.path.stem)
    logger.info(f"📄 [Data] loaded {src.path.name}: N={dataset.n_rows}, d={dataset.n_coefficients}")
    return dataset


def _parse_response(raw: pd.Series, src: TabularSource) -> NDArray[np.float64]:
    if src.response_mapping is not None:
        mapped = raw.map(dict(src.response_mapping))
        if mapped.isna().any():
            i = int(np.argmax(mapped.isna().to_numpy()))
            raise NonBinaryResponseError(
                f"{src.path}: line {i + 2}: response {raw.iloc[i]!r} has no entry in response_mapping"
            )
        return mapped.to_numpy(dtype=np.float64)

    values = _parse_numeric(raw)
    bad = ~np.isin(values, (0.0, 1.0))
    if bad.any():
        i = int(np.argmax(bad))
        raise NonBinaryResponseError(
            f"{src.path}: line {i + 2}: response {raw.iloc[i]!r} is not 0/1 "
            "(textual labels need a response_mapping)"
        )
    return values


def partition_horizontal(pooled: LocalDataset, S: int, seed: int = 0) -> list[LocalDataset]:
    """Random permutation of the rows, then a near-equal split into S institutions"""
    if S < 1:
        raise InvalidParamsError(f"need at least one partition, got S={S}")
    if S > pooled.n_rows:
        raise TooManyPartitionsError(f"cannot split {pooled.n_rows} rows into {S} non-empty institutions")
    if S == 1:
        return [pooled]
    perm = np.random.default_rng(seed).permutation(pooled.n_rows)
    return [
        LocalDataset(X=pooled.X[idx], y=pooled.y[idx], institution_id=institution_name(j))
        for j, idx in enumerate(np.array_split(perm, S))
    ]


def write_institution_csvs(
    datasets: Sequence[LocalDataset],
    out_dir: str | Path,
    prefix: str = "institution",
) -> list[Path]:
    """One CSV per institution: covariates x1..x{d-1} (intercept dropped) and y"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, ds in enumerate(datasets):
        frame = pd.DataFrame(ds.X[:, 1:], columns=[f"x{k}" for k in range(1, ds.n_coefficients)])
        frame["y"] = ds.y.astype(np.int64)
        path = out_dir / f"{prefix}-{j}.csv"
        frame.to_csv(path, index=False, float_format="%.17g")
        paths.append(path)
    logger.info(f"💾 [Data] wrote {len(paths)} institution files to {out_dir}")
    return paths


def file_checksum(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
