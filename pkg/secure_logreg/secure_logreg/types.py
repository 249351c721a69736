"""
Type definitions for the secure regression pipeline
"""
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray

from secure_logreg.errors import DimensionMismatchError, NonBinaryResponseError


@dataclass(frozen=True, eq=False)
class LocalDataset:
    """One institution's rows: design matrix X (N_j x d) and binary response y"""
    X: NDArray[np.float64]
    y: NDArray[np.float64]
    institution_id: str = "institution-0"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if X.ndim != 2:
            raise DimensionMismatchError(f"X must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatchError(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
            )
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionMismatchError(f"empty dataset {X.shape}")
        if not np.isin(y, (0.0, 1.0)).all():
            raise NonBinaryResponseError(f"{self.institution_id}: y must be in {{0, 1}}")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def concat(cls, datasets: Sequence["LocalDataset"], institution_id: str = "pooled") -> "LocalDataset":
        """Stack rows of datasets that share one schema"""
        if not datasets:
            raise DimensionMismatchError("no datasets to pool")
        widths = {ds.n_coefficients for ds in datasets}
        if len(widths) != 1:
            raise DimensionMismatchError(f"datasets disagree on d: {sorted(widths)}")
        if len(datasets) == 1:
            return datasets[0]
        return cls(
            X=np.vstack([ds.X for ds in datasets]),
            y=np.concatenate([ds.y for ds in datasets]),
            institution_id=institution_id,
        )

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_coefficients(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class WorkingSet:
    """Per-row probabilities p_i and IRLS weights w_ii = p_i (1 - p_i)"""
    p: NDArray[np.float64]
    w_diag: NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class SummaryBundle:
    """One institution's Hessian (positive form), score and deviance for one iteration"""
    H_local: NDArray[np.float64]
    g_local: NDArray[np.float64]
    dev_local: float

    def __add__(self, other: "SummaryBundle") -> "SummaryBundle":
        return SummaryBundle(
            H_local=self.H_local + other.H_local,
            g_local=self.g_local + other.g_local,
            dev_local=self.dev_local + other.dev_local,
        )


@dataclass
class ModelState:
    """Coefficients plus the deviance trace that produced them"""
    beta: NDArray[np.float64]
    iteration: int = 0
    deviance_history: list[float] = field(default_factory=list)
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "beta": [float(b) for b in self.beta],
            "iteration": self.iteration,
            "deviance_history": list(self.deviance_history),
            "converged": self.converged,
        }


@dataclass
class FitResult:
    """Outcome of a federated run: coefficients, timing split and traffic"""
    model: ModelState
    central_phase_seconds: float
    total_seconds: float
    bytes_transmitted: int
    n_samples: int
    n_coefficients: int
    transcript: Optional[Any] = field(default=None, repr=False)

    @property
    def iterations(self) -> int:
        return self.model.iteration

    @property
    def deviance_trace(self) -> list[float]:
        return self.model.deviance_history

    @property
    def converged(self) -> bool:
        return self.model.converged

    @property
    def beta(self) -> NDArray[np.float64]:
        return self.model.beta

    def to_dict(self) -> dict:
        return {
            "samples": self.n_samples,
            # the intercept column is not a feature
            "features": self.n_coefficients - 1,
            "coefficients": self.n_coefficients,
            "iterations": self.iterations,
            "converged": self.converged,
            "central_runtime_s": self.central_phase_seconds,
            "total_runtime_s": self.total_seconds,
            "bytes_transmitted": self.bytes_transmitted,
            "data_transmitted_mb": self.bytes_transmitted / 1e6,
            "beta": [float(b) for b in self.beta],
            "deviance_trace": list(self.deviance_trace),
        }
