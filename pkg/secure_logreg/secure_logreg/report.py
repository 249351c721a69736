"""
Report outputs: fit summaries (JSON), deviance traces and scaling sweeps (CSV)
and the federated-vs-centralized parity report
"""
import json
import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from secure_logreg.data import SyntheticSpec, generate_synthetic
from secure_logreg.errors import DimensionMismatchError
from secure_logreg.protocol import ProtocolConfig, run_protocol
from secure_logreg.types import FitResult

logger = logging.getLogger("secure_logreg.report")

DEFAULT_SWEEP = (5, 10, 25, 50, 100)


def _write_json(payload: dict[str, Any], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, ensure_ascii=False)
        f.write("\n")
    return path


def write_fit_result(result: FitResult, path: str | Path, extra: Optional[dict[str, Any]] = None) -> Path:
    payload = result.to_dict()
    if extra:
        payload.update(extra)
    return _write_json(payload, path)


def write_deviance_trace(trace: Sequence[float], path: str | Path) -> Path:
    """iteration, deviance, |dDev| against the previous iteration (empty on the first row)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"iteration": np.arange(1, len(trace) + 1), "deviance": list(trace)})
    frame["abs_delta"] = frame["deviance"].diff().abs()
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def r_squared(federated: ArrayLike, central: ArrayLike, threshold: float = 1e-6) -> float:
    """
    Squared Pearson correlation between the two coefficient vectors

    Constant vectors have no correlation; they score 1.0 when they agree within
    `threshold` and 0.0 otherwise.
    """
    a = np.asarray(federated, dtype=np.float64).reshape(-1)
    b = np.asarray(central, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"coefficient vectors differ in length: {a.shape} vs {b.shape}")
    if a.size < 2 or np.ptp(a) == 0 or np.ptp(b) == 0:
        return 1.0 if np.max(np.abs(a - b)) <= threshold else 0.0
    r = np.corrcoef(a, b)[0, 1]
    return float(r * r)


@dataclass
class ParityReport:
    federated_beta: list[float]
    central_beta: list[float]
    diffs: list[float]
    max_abs_diff: float
    r_squared: float
    threshold: float
    passed: bool
    federated_iterations: Optional[int] = None
    central_iterations: Optional[int] = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def parity_report(
    federated: ArrayLike,
    central: ArrayLike,
    threshold: float = 1e-6,
    federated_iterations: Optional[int] = None,
    central_iterations: Optional[int] = None,
) -> ParityReport:
    a = np.asarray(federated, dtype=np.float64).reshape(-1)
    b = np.asarray(central, dtype=np.float64).reshape(-1)
    r2 = r_squared(a, b, threshold)
    diffs = a - b
    max_abs = float(np.max(np.abs(diffs)))
    report = ParityReport(
        federated_beta=a.tolist(),
        central_beta=b.tolist(),
        diffs=diffs.tolist(),
        max_abs_diff=max_abs,
        r_squared=r2,
        threshold=threshold,
        passed=max_abs <= threshold,
        federated_iterations=federated_iterations,
        central_iterations=central_iterations,
    )
    log = logger.info if report.passed else logger.warning
    log(f"{'✅' if report.passed else '❌'} [Parity] max|diff|={max_abs:.3e} R²={r2:.9f} (threshold {threshold:g})")
    return report


def write_parity_report(report: ParityReport, path: str | Path) -> Path:
    return _write_json(report.to_dict(), path)


@dataclass
class ScalingPoint:
    institutions: int
    records_per_institution: int
    samples: int
    iterations: int
    converged: bool
    central_runtime_s: float
    total_runtime_s: float
    bytes_transmitted: int

    @property
    def central_share(self) -> float:
        return self.central_runtime_s / self.total_runtime_s if self.total_runtime_s > 0 else 0.0


def run_scaling_sweep(
    institution_counts: Sequence[int] = DEFAULT_SWEEP,
    records_per_institution: int = 10_000,
    d: int = 6,
    cfg: Optional[ProtocolConfig] = None,
    seed: int = 0,
) -> list[ScalingPoint]:
    """Federated fit on fresh synthetic data at each institution count, fixed per-institution size"""
    cfg = cfg or ProtocolConfig.from_settings()
    points = []
    for S in institution_counts:
        spec = SyntheticSpec(d=d, sizes=(records_per_institution,) * S, seed=seed)
        datasets, _ = generate_synthetic(spec)
        result = run_protocol(datasets, cfg)
        point = ScalingPoint(
            institutions=S,
            records_per_institution=records_per_institution,
            samples=result.n_samples,
            iterations=result.iterations,
            converged=result.converged,
            central_runtime_s=result.central_phase_seconds,
            total_runtime_s=result.total_seconds,
            bytes_transmitted=result.bytes_transmitted,
        )
        logger.info(
            f"📈 [Scaling] S={S}: central {point.central_runtime_s:.3f}s / total {point.total_runtime_s:.3f}s "
            f"({point.central_share:.1%}), {point.bytes_transmitted / 1e6:.2f} MB"
        )
        points.append(point)
    return points


def write_scaling_csv(points: Sequence[ScalingPoint], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([{**asdict(p), "central_share": p.central_share} for p in points])
    frame.to_csv(path, index=False)
    return path
