"""
Privacy audit over a protocol transcript

Replays what a coalition of fewer than t computation centers could see and
checks that per-institution summaries only ever reach it as Shamir shares.
"""
import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.stats import chisquare

from secure_logreg.transcript import Message, Transcript, center_name
from secure_logreg.types import LocalDataset

logger = logging.getLogger("secure_logreg.audit")

SHARED_FIELDS = ("gradient", "deviance", "hessian")
POLICY_PLAINTEXT_FIELD = "hessian_plaintext"
SUMMARY_KEYS = {*SHARED_FIELDS, POLICY_PLAINTEXT_FIELD, "contributors"}
TENSOR_KEYS = {"modulus", "scale_exponent", "t", "w", "shape", "center_id", "entries"}
BROADCAST_KEYS = {"beta", "final"}


@dataclass
class UniformityResult:
    """Chi-square goodness of fit of share values against Uniform[0, p)"""
    samples: int
    buckets: int
    statistic: Optional[float]
    p_value: Optional[float]
    significance: float
    rejected: Optional[bool]


def share_uniformity(
    values: Sequence[int],
    modulus: int,
    buckets: int = 64,
    significance: float = 1e-3,
) -> UniformityResult:
    """
    Bucket share values into `buckets` equal slices of [0, p) and test flatness

    With fewer than 5 expected hits per bucket the test is not run and
    `rejected` is None.
    """
    n = len(values)
    if n < 5 * buckets:
        return UniformityResult(n, buckets, None, None, significance, None)
    idx = np.fromiter((int(v) * buckets // modulus for v in values), dtype=np.int64, count=n)
    counts = np.bincount(idx, minlength=buckets)
    stat, p_value = chisquare(counts)
    return UniformityResult(
        samples=n,
        buckets=buckets,
        statistic=float(stat),
        p_value=float(p_value),
        significance=significance,
        rejected=bool(p_value < significance),
    )


@dataclass
class AuditReport:
    passed: bool
    subset: list[int]
    threshold: Optional[int]
    share_policy: str
    messages_seen: int = 0
    share_values_seen: int = 0
    plaintext_summaries: int = 0
    policy_exposed: list[str] = field(default_factory=list)
    unexpected_fields: list[str] = field(default_factory=list)
    raw_row_hits: int = 0
    max_points_per_secret: int = 0
    uniformity: Optional[UniformityResult] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _numeric_leaves(obj: Any) -> Iterable[float]:
    if _is_number(obj):
        yield float(obj)
    elif isinstance(obj, str):
        try:
            yield float(obj)
        except ValueError:
            return
    elif isinstance(obj, Mapping):
        for v in obj.values():
            yield from _numeric_leaves(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            yield from _numeric_leaves(v)


def _numeric_vectors(obj: Any) -> Iterable[tuple[float, ...]]:
    """Every list in a message body that parses as a flat vector of reals"""
    if isinstance(obj, Mapping):
        for v in obj.values():
            yield from _numeric_vectors(v)
    elif isinstance(obj, (list, tuple)):
        if obj and all(not isinstance(v, (list, tuple, Mapping)) for v in obj):
            try:
                yield tuple(float(v) for v in obj)
            except (TypeError, ValueError):
                pass
        else:
            for v in obj:
                yield from _numeric_vectors(v)


def _raw_fingerprints(datasets: Sequence[LocalDataset]) -> set[tuple[float, ...]]:
    rows: set[tuple[float, ...]] = set()
    for ds in datasets:
        rows.update(tuple(float(v) for v in row) for row in ds.X)
        # covariates without the intercept column, in case a row leaks unprefixed
        if ds.n_coefficients > 1:
            rows.update(tuple(float(v) for v in row[1:]) for row in ds.X)
        if ds.n_rows > ds.n_coefficients:
            rows.add(tuple(float(v) for v in ds.y))
    return rows


def _tensor_bodies(message: Message, report: AuditReport) -> Iterable[tuple[str, Mapping[str, Any]]]:
    body = message.body
    for key in body:
        if key not in SUMMARY_KEYS:
            report.unexpected_fields.append(f"{message.msg_type}.{key}")
    for name in SHARED_FIELDS:
        tensor = body.get(name)
        if tensor is None:
            continue
        extra = set(tensor) - TENSOR_KEYS
        report.unexpected_fields.extend(f"{message.msg_type}.{name}.{k}" for k in sorted(extra))
        yield name, tensor


def privacy_audit(
    transcript: Transcript,
    center_subset: Sequence[int],
    threshold: Optional[int] = None,
    datasets: Optional[Sequence[LocalDataset]] = None,
    share_policy: Optional[str] = None,
) -> AuditReport:
    """
    Check what `center_subset` (center ids, fewer than t of them) received

    Passes when every summary reaching the subset is a share value, no
    institution secret is held at t or more evaluation points, no raw row of
    `datasets` appears anywhere in the transcript, and the observed share
    values are not distinguishable from uniform. Plaintext Hessians are
    reported as policy-exposed under gradient_only and fail the audit under
    all_summaries.
    """
    subset = sorted(set(int(c) for c in center_subset))
    visible = transcript.visible_to(center_name(c) for c in subset)

    bodies = [m.body for m in transcript if m.msg_type != "beta_broadcast"]
    if threshold is None:
        seen_t = {int(tb["t"]) for b in bodies for k, tb in b.items() if k in SHARED_FIELDS}
        threshold = max(seen_t) if seen_t else None
    if share_policy is None:
        shared_hessian = any("hessian" in b for b in bodies)
        share_policy = "all_summaries" if shared_hessian else "gradient_only"
    share_policy = str(getattr(share_policy, "value", share_policy))

    report = AuditReport(passed=False, subset=subset, threshold=threshold, share_policy=share_policy)
    report.messages_seen = len(visible)

    # uniformity is tested on submission shares, which carry per-institution secrets
    share_values: list[int] = []
    seen_values = 0
    modulus: Optional[int] = None
    # (institution, iteration, field) -> evaluation points seen by the subset
    points: dict[tuple[str, int, str], set[int]] = defaultdict(set)

    for m in visible:
        if m.msg_type == "beta_broadcast":
            extra = set(m.body) - BROADCAST_KEYS
            report.unexpected_fields.extend(f"beta_broadcast.{k}" for k in sorted(extra))
            continue
        for name, tensor in _tensor_bodies(m, report):
            modulus = int(tensor["modulus"])
            for _, _, value in tensor["entries"]:
                v = int(value)
                if not 0 <= v < modulus:
                    report.unexpected_fields.append(f"{m.msg_type}.{name}: value outside [0, p)")
                seen_values += 1
                if m.msg_type == "submission":
                    share_values.append(v)
            if m.msg_type == "submission":
                points[(m.sender, m.iteration, name)].add(int(tensor["center_id"]))
        plain = m.body.get(POLICY_PLAINTEXT_FIELD)
        if plain is not None:
            n_plain = sum(1 for _ in _numeric_leaves(plain))
            if share_policy == "gradient_only":
                if "hessian" not in report.policy_exposed:
                    report.policy_exposed.append("hessian")
            else:
                report.plaintext_summaries += n_plain

    report.share_values_seen = seen_values
    report.max_points_per_secret = max((len(v) for v in points.values()), default=0)
    if share_values and modulus is not None:
        report.uniformity = share_uniformity(share_values, modulus)
        if report.uniformity.rejected is None:
            report.notes.append(
                f"uniformity test skipped: {len(share_values)} share values is too few"
            )

    if datasets:
        fingerprints = _raw_fingerprints(datasets)
        for m in transcript:
            plaintext = {k: v for k, v in m.body.items() if k not in SHARED_FIELDS}
            for vec in _numeric_vectors(plaintext):
                if vec in fingerprints:
                    report.raw_row_hits += 1

    subset_ok = threshold is None or len(subset) < threshold
    if not subset_ok:
        report.notes.append(f"subset of {len(subset)} centers reaches threshold t={threshold}")
    secrets_ok = threshold is None or report.max_points_per_secret < threshold
    uniform_ok = report.uniformity is None or report.uniformity.rejected is not True
    report.passed = (
        subset_ok
        and secrets_ok
        and uniform_ok
        and report.plaintext_summaries == 0
        and not report.unexpected_fields
        and report.raw_row_hits == 0
    )
    log = logger.info if report.passed else logger.warning
    log(
        f"{'🔒' if report.passed else '⚠️'} [Audit] subset={subset} passed={report.passed} "
        f"shares={report.share_values_seen} plaintext={report.plaintext_summaries} "
        f"exposed={report.policy_exposed} raw_hits={report.raw_row_hits}"
    )
    return report
