"""
Multi-party simulator for secure regularized logistic regression

Pipeline per iteration:
1. Coordinator broadcasts beta to every institution
2. Institutions compute summaries locally and secret-share them (one payload per center)
3. Each center secure-adds its own shares across institutions (no reconstruction)
4. A quorum of >= t centers exchanges aggregate shares, reconstructs ONLY the
   aggregates and applies the ridge-penalized Newton step
5. Convergence check on the deviance trace
"""
import logging
import time
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray

from secure_logreg.config import DEFAULT_MODULUS, Settings, get_settings
from secure_logreg.errors import (
    DimensionMismatchError,
    InsufficientSharesError,
    InvalidParamsError,
    IterationMismatchError,
    MissingSubmissionError,
    NotConvergedError,
    ProtocolError,
    SecureLogRegError,
)
from secure_logreg.field import FieldModulus
from secure_logreg.regression import check_convergence, compute_summaries, newton_step
from secure_logreg.sharing import SharedTensor, SharingParams, reconstruct_values, secure_sum, share_tensor
from secure_logreg.transcript import Transcript, center_name
from secure_logreg.types import FitResult, LocalDataset, ModelState

logger = logging.getLogger("secure_logreg.protocol")

BROADCAST_SENDER = "centers"


class SharePolicy(str, Enum):
    """Which summaries travel secret-shared"""
    GRADIENT_ONLY = "gradient_only"  # gradient + deviance shared, Hessian plaintext
    ALL_SUMMARIES = "all_summaries"

    @classmethod
    def parse(cls, value: "str | SharePolicy") -> "SharePolicy":
        if isinstance(value, cls):
            return value
        aliases = {"gradient-only": cls.GRADIENT_ONLY, "all": cls.ALL_SUMMARIES}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise InvalidParamsError(f"unknown share policy {value!r}") from None


@dataclass(frozen=True)
class ProtocolConfig:
    lam: float = 1.0
    sharing: SharingParams = field(default_factory=lambda: SharingParams(t=2, w=3))
    modulus: FieldModulus = field(default_factory=lambda: FieldModulus(DEFAULT_MODULUS))
    scale_exponent: int = 40
    tol: float = 1e-10
    max_iter: int = 50
    share_policy: SharePolicy = SharePolicy.GRADIENT_ONLY
    rng_seed: int = 0
    penalize_intercept: bool = True
    workers: int = 1
    quorum: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "share_policy", SharePolicy.parse(self.share_policy))
        if self.lam < 0:
            raise InvalidParamsError(f"lambda must be >= 0, got {self.lam}")
        if self.tol <= 0:
            raise InvalidParamsError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidParamsError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.scale_exponent < 0:
            raise InvalidParamsError(f"scale_exponent must be >= 0, got {self.scale_exponent}")
        if self.workers < 1:
            raise InvalidParamsError(f"workers must be >= 1, got {self.workers}")
        self.sharing.check_field(self.modulus)
        if self.quorum is not None:
            quorum = tuple(sorted(set(self.quorum)))
            if len(quorum) != len(self.quorum):
                raise InvalidParamsError(f"duplicate centers in quorum {self.quorum}")
            if any(c not in self.center_ids for c in quorum):
                raise InvalidParamsError(f"quorum {self.quorum} outside centers 1..{self.sharing.w}")
            if len(quorum) < self.sharing.t:
                raise InvalidParamsError(f"quorum of {len(quorum)} is below threshold t={self.sharing.t}")
            object.__setattr__(self, "quorum", quorum)

    @property
    def center_ids(self) -> tuple[int, ...]:
        return tuple(range(1, self.sharing.w + 1))

    @property
    def finalize_centers(self) -> tuple[int, ...]:
        return self.quorum or self.center_ids

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None, **overrides: Any) -> "ProtocolConfig":
        """Settings-backed defaults; keyword overrides that are None are ignored"""
        s = settings or get_settings()
        o = {k: v for k, v in overrides.items() if v is not None}
        return cls(
            lam=o.get("lam", s.lam),
            sharing=SharingParams(t=o.get("threshold", s.threshold), w=o.get("centers", s.centers)),
            modulus=FieldModulus(o.get("modulus", s.modulus)),
            scale_exponent=o.get("scale_exponent", s.scale_exponent),
            tol=o.get("tol", s.tol),
            max_iter=o.get("max_iter", s.max_iter),
            share_policy=o.get("share_policy", s.share_policy),
            rng_seed=o.get("rng_seed", s.rng_seed),
            penalize_intercept=o.get("penalize_intercept", s.penalize_intercept),
            workers=o.get("workers", s.workers),
            quorum=o.get("quorum"),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "threshold": self.sharing.t,
            "centers": self.sharing.w,
            "modulus": str(self.modulus.p),
            "scale_exponent": self.scale_exponent,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "share_policy": self.share_policy.value,
            "rng_seed": self.rng_seed,
            "penalize_intercept": self.penalize_intercept,
            "workers": self.workers,
            "quorum": list(self.finalize_centers),
        }


def _plain_matrix(H: NDArray[np.float64]) -> list[list[float]]:
    return [[float(v) for v in row] for row in H]


@dataclass(frozen=True, eq=False)
class CenterPayload:
    """What one center receives from one institution in one iteration"""
    center_id: int
    gradient: SharedTensor
    deviance: SharedTensor
    hessian: Optional[SharedTensor] = None
    hessian_plain: Optional[NDArray[np.float64]] = None

    def to_message_body(self) -> dict[str, Any]:
        body: dict[str, Any] = {
            "gradient": self.gradient.to_message_body(self.center_id),
            "deviance": self.deviance.to_message_body(self.center_id),
        }
        if self.hessian is not None:
            body["hessian"] = self.hessian.to_message_body(self.center_id)
        if self.hessian_plain is not None:
            body["hessian_plaintext"] = _plain_matrix(self.hessian_plain)
        return body


@dataclass(frozen=True, eq=False)
class ShareSubmission:
    institution_id: str
    iteration: int
    payloads: Mapping[int, CenterPayload]

    def view_for(self, center_id: int) -> "ShareSubmission":
        """The part of the submission a single center is allowed to hold"""
        if center_id not in self.payloads:
            raise MissingSubmissionError(f"{self.institution_id} sent nothing to center {center_id}")
        return ShareSubmission(self.institution_id, self.iteration, {center_id: self.payloads[center_id]})


@dataclass(frozen=True, eq=False)
class CenterAggregate:
    """One center's shares of the cross-institution sums"""
    center_id: int
    iteration: int
    gradient: SharedTensor
    deviance: SharedTensor
    hessian: Optional[SharedTensor]
    hessian_plain: Optional[NDArray[np.float64]]
    contributors: tuple[str, ...]

    def to_message_body(self) -> dict[str, Any]:
        body = CenterPayload(
            self.center_id, self.gradient, self.deviance, self.hessian, self.hessian_plain
        ).to_message_body()
        body["contributors"] = list(self.contributors)
        return body


def institution_round(
    data: LocalDataset,
    beta: NDArray[np.float64],
    cfg: ProtocolConfig,
    rng: np.random.Generator,
    iteration: int = 0,
    addends: int = 1,
) -> ShareSubmission:
    """
    Local summaries at beta, fixed-point encoded and secret-shared per policy

    `addends` is the number of institutions whose values will be summed; it
    sizes the encoding headroom check.
    """
    summary = compute_summaries(data, beta)

    def share(values) -> SharedTensor:
        return share_tensor(values, cfg.sharing, cfg.modulus, cfg.scale_exponent, rng, addends=addends)

    gradient = share(summary.g_local)
    deviance = share(summary.dev_local)
    hessian = share(summary.H_local) if cfg.share_policy is SharePolicy.ALL_SUMMARIES else None
    hessian_plain = summary.H_local if hessian is None else None

    payloads = {
        c: CenterPayload(
            center_id=c,
            gradient=gradient.for_center(c),
            deviance=deviance.for_center(c),
            hessian=hessian.for_center(c) if hessian is not None else None,
            hessian_plain=hessian_plain,
        )
        for c in cfg.center_ids
    }
    return ShareSubmission(data.institution_id, iteration, payloads)


def center_aggregate(
    submissions: Sequence[ShareSubmission],
    center_id: int,
    expected_institutions: Optional[Sequence[str]] = None,
    iteration: Optional[int] = None,
) -> CenterAggregate:
    """Share-local sum across institutions at one center; nothing is reconstructed"""
    if not submissions:
        raise MissingSubmissionError(f"center {center_id} received no submissions")
    iteration = submissions[0].iteration if iteration is None else iteration
    for s in submissions:
        if s.iteration != iteration:
            raise IterationMismatchError(
                f"center {center_id}: {s.institution_id} submitted for iteration {s.iteration}, expected {iteration}"
            )

    senders = [s.institution_id for s in submissions]
    if len(set(senders)) != len(senders):
        raise ProtocolError(f"center {center_id}: duplicate submissions from {sorted(senders)}")
    if expected_institutions is not None:
        missing = sorted(set(expected_institutions) - set(senders))
        if missing:
            # partial sums are never finalized
            raise MissingSubmissionError(f"center {center_id}: no submission from {missing}")

    try:
        payloads = [s.payloads[center_id] for s in submissions]
    except KeyError:
        raise MissingSubmissionError(f"center {center_id} holds no payload in some submission") from None

    shared_hessians = [p.hessian for p in payloads if p.hessian is not None]
    plain_hessians = [p.hessian_plain for p in payloads if p.hessian_plain is not None]
    return CenterAggregate(
        center_id=center_id,
        iteration=iteration,
        gradient=secure_sum([p.gradient for p in payloads]),
        deviance=secure_sum([p.deviance for p in payloads]),
        hessian=secure_sum(shared_hessians) if shared_hessians else None,
        hessian_plain=np.sum(plain_hessians, axis=0) if plain_hessians else None,
        contributors=tuple(senders),
    )


def center_finalize(
    aggregates: Sequence[CenterAggregate],
    beta_old: NDArray[np.float64],
    cfg: ProtocolConfig,
) -> tuple[NDArray[np.float64], float]:
    """Reconstruct the aggregated g, Dev (and H) from >= t centers and take the Newton step"""
    if len(aggregates) < cfg.sharing.t:
        raise InsufficientSharesError(
            f"finalize needs {cfg.sharing.t} centers, got {len(aggregates)}"
        )
    iterations = {a.iteration for a in aggregates}
    if len(iterations) != 1:
        raise IterationMismatchError(f"aggregates from iterations {sorted(iterations)}")

    g_sum = reconstruct_values([a.gradient for a in aggregates]).reshape(-1)
    dev = float(reconstruct_values([a.deviance for a in aggregates])[0, 0])
    if aggregates[0].hessian is not None:
        H_sum = reconstruct_values([a.hessian for a in aggregates])
    else:
        H_sum = aggregates[0].hessian_plain

    beta_new = newton_step(H_sum, g_sum, beta_old, cfg.lam, cfg.penalize_intercept)
    return beta_new, dev


class Institution:
    """Data owner; its rows never leave this object"""

    def __init__(self, data: LocalDataset, rng: np.random.Generator):
        self.data = data
        self._rng = rng

    @property
    def institution_id(self) -> str:
        return self.data.institution_id

    def round(self, beta: NDArray[np.float64], cfg: ProtocolConfig, iteration: int, addends: int) -> ShareSubmission:
        return institution_round(self.data, beta, cfg, self._rng, iteration=iteration, addends=addends)


class ComputationCenter:
    """Share-holder j: keeps only its own payloads and aggregates them locally"""

    def __init__(self, center_id: int):
        self.center_id = center_id
        self._inbox: list[ShareSubmission] = []

    def receive(self, submission: ShareSubmission) -> None:
        self._inbox.append(submission.view_for(self.center_id))

    def aggregate(self, expected_institutions: Sequence[str], iteration: int) -> CenterAggregate:
        inbox, self._inbox = self._inbox, []
        return center_aggregate(inbox, self.center_id, expected_institutions, iteration)

    def discard(self) -> None:
        """Drop shares of a round this center does not take part in"""
        self._inbox.clear()


class SecureFitCoordinator:
    """
    Drives the iteration loop over in-process institution and center actors

    Timing split: central = center aggregation + finalize; total = everything.
    """

    def __init__(
        self,
        datasets: Sequence[LocalDataset],
        cfg: Optional[ProtocolConfig] = None,
        transcript: Optional[Transcript] = None,
    ):
        if not datasets:
            raise InvalidParamsError("at least one institution dataset is required")
        widths = {ds.n_coefficients for ds in datasets}
        if len(widths) != 1:
            raise DimensionMismatchError(f"institutions disagree on d: {sorted(widths)}")
        ids = [ds.institution_id for ds in datasets]
        if len(set(ids)) != len(ids):
            raise InvalidParamsError(f"institution ids must be unique, got {ids}")

        self.cfg = cfg or ProtocolConfig.from_settings()
        self.transcript = transcript if transcript is not None else Transcript()
        seeds = np.random.SeedSequence(self.cfg.rng_seed).spawn(len(datasets))
        self.institutions = [Institution(ds, np.random.default_rng(s)) for ds, s in zip(datasets, seeds)]
        self.centers = {c: ComputationCenter(c) for c in self.cfg.center_ids}
        self.d = widths.pop()
        self.n_samples = sum(ds.n_rows for ds in datasets)

    @property
    def institution_ids(self) -> list[str]:
        return [inst.institution_id for inst in self.institutions]

    def run(self, strict: bool = False) -> FitResult:
        cfg = self.cfg
        start = time.perf_counter()
        central = 0.0
        beta = np.zeros(self.d)
        state = ModelState(beta=beta)
        logger.info(
            f"🚀 [Protocol] {len(self.institutions)} institutions, N={self.n_samples}, d={self.d}, "
            f"t={cfg.sharing.t}/w={cfg.sharing.w}, policy={cfg.share_policy.value}, lambda={cfg.lam}"
        )

        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for it in range(cfg.max_iter):
                try:
                    self._broadcast(beta, it, final=False)
                    submissions = list(pool.map(
                        lambda inst: inst.round(beta, cfg, it, len(self.institutions)),
                        self.institutions,
                    ))
                    self._deliver(submissions, it)

                    t0 = time.perf_counter()
                    aggregates = list(pool.map(
                        lambda c: self.centers[c].aggregate(self.institution_ids, it),
                        cfg.finalize_centers,
                    ))
                    self._exchange(aggregates, it)
                    beta_new, dev = center_finalize(aggregates, beta, cfg)
                    for c, center in self.centers.items():
                        if c not in cfg.finalize_centers:
                            center.discard()
                    central += time.perf_counter() - t0
                except SecureLogRegError as e:
                    e.add_note(f"protocol iteration {it}")
                    raise

                beta = beta_new
                state.beta = beta
                state.iteration = it + 1
                state.deviance_history.append(dev)
                delta = abs(dev - state.deviance_history[-2]) if it else float("nan")
                logger.info(f"🔁 [Protocol] iteration {it + 1}: dev={dev:.12g} |dDev|={delta:.3e}")
                if check_convergence(state.deviance_history, cfg.tol):
                    state.converged = True
                    break

        self._broadcast(beta, state.iteration, final=True)
        total = time.perf_counter() - start

        result = FitResult(
            model=state,
            central_phase_seconds=central,
            total_seconds=total,
            bytes_transmitted=self.transcript.total_bytes,
            n_samples=self.n_samples,
            n_coefficients=self.d,
            transcript=self.transcript,
        )
        if state.converged:
            logger.info(
                f"✅ [Protocol] converged in {state.iteration} iterations "
                f"(central {central:.3f}s / total {total:.3f}s, {result.bytes_transmitted / 1e6:.2f} MB)"
            )
        else:
            logger.warning(f"⚠️ [Protocol] not converged after {cfg.max_iter} iterations")
            if strict:
                raise NotConvergedError(f"protocol did not converge in {cfg.max_iter} iterations", result)
        return result

    def _broadcast(self, beta: NDArray[np.float64], iteration: int, final: bool) -> None:
        body = {"beta": [format(float(b), ".17g") for b in beta], "final": final}
        for inst_id in self.institution_ids:
            self.transcript.append("beta_broadcast", iteration, BROADCAST_SENDER, inst_id, body)

    def _deliver(self, submissions: Sequence[ShareSubmission], iteration: int) -> None:
        for submission in submissions:
            for c, payload in submission.payloads.items():
                self.transcript.append(
                    "submission", iteration, submission.institution_id, center_name(c),
                    payload.to_message_body(),
                )
                self.centers[c].receive(submission)

    def _exchange(self, aggregates: Sequence[CenterAggregate], iteration: int) -> None:
        """Quorum centers send their aggregate shares to each other before reconstruction"""
        for agg in aggregates:
            body = agg.to_message_body()
            for other in aggregates:
                if other.center_id != agg.center_id:
                    self.transcript.append(
                        "aggregate", iteration, center_name(agg.center_id), center_name(other.center_id), body
                    )


def run_protocol(
    datasets: Sequence[LocalDataset],
    cfg: Optional[ProtocolConfig] = None,
    transcript: Optional[Transcript] = None,
    strict: bool = False,
) -> FitResult:
    """
    Convenience function for a federated fit

    Creates a SecureFitCoordinator and runs the protocol to convergence or max_iter.
    """
    return SecureFitCoordinator(datasets, cfg, transcript).run(strict=strict)
