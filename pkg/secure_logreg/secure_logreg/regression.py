"""
Plaintext regression mathematics

Logistic probabilities, per-institution summaries (Hessian in positive form,
score, deviance), the ridge-penalized Newton-Raphson update and the
centralized reference fitter used as the oracle for the federated path.
"""
import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from secure_logreg.errors import (
    DimensionMismatchError,
    InvalidParamsError,
    NotConvergedError,
    SingularSystemError,
)
from secure_logreg.types import LocalDataset, ModelState, SummaryBundle, WorkingSet

logger = logging.getLogger("secure_logreg.regression")

# probability clamp; keeps log() finite and weights positive under separation
PROB_EPS = 1e-12


def sigmoid(z: ArrayLike) -> float | NDArray[np.float64]:
    """Numerically stable logistic function clamped to [eps, 1 - eps]"""
    z_arr = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z_arr)
    pos = z_arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z_arr[pos]))
    ez = np.exp(z_arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    out = np.clip(out, PROB_EPS, 1.0 - PROB_EPS)
    if out.ndim == 0:
        return float(out)
    return out


def _check_beta(data: LocalDataset, beta: ArrayLike) -> NDArray[np.float64]:
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    if beta.shape[0] != data.n_coefficients:
        raise DimensionMismatchError(
            f"beta has {beta.shape[0]} entries, {data.institution_id} has d={data.n_coefficients}"
        )
    return beta


def _check_working_set(data: LocalDataset, ws: WorkingSet) -> None:
    if ws.p.shape[0] != data.n_rows:
        raise DimensionMismatchError(
            f"working set has {ws.p.shape[0]} rows, {data.institution_id} has {data.n_rows}"
        )


def compute_working_set(data: LocalDataset, beta: ArrayLike) -> WorkingSet:
    beta = _check_beta(data, beta)
    p = sigmoid(data.X @ beta)
    return WorkingSet(p=p, w_diag=p * (1.0 - p))


def local_hessian(data: LocalDataset, ws: WorkingSet) -> NDArray[np.float64]:
    """X^T W X (positive form of the unpenalized Hessian)"""
    _check_working_set(data, ws)
    H = data.X.T @ (data.X * ws.w_diag[:, None])
    return 0.5 * (H + H.T)


def local_gradient(data: LocalDataset, ws: WorkingSet) -> NDArray[np.float64]:
    """Unpenalized score X^T (y - p) under {0,1} response coding"""
    _check_working_set(data, ws)
    return data.X.T @ (data.y - ws.p)


def local_deviance(data: LocalDataset, ws: WorkingSet) -> float:
    """-2 log-likelihood contribution"""
    _check_working_set(data, ws)
    y, p = data.y, ws.p
    loglik = np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(-2.0 * loglik)


def compute_summaries(data: LocalDataset, beta: ArrayLike) -> SummaryBundle:
    """One pass over the rows: Hessian, score and deviance at beta"""
    ws = compute_working_set(data, beta)
    return SummaryBundle(
        H_local=local_hessian(data, ws),
        g_local=local_gradient(data, ws),
        dev_local=local_deviance(data, ws),
    )


def penalty_vector(d: int, lam: float, penalize_intercept: bool = True) -> NDArray[np.float64]:
    """Diagonal of the ridge term; the intercept sits in column 0"""
    if lam < 0:
        raise InvalidParamsError(f"lambda must be >= 0, got {lam}")
    pen = np.full(d, float(lam))
    if not penalize_intercept:
        pen[0] = 0.0
    return pen


def penalized_gradient(
    g_sum: ArrayLike,
    beta: ArrayLike,
    lam: float,
    penalize_intercept: bool = True,
) -> NDArray[np.float64]:
    g_sum = np.asarray(g_sum, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    return g_sum - penalty_vector(beta.shape[0], lam, penalize_intercept) * beta


def newton_step(
    H_sum: ArrayLike,
    g_sum: ArrayLike,
    beta_old: ArrayLike,
    lam: float,
    penalize_intercept: bool = True,
) -> NDArray[np.float64]:
    """
    beta_new = beta_old + (H + lambda I)^-1 (g - lambda beta_old)

    Solved with a Cholesky factorization; raises SingularSystemError when
    H + lambda I is not positive definite.
    """
    H_sum = np.asarray(H_sum, dtype=np.float64)
    g_sum = np.asarray(g_sum, dtype=np.float64).reshape(-1)
    beta_old = np.asarray(beta_old, dtype=np.float64).reshape(-1)
    d = beta_old.shape[0]
    if H_sum.shape != (d, d) or g_sum.shape != (d,):
        raise DimensionMismatchError(
            f"H {H_sum.shape}, g {g_sum.shape} incompatible with beta of length {d}"
        )

    pen = penalty_vector(d, lam, penalize_intercept)
    system = H_sum + np.diag(pen)
    rhs = g_sum - pen * beta_old
    try:
        factor = cho_factor(system, lower=True)
        delta = cho_solve(factor, rhs)
    except (LinAlgError, ValueError) as e:
        raise SingularSystemError(
            f"H + lambda*I is not positive definite (lambda={lam}); "
            "collinear covariates or separated classes?"
        ) from e
    if not np.isfinite(delta).all():
        raise SingularSystemError("Newton step produced non-finite coefficients")
    return beta_old + delta


def check_convergence(deviance_history: Sequence[float], tol: float) -> bool:
    """True once the last two deviances differ by less than tol"""
    if tol <= 0:
        raise InvalidParamsError(f"tol must be > 0, got {tol}")
    if len(deviance_history) < 2:
        return False
    return abs(deviance_history[-1] - deviance_history[-2]) < tol


def predict_proba(X: ArrayLike, beta: ArrayLike) -> NDArray[np.float64]:
    return np.atleast_1d(sigmoid(np.asarray(X, dtype=np.float64) @ np.asarray(beta, dtype=np.float64)))


def centralized_fit(
    datasets: Sequence[LocalDataset],
    lam: float,
    tol: float = 1e-10,
    max_iter: int = 50,
    penalize_intercept: bool = True,
    strict: bool = False,
) -> ModelState:
    """
    Gold-standard fit on the pooled rows, iterating from beta = 0

    Each iteration records Dev(beta_old) and applies one Newton step.
    """
    pooled = LocalDataset.concat(datasets)
    beta = np.zeros(pooled.n_coefficients)
    state = ModelState(beta=beta)

    for it in range(1, max_iter + 1):
        summary = compute_summaries(pooled, beta)
        beta = newton_step(summary.H_local, summary.g_local, beta, lam, penalize_intercept)
        state.beta = beta
        state.iteration = it
        state.deviance_history.append(summary.dev_local)
        logger.debug(f"[Central] iteration {it}: dev={summary.dev_local:.12g}")
        if check_convergence(state.deviance_history, tol):
            state.converged = True
            break

    if not state.converged:
        logger.warning(f"⚠️ [Central] not converged after {max_iter} iterations")
        if strict:
            raise NotConvergedError(f"centralized fit did not converge in {max_iter} iterations", state)
    return state
