"""
FastAPI Endpoints for the secure regression simulator
Optional REST surface: synthetic consortium in, federated fit summary out
"""
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from secure_logreg import __version__
from secure_logreg.config import get_settings
from secure_logreg.data import SyntheticSpec, generate_synthetic
from secure_logreg.errors import ConfigError, SecureLogRegError
from secure_logreg.protocol import ProtocolConfig, run_protocol
from secure_logreg.regression import centralized_fit
from secure_logreg.report import parity_report


app = FastAPI(
    title="Secure Logistic Regression API",
    description="Shamir-shared multi-institution ridge logistic regression simulator",
    version=__version__,
)


# Request/Response Models
class SimulateRequest(BaseModel):
    """Request body for /simulate endpoint"""
    records: int = Field(1000, ge=1, le=200_000, description="Total synthetic records")
    features: int = Field(6, ge=2, le=64, description="d, intercept included")
    institutions: int = Field(3, ge=1, le=100)
    data_seed: int = Field(0, description="Seed for the synthetic data")
    lam: Optional[float] = Field(None, ge=0, description="Ridge penalty λ")
    threshold: Optional[int] = Field(None, description="t")
    centers: Optional[int] = Field(None, description="w")
    share_policy: Optional[Literal["gradient_only", "all_summaries"]] = None
    seed: Optional[int] = Field(None, description="Share randomness seed")
    max_iter: Optional[int] = Field(None, ge=1, le=200)


class FitSummary(BaseModel):
    samples: int
    features: int
    iterations: int
    converged: bool
    central_runtime_s: float
    total_runtime_s: float
    bytes_transmitted: int
    data_transmitted_mb: float
    beta: list[float]
    deviance_trace: list[float]


class ParitySummary(BaseModel):
    max_abs_diff: float
    r_squared: float
    threshold: float
    passed: bool


class SimulateResponse(BaseModel):
    """Response from /simulate endpoint; never carries data rows"""
    fit: FitSummary
    parity: ParitySummary
    true_beta: list[float]
    config: dict


class HealthResponse(BaseModel):
    """Health check response"""
    status: str
    version: str
    config: dict


# Endpoints
@app.get("/health", response_model=HealthResponse)
async def health_check():
    """Service status plus the protocol defaults resolved from the environment"""
    return HealthResponse(status="ok", version=__version__, config=ProtocolConfig.from_settings().to_dict())


@app.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest):
    """
    Generate a synthetic consortium, run the secure protocol and compare it
    with the centralized fit on the pooled rows
    """
    try:
        cfg = ProtocolConfig.from_settings(
            lam=request.lam,
            threshold=request.threshold,
            centers=request.centers,
            share_policy=request.share_policy,
            rng_seed=request.seed,
            max_iter=request.max_iter,
        )
        spec = SyntheticSpec.even(request.records, request.features, request.institutions, seed=request.data_seed)
        datasets, true_beta = generate_synthetic(spec)
        result = run_protocol(datasets, cfg)
        central = centralized_fit(datasets, cfg.lam, cfg.tol, cfg.max_iter, cfg.penalize_intercept)
        parity = parity_report(result.beta, central.beta, get_settings().parity_threshold)
    except ConfigError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except SecureLogRegError as e:
        raise HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")

    summary = result.to_dict()
    return SimulateResponse(
        fit=FitSummary(**{k: summary[k] for k in FitSummary.model_fields}),
        parity=ParitySummary(
            max_abs_diff=parity.max_abs_diff,
            r_squared=parity.r_squared,
            threshold=parity.threshold,
            passed=parity.passed,
        ),
        true_beta=[float(b) for b in true_beta],
        config=cfg.to_dict(),
    )


# Run with: uvicorn secure_logreg.api:app --reload
if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8001)
