import logging
from uuid import uuid4

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from gpcover.credible.balls import (
    covers,
    diameter,
    l2_distance,
    make_ball,
    radius_fixed_a,
)
from gpcover.eb.mmle import fit
from gpcover.eb.types import MmleConfig
from gpcover.errors import NumericalFailureError
from gpcover.harness.gwn import run_gwn_coverage
from gpcover.harness.rate import run_rate_slope
from gpcover.harness.types import CoverageReport, ExperimentPlan, SlopeReport, TruthSpec
from gpcover.sequence.model import simulate
from gpcover.sequence.posterior import posterior
from gpcover.sequence.types import PriorSpec

logger = logging.getLogger(__name__)

app = FastAPI(title="gpcover API")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# finished reports kept in memory; the oldest is dropped past MAX_RUNS
MAX_RUNS = 100
runs: dict[str, CoverageReport | SlopeReport] = {}


class PosteriorRequest(BaseModel):
    truth: TruthSpec
    n: float = Field(gt=1.0)
    seed: int = Field(default=0, ge=0)
    n_obs: int = Field(default=2000, ge=1)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    draws: int = Field(default=2000, ge=100)
    inflation: float = Field(default=1.0, ge=1.0)
    mmle: MmleConfig = MmleConfig()


class PosteriorResponse(BaseModel):
    a_hat: float
    a_tilde: float
    boundary: str
    radius: float
    diameter: float
    error: float
    covers: bool


class RunResponse(BaseModel):
    run_id: str
    report: CoverageReport | SlopeReport


def _fail(e: Exception) -> HTTPException:
    if isinstance(e, ValueError):
        return HTTPException(status_code=400, detail=str(e))
    if isinstance(e, NumericalFailureError):
        return HTTPException(status_code=500, detail=f"Numerical failure: {e}")
    logger.exception("Unexpected error")
    return HTTPException(status_code=500, detail=f"{type(e).__name__}: {e}")


def _store(report: CoverageReport | SlopeReport) -> str:
    while len(runs) >= MAX_RUNS:
        evicted = next(iter(runs))
        del runs[evicted]
        logger.info("Dropped run %s to stay within %d stored runs", evicted, MAX_RUNS)
    run_id = str(uuid4())
    runs[run_id] = report
    return run_id


@app.post("/api/posterior", response_model=PosteriorResponse)
def fit_posterior(request: PosteriorRequest):
    """
    Simulates one data set, fits the scale by marginal likelihood and reports
    the credible ball around the posterior mean.
    """
    try:
        truth = request.truth.build()
        y = simulate(truth, request.n, request.n_obs, request.seed)
        mfit = fit(y, request.mmle)
        post = posterior(y, PriorSpec(a=mfit.a_hat))
        r = radius_fixed_a(
            mfit.a_hat, request.n, request.alpha, request.draws, request.seed, (1,)
        )
        ball = make_ball(
            post.means, r, request.inflation, request.alpha, request.draws, request.seed
        )
        return PosteriorResponse(
            a_hat=mfit.a_hat,
            a_tilde=mfit.a_tilde,
            boundary=str(mfit.boundary_flag),
            radius=r,
            diameter=diameter(ball),
            error=l2_distance(post.means, truth),
            covers=covers(ball, truth),
        )
    except Exception as e:
        raise _fail(e)


@app.post("/api/gwn-coverage", response_model=RunResponse)
def gwn_coverage(plan: ExperimentPlan):
    try:
        report = run_gwn_coverage(plan)
    except Exception as e:
        raise _fail(e)
    run_id = _store(report)
    return RunResponse(run_id=run_id, report=report)


@app.post("/api/rate-slope", response_model=RunResponse)
def rate_slope(plan: ExperimentPlan):
    try:
        report = run_rate_slope(plan)
    except Exception as e:
        raise _fail(e)
    run_id = _store(report)
    return RunResponse(run_id=run_id, report=report)


@app.get("/api/runs/{run_id}", response_model=RunResponse)
def get_run(run_id: str):
    if run_id not in runs:
        raise HTTPException(status_code=404, detail="Run not found")
    return RunResponse(run_id=run_id, report=runs[run_id])


@app.delete("/api/runs/{run_id}")
def delete_run(run_id: str):
    if run_id not in runs:
        raise HTTPException(status_code=404, detail="Run not found")
    del runs[run_id]
    return {"message": "Run deleted successfully"}
