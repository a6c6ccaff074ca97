import logging
from typing import List

from fastapi import APIRouter, HTTPException, Depends, Query
from sqlalchemy.orm import Session

from ..database import get_db, EstimateRun
from ..schemas import ErrorResponse, PatternInfo, Plan, PlanRequest, RunDetailResponse, RunResponse, RunSearchResponse
from ..services import PlanInput, plan_parameters
from ..services.pattern import BUILTIN_PATTERNS, builtin_pattern

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get("/patterns", response_model=List[PatternInfo])
async def list_patterns():
    """Built-in patterns with their half-edge index."""
    patterns = [builtin_pattern(name) for name in BUILTIN_PATTERNS]
    return [
        PatternInfo(
            name=p.name,
            t=p.t,
            k=p.k,
            auto_count=p.auto_count,
            edges=[list(edge) for edge in p.edges],
            gamma={b: list(indices) for b, indices in p.gamma.items()},
        )
        for p in patterns
    ]


@router.post("/plan", response_model=Plan, responses={400: {"model": ErrorResponse}})
async def plan(request: PlanRequest):
    """
    Plan colors, group and instance count for a built-in pattern.

    Handles edge cases:
    - Unknown pattern or zero target count (400 through the ValueError handler)
    - Out-of-range fields (validated by Pydantic)
    """
    pattern = builtin_pattern(request.pattern)
    return plan_parameters(PlanInput(
        m=request.m,
        alpha=request.alpha,
        target_count=request.target_count,
        pattern=pattern,
        delta_max=request.max_degree,
        storage_budget=request.storage_budget,
        time_budget=request.time_budget,
        relative_variance=request.relative_variance,
        instances=request.instances,
    ))


@router.get("/runs", response_model=List[RunResponse])
async def get_all_runs(
        skip: int = 0,
        limit: int = 100,
        db: Session = Depends(get_db)
):
    """Recorded estimate runs, newest first, with pagination."""
    runs = db.query(EstimateRun).order_by(EstimateRun.id.desc()).offset(skip).limit(limit).all()
    return [RunResponse.model_validate(r) for r in runs]


@router.get("/runs/search", response_model=RunSearchResponse)
async def search_runs(
        pattern: str = Query(..., min_length=1, description="Pattern name to search for"),
        db: Session = Depends(get_db)
):
    """Recorded runs whose pattern name contains the search term."""
    try:
        search_term = pattern.lower()
        matching = [r for r in db.query(EstimateRun).order_by(EstimateRun.id.desc()).all()
                    if search_term in r.pattern_name.lower()]
        runs = [RunResponse.model_validate(r) for r in matching]
        return RunSearchResponse(runs=runs, total_count=len(runs), search_term=pattern)
    except Exception as e:
        logger.error(f"Search error: {str(e)}")
        raise HTTPException(status_code=500, detail=f"Search failed: {str(e)}")


@router.get("/runs/{run_id}", response_model=RunDetailResponse)
async def get_run(
        run_id: int,
        db: Session = Depends(get_db)
):
    """Get a specific recorded run with its full report."""
    run = db.query(EstimateRun).filter(EstimateRun.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return RunDetailResponse.model_validate(run)
