from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

DUMP_VERSION = 1


class PlanRequest(BaseModel):
    pattern: str = Field(..., min_length=1, description="Built-in pattern name")
    m: int = Field(..., ge=1, description="Directed edge count of G (twice the undirected count)")
    alpha: float = Field(..., gt=0, lt=0.5)
    target_count: int = Field(..., ge=0, description="Lower-bound guess for the number of copies")
    max_degree: Optional[int] = Field(None, ge=1)
    storage_budget: Optional[int] = Field(None, ge=1, description="Cap on total counter cells")
    time_budget: Optional[int] = Field(None, ge=1, description="Cap on final-computation work units")
    relative_variance: float = Field(0.1, gt=0)
    instances: Optional[int] = Field(None, ge=1, description="Override the planned instance count")

    @field_validator('pattern')
    @classmethod
    def pattern_not_blank(cls, v):
        if v.isspace():
            raise ValueError('Pattern cannot be only whitespace')
        return v.strip()


class Plan(BaseModel):
    colors: int
    group: str
    instances: int
    m: int
    target_count: int
    color_bounds: Dict[str, float]
    instance_factor: float
    variance_proxy: float
    storage_cells: int
    final_work: int
    warnings: List[str] = []


class EstimateReport(BaseModel):
    pattern: str
    mean: float
    estimates: List[float]
    std_error: float
    imaginary_mean: float
    plan: Plan
    algorithm: int
    finalizer: str
    master_seed: int
    seeds: List[int]
    stream: Dict[str, int]


class SketchDump(BaseModel):
    version: int = DUMP_VERSION
    pattern: str
    pattern_name: Optional[str] = None
    allow_leaves: bool = False
    group: str
    colors: int
    algorithm: int
    seed: int
    events: int
    cells_touched: int
    shape: List[int]
    counts: Optional[List[int]] = None
    real: Optional[List[float]] = None
    imag: Optional[List[float]] = None


class EnsembleDump(BaseModel):
    version: int = DUMP_VERSION
    master_seed: int
    plan: Plan
    stream: Dict[str, int]
    instances: List[SketchDump]


class PatternInfo(BaseModel):
    name: str
    t: int
    k: int
    auto_count: int
    edges: List[List[int]]
    gamma: Dict[int, List[int]]


class RunResponse(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    id: int
    pattern_name: str
    group: str
    colors: int
    instances: int
    algorithm: int
    master_seed: int
    mean: float
    std_error: float
    created_at: datetime


class RunDetailResponse(RunResponse):
    report: EstimateReport


class RunSearchResponse(BaseModel):
    runs: List[RunResponse]
    total_count: int
    search_term: str


class ErrorResponse(BaseModel):
    error: str
    detail: Optional[str] = None
    kind: Optional[str] = None
