from .models import (
    EnsembleDump,
    ErrorResponse,
    EstimateReport,
    PatternInfo,
    Plan,
    PlanRequest,
    RunDetailResponse,
    RunResponse,
    RunSearchResponse,
    SketchDump,
)

__all__ = ['EnsembleDump', 'ErrorResponse', 'EstimateReport', 'PatternInfo', 'Plan', 'PlanRequest',
           'RunDetailResponse', 'RunResponse', 'RunSearchResponse', 'SketchDump']
