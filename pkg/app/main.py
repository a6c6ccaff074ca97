import logging

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .api import router
from .config import get_settings
from .database import engine, Base
from .services.errors import MotifSketchError

# Configure logging
logging.basicConfig(level=get_settings().log_level)
logger = logging.getLogger(__name__)

# Create database tables
Base.metadata.create_all(bind=engine)

# Initialize FastAPI app
app = FastAPI(
    title="Motif Sketch",
    description="Plan streaming subgraph-count sketches and browse recorded estimate runs",
    version="1.0.0"
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include API routes
app.include_router(router)


@app.get("/api")
def api_info():
    """API information endpoint."""
    return {
        "message": "Welcome to the Motif Sketch API",
        "endpoints": {
            "GET /patterns": "Built-in patterns with t, k, auto(H) and half-edge sets",
            "POST /plan": "Plan colors, group and instance count",
            "GET /runs": "Recorded estimate runs with pagination",
            "GET /runs/search?pattern={name}": "Search recorded runs by pattern name",
            "GET /runs/{id}": "Get a recorded run with its full report"
        },
        "cli": "python main.py --help"
    }


# Exception handlers
@app.exception_handler(MotifSketchError)
async def motif_sketch_error_handler(request, exc):
    logger.info(f"{type(exc).__name__} on {request.url.path}: {exc}")
    return JSONResponse(
        status_code=400,
        content={"error": "Invalid input", "detail": str(exc), "kind": type(exc).__name__}
    )


@app.exception_handler(ValueError)
async def value_error_handler(request, exc):
    return JSONResponse(
        status_code=400,
        content={"error": "Invalid input", "detail": str(exc)}
    )


@app.exception_handler(HTTPException)
async def http_exception_handler(request, exc):
    return JSONResponse(
        status_code=exc.status_code,
        content={"error": exc.detail, "detail": None}
    )
