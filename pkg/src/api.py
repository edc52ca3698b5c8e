import logging
from datetime import datetime
from typing import Any, Dict, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import Config, configure_logging
from .graph import EXPERIMENTS, run_suite
from .nodes.exponents import exponent_verdict
from .state import ExperimentConfig, LabState
from .tools.report_io import report_payload

logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(
    title="Maximal Restriction Lab API",
    description="Exponent verdicts and restriction experiments over HTTP",
    version="1.0.0",
)


class ExponentQuery(BaseModel):
    d: int = Field(3, ge=2, description="Dimension")
    p: str = Field(..., description="Exponent on R^d, e.g. '4/3'")
    q: str = Field(..., description="Exponent on the sphere, e.g. '2'")


@app.get("/")
async def root():
    """
    Root endpoint - API information
    """
    return {
        "status": "online",
        "service": "Maximal Restriction Lab",
        "version": "1.0.0",
        "endpoints": {
            "health": "/health",
            "exponents": "/exponents",
            "experiments": [f"/experiments/{name}" for name in EXPERIMENTS],
            "docs": "/docs",
        },
    }


@app.get("/health")
async def health_check():
    """
    Health check endpoint
    """
    return {
        "status": "healthy",
        "service": "Maximal Restriction Lab",
        "timestamp": datetime.now().isoformat(),
    }


@app.post("/exponents")
async def exponents(query: ExponentQuery):
    """Range verdicts and derivation traces for one (d, p, q)"""
    try:
        return exponent_verdict(query.d, query.p, query.q)
    except (ValueError, ArithmeticError) as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.post("/experiments/{name}")
def experiment(name: str, config: Optional[Dict[str, Any]] = None):
    """
    Run one experiment with the given config and return its report

    The body holds ExperimentConfig fields; missing keys take acceptance defaults.
    The report is the same JSON document the command line writes.
    """
    if name not in EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"unknown experiment '{name}'")
    try:
        experiment_config = ExperimentConfig(**(config or {}))
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))

    logger.info("📥 experiment request: %s", name)
    state = run_suite(LabState(config=experiment_config, selected=[name]))
    if state.errors or not state.reports:
        return JSONResponse(
            status_code=500,
            content={"status": "error", "experiment": name, "errors": state.errors},
        )
    report = state.reports[0]
    return JSONResponse(status_code=200, content=report_payload(report))


# Error handlers
@app.exception_handler(HTTPException)
async def http_exception_handler(request, exc):
    """Handle HTTP exceptions"""
    return JSONResponse(
        status_code=exc.status_code,
        content={
            "status": "error",
            "message": exc.detail,
            "timestamp": datetime.now().isoformat(),
        },
    )


if __name__ == "__main__":
    import uvicorn

    Config.validate()
    configure_logging()
    logger.info("🚀 Starting Maximal Restriction Lab API on %s:%s", Config.API_HOST, Config.API_PORT)
    uvicorn.run(app, host=Config.API_HOST, port=Config.API_PORT, log_level=Config.LOG_LEVEL.lower())
