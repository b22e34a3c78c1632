"""HTTP front end: the same pipeline the CLI drives, behind FastAPI routes.

Errors map onto status codes the way CLI exit codes work: malformed input
or observations are 400, a structurally invalid model is 422, and a
self-contradictory all-OK model is 409.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..cli import (
    _COMMANDS,
    ModelValidationError,
    ParseError,
    RunOptions,
    parse_model,
    parse_observations,
)
from ..detection import ObservationError, OkModelContradiction
from ..equations import parse_rational
from ..model import UnknownVariableError
from ..oracle import ScaleError
from . import schemas


def _threshold(literal: str | None):
    if literal is None:
        return None
    try:
        return parse_rational(literal)
    except ValueError as err:
        raise HTTPException(status_code=400, detail=str(err)) from None


def _execute(command: str, request: schemas.PipelineRequest) -> dict:
    options = RunOptions(
        mode=request.mode,
        delta=_threshold(request.delta),
        tolerance=_threshold(request.tol),
        max_order=request.max_order,
        max_size=request.max_size,
        max_count=request.max_count,
    )
    try:
        graph = parse_model(request.model)
        observations = parse_observations(request.observations)
        payload, _ = _COMMANDS[command](graph, observations, options)
    except ModelValidationError as err:
        raise HTTPException(status_code=422, detail=str(err)) from None
    except OkModelContradiction as err:
        raise HTTPException(status_code=409, detail=str(err)) from None
    except (ParseError, ObservationError, ScaleError, UnknownVariableError) as err:
        raise HTTPException(status_code=400, detail=str(err)) from None
    payload.pop("command", None)
    return payload


def create_app() -> FastAPI:
    app = FastAPI(
        title="cgdiag",
        description="Consistency-based diagnosis over causal influence graphs.",
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse()

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.PipelineRequest) -> dict:
        return _execute("simulate", request)

    @app.post("/detect", response_model=schemas.DetectResponse)
    def detect(request: schemas.PipelineRequest) -> dict:
        return _execute("detect", request)

    @app.post("/closure", response_model=schemas.ClosureResponse)
    def closure(request: schemas.PipelineRequest) -> dict:
        return _execute("closure", request)

    @app.post("/conflicts", response_model=schemas.ConflictsResponse)
    def conflicts(request: schemas.PipelineRequest) -> dict:
        return _execute("conflicts", request)

    @app.post("/diagnose", response_model=schemas.DiagnoseResponse)
    def diagnose(request: schemas.PipelineRequest) -> dict:
        return _execute("diagnose", request)

    @app.post("/oracle/conflicts", response_model=schemas.OracleConflictsResponse)
    def oracle_conflicts(request: schemas.PipelineRequest) -> dict:
        return _execute("oracle-conflicts", request)

    @app.post("/oracle/diagnose", response_model=schemas.OracleDiagnoseResponse)
    def oracle_diagnose(request: schemas.PipelineRequest) -> dict:
        return _execute("oracle-diagnose", request)

    return app


app = create_app()
