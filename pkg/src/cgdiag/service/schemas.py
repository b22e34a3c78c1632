"""Request/response bodies for the HTTP service.

Requests carry model and observation files as text, in the same formats the
CLI reads; rational thresholds travel as strings ("1/1000000") so nothing is
ever rounded through floats.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class PipelineRequest(BaseModel):
    model: str = Field(description="model file text (var/inf lines)")
    observations: str = Field(description="observation file text (obs lines)")
    mode: Literal["exact", "approx"] = "exact"
    delta: str | None = Field(default=None, description="detection threshold, rational literal")
    tol: str | None = Field(default=None, description="verification tolerance, rational literal")
    max_order: int | None = None
    max_size: int | None = None
    max_count: int | None = None


class HealthResponse(BaseModel):
    status: str = "ok"


class SimulateResponse(BaseModel):
    values: dict[str, str]


class DetectResponse(BaseModel):
    delta: str
    misbehaving: list[str]
    predicted: dict[str, str]


class ClosureIsland(BaseModel):
    variables: list[str]
    influences: list[str]
    boundary: list[str]
    misbehaving: list[str]


class ClosureResponse(BaseModel):
    delta: str
    misbehaving: list[str]
    islands: list[ClosureIsland]


class ResidualBody(BaseModel):
    variable: str
    route_a: str
    route_b: str
    magnitude: str


class ConflictBody(BaseModel):
    components: list[str]
    order: int
    size: int
    head: str | None = None
    residual: ResidualBody | None = None


class SearchBody(BaseModel):
    pcs_examined: int
    pcs_pruned: int
    cache_hits: int
    counts_by_order: dict[str, int]
    max_order_hit: bool
    max_size_hit: bool
    max_count_hit: bool


class IslandBody(ClosureIsland):
    conflicts: list[ConflictBody]
    diagnoses: list[list[str]] | None = None
    search: SearchBody


class ConflictsResponse(BaseModel):
    mode: str
    delta: str
    tolerance: str
    misbehaving: list[str]
    predicted: dict[str, str]
    islands: list[IslandBody]
    conflicts: list[list[str]]


class DiagnoseResponse(ConflictsResponse):
    diagnoses: list[list[str]]


class OracleConflictsResponse(BaseModel):
    conflicts: list[list[str]]


class OracleDiagnoseResponse(OracleConflictsResponse):
    diagnoses: list[list[str]]
