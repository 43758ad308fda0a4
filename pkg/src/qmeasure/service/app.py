"""FastAPI application exposing the simulator over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import runners
from .schemas import (
    ChshRequest,
    DeviceRunsRequest,
    DoubleSlitRequest,
    MachZehnderRequest,
    MeasureRequest,
    NosignalRequest,
    ProfileReport,
    Report,
    SternGerlachRequest,
    VerifyReport,
    VerifyRequest,
)

app = FastAPI(
    title="qmeasure",
    version="0.1.0",
    description=(
        "Two-step measurement simulator: entangling marking plus macroscopic "
        "detection, with no-signaling and interference experiments."
    ),
)


@app.exception_handler(ValueError)
async def _value_error_handler(_: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok"}


@app.post("/measure", response_model=Report)
def measure(req: MeasureRequest) -> Report:
    return runners.run_measure(req)


@app.post("/sg", response_model=Report)
def stern_gerlach(req: SternGerlachRequest) -> Report:
    return runners.run_stern_gerlach(req)


@app.post("/mz", response_model=Report)
def mach_zehnder(req: MachZehnderRequest) -> Report:
    return runners.run_mach_zehnder(req)


@app.post("/double-slit", response_model=ProfileReport)
def double_slit(req: DoubleSlitRequest) -> ProfileReport:
    return runners.run_double_slit(req)


@app.post("/chsh", response_model=Report)
def chsh(req: ChshRequest) -> Report:
    return runners.run_chsh(req)


@app.post("/nosignal", response_model=Report)
def nosignal(req: NosignalRequest) -> Report:
    return runners.run_nosignal(req)


@app.post("/device-runs", response_model=Report)
def device_runs(req: DeviceRunsRequest) -> Report:
    return runners.run_device_runs(req)


@app.post("/verify", response_model=VerifyReport)
def verify(req: VerifyRequest) -> VerifyReport:
    return runners.run_verify(req)
