"""HTTP service exposing compilation, evaluation, optics and game play.

All endpoints live under /api/v1 and speak JSON; errors use
{"error": {"code": ..., "message": ...}} with 400/404/500 semantics.
Program and session documents persist through the file store, so a
restart on the same data directory loses nothing.
"""
from __future__ import annotations

import datetime
import secrets
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import decompose as dec
from . import fabric, game, optics
from .circuits import StateVector, basis_state, bitstring, format_circuit
from .linalg import (
    NonUnitaryError,
    SingleQubitParams,
    phase_invariant_error,
    unitary_from_json,
    unitary_to_json,
)
from .store import BadDocument, NotFound, Store


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


class UnitaryModel(BaseModel):
    dim: int
    entries: list[list[list[float]]]


class ParamsModel(BaseModel):
    theta0: float = 0.0
    theta1: float
    theta2: float
    theta3: float

    def to_params(self) -> SingleQubitParams:
        return SingleQubitParams(self.theta0, self.theta1, self.theta2, self.theta3)


class EvaluateRequest(BaseModel):
    program: dict
    state: str | None = None
    target: UnitaryModel | None = None


class ProgramPut(BaseModel):
    label: str = ""
    program: dict


class PayoffsModel(BaseModel):
    cc: tuple[float, float] = (3.0, 3.0)
    cd: tuple[float, float] = (0.0, 5.0)
    dc: tuple[float, float] = (5.0, 0.0)
    dd: tuple[float, float] = (1.0, 1.0)


class GameConfigModel(BaseModel):
    gamma: float = 0.0
    payoffs: PayoffsModel = PayoffsModel()
    j_convention: Literal["paper", "alternative"] = "paper"

    def to_config(self) -> game.GameConfig:
        p = game.PayoffMatrix(
            cc=tuple(self.payoffs.cc),
            cd=tuple(self.payoffs.cd),
            dc=tuple(self.payoffs.dc),
            dd=tuple(self.payoffs.dd),
        )
        return game.GameConfig(self.gamma, p, self.j_convention)


class MoveRequest(BaseModel):
    u_a: ParamsModel
    u_b: ParamsModel


class PhotonModel(BaseModel):
    aH: tuple[float, float]
    aV: tuple[float, float]

    def to_photon(self) -> optics.PhotonQubit:
        return optics.PhotonQubit(
            complex(*self.aH), complex(*self.aV)
        ).validate()


class OpticsRequest(BaseModel):
    control: PhotonModel
    target: PhotonModel
    ancilla: Literal["bell", "product"] = "bell"
    shots: int = Field(default=0, ge=0)
    seed: int = 0


def _state_json(s: StateVector) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in s.amps]


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _load_program(obj: dict) -> fabric.CellProgram:
    try:
        return fabric.program_from_json(obj)
    except ValueError as exc:
        raise ApiError(400, "bad_program", str(exc)) from exc


def _session_doc_to_config(doc: dict) -> game.GameConfig:
    cfg = doc["config"]
    return game.GameConfig(
        float(cfg["gamma"]),
        game.payoffs_from_json(cfg["payoffs"]),
        cfg["j_convention"],
    )


def create_app(data_dir: str | Path, allow_origin: str | None = None) -> FastAPI:
    app = FastAPI(title="qcell service", version="1")
    store = Store(data_dir)
    if allow_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[allow_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            {"error": {"code": exc.code, "message": exc.message}},
            status_code=exc.status,
        )

    @app.exception_handler(NotFound)
    async def _not_found(_req: Request, exc: NotFound):
        return JSONResponse(
            {"error": {"code": "not_found", "message": str(exc)}}, status_code=404
        )

    @app.exception_handler(BadDocument)
    async def _bad_doc(_req: Request, exc: BadDocument):
        return JSONResponse(
            {"error": {"code": "bad_document", "message": str(exc)}}, status_code=400
        )

    @app.exception_handler(RequestValidationError)
    async def _validation(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            {"error": {"code": "validation_error", "message": str(exc.errors())}},
            status_code=400,
        )

    @app.exception_handler(StarletteHTTPException)
    async def _http_exc(_req: Request, exc: StarletteHTTPException):
        return JSONResponse(
            {"error": {"code": "http_error", "message": str(exc.detail)}},
            status_code=exc.status_code,
        )

    @app.exception_handler(Exception)
    async def _internal(_req: Request, exc: Exception):
        return JSONResponse(
            {"error": {"code": "internal", "message": str(exc)}}, status_code=500
        )

    @app.post("/api/v1/compile")
    def compile_unitary(body: UnitaryModel):
        try:
            u = unitary_from_json(body.model_dump())
        except ValueError as exc:
            raise ApiError(400, "bad_unitary", str(exc)) from exc
        if u.shape != (4, 4):
            raise ApiError(400, "bad_unitary", "compile expects a 4x4 unitary")
        try:
            d, _ = dec.kak_decompose(u)
        except (NonUnitaryError, dec.DecompositionError) as exc:
            raise ApiError(400, "bad_unitary", str(exc)) from exc
        circuit = dec.vidal_dawson_circuit(d)
        prog = fabric.compile_circuit(circuit)
        err = phase_invariant_error(fabric.program_to_unitary(prog), u)
        return {
            "decomposition": {
                "theta0": d.theta0,
                "theta": list(d.theta),
                "u_a": unitary_to_json(d.u_a),
                "u_b": unitary_to_json(d.u_b),
                "v_a": unitary_to_json(d.v_a),
                "v_b": unitary_to_json(d.v_b),
                "circuit": format_circuit(circuit),
            },
            "program": fabric.program_to_json(prog),
            "reconstruction_error": err,
        }

    @app.post("/api/v1/evaluate")
    def evaluate(body: EvaluateRequest):
        prog = _load_program(body.program)
        u = fabric.program_to_unitary(prog)
        out = {"n": prog.n, "unitary": unitary_to_json(u)}
        if body.state is not None:
            try:
                s0 = basis_state(prog.n, body.state)
            except ValueError as exc:
                raise ApiError(400, "bad_state", str(exc)) from exc
            amps = u @ s0.amps
            final = StateVector(prog.n, amps)
            out["state"] = _state_json(final)
            out["probabilities"] = {
                bitstring(prog.n, k): float(p)
                for k, p in enumerate(final.probabilities())
                if p > 1e-12
            }
        if body.target is not None:
            try:
                t = unitary_from_json(body.target.model_dump())
            except ValueError as exc:
                raise ApiError(400, "bad_target", str(exc)) from exc
            if t.shape != u.shape:
                raise ApiError(400, "bad_target", "target dimension mismatch")
            out["target_error"] = phase_invariant_error(u, t)
        return out

    @app.put("/api/v1/programs/{program_id}")
    def put_program(program_id: str, body: ProgramPut):
        _load_program(body.program)  # validate before persisting
        existing_created = None
        if store.exists("programs", program_id):
            existing_created = store.get("programs", program_id).get("created_at")
        doc = {
            "label": body.label,
            "program": body.program,
            "created_at": existing_created or _now(),
        }
        data = store.put("programs", program_id, doc)
        return Response(content=data, media_type="application/json")

    @app.get("/api/v1/programs/{program_id}")
    def get_program(program_id: str):
        data = store.get_bytes("programs", program_id)
        store.get("programs", program_id)  # schema check
        return Response(content=data, media_type="application/json")

    @app.get("/api/v1/programs")
    def list_programs():
        return {"programs": store.list_ids("programs")}

    @app.delete("/api/v1/programs/{program_id}")
    def delete_program(program_id: str):
        store.delete("programs", program_id)
        return {"deleted": program_id}

    @app.post("/api/v1/game/sessions")
    def create_session(body: GameConfigModel):
        cfg = body.to_config()
        session_id = secrets.token_urlsafe(8)
        doc = {
            "config": {
                "gamma": cfg.gamma,
                "payoffs": game.payoffs_to_json(cfg.payoffs),
                "j_convention": cfg.j_convention,
            },
            "history": [],
            "created_at": _now(),
        }
        store.put("sessions", session_id, doc)
        return {"id": session_id}

    @app.get("/api/v1/game/sessions/{session_id}")
    def get_session(session_id: str):
        data = store.get_bytes("sessions", session_id)
        store.get("sessions", session_id)
        return Response(content=data, media_type="application/json")

    @app.post("/api/v1/game/sessions/{session_id}/moves")
    def post_move(session_id: str, body: MoveRequest):
        with store.lock("sessions", f"move-{session_id}"):
            doc = store.get("sessions", session_id)
            try:
                cfg = _session_doc_to_config(doc)
            except (KeyError, ValueError) as exc:
                raise ApiError(400, "bad_session", str(exc)) from exc
            result = game.play(cfg, body.u_a.to_params(), body.u_b.to_params())
            record = {
                "u_a": list(body.u_a.to_params().as_tuple()),
                "u_b": list(body.u_b.to_params().as_tuple()),
                "outcome_probs": list(result.outcome_probs),
                "payoff_a": result.payoff_a,
                "payoff_b": result.payoff_b,
            }
            doc["history"].append(record)
            store.put("sessions", session_id, doc)
        return {
            "payoff_a": result.payoff_a,
            "payoff_b": result.payoff_b,
            "outcome_probs": list(result.outcome_probs),
            "move_index": len(doc["history"]) - 1,
        }

    @app.post("/api/v1/optics/run")
    def optics_run(body: OpticsRequest):
        try:
            control = body.control.to_photon()
            target = body.target.to_photon()
        except optics.OpticsError as exc:
            raise ApiError(400, "bad_photon", str(exc)) from exc
        outcomes, failure = optics.simulate_cnot_setup(control, target, body.ancilla)
        report = {
            "outcomes": [
                {
                    "detectors": f"{o.control_side},{o.target_side}",
                    "probability": o.probability,
                    "post_state": _state_json(o.post_state),
                    "corrected_state": _state_json(optics.feed_forward_correct(o)),
                }
                for o in outcomes
            ],
            "failure_probability": failure,
            "channel_matrix": unitary_to_json(optics.corrected_channel(body.ancilla)),
        }
        if body.shots > 0:
            report["counts"] = optics.sample_run(
                control, target, body.ancilla, body.seed, body.shots
            )
        return report

    return app
