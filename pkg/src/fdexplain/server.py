"""Local HTTP API hosting closures, proof trees, and diagnosis sessions.

State is in-memory and per-process; ids are random tokens.  Every payload
uses the JSON schema from `lang`, so the CLI and the API speak one language.
"""

from __future__ import annotations

import secrets
import time
from dataclasses import dataclass, field
from threading import Lock
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import diagnosis as dx
from . import lang
from .engine import Closure, chaotic_iteration, compile_program, explanation_for
from .model import Csp, ValuePair


class ModelBody(BaseModel):
    text: str
    seed: int | None = None


class SessionBody(BaseModel):
    var: str
    value: int
    strategy: str = dx.Strategy.DIVIDE_AND_CONQUER.value


class AnswerBody(BaseModel):
    answer: str


@dataclass
class _ModelEntry:
    model_id: str
    text: str
    csp: Csp
    closure: Closure
    operator_text: dict[int, str]


@dataclass
class _SessionEntry:
    session_id: str
    model_id: str
    session: dx.DiagnosisSession
    created_at: float
    lock: Lock = field(default_factory=Lock)


def _model_payload(entry: _ModelEntry) -> dict[str, Any]:
    space = entry.csp.space
    return {
        "model_id": entry.model_id,
        "model_hash": lang.model_hash(entry.text),
        "variables": [
            {"name": v.name, "values": list(v.values)} for v in space.variables
        ],
        "closure": {
            v.name: list(entry.closure.final_env.values(v.id))
            for v in space.variables
        },
        "removed": len(entry.closure.store),
    }


def _session_payload(models: dict[str, _ModelEntry], entry: _SessionEntry) -> dict[str, Any]:
    model = models[entry.model_id]
    space = model.csp.space
    session = entry.session
    result = None
    if session.done:
        result = lang.diagnosis_payload(session.result(), space, model.operator_text)
    return {
        "session_id": entry.session_id,
        "model_id": entry.model_id,
        "state": session.state,
        "strategy": session.strategy.value,
        "created_at": entry.created_at,
        "question": lang.question_payload(session, space),
        "transcript": [
            {"var": space.name(p.var), "value": p.value, "answer": a.value}
            for p, a in session.transcript
        ],
        "tree": lang.session_tree_payload(session, space),
        "result": result,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="fdexplain", version="0.1.0")
    # the browser client may be served from a file or another local port
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    models: dict[str, _ModelEntry] = {}
    sessions: dict[str, _SessionEntry] = {}

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def get_model(model_id: str) -> _ModelEntry:
        entry = models.get(model_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id}")
        return entry

    def get_session(session_id: str) -> _SessionEntry:
        entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return entry

    def parse_pair(entry: _ModelEntry, var: str, value: int) -> ValuePair:
        try:
            return entry.csp.space.pair(var, value)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None

    def fresh_id(taken: dict[str, Any]) -> str:
        while True:
            token = secrets.token_hex(8)
            if token not in taken:
                return token

    @app.post("/models")
    def post_model(body: ModelBody) -> dict[str, Any]:
        try:
            csp = lang.parse_model(body.text)
        except lang.ParseError as exc:
            raise HTTPException(
                status_code=400,
                detail={"error": "parse", "line": exc.line, "col": exc.col,
                        "message": exc.message},
            ) from None
        program = compile_program(csp)
        closure = chaotic_iteration(program, seed=body.seed)
        model_id = fresh_id(models)
        models[model_id] = _ModelEntry(
            model_id=model_id,
            text=body.text,
            csp=csp,
            closure=closure,
            operator_text=lang.operator_text_index(program.operators, csp.space),
        )
        return _model_payload(models[model_id])

    @app.get("/models/{model_id}")
    def get_model_summary(model_id: str) -> dict[str, Any]:
        return _model_payload(get_model(model_id))

    @app.get("/models/{model_id}/explanation")
    def get_explanation(model_id: str, var: str, value: int) -> dict[str, Any]:
        entry = get_model(model_id)
        pair = parse_pair(entry, var, value)
        tree = explanation_for(entry.closure, pair)
        if tree is None:
            return {"kept": True, "pair": lang.pair_payload(pair, entry.csp.space)}
        doc = lang.export_explanation(
            tree,
            entry.csp.space,
            model_hash_value=lang.model_hash(entry.text),
            schedule_seed=entry.closure.seed,
        )
        return {"kept": False, **doc.to_dict()}

    @app.post("/models/{model_id}/sessions")
    def post_session(model_id: str, body: SessionBody) -> dict[str, Any]:
        entry = get_model(model_id)
        pair = parse_pair(entry, body.var, body.value)
        try:
            strategy = dx.Strategy(body.strategy)
        except ValueError:
            raise HTTPException(
                status_code=400, detail=f"unknown strategy {body.strategy!r}"
            ) from None
        tree = explanation_for(entry.closure, pair)
        if tree is None:
            raise HTTPException(
                status_code=400,
                detail=f"not a symptom: {entry.csp.space.render_pair(pair)} was kept",
            )
        session = dx.new_session(tree, strategy)
        session_id = fresh_id(sessions)
        sessions[session_id] = _SessionEntry(
            session_id=session_id,
            model_id=model_id,
            session=session,
            created_at=time.time(),
        )
        return _session_payload(models, sessions[session_id])

    @app.get("/sessions/{session_id}")
    def get_session_state(session_id: str) -> dict[str, Any]:
        return _session_payload(models, get_session(session_id))

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, body: AnswerBody) -> dict[str, Any]:
        entry = get_session(session_id)
        try:
            answer = dx.Answer.parse(body.answer)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        with entry.lock:
            if entry.session.done:
                raise HTTPException(
                    status_code=409, detail="session already reached its verdict"
                )
            pending = entry.session.pending_node
            assert pending is not None
            entry.session.answer(pending.pair, answer)
        return _session_payload(models, entry)

    return app
