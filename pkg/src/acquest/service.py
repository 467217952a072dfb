"""Live questionnaire sessions over HTTP.

A session owns one adaptive engine; a respondent (human via the survey UI,
or any JSON client) fetches the outstanding query, submits a choice, and
repeats until the query budget is exhausted.  Sessions are kept in process;
an optional persistence directory stores each session as its config plus an
append-only response log, from which the full posterior state is recomputed
on reload (responses are the source of truth).
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .designs import DesignSpace
from .engine import STRATEGIES, AdaptiveEngine

DEFAULT_BUDGET = 20
DEFAULT_SAMPLES = 1000
DEFAULT_CANDIDATES = 100


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class SessionConfig(BaseModel):
    strategy: str = "gisa"
    budget: int = Field(default=DEFAULT_BUDGET, ge=0)
    sample_size: int = Field(default=DEFAULT_SAMPLES, ge=1)
    candidate_size: int = Field(default=DEFAULT_CANDIDATES, ge=2)
    seed: int = 0
    competitor_index: int | None = None


class ResponseBody(BaseModel):
    query_id: str
    chosen: int


@dataclass
class Session:
    id: str
    config: SessionConfig
    space: DesignSpace
    engine: AdaptiveEngine
    responses: list[dict] = field(default_factory=list)
    entropy_trajectory: list[float] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def status(self) -> str:
        return "complete" if self.engine.complete else "awaiting-response"

    @property
    def outstanding_query_id(self) -> str | None:
        if self.engine.complete:
            return None
        return f"q{self.engine.n_responses + 1}"


def _design_card(space: DesignSpace, index: int) -> dict:
    design = space.designs[index]
    return {
        "design_index": index,
        "attributes": [{"attribute": name, "unit": unit, "level": level}
                       for name, unit, level in
                       space.schema.level_labels(design.level_index)],
        "price": design.price,
    }


def _query_payload(session: Session) -> dict:
    i, j = session.engine.current_query
    return {
        "query_id": session.outstanding_query_id,
        "left": _design_card(session.space, i),
        "right": _design_card(session.space, j),
        "asked": session.engine.n_responses,
        "budget": session.engine.budget,
    }


def _top_masses(session: Session, n: int = 10) -> list[dict]:
    return [{"design_index": k, "pi": p,
             "levels": list(session.space.designs[k].level_index)}
            for k, p in session.engine.state.masses.top(n)]


def _summary(session: Session) -> dict:
    return {
        "id": session.id,
        "status": session.status,
        "q": session.engine.n_responses,
        "budget": session.engine.budget,
        "entropy_bits": session.engine.state.masses.entropy_bits,
        "top": _top_masses(session),
    }


class SessionStore:
    """In-process session map with optional file-backed persistence."""

    def __init__(self, space: DesignSpace, persist_dir=None):
        self.space = space
        self.persist_dir = Path(persist_dir) if persist_dir else None
        self.sessions: dict[str, Session] = {}
        if self.persist_dir:
            self.persist_dir.mkdir(parents=True, exist_ok=True)
            self._reload()

    def _build_engine(self, config: SessionConfig) -> tuple[DesignSpace, AdaptiveEngine]:
        if config.strategy not in STRATEGIES:
            raise ServiceError(422, "unknown-strategy",
                               f"strategy must be one of {STRATEGIES}")
        if config.competitor_index is not None:
            space = self.space.with_competitor(config.competitor_index)
        elif self.space.competitor is not None:
            space = self.space
        else:
            comp_rng = np.random.default_rng(
                np.random.SeedSequence(config.seed).spawn(1)[0])
            space = self.space.with_competitor(int(comp_rng.integers(self.space.size)))
        engine = AdaptiveEngine(space.market(), config.strategy, config.budget,
                                config.sample_size, config.candidate_size,
                                seed=np.random.SeedSequence(config.seed).spawn(2)[1])
        return space, engine

    def create(self, config: SessionConfig) -> Session:
        space, engine = self._build_engine(config)
        session = Session(uuid.uuid4().hex, config, space, engine)
        session.entropy_trajectory.append(engine.state.masses.entropy_bits)
        self.sessions[session.id] = session
        self._persist(session)
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ServiceError(404, "session-not-found",
                               f"no session {session_id!r}") from None

    def submit(self, session: Session, body: ResponseBody) -> dict:
        with session.lock:
            if session.engine.complete:
                raise ServiceError(409, "session-complete",
                                   "the questionnaire already ended")
            if body.query_id != session.outstanding_query_id:
                raise ServiceError(409, "stale-query",
                                   f"outstanding query is "
                                   f"{session.outstanding_query_id!r}, "
                                   f"got {body.query_id!r}")
            pair = session.engine.current_query
            if body.chosen not in pair:
                raise ServiceError(422, "invalid-choice",
                                   f"chosen design must be one of {pair}")
            loser = pair[1] if body.chosen == pair[0] else pair[0]
            state = session.engine.absorb(body.chosen, loser)
            session.responses.append({"query_id": body.query_id,
                                      "left": pair[0], "right": pair[1],
                                      "chosen": body.chosen})
            session.entropy_trajectory.append(state.masses.entropy_bits)
            session.updated_at = time.time()
            self._persist(session)
            return _summary(session)

    # -- persistence -------------------------------------------------------

    def _persist(self, session: Session) -> None:
        if not self.persist_dir:
            return
        payload = {
            "id": session.id,
            "config": session.config.model_dump(),
            "responses": session.responses,
            "created_at": session.created_at,
        }
        path = self.persist_dir / f"{session.id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, indent=2))
        tmp.replace(path)

    def _reload(self) -> None:
        for path in sorted(self.persist_dir.glob("*.json")):
            payload = json.loads(path.read_text())
            config = SessionConfig(**payload["config"])
            space, engine = self._build_engine(config)
            session = Session(payload["id"], config, space, engine,
                              created_at=payload.get("created_at", time.time()))
            session.entropy_trajectory.append(engine.state.masses.entropy_bits)
            for record in payload["responses"]:
                pair = engine.current_query
                if pair is None or set(pair) != {record["left"], record["right"]}:
                    raise ServiceError(500, "corrupt-log",
                                       f"stored responses for {session.id} do not "
                                       f"replay against the engine")
                chosen = record["chosen"]
                loser = pair[1] if chosen == pair[0] else pair[0]
                state = engine.absorb(chosen, loser)
                session.responses.append(record)
                session.entropy_trajectory.append(state.masses.entropy_bits)
            self.sessions[session.id] = session


def create_app(space: DesignSpace, persist_dir=None, static_dir=None,
               defaults: SessionConfig | None = None) -> FastAPI:
    """Build the questionnaire service around one design space."""
    app = FastAPI(title="acquest session service")
    store = SessionStore(space, persist_dir)
    app.state.store = store
    base = defaults or SessionConfig()

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"code": "validation-error",
                                     "message": str(exc.errors())})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(store.sessions)}

    @app.post("/sessions", status_code=201)
    def create_session(config: SessionConfig | None = None):
        merged = base.model_copy(update=(config.model_dump(exclude_unset=True)
                                         if config else {}))
        session = store.create(merged)
        payload = _summary(session)
        if not session.engine.complete:
            payload["query"] = _query_payload(session)
        return payload

    @app.get("/sessions/{session_id}/query")
    def next_query(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if session.engine.complete:
                raise ServiceError(409, "session-complete",
                                   "the questionnaire already ended")
            return _query_payload(session)

    @app.post("/sessions/{session_id}/responses")
    def submit_response(session_id: str, body: ResponseBody):
        session = store.get(session_id)
        result = store.submit(session, body)
        if not session.engine.complete:
            result["query"] = _query_payload(session)
        return result

    @app.get("/sessions/{session_id}/state")
    def session_state(session_id: str):
        session = store.get(session_id)
        with session.lock:
            payload = _summary(session)
            payload.update({
                "strategy": session.config.strategy,
                "entropy_trajectory": list(session.entropy_trajectory),
                "map_partworth": session.engine.state.posterior.map().w.tolist(),
                "recommendation": _top_masses(session, 1)[0],
                "created_at": session.created_at,
                "updated_at": session.updated_at,
            })
            return payload

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
