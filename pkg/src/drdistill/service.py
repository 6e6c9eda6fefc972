"""HTTP annotation-session service bridging the DC/QA engines and the web UI.

Stable JSON API:
    POST /sessions                  {worker_id, method} -> {token, ...}
    GET  /sessions/{t}/next         -> redacted item (never reference labels)
    POST /sessions/{t}/dc/step1     {connective} -> {options: [str]}
    POST /sessions/{t}/dc/step2     {choice} -> {status}
    POST /sessions/{t}/qa           {question_source, prefix, question_text}
    GET  /admin/export?method=&genre=   (Bearer admin token) -> votes JSONL
    GET  /healthz

Annotator-facing responses never contain sense labels: workers see
connectives and prefixes only. Votes are immutable once written (append-only
JSONL log) and carry the engine data-file version hashes in their payloads.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

import numpy as np

from . import dc as dc_engine
from . import qa as qa_engine
from .corpus import RelationItem, load_items
from .errors import (BatchComplete, ChoiceNotInList, DrDistillError,
                     DuplicateVote, EmptyInput, SessionExpired,
                     SessionStateError, Unauthorized, UnknownPrefix,
                     UnknownWorker)
from .taxonomy import default_vocabulary

BATCH_SIZE = 20

_STATUS = {
    UnknownWorker: 404,
    SessionExpired: 401,
    Unauthorized: 401,
    BatchComplete: 410,
    DuplicateVote: 409,
    SessionStateError: 409,
    ChoiceNotInList: 422,
    UnknownPrefix: 422,
    EmptyInput: 422,
}


@dataclass
class ServiceConfig:
    data_dir: Path
    items_file: Path
    workers_file: Path
    admin_token: str
    bank_file: Path | None = None
    inventory_file: Path | None = None
    dispatch_seed: int = 0
    batch_size: int = BATCH_SIZE


@dataclass
class Session:
    token: str
    worker_id: str
    method: str
    issued_at: float
    queue: list[str]
    position: int = 0
    dc_session: dc_engine.DcSession | None = None
    responses: dict[str, dict] = field(default_factory=dict)  # idempotency cache


class VoteStore:
    """Append-only, linearizable vote log with (item, worker, method) uniqueness."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()
        self._keys: set[tuple[str, str, str]] = set()
        self._votes: list[dict] = []
        if path.exists():
            for line in path.read_text("utf-8").splitlines():
                if line.strip():
                    rec = json.loads(line)
                    self._votes.append(rec)
                    self._keys.add((rec["item_id"], rec["worker_id"], rec["method"]))

    def append(self, rec: dict):
        key = (rec["item_id"], rec["worker_id"], rec["method"])
        with self._lock:
            if key in self._keys:
                raise DuplicateVote(
                    f"vote exists for item={key[0]} worker={key[1]} method={key[2]}")
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            self._keys.add(key)
            self._votes.append(rec)

    def has(self, item_id: str, worker_id: str, method: str) -> bool:
        with self._lock:
            return (item_id, worker_id, method) in self._keys

    def snapshot(self, method: str | None = None) -> list[dict]:
        with self._lock:
            votes = list(self._votes)
        if method:
            votes = [v for v in votes if v["method"] == method]
        return votes


class AnnotationService:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.vocab = default_vocabulary()
        self.items: dict[str, RelationItem] = {
            it.item_id: it for it in load_items(config.items_file, self.vocab)}
        self.item_order = list(self.items)
        self.workers: set[str] = set(
            json.loads(Path(config.workers_file).read_text("utf-8")))
        self.bank = dc_engine.load_bank(config.bank_file, self.vocab)
        self.inventory = qa_engine.load_inventory(config.inventory_file, self.vocab)
        config.data_dir.mkdir(parents=True, exist_ok=True)
        self.store = VoteStore(config.data_dir / "votes.jsonl")
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    # -- sessions ----------------------------------------------------------

    def create_session(self, worker_id: str, method: str) -> Session:
        if worker_id not in self.workers:
            raise UnknownWorker(f"worker {worker_id!r} is not registered")
        if method not in ("dc", "qa"):
            raise EmptyInput(f"method must be dc or qa, got {method!r}")
        # seeded per-worker shuffle so item position never confounds agreement
        rng = np.random.default_rng(
            [self.config.dispatch_seed, abs(hash((worker_id, method))) % (1 << 32)])
        order = [self.item_order[i] for i in rng.permutation(len(self.item_order))]
        pending = [iid for iid in order
                   if not self.store.has(iid, worker_id, method)]
        session = Session(
            token=secrets.token_hex(16),
            worker_id=worker_id,
            method=method,
            issued_at=time.time(),
            queue=pending[:self.config.batch_size],
        )
        with self._lock:
            self.sessions[session.token] = session
        return session

    def _session(self, token: str) -> Session:
        with self._lock:
            session = self.sessions.get(token)
        if session is None:
            raise SessionExpired("unknown or expired session token")
        return session

    def next_item(self, token: str) -> dict:
        s = self._session(token)
        if s.position >= len(s.queue):
            raise BatchComplete(f"all {len(s.queue)} assignments are done")
        it = self.items[s.queue[s.position]]
        if s.method == "dc" and s.dc_session is None:
            s.dc_session = dc_engine.DcSession(item_id=it.item_id)
        # redacted: the reference field never leaves the server
        return {
            "item_id": it.item_id,
            "genre": it.genre,
            "s1": it.s1,
            "s2": it.s2,
            "context": it.context,
            "position": s.position + 1,
            "total": len(s.queue),
        }

    # -- submissions -------------------------------------------------------

    def _advance(self, s: Session):
        s.position += 1
        s.dc_session = (dc_engine.DcSession(item_id=s.queue[s.position])
                        if s.method == "dc" and s.position < len(s.queue) else None)

    def submit_dc_step1(self, token: str, connective: str) -> dict:
        s = self._session(token)
        if s.method != "dc":
            raise SessionStateError("not a DC session")
        if s.position >= len(s.queue):
            raise BatchComplete("batch already complete")
        if s.dc_session is None:
            s.dc_session = dc_engine.DcSession(item_id=s.queue[s.position])
        idem = f"{s.queue[s.position]}:step1"
        if idem in s.responses:
            return s.responses[idem]
        options = dc_engine.step1(s.dc_session, connective, self.bank)
        resp = {"options": [conn for conn, _ in options]}
        s.responses[idem] = resp
        return resp

    def submit_dc_step2(self, token: str, choice: str) -> dict:
        s = self._session(token)
        if s.method != "dc" or s.dc_session is None:
            raise SessionStateError("step2 without a pending step1")
        item_id = s.queue[s.position]
        idem = f"{item_id}:step2"
        if idem in s.responses:
            raise DuplicateVote(f"step2 already submitted for {item_id}")
        sense = dc_engine.step2(s.dc_session, choice, self.bank)
        payload = dc_engine.raw_payload(s.dc_session, self.bank)
        self.store.append({
            "item_id": item_id, "method": "dc", "worker_id": s.worker_id,
            "sense": sense.id, "raw": payload,
        })
        resp = {"status": "recorded", "item_id": item_id}
        s.responses[idem] = resp
        self._advance(s)
        return resp

    def submit_qa(self, token: str, question_source: str, prefix: str,
                  question_text: str = "", answer_text: str = "") -> dict:
        s = self._session(token)
        if s.method != "qa":
            raise SessionStateError("not a QA session")
        if s.position >= len(s.queue):
            raise BatchComplete("batch already complete")
        item_id = s.queue[s.position]
        idem = f"{item_id}:qa"
        if idem in s.responses:
            raise DuplicateVote(f"QA pair already submitted for {item_id}")
        sub = qa_engine.QaSubmission(
            item_id=item_id, question_source=question_source, prefix=prefix,
            question_text=question_text, answer_text=answer_text)
        sense = qa_engine.resolve_qa(sub, self.inventory)
        payload = qa_engine.raw_payload(sub, self.inventory)
        self.store.append({
            "item_id": item_id, "method": "qa", "worker_id": s.worker_id,
            "sense": sense.id, "raw": payload,
        })
        resp = {"status": "recorded", "item_id": item_id}
        s.responses[idem] = resp
        self._advance(s)
        return resp

    # -- admin ---------------------------------------------------------------

    def export_votes(self, method: str | None = None,
                     genre: str | None = None) -> str:
        votes = self.store.snapshot(method)
        if genre:
            votes = [v for v in votes if self.items[v["item_id"]].genre == genre]
        return "".join(json.dumps(v, ensure_ascii=False) + "\n" for v in votes)


class CreateSessionBody(BaseModel):
    worker_id: str
    method: str


class DcStep1Body(BaseModel):
    connective: str


class DcStep2Body(BaseModel):
    choice: str


class QaBody(BaseModel):
    question_source: str
    prefix: str
    question_text: str = ""
    answer_text: str = ""


def create_app(config: ServiceConfig, static_dir: Path | None = None) -> FastAPI:
    svc = AnnotationService(config)
    app = FastAPI(title="drdistill annotation service")
    app.state.service = svc

    @app.exception_handler(DrDistillError)
    async def on_error(request: Request, exc: DrDistillError):
        status = _STATUS.get(type(exc), 400)
        return JSONResponse(status_code=status,
                            content={"code": type(exc).__name__, "message": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "items": len(svc.items),
                "bank_version": svc.bank.version,
                "inventory_version": svc.inventory.version}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        s = svc.create_session(body.worker_id, body.method)
        return {"token": s.token, "method": s.method, "batch_size": len(s.queue)}

    @app.get("/sessions/{token}/next")
    def next_item(token: str):
        return svc.next_item(token)

    @app.post("/sessions/{token}/dc/step1")
    def dc_step1(token: str, body: DcStep1Body):
        return svc.submit_dc_step1(token, body.connective)

    @app.post("/sessions/{token}/dc/step2")
    def dc_step2(token: str, body: DcStep2Body):
        return svc.submit_dc_step2(token, body.choice)

    @app.post("/sessions/{token}/qa")
    def qa_submit(token: str, body: QaBody):
        return svc.submit_qa(token, body.question_source, body.prefix,
                             body.question_text, body.answer_text)

    @app.get("/admin/export")
    def export(method: str | None = None, genre: str | None = None,
               authorization: str | None = Header(default=None)):
        if authorization != f"Bearer {config.admin_token}":
            raise Unauthorized("missing or wrong admin token")
        return PlainTextResponse(svc.export_votes(method, genre),
                                 media_type="application/x-ndjson")

    @app.get("/prefixes")
    def prefixes():
        # prefixes only: never the sense they map to
        return {"prefixes": sorted(svc.inventory.entries)}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
