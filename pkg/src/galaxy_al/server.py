"""Human-in-the-loop labeling service.

Serves sequential bisection queries over HTTP: a session holds one score
matrix, a labeled set and the within-batch selection state, and enforces
exactly one outstanding query at a time (each query depends on the previous
answer, so labels can never be taken out of order).  Every state change is
appended to a per-session JSON-lines event log; replaying the log after a
crash reproduces the identical query sequence because selection is
deterministic given (scores, seed, labels).

New scores between batches arrive via PUT /sessions/{id}/scores; the server
never trains models itself.
"""

from __future__ import annotations

import base64
import json
import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .builder import validate_score_matrix
from .core import GalaxyError, InputError, LabeledSet
from .engine import BatchSelection
from .simpool import id_label_fraction

MAX_SCORE_ENTRIES = 2_000_000

STATE_AWAITING = "awaiting-label"
STATE_BATCH_COMPLETE = "batch-complete"
STATE_EXHAUSTED = "exhausted"


class Session:
    """One labeling session: scores, config, event log and selection state."""

    def __init__(self, session_id: str, log_path: Path):
        self.id = session_id
        self.log_path = log_path
        self.lock = threading.Lock()
        self.scores: np.ndarray | None = None
        self.meta: dict[str, str] = {}
        self.config: dict = {}
        self.labeled = LabeledSet()
        self.batch_index = 0
        self.selection: BatchSelection | None = None

    # -- event log ---------------------------------------------------------

    def append_event(self, event: dict) -> None:
        with open(self.log_path, "a") as f:
            f.write(json.dumps(event) + "\n")

    def apply_event(self, event: dict) -> None:
        kind = event["type"]
        if kind == "create":
            self.config = event["config"]
            self.meta = event.get("meta") or {}
            self.scores = validate_score_matrix(np.asarray(event["scores"]))
            for idx, lbl in self.config.get("seed_labels", []):
                self.labeled.add(int(idx), int(lbl), "seed-round")
            self._start_batch()
        elif kind == "label":
            assert self.selection is not None
            self.selection.submit(int(event["example_id"]), int(event["class"]))
        elif kind == "scores":
            self.scores = validate_score_matrix(np.asarray(event["scores"]))
            self.batch_index += 1
            self._start_batch()
        else:
            raise GalaxyError(f"unknown event type {kind!r}")

    def record(self, event: dict) -> None:
        self.apply_event(event)
        self.append_event(event)

    @staticmethod
    def replay(session_id: str, log_path: Path) -> "Session":
        session = Session(session_id, log_path)
        with open(log_path) as f:
            for line in f:
                if line.strip():
                    session.apply_event(json.loads(line))
        return session

    # -- selection ---------------------------------------------------------

    def _start_batch(self) -> None:
        rng = np.random.default_rng([int(self.config["seed"]), self.batch_index])
        self.selection = BatchSelection(
            self.scores, self.labeled, int(self.config["batch_size"]), rng
        )

    @property
    def state(self) -> str:
        if self.selection is not None and not self.selection.done:
            return STATE_AWAITING
        if len(self.labeled) >= (self.scores.shape[0] if self.scores is not None else 0):
            return STATE_EXHAUSTED
        return STATE_BATCH_COMPLETE

    @property
    def outstanding(self) -> int | None:
        return self.selection.pending if self.selection else None

    def next_payload(self) -> dict | None:
        x = self.outstanding
        if x is None:
            return None
        return {"example_id": x, "meta": self.meta.get(str(x))}

    def id_classes(self) -> set[int]:
        k = self.scores.shape[1]
        return set(range(k - 1))

    def summary(self) -> dict:
        frac = (
            id_label_fraction(self.labeled, self.id_classes())
            if len(self.labeled)
            else 0.0
        )
        return {"id_label_fraction": frac, "labels_used": len(self.labeled)}

    def snapshot(self) -> dict:
        history = [
            {
                "example_id": x,
                "class": lbl,
                "provenance": self.labeled.provenance.get(x, ""),
            }
            for x, lbl in self.labeled.entries.items()
        ]
        return {
            "session_id": self.id,
            "k": int(self.scores.shape[1]) if self.scores is not None else None,
            "state": self.state,
            "next": self.next_payload(),
            "labeled": history,
            "ord": self.selection.graphs.ord if self.selection else None,
            "batch_index": self.batch_index,
            "batch_progress": len(self.selection.batch) if self.selection else 0,
            "config": self.config,
            "metrics": self.summary(),
        }


def _scores_from_body(body: dict) -> list:
    if "scores" in body:
        return body["scores"]
    if "scores_path" in body:
        from . import scorefile

        return scorefile.read_scores(body["scores_path"]).tolist()
    if "scores_b64" in body:
        from io import BytesIO

        from . import scorefile

        raw = base64.b64decode(body["scores_b64"])
        tmp = Path(f"/tmp/gxsm-{uuid.uuid4().hex}.bin")
        tmp.write_bytes(raw)
        try:
            return scorefile.read_scores(tmp).tolist()
        finally:
            tmp.unlink(missing_ok=True)
    raise InputError("body needs one of 'scores', 'scores_path', 'scores_b64'")


def create_app(data_dir: str | Path) -> FastAPI:
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="galaxy labeling service")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        with registry_lock:
            if session_id in sessions:
                return sessions[session_id]
            log_path = data_dir / f"{session_id}.jsonl"
            if log_path.exists():
                session = Session.replay(session_id, log_path)
                sessions[session_id] = session
                return session
        raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.json()
        config = body.get("config") or {}
        try:
            scores = _scores_from_body(body)
            b = int(config.get("batch_size", 0))
            if b < 1:
                raise InputError(f"batch_size must be >= 1, got {b}")
            config.setdefault("seed", 0)
            config["batch_size"] = b
            seed_labels = config.get("seed_labels", [])
            if len({int(i) for i, _ in seed_labels}) != len(seed_labels):
                raise InputError("duplicate ids in seed_labels")
            n_entries = len(scores) * (len(scores[0]) if scores else 0)
            if n_entries > MAX_SCORE_ENTRIES:
                return JSONResponse(
                    status_code=413,
                    content={"detail": f"score matrix too large ({n_entries} entries)"},
                )
            session_id = uuid.uuid4().hex
            session = Session(session_id, data_dir / f"{session_id}.jsonl")
            session.record(
                {
                    "type": "create",
                    "config": config,
                    "meta": body.get("meta") or {},
                    "scores": scores,
                }
            )
        except (GalaxyError, ValueError, TypeError) as e:
            raise HTTPException(status_code=400, detail=str(e)) from e
        with registry_lock:
            sessions[session_id] = session
        return {"session_id": session_id, "next": session.next_payload()}

    @app.post("/sessions/{session_id}/labels")
    async def submit_label(session_id: str, request: Request):
        session = get_session(session_id)
        body = await request.json()
        with session.lock:
            try:
                example_id = int(body["example_id"])
                label = int(body["class"])
            except (KeyError, TypeError, ValueError) as e:
                raise HTTPException(status_code=400, detail=str(e)) from e
            if session.outstanding is None or example_id != session.outstanding:
                raise HTTPException(
                    status_code=409,
                    detail=(
                        f"example {example_id} is not the outstanding query "
                        f"({session.outstanding})"
                    ),
                )
            try:
                session.record(
                    {"type": "label", "example_id": example_id, "class": label}
                )
            except GalaxyError as e:
                raise HTTPException(status_code=400, detail=str(e)) from e
            if session.outstanding is not None:
                return {"next": session.next_payload()}
            return {"state": session.state, "summary": session.summary()}

    @app.get("/sessions/{session_id}")
    async def session_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return session.snapshot()

    @app.put("/sessions/{session_id}/scores")
    async def update_scores(session_id: str, request: Request):
        session = get_session(session_id)
        with session.lock:
            if session.state == STATE_AWAITING:
                raise HTTPException(
                    status_code=409, detail="cannot swap scores mid-batch"
                )
            content_type = request.headers.get("content-type", "")
            try:
                if content_type.startswith("application/octet-stream"):
                    raw = await request.body()
                    scores = _scores_from_body(
                        {"scores_b64": base64.b64encode(raw).decode()}
                    )
                else:
                    scores = _scores_from_body(await request.json())
                session.record({"type": "scores", "scores": scores})
            except (GalaxyError, ValueError) as e:
                raise HTTPException(status_code=400, detail=str(e)) from e
            return {"next": session.next_payload(), "state": session.state}

    ui_dir = _ui_dist_dir()
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _ui_dist_dir() -> Path | None:
    """Locate the built labeler frontend, if present."""
    here = Path(__file__).resolve()
    for base in [here.parents[2], *here.parents[2:4]]:
        cand = base / "frontend" / "dist"
        if cand.is_dir():
            return cand
    return None
