"""HTTP labeling service: the active loop with a human (or remote) oracle.

Each session owns a similarity store and a stepwise active loop. The service
serves acquisition-selected pair tasks, ingests judgments in [-1, +1]
(averaging repeat answers), re-clusters once per completed batch, and then
materializes the next batch from fresh acquisition scores. Sessions persist
as append-only JSON-lines event logs that replay on startup.
"""
from __future__ import annotations

import json
import math
import threading
import time
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .acquisition import STRATEGY_NAMES
from .core import Clustering, SimilarityStore, pair_key
from .engine import ActiveLoop, LoopParams
from .metrics import ari


class SessionConfigModel(BaseModel):
    acquisition: str = "entropy"
    batch: Optional[int] = None
    batch_fraction: Optional[float] = None
    alpha: float = 1.0
    beta: float = 3.0
    beta_exp: float = 1.0
    subset_size: Optional[int] = None
    power_diversity: bool = True
    mf_tol: float = 1e-4
    mf_max_iters: int = 200
    max_sweeps: int = 50
    seed: int = 0
    initial_similarities: list[tuple[int, int, float]] = Field(default_factory=list)
    truth_labels: Optional[list[int]] = None


class CreateSessionModel(BaseModel):
    id: Optional[str] = None
    items: list[dict[str, Any]]
    config: SessionConfigModel = Field(default_factory=SessionConfigModel)


class AnswerModel(BaseModel):
    pair: tuple[int, int]
    value: float


class Session:
    """One labeling session: store, loop, pending batch, event log."""

    def __init__(self, sid: str, items: list[dict], config: SessionConfigModel,
                 log_path: Path | None):
        self.sid = sid
        self.items = items
        self.config = config
        self.log_path = log_path
        self.lock = threading.Lock()
        n = len(items)
        num_pairs = n * (n - 1) // 2
        if config.batch is not None:
            batch_size = config.batch
        else:
            frac = config.batch_fraction if config.batch_fraction is not None else 0.01
            batch_size = math.ceil(frac * num_pairs)
        batch_size = max(1, min(batch_size, num_pairs))
        params = LoopParams(
            acquisition=config.acquisition, batch_size=batch_size,
            alpha=config.alpha, beta=config.beta, beta_exp=config.beta_exp,
            subset_size=(config.subset_size if config.subset_size is not None
                         else 50 * n),
            power_diversity=config.power_diversity, mf_tol=config.mf_tol,
            mf_max_iters=config.mf_max_iters, max_sweeps=config.max_sweeps)
        store = SimilarityStore(n)
        for u, v, value in config.initial_similarities:
            store.record(int(u), int(v), float(value))
        self.loop = ActiveLoop(store, params, seed=config.seed)
        self.batch: list[tuple[int, int]] = self.loop.next_batch()
        self.answered: dict[tuple[int, int], float] = {}
        self.truth = (Clustering.from_labels(config.truth_labels)
                      if config.truth_labels is not None else None)

    def append_event(self, event: dict) -> None:
        if self.log_path is None:
            return
        with open(self.log_path, "a") as fp:
            fp.write(json.dumps(event) + "\n")

    def task_payload(self, pair: tuple[int, int]) -> dict:
        u, v = pair
        return {"pair": [u, v], "left": self.items[u], "right": self.items[v]}

    def pending_tasks(self, count: int) -> list[dict]:
        out = []
        for pair in self.batch:
            if pair not in self.answered:
                out.append(self.task_payload(pair))
                if len(out) >= count:
                    break
        return out

    def submit(self, u: int, v: int, value: float, replay: bool = False) -> dict:
        key = pair_key(u, v)
        if key not in self.batch:
            raise HTTPException(409, f"pair {key} is not in the pending batch")
        if key in self.answered:
            raise HTTPException(409, f"pair {key} already answered in this batch")
        if not -1.0 <= value <= 1.0:
            raise HTTPException(400, f"value {value} outside [-1, 1]")
        self.loop.record_answer(u, v, value)
        self.answered[key] = value
        if not replay:
            self.append_event({"type": "answer", "pair": list(key),
                               "value": value, "ts": time.time()})
        if len(self.answered) == len(self.batch):
            # batch complete: re-cluster with warm start, score, next batch
            self.loop.finish_iteration()
            self.batch = self.loop.next_batch()
            self.answered = {}
        return self.progress()

    def progress(self) -> dict:
        return {"answered": len(self.answered), "total": len(self.batch),
                "iteration": self.loop.iteration,
                "k": self.loop.clustering.k,
                "queried_pairs": len(self.loop.queried)}

    def snapshot(self) -> dict:
        state = {"id": self.sid, "n": len(self.items),
                 "iteration": self.loop.iteration,
                 "k": self.loop.clustering.k,
                 "labels": self.loop.clustering.labels.tolist(),
                 "queried_pairs": len(self.loop.queried),
                 "batch": {"answered": len(self.answered),
                           "total": len(self.batch)},
                 "ari": None}
        if self.truth is not None:
            state["ari"] = ari(self.loop.clustering, self.truth)
        return state


def _replay_session(log_path: Path) -> Session | None:
    with open(log_path) as fp:
        lines = [json.loads(line) for line in fp if line.strip()]
    if not lines or lines[0].get("type") != "create":
        return None
    head = lines[0]
    session = Session(head["id"], head["items"],
                      SessionConfigModel(**head["config"]), log_path)
    for event in lines[1:]:
        if event.get("type") == "answer":
            u, v = event["pair"]
            session.submit(u, v, event["value"], replay=True)
    return session


def create_app(data_dir: str | Path | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="activecc labeling service")
    sessions: dict[str, Session] = {}
    data_path = Path(data_dir) if data_dir is not None else None
    if data_path is not None:
        data_path.mkdir(parents=True, exist_ok=True)
        for log_path in sorted(data_path.glob("*.jsonl")):
            session = _replay_session(log_path)
            if session is not None:
                sessions[session.sid] = session

    def get_session(sid: str) -> Session:
        if sid not in sessions:
            raise HTTPException(404, f"unknown session {sid!r}")
        return sessions[sid]

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionModel):
        if len(body.items) < 2:
            raise HTTPException(400, "manifest needs at least 2 items")
        if body.config.acquisition not in STRATEGY_NAMES:
            raise HTTPException(400, f"unknown acquisition {body.config.acquisition!r}")
        sid = body.id or f"session-{len(sessions) + 1:04d}"
        if sid in sessions:
            raise HTTPException(409, f"session {sid!r} already exists")
        log_path = data_path / f"{sid}.jsonl" if data_path is not None else None
        session = Session(sid, body.items, body.config, log_path)
        session.append_event({"type": "create", "id": sid, "items": body.items,
                              "config": body.config.model_dump(),
                              "ts": time.time()})
        sessions[sid] = session
        return {"id": sid, "n": len(body.items),
                "batch_size": len(session.batch),
                "iteration": session.loop.iteration}

    @app.get("/sessions/{sid}/tasks")
    def next_tasks(sid: str, count: int = 1):
        session = get_session(sid)
        with session.lock:
            return {"tasks": session.pending_tasks(count),
                    **session.progress()}

    @app.post("/sessions/{sid}/answers")
    def submit_answer(sid: str, body: AnswerModel):
        session = get_session(sid)
        with session.lock:
            return session.submit(body.pair[0], body.pair[1], body.value)

    @app.get("/sessions/{sid}/state")
    def get_state(sid: str):
        session = get_session(sid)
        with session.lock:
            return session.snapshot()

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app
