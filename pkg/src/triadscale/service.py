"""Live triplet-collection HTTP service.

Runs participant sessions through a practice phase, a main schedule
(optionally expanded from a repeat block), advisory breaks, and
server-side answer timing.  State is persisted to an append-only
JSON-lines journal so a restart reconstructs every session exactly.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .model import DataError, Triplet, TripletResponse, responses_to_csv_text

DEFAULT_TIMEOUT_MS = 4500
DEFAULT_FIXATION_MS = 300
DEFAULT_BREAK_EVERY = 200
DEFAULT_REPEATS = 3
DEFAULT_SUBSET = 2000


class RepeatBlock(BaseModel):
    subset_size: int = DEFAULT_SUBSET
    repeats: int = DEFAULT_REPEATS
    shuffle: bool = True


class ScheduleConfigModel(BaseModel):
    stimulus_labels: list[str]
    stimulus_assets: list[str] = Field(default_factory=list)
    main_triplets: list[list[int]]
    practice_triplets: list[list[int]] = Field(default_factory=list)
    repeat_block: Optional[RepeatBlock] = None
    answer_timeout_ms: int = DEFAULT_TIMEOUT_MS
    fixation_ms: int = DEFAULT_FIXATION_MS
    break_every: int = DEFAULT_BREAK_EVERY
    shuffle_seed: int = 0


class CreateSessionRequest(BaseModel):
    participant_id: str
    schedule: ScheduleConfigModel


class AnswerRequest(BaseModel):
    triplet_index: int
    choice: str  # "opt1" | "opt2"
    client_rt_ms: Optional[float] = None


@dataclass
class ScheduledQuestion:
    triplet: Triplet
    phase: str  # "practice" | "main"
    repeat_index: Optional[int] = None


def build_sequence(schedule: ScheduleConfigModel) -> list:
    """Practice questions followed by the main sequence.  A repeat block
    replaces the plain main list with `repeats` independently shuffled
    passes over the first `subset_size` main triplets, so participants
    do not notice the repetition."""
    n = len(schedule.stimulus_labels)
    if n < 3:
        raise DataError("need at least 3 stimuli")

    def to_triplets(rows, what):
        out = []
        for row in rows:
            t = Triplet(*[int(x) for x in row])
            t.validate_for(n)
            out.append(t)
        return out

    practice = to_triplets(schedule.practice_triplets, "practice")
    main = to_triplets(schedule.main_triplets, "main")
    if not main:
        raise DataError("main triplet list must not be empty")
    overlap = set(map(tuple_of, practice)) & set(map(tuple_of, main))
    if overlap:
        raise DataError(f"practice and main triplet sets must be disjoint ({len(overlap)} shared)")
    if schedule.answer_timeout_ms <= schedule.fixation_ms or schedule.fixation_ms <= 0:
        raise DataError("need answer_timeout_ms > fixation_ms > 0")

    seq = [ScheduledQuestion(t, "practice") for t in practice]
    if schedule.repeat_block is not None:
        block = schedule.repeat_block
        if block.subset_size > len(main):
            raise DataError("repeat block subset larger than the main triplet list")
        subset = main[: block.subset_size]
        rng = np.random.default_rng(schedule.shuffle_seed)
        for rep in range(block.repeats):
            order = rng.permutation(len(subset)) if block.shuffle else np.arange(len(subset))
            seq.extend(ScheduledQuestion(subset[i], "main", repeat_index=rep) for i in order)
    else:
        seq.extend(ScheduledQuestion(t, "main") for t in main)
    return seq


def tuple_of(t: Triplet):
    return (t.ref, t.opt1, t.opt2)


@dataclass
class Session:
    session_id: str
    participant_id: str
    schedule: ScheduleConfigModel
    sequence: list
    cursor: int = 0
    responses: list = field(default_factory=list)
    outstanding_at: Optional[float] = None  # monotonic seconds
    break_shown_at: int = -1
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def total(self) -> int:
        return len(self.sequence)

    @property
    def phase(self) -> str:
        if self.cursor >= self.total:
            return "done"
        return self.sequence[self.cursor].phase

    def main_position(self) -> int:
        """0-based position within the main phase for break accounting."""
        practice_count = sum(1 for q in self.sequence if q.phase == "practice")
        return self.cursor - practice_count


class SessionStore:
    """In-memory sessions backed by an append-only JSON-lines journal."""

    def __init__(self, data_dir: Path, clock=time.monotonic):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.journal_path = self.data_dir / "journal.jsonl"
        self.clock = clock
        self.sessions: dict[str, Session] = {}
        self._journal_lock = threading.Lock()
        self._replay()

    # -- journal ------------------------------------------------------
    def _append(self, event: dict) -> None:
        line = json.dumps(event, sort_keys=True)
        with self._journal_lock:
            with open(self.journal_path, "a") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def _replay(self) -> None:
        if not self.journal_path.exists():
            return
        with open(self.journal_path) as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                if event["type"] == "create":
                    schedule = ScheduleConfigModel(**event["schedule"])
                    session = Session(
                        session_id=event["session_id"],
                        participant_id=event["participant_id"],
                        schedule=schedule,
                        sequence=build_sequence(schedule),
                    )
                    self.sessions[session.session_id] = session
                elif event["type"] == "resolve":
                    session = self.sessions[event["session_id"]]
                    q = session.sequence[event["index"]]
                    session.responses.append(
                        TripletResponse(
                            triplet=q.triplet,
                            answer=event["answer"],
                            rt_ms=event["rt_ms"],
                            session_id=session.session_id,
                            repeat_index=q.repeat_index,
                        )
                    )
                    session.cursor = event["index"] + 1
                    session.outstanding_at = None

    # -- operations ---------------------------------------------------
    def create_session(self, participant_id: str, schedule: ScheduleConfigModel) -> Session:
        for s in self.sessions.values():
            if s.participant_id == participant_id and s.phase != "done":
                raise DataError(f"participant {participant_id!r} already has an active session")
        sequence = build_sequence(schedule)
        session = Session(
            session_id=uuid.uuid4().hex,
            participant_id=participant_id,
            schedule=schedule,
            sequence=sequence,
        )
        self.sessions[session.session_id] = session
        self._append(
            {
                "type": "create",
                "session_id": session.session_id,
                "participant_id": participant_id,
                "schedule": schedule.model_dump(),
            }
        )
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session") from None

    def _resolve(self, session: Session, answer, rt_ms) -> None:
        index = session.cursor
        q = session.sequence[index]
        self._append(
            {
                "type": "resolve",
                "session_id": session.session_id,
                "index": index,
                "answer": answer,
                "rt_ms": rt_ms,
            }
        )
        session.responses.append(
            TripletResponse(
                triplet=q.triplet,
                answer=answer,
                rt_ms=rt_ms,
                session_id=session.session_id,
                repeat_index=q.repeat_index,
            )
        )
        session.cursor = index + 1
        session.outstanding_at = None

    def next_question(self, session: Session) -> dict:
        with session.lock:
            if session.outstanding_at is not None:
                elapsed_ms = (self.clock() - session.outstanding_at) * 1000.0
                if elapsed_ms > session.schedule.answer_timeout_ms:
                    # abandoned question: register unanswered and move on
                    self._resolve(session, answer=None, rt_ms=None)
                else:
                    raise HTTPException(status_code=409, detail="question already outstanding")
            if session.cursor >= session.total:
                return {
                    "kind": "done",
                    "progress": {"answered": session.total, "total": session.total},
                    "export": f"/sessions/{session.session_id}/export",
                }
            q = session.sequence[session.cursor]
            if q.phase == "main":
                pos = session.main_position()
                every = session.schedule.break_every
                if every > 0 and pos > 0 and pos % every == 0 and session.break_shown_at != pos:
                    session.break_shown_at = pos
                    return {
                        "kind": "break",
                        "phase": "break",
                        "progress": {"answered": session.cursor, "total": session.total},
                    }
            session.outstanding_at = self.clock()
            assets = session.schedule.stimulus_assets

            def asset(i):
                return assets[i] if i < len(assets) else None

            return {
                "kind": "question",
                "triplet_index": session.cursor,
                "ref": q.triplet.ref,
                "opt1": q.triplet.opt1,
                "opt2": q.triplet.opt2,
                "ref_asset": asset(q.triplet.ref),
                "opt1_asset": asset(q.triplet.opt1),
                "opt2_asset": asset(q.triplet.opt2),
                "phase": q.phase,
                "repeat_index": q.repeat_index,
                "deadline_ms": session.schedule.answer_timeout_ms,
                "fixation_ms": session.schedule.fixation_ms,
                "progress": {"answered": session.cursor, "total": session.total},
            }

    def record_answer(self, session: Session, req: AnswerRequest) -> dict:
        with session.lock:
            if session.outstanding_at is None:
                raise HTTPException(status_code=409, detail="no outstanding question")
            if req.triplet_index != session.cursor:
                raise HTTPException(
                    status_code=409,
                    detail=f"answer for index {req.triplet_index} but question {session.cursor} is outstanding",
                )
            if req.choice not in ("opt1", "opt2"):
                raise HTTPException(status_code=422, detail="choice must be opt1 or opt2")
            elapsed_ms = (self.clock() - session.outstanding_at) * 1000.0
            if elapsed_ms > session.schedule.answer_timeout_ms:
                # server clock is authoritative: too late counts as unanswered
                self._resolve(session, answer=None, rt_ms=None)
                return {"recorded": "unanswered", "triplet_index": req.triplet_index}
            answer = +1 if req.choice == "opt1" else -1
            self._resolve(session, answer=answer, rt_ms=round(elapsed_ms, 3))
            return {"recorded": "answered", "triplet_index": req.triplet_index, "answer": answer}

    def export_csv(self, session: Session, include_practice=False, include_unanswered=True) -> str:
        practice_count = sum(1 for q in session.sequence if q.phase == "practice")
        rows = []
        for idx, r in enumerate(session.responses):
            if not include_practice and idx < practice_count:
                continue
            if not include_unanswered and r.answer is None:
                continue
            rows.append(r)
        return responses_to_csv_text(rows)


def create_app(data_dir, assets_dir=None, clock=time.monotonic) -> FastAPI:
    app = FastAPI(title="triadscale collection service")
    store = SessionStore(Path(data_dir), clock=clock)
    app.state.store = store

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        try:
            session = store.create_session(req.participant_id, req.schedule)
        except DataError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {
            "session_id": session.session_id,
            "total_questions": session.total,
            "phase": session.phase,
        }

    @app.get("/sessions/{session_id}/next")
    def next_question(session_id: str):
        return store.next_question(store.get(session_id))

    @app.post("/sessions/{session_id}/answers")
    def record_answer(session_id: str, req: AnswerRequest):
        return store.record_answer(store.get(session_id), req)

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str, include_practice: bool = False, include_unanswered: bool = True):
        csv_text = store.export_csv(
            store.get(session_id),
            include_practice=include_practice,
            include_unanswered=include_unanswered,
        )
        return PlainTextResponse(csv_text, media_type="text/csv")

    @app.get("/sessions/{session_id}/state")
    def state(session_id: str):
        s = store.get(session_id)
        return {
            "session_id": s.session_id,
            "participant_id": s.participant_id,
            "phase": s.phase,
            "cursor": s.cursor,
            "responses": len(s.responses),
            "total": s.total,
        }

    if assets_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/assets", StaticFiles(directory=assets_dir), name="assets")

    return app
