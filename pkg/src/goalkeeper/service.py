"""HTTP service running live goalkeeper sessions and on-demand analysis.

The kicker sequence of a session is generated lazily, one trial at a time,
from the session's seeded stream; it depends only on (model, seed), never on
the submitted guesses, breaks or reconnects.  Responses never carry the
model's transition probabilities -- clients see outcomes and aggregate
scores only.

Per-session writes are serialized by a lock; analysis runs on a snapshot and
may proceed concurrently with play.
"""

import os
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional, Union

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import bic, ctm, lrtest, rng, windows
from .bic import PairedSample
from .errors import (
    BadSymbol,
    BreakPending,
    IncompleteModel,
    NotEnoughTrials,
    SessionFinished,
    ToolkitError,
    UnknownPreset,
    UnknownSession,
)
from .session import (
    STATUS_ACTIVE,
    STATUS_BREAK,
    STATUS_FINISHED,
    SessionRecord,
    SessionStore,
)

DEFAULT_BREAKS = (334, 667)
DEFAULT_MAX_TRIALS = 1000
DENSITY_SEED = 20261
ANALYSIS_MAX_HEIGHT = 4


class CreateSessionRequest(BaseModel):
    model: Union[str, dict]
    seed: Optional[int] = None


class GuessRequest(BaseModel):
    direction: int
    trial: Optional[int] = None  # expected 1-based index; enables lost-response replay


class _LazyKicker:
    """Per-trial symbol generation; identical to ctm.simulate stream 0."""

    def __init__(self, model: ctm.ContextTreeModel, seed: int):
        self.model = model
        self._contexts, table = ctm._context_index_table(model)
        self._table = table.tolist()
        self._cum = [tuple(row) for row in ctm._cumulative_rows(model, self._contexts)]
        self._stream = rng.Stream(seed, 0)
        self._cache: list[int] = []
        h = model.height
        A = model.alphabet_size
        self._A = A
        self._mod = A**h if h > 0 else 1
        code = 0
        for _ in range(h):
            sym = min(int(self._stream.next_float() * A), A - 1)
            code = code * A + sym
        self._code = code
        for _ in range(ctm.BURN_IN_STEPS):
            self._step()

    def _step(self) -> int:
        row = self._cum[self._table[self._code]]
        u = self._stream.next_float()
        sym = 0
        while sym < self._A - 1 and u >= row[sym]:
            sym += 1
        if self._mod > 1:
            self._code = (self._code * self._A + sym) % self._mod
        return sym

    def kick(self, trial: int) -> int:
        """Symbol for 1-based trial index."""
        while len(self._cache) < trial:
            self._cache.append(self._step())
        return self._cache[trial - 1]


@dataclass
class _LiveSession:
    record: SessionRecord
    model: ctm.ContextTreeModel
    kicker: _LazyKicker
    pending_break: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)


def _model_from_inline(config: dict) -> ctm.ContextTreeModel:
    contexts = config.get("contexts")
    if not isinstance(contexts, dict) or not contexts:
        raise IncompleteModel("inline model needs a non-empty contexts map")
    entries = [
        (ctm.context_from_str(key), tuple(vec)) for key, vec in contexts.items()
    ]
    alphabet = config.get("alphabet_size", len(next(iter(contexts.values()))))
    return ctm.build_model(entries, alphabet, name=config.get("name", "inline"))


def create_app(
    data_dir=None,
    model_dir=None,
    breaks=DEFAULT_BREAKS,
    max_trials=DEFAULT_MAX_TRIALS,
    density_replicates=None,
    window_length=windows.DEFAULT_WINDOW_LENGTH,
    window_step=windows.DEFAULT_WINDOW_STEP,
) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("GOALKEEPER_DATA", "goalkeeper-data")
    if model_dir is None:
        model_dir = os.environ.get("GOALKEEPER_MODELS")
    if density_replicates is None:
        density_replicates = int(
            os.environ.get("GOALKEEPER_DENSITY_REPLICATES", windows.DEFAULT_REPLICATES)
        )

    app = FastAPI(title="goalkeeper game service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(data_dir)
    sessions: dict[str, _LiveSession] = {}
    density_cache: dict[tuple[str, int], windows.StrategyDensities] = {}
    density_lock = threading.Lock()
    app.state.store = store
    app.state.sessions = sessions

    def get_session(session_id: str) -> _LiveSession:
        live = sessions.get(session_id)
        if live is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return live

    def densities_for(model: ctm.ContextTreeModel) -> windows.StrategyDensities:
        key = (model.name, window_length)
        with density_lock:
            if key not in density_cache:
                density_cache[key] = windows.build_strategy_densities(
                    model,
                    window_length=window_length,
                    replicates=density_replicates,
                    seed=DENSITY_SEED,
                )
            return density_cache[key]

    @app.get("/models")
    def list_models():
        out = []
        for name in ctm.PRESET_NAMES:
            preset = ctm.preset_model(name)
            complete = isinstance(preset, ctm.ContextTreeModel)
            if not complete and model_dir is not None:
                try:
                    ctm.resolve_model(name, model_dir)
                    complete = True
                except ToolkitError:
                    complete = False
            out.append({"name": name, "complete": complete})
        return {"models": out}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            if isinstance(req.model, str):
                model = ctm.resolve_model(req.model, model_dir)
            else:
                model = _model_from_inline(req.model)
        except (IncompleteModel, UnknownPreset, ToolkitError) as exc:
            raise HTTPException(400, f"{type(exc).__name__}: {exc}")
        seed = req.seed if req.seed is not None else uuid.uuid4().int & rng.MASK
        session_id = uuid.uuid4().hex[:12]
        record = SessionRecord(
            session_id=session_id,
            model_name=model.name,
            seed=seed,
            alphabet_size=model.alphabet_size,
            max_trials=max_trials,
        )
        store.create(record)
        sessions[session_id] = _LiveSession(
            record=record, model=model, kicker=_LazyKicker(model, seed)
        )
        return {"session_id": session_id, "max_trials": max_trials}

    def state_payload(live: _LiveSession) -> dict:
        record = live.record
        status = record.status
        if status == STATUS_ACTIVE and live.pending_break:
            status = STATUS_BREAK
        return {
            "session_id": record.session_id,
            "model": record.model_name,
            "trial": record.n_trials,
            "score": record.score,
            "status": status,
            "break_pending": live.pending_break,
            "max_trials": record.max_trials,
        }

    @app.get("/sessions/{session_id}")
    def session_state(session_id: str):
        live = get_session(session_id)
        with live.lock:
            return state_payload(live)

    @app.post("/sessions/{session_id}/guess")
    def guess(session_id: str, req: GuessRequest):
        live = get_session(session_id)
        with live.lock:
            record = live.record
            if req.trial is not None and req.trial == record.n_trials:
                # replay of a submission whose response was lost in transit
                last = record.trials[-1] if record.trials else None
                if last is None or last.y != req.direction:
                    raise HTTPException(409, "TrialMismatch: trial already played")
                return {
                    "kick": last.x,
                    "correct": last.ok,
                    "trial": last.t,
                    "score": record.score,
                    "break": live.pending_break,
                    "finished": record.status == STATUS_FINISHED,
                }
            if record.status == STATUS_FINISHED:
                raise HTTPException(409, "SessionFinished: no trials left")
            if live.pending_break:
                raise HTTPException(409, "BreakPending: call /resume first")
            trial_index = record.n_trials + 1
            if req.trial is not None and req.trial != trial_index:
                raise HTTPException(
                    409, f"TrialMismatch: expected {trial_index}, got {req.trial}"
                )
            kick = live.kicker.kick(trial_index)
            try:
                trial = store.append(record, kick, req.direction)
            except BadSymbol as exc:
                raise HTTPException(400, f"BadSymbol: {exc}")
            except SessionFinished as exc:
                raise HTTPException(409, f"SessionFinished: {exc}")
            finished = record.status == STATUS_FINISHED
            at_break = not finished and trial.t in breaks
            if at_break:
                live.pending_break = True
            return {
                "kick": trial.x,
                "correct": trial.ok,
                "trial": trial.t,
                "score": record.score,
                "break": at_break,
                "finished": finished,
            }

    @app.post("/sessions/{session_id}/resume")
    def resume(session_id: str):
        live = get_session(session_id)
        with live.lock:
            live.pending_break = False
            return state_payload(live)

    @app.get("/sessions/{session_id}/analysis")
    def analysis(session_id: str):
        live = get_session(session_id)
        with live.lock:
            xs = live.record.xs()
            ys = live.record.ys()
            model = live.model
        if len(xs) < window_length:
            raise HTTPException(
                409,
                f"NotEnoughTrials: {len(xs)} trials recorded, "
                f"first window needs {window_length}",
            )
        sample = PairedSample(xs, ys, alphabet_size=model.alphabet_size)
        spec = windows.WindowSpec(window_length, window_step, sample.n)
        summary = ctm.stationary_summary(model)
        dens = densities_for(model)
        rows = windows.analyze_windows(
            sample, model, dens, spec, maximizing_score=summary.maximizing_score
        )
        payload_windows = []
        for row in rows:
            wx = sample.x[row.start - 1: row.end]
            wy = sample.y[row.start - 1: row.end]
            wsample = PairedSample(wx, wy, alphabet_size=model.alphabet_size)
            _, est = bic.tune_penalty(wsample, L=ANALYSIS_MAX_HEIGHT)
            lr = lrtest.lr_test(wsample, 1, 1, alpha=0.05)
            payload_windows.append(
                {
                    "index": row.index,
                    "start": row.start,
                    "end": row.end,
                    "pcp": row.pcp,
                    "normalized": row.normalized,
                    "logit": row.logit,
                    "strategy": {
                        "label": row.strategy.label,
                        "density_matching": row.strategy.density_matching,
                        "density_maximizing": row.strategy.density_maximizing,
                        "threshold": row.strategy.undermatching_threshold,
                    },
                    "tree": est.to_json(),
                    "lr": lr.to_json(),
                }
            )
        return {
            "session_id": session_id,
            "model": model.name,
            "n_trials": sample.n,
            "window_length": window_length,
            "window_step": window_step,
            "scores": {
                "matching": summary.matching_score,
                "maximizing": summary.maximizing_score,
            },
            "windows": payload_windows,
            "cpcp": [float(v) for v in windows.cpcp_curve(sample)],
        }

    @app.get("/sessions/{session_id}/export", response_class=PlainTextResponse)
    def export(session_id: str):
        live = get_session(session_id)
        with live.lock:
            path = store.path_for(session_id)
            return path.read_text(encoding="utf-8")

    @app.exception_handler(ToolkitError)
    def toolkit_error_handler(request, exc: ToolkitError):
        from fastapi.responses import JSONResponse

        status = 400
        if isinstance(exc, (SessionFinished, BreakPending, NotEnoughTrials)):
            status = 409
        elif isinstance(exc, UnknownSession):
            status = 404
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    return app
