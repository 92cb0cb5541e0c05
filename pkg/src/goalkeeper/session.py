"""Game session persistence: JSONL on disk, CSV import/export.

File layout: one header line of session metadata, then one line per trial
`{"t":1,"x":2,"y":1,"ok":false,"ms":123456}`.  Writes are append-only; a
truncated final line (crash mid-write) is dropped on read and earlier trials
survive.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    BadSymbol,
    NonContiguousTrials,
    NotEnoughTrials,
    SessionFinished,
    UnknownSession,
)

DEFAULT_MAX_TRIALS = 1000

STATUS_ACTIVE = "active"
STATUS_BREAK = "break"
STATUS_FINISHED = "finished"


@dataclass
class Trial:
    t: int
    x: int
    y: int
    ok: bool
    ms: int = 0

    def to_json(self) -> dict:
        return {"t": self.t, "x": self.x, "y": self.y, "ok": self.ok, "ms": self.ms}


@dataclass
class SessionRecord:
    session_id: str
    model_name: str
    seed: int
    alphabet_size: int = 3
    max_trials: int = DEFAULT_MAX_TRIALS
    created_ms: int = 0
    trials: list[Trial] = field(default_factory=list)
    status: str = STATUS_ACTIVE

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    @property
    def score(self) -> int:
        return sum(1 for t in self.trials if t.ok)

    def xs(self) -> list[int]:
        return [t.x for t in self.trials]

    def ys(self) -> list[int]:
        return [t.y for t in self.trials]

    def header_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "model": self.model_name,
            "seed": self.seed,
            "alphabet_size": self.alphabet_size,
            "max_trials": self.max_trials,
            "created_ms": self.created_ms,
        }

    def append_trial(self, x: int, y: int, ms: int = 0) -> Trial:
        if self.status == STATUS_FINISHED or self.n_trials >= self.max_trials:
            raise SessionFinished(
                f"session {self.session_id} already holds {self.n_trials} trials"
            )
        for label, v in (("x", x), ("y", y)):
            if not isinstance(v, int) or not 0 <= v < self.alphabet_size:
                raise BadSymbol(f"{label}={v!r} outside alphabet 0..{self.alphabet_size - 1}")
        trial = Trial(t=self.n_trials + 1, x=x, y=y, ok=x == y, ms=ms)
        self.trials.append(trial)
        if self.n_trials >= self.max_trials:
            self.status = STATUS_FINISHED
        return trial


def write_session(record: SessionRecord, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(record.header_json()) + "\n")
        for trial in record.trials:
            fh.write(json.dumps(trial.to_json()) + "\n")


def append_trial_line(path, trial: Trial) -> None:
    with Path(path).open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(trial.to_json()) + "\n")


def read_session(path) -> SessionRecord:
    """Load a JSONL session; a torn final line is discarded."""
    path = Path(path)
    if not path.exists():
        raise UnknownSession(f"no session file at {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise UnknownSession(f"{path} is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise UnknownSession(f"{path}: bad header line: {exc}") from exc
    record = SessionRecord(
        session_id=header.get("session_id", path.stem),
        model_name=header.get("model", "unknown"),
        seed=int(header.get("seed", 0)),
        alphabet_size=int(header.get("alphabet_size", 3)),
        max_trials=int(header.get("max_trials", DEFAULT_MAX_TRIALS)),
        created_ms=int(header.get("created_ms", 0)),
    )
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            data = json.loads(raw)
        except json.JSONDecodeError:
            if lineno == len(lines):
                break  # torn tail from an interrupted write
            raise NonContiguousTrials(f"{path}:{lineno}: unreadable trial line")
        t = data.get("t")
        if t != record.n_trials + 1:
            raise NonContiguousTrials(
                f"{path}:{lineno}: trial index {t} after {record.n_trials}"
            )
        record.append_trial(int(data["x"]), int(data["y"]), ms=int(data.get("ms", 0)))
    if record.n_trials >= record.max_trials:
        record.status = STATUS_FINISHED
    return record


def import_csv(path, session_id: str | None = None, model_name: str = "imported",
               alphabet_size: int = 3) -> SessionRecord:
    """Read `trial,x,y` rows (header optional) into a session record."""
    path = Path(path)
    record = SessionRecord(
        session_id=session_id or path.stem,
        model_name=model_name,
        seed=0,
        alphabet_size=alphabet_size,
        max_trials=10**9,  # imports may be any length; cap applies to live play
    )
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for rowno, row in enumerate(reader, start=1):
            if not row or not row[0].strip():
                continue
            if rowno == 1 and not row[0].strip().lstrip("-").isdigit():
                expected = [c.strip().lower() for c in row[:3]]
                if expected != ["trial", "x", "y"]:
                    raise BadSymbol(f"{path}:1: expected header trial,x,y, got {row}")
                continue
            if len(row) < 3:
                raise BadSymbol(f"{path}:{rowno}: need trial,x,y columns")
            try:
                t, x, y = (int(v) for v in row[:3])
            except ValueError:
                raise BadSymbol(f"{path}:{rowno}: non-integer entry in {row[:3]}")
            if not 0 <= x < alphabet_size or not 0 <= y < alphabet_size:
                raise BadSymbol(
                    f"{path}:{rowno}: symbol outside 0..{alphabet_size - 1}: {row[:3]}"
                )
            if t != record.n_trials + 1:
                raise NonContiguousTrials(
                    f"{path}:{rowno}: trial index {t} after {record.n_trials}"
                )
            record.append_trial(x, y)
    if record.n_trials == 0:
        raise NotEnoughTrials(f"{path} holds no trials")
    record.max_trials = max(record.n_trials, DEFAULT_MAX_TRIALS)
    return record


def export_csv(record: SessionRecord, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "x", "y"])
        for trial in record.trials:
            writer.writerow([trial.t, trial.x, trial.y])


class SessionStore:
    """One directory of JSONL session files; one writer per session."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, session_id: str) -> Path:
        safe = "".join(ch for ch in session_id if ch.isalnum() or ch in "-_")
        if not safe:
            raise UnknownSession(f"unusable session id {session_id!r}")
        return self.directory / f"{safe}.jsonl"

    def create(self, record: SessionRecord) -> None:
        write_session(record, self.path_for(record.session_id))

    def append(self, record: SessionRecord, x: int, y: int, ms: int = 0) -> Trial:
        trial = record.append_trial(x, y, ms=ms)
        append_trial_line(self.path_for(record.session_id), trial)
        return trial

    def read(self, session_id: str) -> SessionRecord:
        return read_session(self.path_for(session_id))

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.jsonl"))
