"""Durable session state: an append-only JSON-lines answer log.

Every accepted answer is appended, flushed and fsynced before the caller
gets an acknowledgment, and the log is replayed at startup. A trailing
partial line (crash mid-write) is skipped during replay, so acknowledged
answers survive and unacknowledged ones never appear. All mutation goes
through one lock; reads work against immutable session data.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..core import Her2Score
from ..errors import DuplicateAnswer, IoError, SessionClosed, UnknownItem
from .session import RaterAnswer, ReviewItem, ReviewSession

SESSION_FILE = "session.json"
ANSWERS_FILE = "answers.log"


@dataclass
class NextItem:
    item: ReviewItem | None
    index: int
    total: int


class SessionStore:
    """One review session, its rater tokens, and the answer log."""

    def __init__(
        self,
        session: ReviewSession,
        raters: dict[str, str],
        admin_token: str,
        log_path: str | Path,
    ) -> None:
        self.session = session
        self.raters = dict(raters)  # token -> rater_id
        self.admin_token = admin_token
        self.log_path = Path(log_path)
        self.closed = False
        self._answers: dict[tuple[str, str], RaterAnswer] = {}
        self._lock = threading.Lock()
        self._item_ids = {it.item_id for it in session.items}
        self._replayed_partial = 0
        if self.log_path.exists():
            self._replay()

    # -- construction ----------------------------------------------------

    @classmethod
    def create(
        cls,
        session: ReviewSession,
        rater_ids: list[str],
        directory: str | Path,
    ) -> "SessionStore":
        """Persist a fresh session under ``directory`` with random tokens."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        raters = {secrets.token_hex(8): rid for rid in rater_ids}
        admin_token = secrets.token_hex(8)
        store = cls(session, raters, admin_token, directory / ANSWERS_FILE)
        store.save(directory)
        return store

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        payload = {
            "seed": self.session.seed,
            "closed": self.closed,
            "admin_token": self.admin_token,
            "raters": self.raters,
            "image_paths": {ref: str(p) for ref, p in self.session.image_paths.items()},
            "items": [
                {
                    "item_id": it.item_id,
                    "left_image_ref": it.left_image_ref,
                    "right_image_ref": it.right_image_ref,
                    "truth": it.truth,
                    "her2_score": it.her2_score.value,
                    "duplicate_of": it.duplicate_of,
                    "source_id": it.source_id,
                }
                for it in self.session.items
            ],
        }
        (directory / SESSION_FILE).write_text(json.dumps(payload, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path) -> "SessionStore":
        directory = Path(directory)
        try:
            payload = json.loads((directory / SESSION_FILE).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoError(f"cannot read session from {directory}: {exc}") from exc
        items = tuple(
            ReviewItem(
                item_id=rec["item_id"],
                left_image_ref=rec["left_image_ref"],
                right_image_ref=rec["right_image_ref"],
                truth=rec["truth"],
                her2_score=Her2Score(rec["her2_score"]),
                duplicate_of=rec.get("duplicate_of"),
                source_id=rec.get("source_id", ""),
            )
            for rec in payload["items"]
        )
        session = ReviewSession(
            items=items,
            image_paths={ref: Path(p) for ref, p in payload["image_paths"].items()},
            seed=int(payload.get("seed", 0)),
        )
        store = cls(session, payload["raters"], payload["admin_token"], directory / ANSWERS_FILE)
        store.closed = bool(payload.get("closed", False))
        return store

    # -- answer log ------------------------------------------------------

    def _replay(self) -> None:
        raw = self.log_path.read_bytes()
        for line in raw.split(b"\n"):
            if not line.strip():
                continue
            try:
                rec = json.loads(line.decode("utf-8"))
                answer = RaterAnswer(**rec)
            except (json.JSONDecodeError, UnicodeDecodeError, TypeError, KeyError):
                # A torn trailing write: the answer was never acknowledged.
                self._replayed_partial += 1
                continue
            key = (answer.item_id, answer.rater_id)
            if answer.item_id in self._item_ids and key not in self._answers:
                self._answers[key] = answer

    def record_answer(self, answer: RaterAnswer) -> None:
        """Validate, durably append, then accept an answer."""
        with self._lock:
            if self.closed:
                raise SessionClosed("session no longer accepts answers")
            if answer.item_id not in self._item_ids:
                raise UnknownItem(f"item {answer.item_id!r} is not part of this session")
            key = (answer.item_id, answer.rater_id)
            if key in self._answers:
                raise DuplicateAnswer(
                    f"rater {answer.rater_id!r} already answered item {answer.item_id!r}"
                )
            if answer.timestamp == 0.0:
                answer = RaterAnswer(
                    item_id=answer.item_id,
                    rater_id=answer.rater_id,
                    q1_similar_pattern=answer.q1_similar_pattern,
                    q2_better_quality=answer.q2_better_quality,
                    q3_which_real=answer.q3_which_real,
                    timestamp=time.time(),
                )
            line = json.dumps(
                {
                    "item_id": answer.item_id,
                    "rater_id": answer.rater_id,
                    "q1_similar_pattern": answer.q1_similar_pattern,
                    "q2_better_quality": answer.q2_better_quality,
                    "q3_which_real": answer.q3_which_real,
                    "timestamp": answer.timestamp,
                }
            )
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._answers[key] = answer

    def close_session(self) -> None:
        with self._lock:
            self.closed = True

    # -- queries ---------------------------------------------------------

    def rater_for_token(self, token: str) -> str | None:
        return self.raters.get(token)

    def answers(self) -> list[RaterAnswer]:
        return list(self._answers.values())

    def answer_count(self, rater_id: str) -> int:
        return sum(1 for (_item, rater) in self._answers if rater == rater_id)

    def next_item(self, rater_id: str) -> NextItem:
        total = len(self.session.items)
        for index, item in enumerate(self.session.items):
            if (item.item_id, rater_id) not in self._answers:
                return NextItem(item=item, index=index, total=total)
        return NextItem(item=None, index=total, total=total)

    def image_path(self, ref: str) -> Path | None:
        return self.session.image_paths.get(ref)
