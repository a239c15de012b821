"""HTTP JSON API for the blinded review.

Rater-facing responses carry only what the protocol needs: an opaque item
id, two opaque image URLs and progress numbers. Truth sides, HER2 scores
and duplicate links exist solely server-side; the consensus report is
gated behind the admin token.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import DuplicateAnswer, InsufficientRaters, SessionClosed, UnknownItem
from .session import RaterAnswer, consensus
from .store import SessionStore


class AnswerBody(BaseModel):
    item_id: str
    q1_similar_pattern: str
    q2_better_quality: str
    q3_which_real: str
    timestamp: float = 0.0  # 0.0 means "stamp on the server"


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def create_app(store: SessionStore, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="stainbench review", docs_url=None, redoc_url=None, openapi_url=None)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"ok": True}

    @app.get("/session/{token}/next")
    def next_item(token: str):
        rater = store.rater_for_token(token)
        if rater is None:
            return _error(404, "unknown_session", "no session for this token")
        nxt = store.next_item(rater)
        if nxt.item is None:
            return {"done": True, "index": nxt.index, "total": nxt.total}
        return {
            "item_id": nxt.item.item_id,
            "left_url": f"/images/{nxt.item.left_image_ref}",
            "right_url": f"/images/{nxt.item.right_image_ref}",
            "index": nxt.index,
            "total": nxt.total,
        }

    @app.post("/session/{token}/answer")
    def submit_answer(token: str, body: AnswerBody):
        rater = store.rater_for_token(token)
        if rater is None:
            return _error(404, "unknown_session", "no session for this token")
        try:
            answer = RaterAnswer(
                item_id=body.item_id,
                rater_id=rater,
                q1_similar_pattern=body.q1_similar_pattern,
                q2_better_quality=body.q2_better_quality,
                q3_which_real=body.q3_which_real,
                timestamp=body.timestamp,
            )
        except Exception as exc:  # invalid enum values
            return _error(422, "invalid_answer", str(exc))
        try:
            store.record_answer(answer)
        except DuplicateAnswer as exc:
            # Wire code avoids the word "duplicate": raters must not be able to
            # tell answer-resubmission apart from duplicate-item vocabulary.
            return _error(409, "already_answered", str(exc))
        except UnknownItem as exc:
            return _error(404, "unknown_item", str(exc))
        except SessionClosed as exc:
            return _error(410, "session_closed", str(exc))
        return {"ok": True, "item_id": body.item_id, "answered": store.answer_count(rater)}

    @app.get("/images/{ref}")
    def image(ref: str):
        path = store.image_path(ref)
        if path is None or not path.exists():
            return _error(404, "unknown_image", "no image for this reference")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/admin/report")
    def admin_report(request: Request):
        token = request.query_params.get("token", "")
        if token != store.admin_token:
            return _error(403, "forbidden", "admin token required")
        try:
            report = consensus(
                store.answers(), list(store.session.items), sorted(set(store.raters.values()))
            )
        except InsufficientRaters as exc:
            return _error(409, "insufficient_raters", str(exc))
        return report.to_dict()

    @app.post("/admin/close")
    def admin_close(request: Request):
        token = request.query_params.get("token", "")
        if token != store.admin_token:
            return _error(403, "forbidden", "admin token required")
        store.close_session()
        return {"ok": True, "closed": True}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
