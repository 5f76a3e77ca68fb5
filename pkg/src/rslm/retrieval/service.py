"""HTTP retrieval service: free-text query over an immutable index plus
frame artifact endpoints for the explorer UI."""

from __future__ import annotations

import io
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse, Response
from PIL import Image

from ..dataset import FrameDataset
from ..errors import IntegrityError
from ..student.view import spectrum_to_planes
from ..teacher.model import TeacherModel, load_teacher
from .index import EmbeddingIndex, load_index, query_text

_MAX_K = 1000


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def spectrum_heatmap_png(spectrum) -> bytes:
    """Log-magnitude heatmap over channels, rendered with a fixed color ramp."""
    planes = spectrum_to_planes(spectrum)
    mag = np.sqrt((planes[0::2] ** 2 + planes[1::2] ** 2).sum(axis=0))
    img = np.log1p(mag)
    top = img.max()
    if top > 0:
        img = img / top
    stops = np.array(
        [[0, 0, 16], [32, 12, 96], [160, 40, 100], [240, 140, 40], [255, 250, 180]],
        dtype=np.float64,
    )
    pos = img * (len(stops) - 1)
    lo = np.clip(np.floor(pos).astype(int), 0, len(stops) - 2)
    frac = (pos - lo)[..., None]
    rgb = stops[lo] * (1 - frac) + stops[lo + 1] * frac
    out = Image.fromarray(rgb.astype(np.uint8), mode="RGB")
    buf = io.BytesIO()
    out.save(buf, format="PNG")
    return buf.getvalue()


class ServiceState:
    """Immutable per-index state; reindexing swaps the whole object atomically."""

    def __init__(self, index: EmbeddingIndex, teacher: TeacherModel, dataset: FrameDataset):
        self.index = index
        self.teacher = teacher
        self.dataset = dataset
        self.presence = {}
        for fid in index.frame_ids:
            gt = dataset.frame(fid).ground_truth()
            self.presence[fid] = list(gt.presence)


def create_app(index_dir, teacher_dir, dataset_dir) -> FastAPI:
    state_holder = {"state": None}
    lock = threading.Lock()

    def get_state() -> ServiceState:
        with lock:
            if state_holder["state"] is None:
                index = load_index(index_dir)
                teacher = load_teacher(teacher_dir)
                if teacher.frozen_hash != index.teacher_hash:
                    raise IntegrityError("index was built against a different teacher")
                state_holder["state"] = ServiceState(index, teacher, FrameDataset(dataset_dir))
            return state_holder["state"]

    app = FastAPI(title="spectra retrieval service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc.errors()))

    @app.get("/health")
    def health():
        return PlainTextResponse("ok")

    @app.post("/query")
    async def query(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        text = body.get("text")
        k = body.get("k", 10)
        if not isinstance(text, str) or not text.strip():
            return _error(400, "bad_request", "field 'text' must be a non-empty string")
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            return _error(400, "bad_request", "field 'k' must be a positive integer")
        if k > _MAX_K:
            return _error(400, "bad_request", f"k exceeds the maximum of {_MAX_K}")
        state = get_state()
        try:
            result = query_text(state.index, state.teacher, text, k)
        except IntegrityError as exc:
            return _error(409, "consistency_error", str(exc))
        return {
            "results": [
                {
                    "frame_id": fid,
                    "score": score,
                    "categories": state.presence[fid],
                    "camera_url": f"/frame/{fid}/camera.png",
                }
                for fid, score in result.ranked
            ],
            "truncated": result.truncated,
        }

    def _frame_or_none(state, frame_id):
        if frame_id not in state.presence:
            return None
        return state.dataset.frame(frame_id)

    @app.get("/frame/{frame_id}/camera.png")
    def camera(frame_id: str):
        state = get_state()
        frame = _frame_or_none(state, frame_id)
        if frame is None:
            return _error(404, "frame_not_found", f"no frame {frame_id!r} in index")
        path = Path(frame.dir) / "camera.png"
        return FileResponse(path, media_type="image/png")

    @app.get("/frame/{frame_id}/meta")
    def meta(frame_id: str):
        state = get_state()
        frame = _frame_or_none(state, frame_id)
        if frame is None:
            return _error(404, "frame_not_found", f"no frame {frame_id!r} in index")
        return {"scene": frame.scene().to_dict(), "gt": frame.ground_truth().to_dict()}

    @app.get("/frame/{frame_id}/spectrum.png")
    def spectrum(frame_id: str):
        state = get_state()
        frame = _frame_or_none(state, frame_id)
        if frame is None:
            return _error(404, "frame_not_found", f"no frame {frame_id!r} in index")
        return Response(content=spectrum_heatmap_png(frame.spectrum()), media_type="image/png")

    return app
