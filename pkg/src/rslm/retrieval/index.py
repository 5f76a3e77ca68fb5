"""Exact-scan embedding index over spectra frames.

Rows are L2-normalized student embeddings ordered by frame id; queries are
teacher text embeddings ranked by cosine with deterministic tie-breaking
(descending score, then ascending frame id).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError, IntegrityError
from ..hashing import read_json, write_json
from ..student.models import StudentModel, encode_spectrum
from ..student.view import to_view
from ..teacher.model import TeacherModel, encode_text
from ..teacher.tokenizer import tokenize

# Acceptance-time category query strings.
CATEGORY_QUERIES = {
    "car": "a scene with cars",
    "pedestrian": "pedestrians walking nearby",
    "cyclist": "cyclists riding along",
    "truck": "a large truck on the road",
}


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise InputError(f"cosine expects equal-length vectors, got {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))


@dataclass
class EmbeddingIndex:
    frame_ids: list
    embeddings: np.ndarray  # (N, E), rows L2-normalized (zero rows flagged)
    zero_rows: list
    student_hash: str
    teacher_hash: str

    def __post_init__(self):
        self.embeddings = np.ascontiguousarray(self.embeddings, dtype=np.float32)
        self.embeddings.setflags(write=False)

    def __len__(self):
        return len(self.frame_ids)


@dataclass
class RetrievalResult:
    query: str
    ranked: list  # [(frame_id, score)] scores non-increasing
    k: int
    truncated: bool = False


def _normalize_rows(mat: np.ndarray):
    norms = np.linalg.norm(mat, axis=1)
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    return mat / safe[:, None], [int(i) for i in np.nonzero(zero)[0]]


def build_index(frames, student: StudentModel, spectra) -> EmbeddingIndex:
    """Encode one spectrum per frame; rows ordered by frame id."""
    if not student.frozen:
        raise InputError("student must be frozen before indexing")
    if student.stats is None:
        raise InputError("student carries no normalization statistics")
    if len(frames) != len(spectra):
        raise InputError("frames and spectra lists differ in length")
    order = sorted(range(len(frames)), key=lambda i: frames[i].frame_id)
    ids, rows = [], []
    for i in order:
        view = to_view(spectra[i], student.stats)
        rows.append(encode_spectrum(student, view))
        ids.append(frames[i].frame_id)
    mat = np.stack(rows).astype(np.float32) if rows else np.zeros((0, student.embed_dim), np.float32)
    normalized, zero_rows = _normalize_rows(mat)
    return EmbeddingIndex(
        frame_ids=ids,
        embeddings=normalized.astype(np.float32),
        zero_rows=zero_rows,
        student_hash=student.current_hash(),
        teacher_hash=student.teacher_hash,
    )


def rank_embedding(index: EmbeddingIndex, query_emb: np.ndarray):
    """Cosine scores against all rows with the deterministic tie-break."""
    q = np.asarray(query_emb, dtype=np.float64)
    nq = np.linalg.norm(q)
    qn = q / nq if nq > 0 else q
    scores = index.embeddings.astype(np.float64) @ qn
    ids = np.array(index.frame_ids)
    order = np.lexsort((ids, -scores))
    return [(str(ids[i]), float(scores[i])) for i in order]


def query_text(index: EmbeddingIndex, teacher: TeacherModel, text: str, k: int) -> RetrievalResult:
    if k < 1:
        raise InputError("k must be >= 1")
    if teacher.frozen_hash != index.teacher_hash:
        raise IntegrityError(
            "teacher/index mismatch: index was built against a different teacher"
        )
    emb = encode_text(teacher, tokenize(text))
    ranked = rank_embedding(index, emb)
    truncated = k > len(ranked)
    return RetrievalResult(
        query=text, ranked=ranked[: min(k, len(ranked))], k=k, truncated=truncated
    )


def topk_precision(result: RetrievalResult, presence_gt: dict, category: str, k: int) -> float:
    """Fraction of the first k results whose frame contains `category`."""
    if k > len(result.ranked):
        raise InputError(f"k={k} exceeds result length {len(result.ranked)}")
    hits = sum(1 for fid, _ in result.ranked[:k] if category in presence_gt[fid])
    return hits / k


def save_index(index: EmbeddingIndex, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "embeddings.bin", "wb") as f:
        f.write(index.embeddings.astype("<f4").tobytes())
    write_json(
        out / "index_meta.json",
        {
            "frame_ids": index.frame_ids,
            "embed_dim": int(index.embeddings.shape[1]),
            "zero_rows": index.zero_rows,
            "student_hash": index.student_hash,
            "teacher_hash": index.teacher_hash,
        },
    )


def load_index(in_dir) -> EmbeddingIndex:
    meta = read_json(Path(in_dir) / "index_meta.json")
    raw = (Path(in_dir) / "embeddings.bin").read_bytes()
    mat = np.frombuffer(raw, dtype="<f4").reshape(len(meta["frame_ids"]), meta["embed_dim"])
    return EmbeddingIndex(
        frame_ids=meta["frame_ids"],
        embeddings=mat.copy(),
        zero_rows=meta["zero_rows"],
        student_hash=meta["student_hash"],
        teacher_hash=meta["teacher_hash"],
    )
