import numpy as np
import pytest

from rslm.configs import StudentConfig, TeacherConfig
from rslm.errors import InputError, IntegrityError
from rslm.retrieval.index import (
    EmbeddingIndex,
    RetrievalResult,
    build_index,
    cosine,
    load_index,
    query_text,
    rank_embedding,
    save_index,
    topk_precision,
)
from rslm.student.models import encode_spectrum
from rslm.student.train import train_student
from rslm.student.view import to_view
from rslm.teacher.model import encode_text
from rslm.teacher.tokenizer import tokenize
from rslm.teacher.train import train_teacher


class TestCosine:
    def test_self_similarity(self):
        v = np.array([3.0, -1.0, 2.0])
        assert abs(cosine(v, v) - 1.0) < 1e-12

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_sqrt_half(self):
        assert abs(cosine([1.0, 1.0], [1.0, 0.0]) - 0.70710678) < 1e-8

    def test_zero_norm_rule(self):
        assert cosine([0.0, 0.0], [1.0, 2.0]) == 0.0

    def test_dim_mismatch(self):
        with pytest.raises(InputError):
            cosine([1.0], [1.0, 2.0])


def _manual_index(rows, ids=None, teacher_hash="t"):
    rows = np.asarray(rows, dtype=np.float32)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    normalized = np.where(norms > 0, rows / np.maximum(norms, 1e-30), 0.0)
    return EmbeddingIndex(
        frame_ids=ids or [f"{i:06d}" for i in range(len(rows))],
        embeddings=normalized.astype(np.float32),
        zero_rows=[int(i) for i in np.nonzero(norms[:, 0] == 0)[0]],
        student_hash="s",
        teacher_hash=teacher_hash,
    )


class TestRanking:
    def test_brute_force_equality(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n, e = int(rng.integers(2, 40)), 16
            index = _manual_index(rng.normal(size=(n, e)))
            q = rng.normal(size=e)
            ranked = rank_embedding(index, q)
            qn = q / np.linalg.norm(q)
            scores = index.embeddings @ qn
            expected = sorted(
                zip(index.frame_ids, scores.tolist()), key=lambda t: (-t[1], t[0])
            )
            assert [fid for fid, _ in ranked] == [fid for fid, _ in expected]
            assert np.allclose([s for _, s in ranked], [s for _, s in expected])

    def test_query_scaling_invariance(self):
        rng = np.random.default_rng(1)
        index = _manual_index(rng.normal(size=(20, 8)))
        q = rng.normal(size=8)
        a = rank_embedding(index, q)
        b = rank_embedding(index, 5.0 * q)
        assert [fid for fid, _ in a] == [fid for fid, _ in b]
        assert np.allclose([s for _, s in a], [s for _, s in b], atol=1e-12)

    def test_orthogonal_transform_invariance(self):
        rng = np.random.default_rng(2)
        rows = rng.normal(size=(30, 12))
        q = rng.normal(size=12)
        mat = rng.normal(size=(12, 12))
        ortho, _ = np.linalg.qr(mat)
        a = rank_embedding(_manual_index(rows), q)
        b = rank_embedding(_manual_index(rows @ ortho), q @ ortho)
        assert [fid for fid, _ in a] == [fid for fid, _ in b]
        assert np.allclose([s for _, s in a], [s for _, s in b], atol=1e-6)

    def test_tie_break_ascending_frame_id(self):
        rows = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        index = _manual_index(rows, ids=["b", "a", "c"])
        ranked = rank_embedding(index, np.array([1.0, 0.0]))
        assert [fid for fid, _ in ranked[:2]] == ["a", "b"]


class TestTopkPrecision:
    def _result(self, ids):
        return RetrievalResult(query="q", ranked=[(i, 1.0) for i in ids], k=len(ids))

    def test_all_hits(self):
        presence = {str(i): {"car"} for i in range(10)}
        res = self._result([str(i) for i in range(10)])
        assert topk_precision(res, presence, "car", 10) == 1.0

    def test_nine_of_ten(self):
        presence = {str(i): {"car"} for i in range(9)}
        presence["9"] = {"truck"}
        res = self._result([str(i) for i in range(10)])
        assert topk_precision(res, presence, "car", 10) == 0.9

    def test_k_exceeds_result(self):
        with pytest.raises(InputError):
            topk_precision(self._result(["0"]), {"0": set()}, "car", 2)

    def test_random_ranking_matches_base_rate(self):
        rng = np.random.default_rng(3)
        n = 200
        present = rng.uniform(size=n) < 0.3
        presence = {str(i): ({"car"} if present[i] else set()) for i in range(n)}
        ids = [str(i) for i in range(n)]
        k = 50
        vals = []
        for _ in range(1000):
            order = rng.permutation(n)
            res = self._result([ids[i] for i in order])
            vals.append(topk_precision(res, presence, "car", k))
        assert abs(float(np.mean(vals)) - present.mean()) < 0.05


@pytest.fixture(scope="module")
def trained_pair(tiny_dataset):
    teacher = train_teacher(tiny_dataset, TeacherConfig(epochs=2, batch_size=8), seed=0)
    student, _ = train_student(
        tiny_dataset,
        teacher,
        StudentConfig(variant="cnn", epochs=1, batch_size=8),
        tiny_dataset.radar_config(),
        seed=0,
    )
    return teacher, student


class TestIndex:
    def test_build_single_row(self, tiny_dataset, trained_pair):
        _, student = trained_pair
        frames = tiny_dataset.frames()[:1]
        index = build_index(frames, student, [frames[0].spectrum()])
        assert len(index) == 1
        assert abs(np.linalg.norm(index.embeddings[0]) - 1.0) < 1e-6

    def test_rebuild_identical(self, tiny_dataset, trained_pair):
        _, student = trained_pair
        frames = tiny_dataset.frames()[:6]
        spectra = [f.spectrum() for f in frames]
        a = build_index(frames, student, spectra)
        b = build_index(frames, student, spectra)
        assert np.array_equal(a.embeddings, b.embeddings)
        assert a.frame_ids == b.frame_ids

    def test_rows_match_recomputation(self, tiny_dataset, trained_pair):
        _, student = trained_pair
        frames = tiny_dataset.frames()[:4]
        spectra = [f.spectrum() for f in frames]
        index = build_index(frames, student, spectra)
        for row, frame, spectrum in zip(index.embeddings, frames, spectra):
            emb = encode_spectrum(student, to_view(spectrum, student.stats))
            emb = emb / np.linalg.norm(emb)
            assert np.allclose(row, emb, atol=1e-6)

    def test_immutability(self, tiny_dataset, trained_pair):
        _, student = trained_pair
        frames = tiny_dataset.frames()[:2]
        index = build_index(frames, student, [f.spectrum() for f in frames])
        with pytest.raises(ValueError):
            index.embeddings[0, 0] = 7.0

    def test_save_load_roundtrip(self, tiny_dataset, trained_pair, tmp_path):
        _, student = trained_pair
        frames = tiny_dataset.frames()[:5]
        index = build_index(frames, student, [f.spectrum() for f in frames])
        save_index(index, tmp_path)
        back = load_index(tmp_path)
        assert np.array_equal(back.embeddings, index.embeddings)
        assert back.frame_ids == index.frame_ids
        assert back.teacher_hash == index.teacher_hash


class TestQueryText:
    def test_exact_row_ranks_first(self, trained_pair):
        teacher, _ = trained_pair
        text = "two cars on the open road"
        emb = encode_text(teacher, tokenize(text))
        rng = np.random.default_rng(4)
        rows = np.vstack([emb, rng.normal(size=(5, emb.shape[0]))])
        index = _manual_index(rows, teacher_hash=teacher.frozen_hash)
        result = query_text(index, teacher, text, k=3)
        assert result.ranked[0][0] == "000000"
        assert abs(result.ranked[0][1] - 1.0) < 1e-5
        scores = [s for _, s in result.ranked]
        assert all(a >= b for a, b in zip(scores, scores[1:]))

    def test_k_larger_than_index_truncates(self, trained_pair):
        teacher, _ = trained_pair
        rows = np.random.default_rng(5).normal(size=(4, 64))
        index = _manual_index(rows, teacher_hash=teacher.frozen_hash)
        result = query_text(index, teacher, "anything", k=10)
        assert result.truncated
        assert len(result.ranked) == 4

    def test_teacher_hash_mismatch(self, trained_pair):
        teacher, _ = trained_pair
        index = _manual_index(np.eye(3, 64), teacher_hash="different")
        with pytest.raises(IntegrityError):
            query_text(index, teacher, "cars", k=1)

    def test_k_must_be_positive(self, trained_pair):
        teacher, _ = trained_pair
        index = _manual_index(np.eye(3, 64), teacher_hash=teacher.frozen_hash)
        with pytest.raises(InputError):
            query_text(index, teacher, "cars", k=0)
