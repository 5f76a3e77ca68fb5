import pytest
from fastapi.testclient import TestClient

from rslm.configs import StudentConfig, TeacherConfig
from rslm.retrieval.index import build_index, save_index
from rslm.retrieval.service import create_app
from rslm.student.models import save_student
from rslm.student.train import train_student
from rslm.teacher.model import save_teacher
from rslm.teacher.train import train_teacher


@pytest.fixture(scope="module")
def client(tiny_dataset, tmp_path_factory):
    root = tmp_path_factory.mktemp("service")
    teacher = train_teacher(tiny_dataset, TeacherConfig(epochs=1, batch_size=8), seed=0)
    student, _ = train_student(
        tiny_dataset,
        teacher,
        StudentConfig(variant="cnn", epochs=1, batch_size=8),
        tiny_dataset.radar_config(),
        seed=0,
    )
    frames = tiny_dataset.frames("test")
    index = build_index(frames, student, [f.spectrum() for f in frames])
    save_teacher(teacher, root / "teacher")
    save_student(student, root / "student")
    save_index(index, root / "index")
    app = create_app(root / "index", root / "teacher", tiny_dataset.root)
    return TestClient(app)


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.text == "ok"


def test_query_returns_sorted_results(client):
    resp = client.post("/query", json={"text": "a parking lot with many cars", "k": 2})
    assert resp.status_code == 200
    body = resp.json()
    results = body["results"]
    assert len(results) == 2
    scores = [r["score"] for r in results]
    assert scores == sorted(scores, reverse=True)
    for r in results:
        assert set(r) == {"frame_id", "score", "categories", "camera_url"}
        assert r["camera_url"] == f"/frame/{r['frame_id']}/camera.png"


def test_query_k_exceeding_index_truncates(client):
    resp = client.post("/query", json={"text": "cars", "k": 999})
    assert resp.status_code == 200
    assert resp.json()["truncated"] is True


def test_query_validation_errors(client):
    resp = client.post("/query", json={"text": "", "k": 3})
    assert resp.status_code == 400
    assert resp.json()["error"] == "bad_request"
    resp = client.post("/query", json={"text": "cars", "k": 0})
    assert resp.status_code == 400
    resp = client.post("/query", json={"k": 3})
    assert resp.status_code == 400
    assert "detail" in resp.json()


def test_frame_endpoints(client):
    fid = client.post("/query", json={"text": "cars", "k": 1}).json()["results"][0][
        "frame_id"
    ]
    camera = client.get(f"/frame/{fid}/camera.png")
    assert camera.status_code == 200
    assert camera.headers["content-type"] == "image/png"
    meta = client.get(f"/frame/{fid}/meta")
    assert meta.status_code == 200
    body = meta.json()
    assert body["scene"]["frame_id"] == fid
    assert "y_seg" in body["gt"]
    spec = client.get(f"/frame/{fid}/spectrum.png")
    assert spec.status_code == 200
    assert spec.headers["content-type"] == "image/png"
    assert spec.content[:8] == b"\x89PNG\r\n\x1a\n"


def test_unknown_frame_404(client):
    resp = client.get("/frame/zzzzzz/meta")
    assert resp.status_code == 404
    assert resp.json()["error"] == "frame_not_found"


def test_cors_headers(client):
    resp = client.get("/health", headers={"Origin": "http://localhost:5173"})
    assert resp.headers.get("access-control-allow-origin") == "*"
