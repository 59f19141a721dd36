import pytest
from fastapi.testclient import TestClient

from thetalift import service as sv
from thetalift.service import app

client = TestClient(app)


def test_health():
    assert client.get("/health").json() == {"status": "ok"}


def test_classnum():
    r = client.post("/classnum", json={"lo": 20, "hi": 23})
    assert r.status_code == 200
    assert r.json()["rows"] == [{"n": 20, "H": "2"}, {"n": 23, "H": "3"}]


def test_classnum_bad_range():
    r = client.post("/classnum", json={"lo": 4, "hi": 3})
    assert r.status_code == 400
    assert r.json()["detail"]["error"] == "usage"


def test_poly():
    assert client.post("/poly", json={"family": "He", "index": 3}).json()["text"] == "x^3 - 3*x"
    assert client.post("/poly", json={"family": "Z", "index": 3}).status_code == 422


def test_trace():
    r = client.post("/trace", json={"kind": "twisted", "delta": -3, "D": -7, "form": "E2star"})
    assert r.status_code == 200
    assert r.json()["value"] == pytest.approx(-4, abs=1e-9)


def test_trace_errors():
    r = client.post("/trace", json={"kind": "cycle", "d": 9})
    assert r.status_code == 400 and "square" in r.json()["detail"]["message"]
    assert client.post("/trace", json={"kind": "cm", "d": -3, "tol": 2}).status_code == 422
    assert client.post("/trace", json={"kind": "cm", "d": -3, "form": "nope"}).status_code == 400


def test_lift():
    r = client.post("/lift", json={"theorem": "E2klift", "k": 2, "d_max": 8})
    assert r.status_code == 200
    doc = r.json()
    assert doc["theorem"] == "E2klift" and doc["meta"]["d_max"] == 8
    assert any(t["kind"] == "log_shape" for t in doc["terms"])


def test_lift_precondition():
    r = client.post("/lift", json={"theorem": "E2klift", "k": 1})
    assert r.status_code == 422
    assert r.json()["detail"]["error"] == "precondition"


def test_handlers_share_models():
    res = sv.classnum(sv.ClassnumRequest(lo=3, hi=3))
    assert res.rows[0].H == "1/3"
    with pytest.raises(sv.ServiceError):
        sv.trace(sv.TraceRequest(kind="cm"))
