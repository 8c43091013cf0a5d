import json
import warnings

import pytest
import yaml
from click.testing import CliRunner

from enginecal.cli import main
from enginecal.config import load_campaign_config
from enginecal.service.app import create_app

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200 and r.json()["status"] == "ok"


def test_limits(client):
    body = client.get("/limits/E5a").json()
    assert body["limits_mg_per_km"]["NOx"] == 60
    assert client.get("/limits/E3").json()["limits_mg_per_km"]["CO"] == 2300
    assert client.get("/limits/E9").status_code == 404
    assert client.get("/limits/_units").status_code == 404


def test_evaluate(client):
    r = client.post("/evaluate", json={"actuators": {"RF": 2000.0}})
    assert r.status_code == 200
    body = r.json()
    assert body["actuators"]["RF"] == 2000.0 and len(body["measurands"]) == 18
    assert client.post("/evaluate", json={"actuators": {"XX": 1.0}}).status_code == 422
    assert client.post("/evaluate", json={"actuators": {"RF": -1e9}}).status_code == 422
    assert client.post("/evaluate", json={"actuators": {}, "engine": "missing.yaml"}).status_code == 404
    assert client.post("/evaluate", json={}).status_code == 422


def test_campaign_zero_budget(client, tmp_path):
    r = client.post("/campaigns", json={"config": "two_dynamic.yaml", "budget": 0, "out_dir": str(tmp_path)})
    body = r.json()
    assert r.status_code == 200 and body["status"] == "budget_exhausted" and body["exit_code"] == 2
    again = client.get(f"/campaigns/{body['id']}").json()
    assert again["report"] == body["report"]
    assert client.get(f"/campaigns/{body['id']}/solution").json()["solution"] is None
    assert client.get("/campaigns/nope").status_code == 404
    assert client.post("/campaigns", json={"config": "nope.yaml"}).status_code == 404
    assert client.post("/campaigns", json={"config": "two_dynamic.yaml", "budget": -1}).status_code == 422


def test_resume_seed_mismatch(client, tmp_path):
    client.post("/campaigns", json={"config": "two_dynamic.yaml", "budget": 0, "seed": 7, "out_dir": str(tmp_path)})
    r = client.post("/campaigns/resume", json={"out_dir": str(tmp_path), "seed": 8})
    assert r.status_code == 409
    ok = client.post("/campaigns/resume", json={"out_dir": str(tmp_path), "seed": 7, "budget": 0})
    assert ok.status_code == 200 and ok.json()["exit_code"] == 2


def test_export_and_verify(client, two_dynamic_run, tmp_path):
    _, run = two_dynamic_run
    r = client.post("/export", json={"run_dir": str(run), "out_dir": str(tmp_path)})
    assert r.status_code == 200 and any(f.endswith("weights.csv") for f in r.json()["files"])
    v = client.post("/verify", json={"run_dir": str(run)}).json()
    assert v["ok"] and v["complete"]
    assert client.post("/verify", json={"run_dir": str(tmp_path / "none")}).status_code == 404


def test_cli_exit_codes(tmp_path):
    runner = CliRunner()
    r = runner.invoke(main, ["calibrate", "two_dynamic.yaml", "--budget", "0", "--seed", "1"])
    assert r.exit_code == 2 and "budget_exhausted" in r.output
    r = runner.invoke(main, ["calibrate", "two_dynamic.yaml", "--seed", "1", "--json",
                             "--out", str(tmp_path / "run")])
    assert r.exit_code == 0 and json.loads(r.output)["status"] == "success"
    cfg = tmp_path / "tight.yaml"
    tight = load_campaign_config("two_dynamic.yaml", limit_scale=0.01, budget=1500)
    cfg.write_text(yaml.safe_dump(tight.dump()))
    r = runner.invoke(main, ["calibrate", str(cfg), "--seed", "1"])
    assert r.exit_code == 3, r.output


def test_cli_verify_export_resume(two_dynamic_run, tmp_path):
    _, run = two_dynamic_run
    runner = CliRunner()
    r = runner.invoke(main, ["verify", str(run), "--seed", "1"])
    assert r.exit_code == 0 and "ok: True" in r.output
    r = runner.invoke(main, ["export", str(run), "--out", str(tmp_path / "maps"), "--seed", "1"])
    assert r.exit_code == 0 and "actuator_RF.csv" in r.output
    r = runner.invoke(main, ["resume", str(run), "--seed", "99"])
    assert r.exit_code == 1 and "409" in r.output
