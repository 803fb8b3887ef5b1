"""Regenerate the frontend test fixtures from the real backend.

Run from the repository root with the Python package installed:

    python frontend/scripts/generate_fixtures.py

Writes JSON payloads and one raw SSE transcript under
frontend/tests/fixtures/. Keeping the fixtures frozen in the repo lets the
client test suite run without a Python runtime; regenerate after any wire
format change.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from pixelbench.service import ServiceConfig, create_app
from pixelbench.synthetic import make_synthetic_dataset, write_idx

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    workdir = FIXTURES / "_work"
    workdir.mkdir(exist_ok=True)
    dataset = make_synthetic_dataset(n_train=60, n_test=30, seed=7)
    write_idx(dataset.train, workdir / "tr.idx", workdir / "trl.idx")
    write_idx(dataset.test, workdir / "te.idx", workdir / "tel.idx")

    app = create_app(ServiceConfig(data_dir=workdir, session_dir=workdir))
    with TestClient(app) as client:
        summary = client.post("/datasets", json={
            "name": "toy", "format": "idx",
            "train_images": "tr.idx", "train_labels": "trl.idx",
            "test_images": "te.idx", "test_labels": "tel.idx",
            "class_names": list(dataset.class_names),
        }).json()
        dataset_id = summary["dataset_id"]

        model = client.post("/models", json={
            "dataset_id": dataset_id, "params": {"seed": 1}, "name": "toy-model",
        }).json()

        campaign_id = client.post("/attacks", json={
            "dataset_id": dataset_id, "model_id": model["model_id"],
            "target_ids": [0],
            "config": {"pop_size": 8, "iterations": 5, "num_attacks": 2,
                       "seed": 3, "early_stop": False},
        }).json()["campaign_id"]
        with client.stream(
                "GET", f"/datasets/{dataset_id}/attacks/{campaign_id}/events",
        ) as response:
            events_text = "".join(response.iter_text())
        campaign = client.get(
            f"/datasets/{dataset_id}/attacks/{campaign_id}").json()

        run = client.post("/runs", json={
            "dataset_id": dataset_id, "model_id": model["model_id"],
            "target_ids": [0], "campaign_ids": [campaign_id],
            "test_indices": list(range(12)),
        }).json()

    (FIXTURES / "dataset_summary.json").write_text(
        json.dumps(summary, indent=1, sort_keys=True))
    (FIXTURES / "model_payload.json").write_text(
        json.dumps(model, indent=1, sort_keys=True))
    (FIXTURES / "campaign_detail.json").write_text(
        json.dumps(campaign, indent=1, sort_keys=True))
    (FIXTURES / "run_payload.json").write_text(
        json.dumps(run, indent=1, sort_keys=True))
    (FIXTURES / "attack_events.sse.txt").write_text(events_text)
    for leftover in workdir.iterdir():
        leftover.unlink()
    workdir.rmdir()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
