"""Capture real service payloads as JSON fixtures for the UI tests."""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from stockflow.cli import default_model_dir
from stockflow.service import create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> None:
    client = TestClient(create_app(default_model_dir()))
    OUT.mkdir(parents=True, exist_ok=True)
    captures = {
        "models.json": client.get("/models"),
        "run_default.json": client.post("/models/supply_demand/run", json={}),
        "run_noshift.json": client.post(
            "/models/supply_demand/run", json={"overrides": {"Shift_Height": 0}}),
        "loops.json": client.get("/models/supply_demand/loops"),
    }
    for name, response in captures.items():
        response.raise_for_status()
        (OUT / name).write_text(json.dumps(response.json(), indent=1) + "\n")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
