"""Regenerate the frontend test fixture from the real API.

Run from the repository root after changing server payloads:

    python3 scripts/record_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from fdexplain.server import create_app

ROOT = Path(__file__).resolve().parent.parent
ANSWERS = ["yes", "yes", "no"]


def main() -> None:
    client = TestClient(create_app())
    text = (ROOT / "models" / "conference_buggy.fd").read_text(encoding="utf-8")

    model = client.post("/models", json={"text": text}).json()
    steps = [
        client.post(
            f"/models/{model['model_id']}/sessions",
            json={"var": "AM", "value": 1, "strategy": "dac"},
        ).json()
    ]
    for answer in ANSWERS:
        steps.append(
            client.post(
                f"/sessions/{steps[-1]['session_id']}/answer",
                json={"answer": answer},
            ).json()
        )

    explanation = client.get(
        f"/models/{model['model_id']}/explanation",
        params={"var": "AM", "value": 1},
    ).json()

    fixture = {
        "model_text": text,
        "model": model,
        "steps": steps,
        "answers": ANSWERS,
        "explanation": explanation,
    }
    out = ROOT / "frontend" / "test" / "fixtures" / "conference_bug_flow.json"
    out.write_text(json.dumps(fixture, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
