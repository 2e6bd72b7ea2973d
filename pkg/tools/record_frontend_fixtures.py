#!/usr/bin/env python3
"""Record wire fixtures for the web client tests.

Drives the real HTTP service through the consultation flows the
frontend tests replay, and writes every request/response pair to
frontend/test/fixtures/wire.json. Session ids are rewritten to stable
placeholders so the recordings are deterministic.

Run from the repository root after changing the service or the bundled
knowledge base:

    python tools/record_frontend_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from kbshell import builtin_kb
from kbshell.service import create_app

REPO = Path(__file__).resolve().parent.parent
OUT = REPO / "frontend" / "test" / "fixtures" / "wire.json"


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client
        self.exchanges: list[dict] = []
        self.id_map: dict[str, str] = {}

    def _stable(self, text: str) -> str:
        for real, fake in self.id_map.items():
            text = text.replace(real, fake)
        return text

    def _remember_ids(self, payload) -> None:
        if isinstance(payload, dict) and isinstance(payload.get("id"), str):
            real = payload["id"]
            if real not in self.id_map:
                self.id_map[real] = f"fixed-session-{len(self.id_map) + 1:04d}"

    def call(self, method: str, path: str, body=None):
        if method == "GET":
            response = self.client.get(path)
        else:
            response = self.client.post(path, json=body)
        payload = response.json()
        self._remember_ids(payload)
        self.exchanges.append(json.loads(self._stable(json.dumps({
            "method": method,
            "path": path,
            "body": body,
            "status": response.status_code,
            "response": payload,
        }))))
        return payload


def main() -> int:
    app = create_app({"sanjeevani": builtin_kb()})
    recorder = Recorder(TestClient(app))

    # Golden click-through: diabetes -> naturalcare, then the transcript.
    recorder.call("GET", "/api/kbs")
    view = recorder.call("POST", "/api/sessions", {"kb": "sanjeevani"})
    sid = view["id"]
    recorder.call("POST", f"/api/sessions/{sid}/answer", {"value": "diabetes"})
    recorder.call("POST", f"/api/sessions/{sid}/answer",
                  {"value": "naturalcare"})
    recorder.call("GET", f"/api/sessions/{sid}/transcript")

    # Validation flow: a value the server rejects with 422.
    view = recorder.call("POST", "/api/sessions", {"kb": "sanjeevani"})
    sid = view["id"]
    recorder.call("POST", f"/api/sessions/{sid}/answer", {"value": "surgery"})

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"exchanges": recorder.exchanges}, indent=2)
                   + "\n")
    print(f"wrote {len(recorder.exchanges)} exchanges to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
