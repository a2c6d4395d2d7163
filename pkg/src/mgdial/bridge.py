"""Child-process predictor protocol: line-delimited JSON over stdio.

One request per line in, one response per line out, matched by id.
Running this module (python -m mgdial.bridge --mode abstain|echo)
starts a reference predictor used by tests and as a wiring check for
external models.
"""
from __future__ import annotations

import argparse
import json
import subprocess
import sys
from typing import Any, IO

PROTOCOL_VERSION = 1
TASKS = ("match", "tag", "generate")


class BridgeError(RuntimeError):
    pass


class BridgeClient:
    """Talks to a predictor child process. Use as a context manager."""

    def __init__(self, cmd: list[str]):
        self.cmd = list(cmd)
        self._proc: subprocess.Popen | None = None
        self._counter = 0

    def __enter__(self) -> "BridgeClient":
        self._proc = subprocess.Popen(
            self.cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1,
        )
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._proc is not None:
            try:
                if self._proc.stdin:
                    self._proc.stdin.close()
                self._proc.wait(timeout=10)
            except Exception:
                self._proc.kill()
            self._proc = None

    def request(self, task: str, payload: dict[str, Any], meta: dict[str, Any] | None = None) -> dict[str, Any]:
        if task not in TASKS:
            raise BridgeError(f"unknown task {task!r}")
        if self._proc is None or self._proc.stdin is None or self._proc.stdout is None:
            raise BridgeError("bridge not started; use it as a context manager")
        self._counter += 1
        req_id = f"r{self._counter}"
        line = json.dumps({
            "version": PROTOCOL_VERSION,
            "task": task,
            "id": req_id,
            "meta": meta or {},
            "payload": payload,
        })
        self._proc.stdin.write(line + "\n")
        self._proc.stdin.flush()
        raw = self._proc.stdout.readline()
        if not raw:
            raise BridgeError("predictor closed its output stream")
        try:
            resp = json.loads(raw)
        except json.JSONDecodeError as e:
            raise BridgeError(f"unparseable response line: {raw[:200]!r}") from e
        if resp.get("id") != req_id:
            raise BridgeError(f"response id {resp.get('id')!r} does not match request {req_id!r}")
        if "error" in resp:
            raise BridgeError(f"predictor error: {resp['error']}")
        return resp

    # convenience wrappers ------------------------------------------------

    def match(self, history: list[tuple[str, str]], instructions: list[dict[str, str]],
              meta: dict[str, Any] | None = None) -> set[str]:
        resp = self.request("match", {
            "history": [[s, u] for s, u in history],
            "instructions": instructions,
        }, meta)
        return set(resp.get("selected", []))

    def tag(self, tokens: list[str], instruction: dict[str, Any], max_args: int,
            meta: dict[str, Any] | None = None) -> list[str]:
        resp = self.request("tag", {
            "tokens": tokens,
            "instruction": instruction,
            "max_args": max_args,
        }, meta)
        tags = resp.get("tags", [])
        if len(tags) != len(tokens):
            raise BridgeError(f"predictor returned {len(tags)} tags for {len(tokens)} tokens")
        return [str(t) for t in tags]

    def generate(self, history: list[tuple[str, str]], selected: list[dict[str, Any]],
                 results: list[dict[str, Any]], meta: dict[str, Any] | None = None) -> str:
        resp = self.request("generate", {
            "history": [[s, u] for s, u in history],
            "selected": selected,
            "results": results,
        }, meta)
        return str(resp.get("text", ""))


# ---------------------------------------------------------------------------
# reference predictors


def _respond(req: dict[str, Any], mode: str) -> dict[str, Any]:
    req_id = req.get("id", "")
    if req.get("version") != PROTOCOL_VERSION:
        return {"id": req_id, "error": f"unsupported protocol version {req.get('version')!r}"}
    task = req.get("task")
    payload = req.get("payload", {})
    gold = payload.get("_test_gold")

    if task == "match":
        if mode == "echo" and gold is not None:
            return {"id": req_id, "selected": list(gold)}
        return {"id": req_id, "selected": []}
    if task == "tag":
        tokens = payload.get("tokens", [])
        if mode == "echo" and gold is not None:
            return {"id": req_id, "tags": list(gold)}
        return {"id": req_id, "tags": ["O"] * len(tokens)}
    if task == "generate":
        if mode == "echo" and gold is not None:
            return {"id": req_id, "text": str(gold)}
        return {"id": req_id, "text": "Okay."}
    return {"id": req_id, "error": f"unknown task {task!r}"}


def serve(stdin: IO[str], stdout: IO[str], mode: str) -> None:
    for raw in stdin:
        raw = raw.strip()
        if not raw:
            continue
        try:
            req = json.loads(raw)
        except json.JSONDecodeError:
            stdout.write(json.dumps({"id": "", "error": "unparseable request"}) + "\n")
            stdout.flush()
            continue
        stdout.write(json.dumps(_respond(req, mode)) + "\n")
        stdout.flush()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="reference bridge predictor")
    parser.add_argument("--mode", choices=("abstain", "echo"), default="abstain")
    args = parser.parse_args(argv)
    serve(sys.stdin, sys.stdout, args.mode)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
