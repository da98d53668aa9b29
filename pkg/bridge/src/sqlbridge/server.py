"""Line-protocol server loop.

One JSON object per line in, one per line out. Malformed input produces an
error object (code ``bad_request``) and the process stays alive; only EOF
stops the loop.
"""

from __future__ import annotations

import json
import sys
from typing import IO, Iterator

from .config import BridgeConfig
from .models import build_model


def _error(request_id, code: str, message: str) -> str:
    return json.dumps({"id": request_id, "error": {"code": code, "message": message}})


def _respond_paraphrase(model, request: dict) -> str:
    request_id = request.get("id")
    if request_id is None:
        return _error(None, "bad_request", "missing id")
    text = request.get("text")
    if not isinstance(text, str):
        return _error(request_id, "bad_request", "missing text")
    try:
        n = int(request.get("n", 1))
    except (TypeError, ValueError):
        return _error(request_id, "bad_request", "n must be an integer")
    if n < 1:
        return _error(request_id, "bad_request", "n must be >= 1")
    return json.dumps({"id": request_id, "candidates": model.paraphrase(text, n)})


def _respond_parser(model, request: dict, lines: Iterator[str]) -> str:
    request_id = request.get("id")
    if request_id is None:
        return _error(None, "bad_request", "missing id")
    verb = request.get("verb")
    if verb == "train":
        try:
            count = int(request.get("count", 0))
        except (TypeError, ValueError):
            return _error(request_id, "bad_request", "count must be an integer")
        pairs = []
        for _ in range(count):
            try:
                raw = next(lines)
            except StopIteration:
                return _error(request_id, "bad_request", "dataset stream truncated")
            try:
                pair = json.loads(raw)
            except json.JSONDecodeError as exc:
                return _error(request_id, "bad_request", f"bad pair line: {exc}")
            if "utterance" not in pair or "sql" not in pair:
                return _error(request_id, "bad_request", "pair needs utterance and sql")
            pairs.append(pair)
        if not pairs:
            return _error(request_id, "bad_request", "empty training dataset")
        model_id = model.train(pairs, seed=int(request.get("seed", 0)))
        return json.dumps({"id": request_id, "model": model_id})
    if verb == "predict":
        utterance = request.get("utterance")
        if not isinstance(utterance, str):
            return _error(request_id, "bad_request", "missing utterance")
        sql = model.predict(request.get("model", ""), utterance)
        return json.dumps({"id": request_id, "sql": sql})
    return _error(request_id, "bad_request", f"unknown verb {verb!r}")


def serve(config: BridgeConfig, stdin: IO[str] = None, stdout: IO[str] = None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    model = build_model(config)
    lines = (line.rstrip("\n") for line in stdin)
    for line in lines:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            response = _error(None, "bad_request", f"not json: {exc}")
        else:
            if not isinstance(request, dict):
                response = _error(None, "bad_request", "request must be an object")
            elif config.mode == "paraphrase":
                response = _respond_paraphrase(model, request)
            else:
                response = _respond_parser(model, request, lines)
        stdout.write(response + "\n")
        stdout.flush()
