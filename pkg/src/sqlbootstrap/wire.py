"""Newline-delimited JSON transports for external providers and parser backends.

Both wire protocols exchange UTF-8 lines, one JSON object per line:

* paraphrase provider: request ``{"id", "text", "n"}`` ->
  response ``{"id", "candidates": [text, ...]}``
* parser backend: ``{"id", "verb": "train", "count": N, "seed"}`` followed by
  exactly N raw JSONL pair lines (``{"utterance", "sql"}``) ->
  ``{"id", "model"}``; ``{"id", "verb": "predict", "model", "utterance"}`` ->
  ``{"id", "sql"}`` with ``null`` meaning abstain.

A failing line yields ``{"id", "error": {"code", "message"}}`` and the peer
stays alive. Transports: ``subprocess`` (lines over stdin/stdout) and
``http`` (lines POSTed as the request body).
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass


class TransportError(Exception):
    """Peer unreachable, timed out, or answered with undecodable output."""


@dataclass(frozen=True)
class ProviderSpec:
    """Transport coordinates for one external (or builtin) peer."""

    name: str
    kind: str  # "builtin" | "subprocess" | "http"
    endpoint: str = ""  # command line or URL; empty for builtin
    batch_size: int = 32
    timeout: float = 30.0

    def __post_init__(self):
        if self.kind not in ("builtin", "subprocess", "http"):
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.kind == "builtin" and self.endpoint:
            raise ValueError("builtin providers take no endpoint")
        if self.kind != "builtin" and not self.endpoint:
            raise ValueError(f"{self.kind} provider {self.name!r} needs an endpoint")


def parse_provider_flag(flag: str) -> ProviderSpec:
    """Parse ``name=kind:endpoint`` (endpoint optional for builtin)."""
    name, sep, rest = flag.partition("=")
    if not sep or not name:
        raise ValueError(f"provider flag must look like name=kind:endpoint, got {flag!r}")
    kind, _, endpoint = rest.partition(":")
    return ProviderSpec(name=name.strip(), kind=kind.strip(), endpoint=endpoint.strip())


def exchange_once(spec: ProviderSpec, lines: list[str]) -> list[str]:
    """Send a self-contained batch of lines and collect all response lines."""
    if spec.kind == "subprocess":
        return _exchange_subprocess(spec, lines)
    if spec.kind == "http":
        return _exchange_http(spec, lines)
    raise TransportError(f"provider {spec.name!r} has no wire transport")


def _exchange_subprocess(spec: ProviderSpec, lines: list[str]) -> list[str]:
    try:
        proc = subprocess.run(
            shlex.split(spec.endpoint),
            input="\n".join(lines) + "\n",
            capture_output=True,
            text=True,
            timeout=spec.timeout,
        )
    except FileNotFoundError as exc:
        raise TransportError(f"provider {spec.name!r}: command not found: {exc}")
    except subprocess.TimeoutExpired:
        raise TransportError(f"provider {spec.name!r}: timed out after {spec.timeout}s")
    if proc.returncode != 0:
        raise TransportError(
            f"provider {spec.name!r}: exited {proc.returncode}: {proc.stderr.strip()[:200]}"
        )
    return [line for line in proc.stdout.splitlines() if line.strip()]


def _exchange_http(spec: ProviderSpec, lines: list[str]) -> list[str]:
    body = ("\n".join(lines) + "\n").encode("utf-8")
    request = urllib.request.Request(
        spec.endpoint, data=body, headers={"Content-Type": "application/x-ndjson"}
    )
    try:
        with urllib.request.urlopen(request, timeout=spec.timeout) as response:
            payload = response.read().decode("utf-8")
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise TransportError(f"provider {spec.name!r}: {exc}")
    return [line for line in payload.splitlines() if line.strip()]


class LineClient:
    """Persistent line-oriented subprocess peer (needed by stateful backends)."""

    def __init__(self, command: str, timeout: float = 60.0):
        self.timeout = timeout
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except FileNotFoundError as exc:
            raise TransportError(f"backend command not found: {exc}")
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            if line.strip():
                self._lines.put(line.rstrip("\n"))
        self._lines.put(None)

    def request(self, lines: list[str], responses: int = 1) -> list[str]:
        if self._proc.poll() is not None:
            raise TransportError("backend process exited")
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write("\n".join(lines) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"backend pipe closed: {exc}")
        out: list[str] = []
        for _ in range(responses):
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                raise TransportError(f"backend timed out after {self.timeout}s")
            if line is None:
                raise TransportError("backend closed its output stream")
            out.append(line)
        return out

    def close(self):
        if self._proc.poll() is None:
            if self._proc.stdin is not None:
                try:
                    self._proc.stdin.close()
                except OSError:
                    pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


def decode_response_lines(lines: list[str]) -> list[dict]:
    decoded = []
    for line in lines:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TransportError(f"undecodable response line {line[:80]!r}: {exc}")
        if not isinstance(obj, dict):
            raise TransportError(f"response line is not an object: {line[:80]!r}")
        decoded.append(obj)
    return decoded
