#!/usr/bin/env python3
"""Test provider: answers each request with n copies of the input text."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    try:
        request = json.loads(line)
    except json.JSONDecodeError:
        print(json.dumps({"error": {"code": "bad_request", "message": "not json"}}))
        sys.stdout.flush()
        continue
    if "id" not in request:
        print(json.dumps({"error": {"code": "bad_request", "message": "missing id"}}))
        sys.stdout.flush()
        continue
    n = int(request.get("n", 1))
    print(json.dumps({"id": request["id"], "candidates": [request.get("text", "")] * n}))
    sys.stdout.flush()
