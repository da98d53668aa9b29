#!/usr/bin/env python3
"""Test backend that violates predict determinism (for conformance tests)."""
import json
import sys

calls = 0
lines = iter(sys.stdin)
for line in lines:
    line = line.strip()
    if not line:
        continue
    request = json.loads(line)
    if request.get("verb") == "train":
        for _ in range(int(request.get("count", 0))):
            next(lines)
        print(json.dumps({"id": request["id"], "model": "m1"}))
    else:
        calls += 1
        print(json.dumps({"id": request["id"], "sql": f"SELECT c{calls} FROM t"}))
    sys.stdout.flush()
