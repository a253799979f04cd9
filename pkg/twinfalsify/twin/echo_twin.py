#!/usr/bin/env python3
"""Minimal external twin speaking the line protocol.

The state starts as the first ``--dim`` entries of x0 (zero padded); each
step adds the action index, or the sum of the raw doses when given, to
every coordinate. Fault flags make it misbehave on the N-th step it serves.
"""

import sys
import json
import time
import argparse


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main(argv=None):
    parser = argparse.ArgumentParser(description="Echo twin for protocol tests")
    parser.add_argument("--dim", type=int, default=1, help="Observation dimension")
    parser.add_argument("--hang-on-step", type=int, default=0)
    parser.add_argument("--crash-on-step", type=int, default=0)
    parser.add_argument("--garbage-on-step", type=int, default=0)
    args = parser.parse_args(argv)

    state = None
    steps = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
        except json.JSONDecodeError:
            emit({"error": "malformed request"})
            continue
        cmd = req.get("cmd")

        if cmd == "init":
            x0 = list(req.get("x0", []))[:args.dim]
            state = [float(v) for v in x0] + [0.0] * (args.dim - len(x0))
            emit({"ok": True})
        elif cmd == "step":
            if state is None:
                emit({"error": "step before init"})
                continue
            steps += 1
            if steps == args.hang_on_step:
                time.sleep(3600)
            if steps == args.crash_on_step:
                sys.exit(1)
            increment = sum(req["raw"]) if "raw" in req else req.get("a", 0)
            state = [v + increment for v in state]
            if steps == args.garbage_on_step:
                sys.stdout.write(json.dumps({"x": state}) + " garbage\n")
                sys.stdout.flush()
                continue
            emit({"x": state})
        elif cmd == "reset":
            state = None
            emit({"ok": True})
        else:
            emit({"error": f"unknown command {cmd!r}"})


if __name__ == "__main__":
    main()
