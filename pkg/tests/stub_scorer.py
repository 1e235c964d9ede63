#!/usr/bin/env python3
"""Wire-protocol stub scorer used by backend tests.

Reads newline-delimited {"id", "premise", "hypothesis"} requests on stdin
and answers {"id", "score"} on stdout.  Scores are id-dependent so any
reordering mistake in the parent is visible.  Modes:

  stream      answer each request immediately, in order
  shuffle     buffer everything until EOF, answer in shuffled order
  bad-score   answer 1.5 for everything
  alien-id    answer with an id nobody asked for
  drop-first  never answer id 0
  die         exit immediately on the first request
  die-once    exit on the first run (marker file absent), then stream
  hang        read one request, then block forever
"""

import argparse
import json
import os
import random
import sys
import time


def score_for(req):
    return ((req["id"] * 37) % 100) / 100


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--mode", default="stream",
                        choices=["stream", "shuffle", "bad-score", "alien-id",
                                 "drop-first", "die", "die-once", "hang"])
    parser.add_argument("--log", default=None,
                        help="append every request line to this file")
    parser.add_argument("--marker", default=None,
                        help="state file for die-once")
    args = parser.parse_args()

    if args.mode == "die-once":
        if not os.path.exists(args.marker):
            open(args.marker, "w").close()
            sys.exit(1)
        args.mode = "stream"

    buffered = []
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        if args.log:
            with open(args.log, "a", encoding="utf-8") as f:
                f.write(line + "\n")
        if args.mode == "stream":
            emit({"id": req["id"], "score": score_for(req)})
        elif args.mode == "bad-score":
            emit({"id": req["id"], "score": 1.5})
        elif args.mode == "alien-id":
            emit({"id": req["id"] + 5000, "score": 0.5})
        elif args.mode == "drop-first":
            if req["id"] != 0:
                emit({"id": req["id"], "score": score_for(req)})
        elif args.mode == "die":
            sys.exit(1)
        elif args.mode == "hang":
            time.sleep(600)
        else:
            buffered.append(req)
    if args.mode == "shuffle":
        random.Random(len(buffered)).shuffle(buffered)
        for req in buffered:
            emit({"id": req["id"], "score": score_for(req)})


if __name__ == "__main__":
    main()
