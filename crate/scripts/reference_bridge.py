#!/usr/bin/env python3
"""Mock external classifier speaking the heroscan bridge protocol.

The bridge protocol is line-delimited JSON over stdin/stdout. Request:

    {"image_path": "/tmp/crop.png", "roi_type": "appearance"}

Response:

    {"labels": ["arthur", "daji"], "confidences": [0.9, 0.1]}

This mock answers every request with the fixed ranking given as argv
``label:confidence`` pairs, e.g.::

    heroscan recognize frame.png --bridge \
        "python3 scripts/reference_bridge.py arthur:0.9 daji:0.1"

It exists for wiring tests and as a template for real bridges (which
would open ``image_path`` and run an actual model).
"""

import json
import sys


def main() -> int:
    pairs = [arg.rsplit(":", 1) for arg in sys.argv[1:]]
    if not pairs:
        pairs = [("arthur", "0.9"), ("daji", "0.1")]
    labels = [label for label, _ in pairs]
    confidences = [float(conf) for _, conf in pairs]
    for line in sys.stdin:
        if not line.strip():
            continue
        request = json.loads(line)
        if "image_path" not in request or "roi_type" not in request:
            raise ValueError(f"malformed bridge request: {line!r}")
        # One response line per request; flushing is what keeps the
        # caller from blocking on a buffered pipe.
        print(json.dumps({"labels": labels, "confidences": confidences}), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
