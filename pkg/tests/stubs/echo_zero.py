"""External-policy stub: acknowledges resets, answers every observation
with zero thrust."""

import json
import sys


def main():
    for line in sys.stdin:
        rec = json.loads(line)
        if rec["type"] == "reset":
            print(json.dumps({"type": "ack", "seed": rec["seed"]}), flush=True)
        elif rec["type"] == "obs":
            print(json.dumps({"type": "act", "a": [0.0, 0.0]}), flush=True)
        elif rec["type"] == "end":
            pass


if __name__ == "__main__":
    main()
