"""Newline-delimited JSON wire protocol for external policies.

One record per line, strict request/response alternation:

    -> {"type": "reset", "seed": 7}
    <- {"type": "ack", "seed": 7}
    -> {"type": "obs", "step": 0, "state": [9 floats],
        "maps": [16384 floats, row-major 64x64x4 in map order vx,vy,sx,sy],
        "reward": 0.0}
    <- {"type": "act", "a": [0.25, -0.1]}
    ...
    -> {"type": "end", "outcome": "success", "steps": 412,
        "total_energy": 93.2, "total_reward": 118.5}

Floats are encoded with Python's shortest round-trip repr, so parsing
recovers them exactly.  The ``reward`` field carries the reward earned by
the previous action (0 on the first observation) so a learner on the far
end can train without a second channel.
"""

from __future__ import annotations

import json
import logging
import selectors
import subprocess
import sys

import numpy as np

from .errors import ProtocolError
from .observations import Observation
from .policies import Policy

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0


def encode_obs(step: int, obs: Observation, reward: float = 0.0) -> str:
    rec = {
        "type": "obs",
        "step": int(step),
        "state": [float(x) for x in obs.state],
        "maps": [float(x) for x in obs.maps.stack().reshape(-1)],
        "reward": float(reward),
    }
    return json.dumps(rec)


def parse_record(line: str) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed record: {e}") from None
    if not isinstance(rec, dict) or "type" not in rec:
        raise ProtocolError(f"record missing type: {line[:80]!r}")
    return rec


def parse_action(line: str) -> tuple[float, float]:
    rec = parse_record(line)
    if rec["type"] != "act":
        raise ProtocolError(f"expected act record, got {rec['type']!r}")
    a = rec.get("a")
    if (not isinstance(a, (list, tuple))) or len(a) != 2:
        raise ProtocolError(f"act record needs a 2-float 'a', got {a!r}")
    al, ar = float(a[0]), float(a[1])
    if not (np.isfinite(al) and np.isfinite(ar)):
        raise ProtocolError("non-finite action")
    if abs(al) > 1.0 or abs(ar) > 1.0:
        log.warning("external action (%s, %s) clamped to [-1, 1]", al, ar)
    return (min(max(al, -1.0), 1.0), min(max(ar, -1.0), 1.0))


class _LineTransport:
    """Blocking line I/O with a deadline over a pair of text streams."""

    def __init__(self, writer, reader, timeout: float):
        self._writer = writer
        self._reader = reader
        self.timeout = timeout
        self._sel = None
        if hasattr(reader, "fileno"):
            try:
                self._sel = selectors.DefaultSelector()
                self._sel.register(reader, selectors.EVENT_READ)
            except (ValueError, OSError, PermissionError):
                self._sel = None

    def send_line(self, line: str) -> None:
        try:
            self._writer.write(line + "\n")
            self._writer.flush()
        except (BrokenPipeError, ValueError, OSError) as e:
            raise ProtocolError(f"policy pipe closed while writing: {e}") from None

    def recv_line(self) -> str:
        if self._sel is not None:
            if not self._sel.select(self.timeout):
                raise ProtocolError(f"policy reply timed out after {self.timeout}s")
        line = self._reader.readline()
        if line == "":
            raise ProtocolError("policy closed the stream")
        return line.rstrip("\n")

    def close(self) -> None:
        if self._sel is not None:
            self._sel.close()


class ExternalPolicy(Policy):
    """Policy served by a subprocess (or any stream pair) speaking the
    protocol above."""

    needs_maps = True

    def __init__(self, command=None, streams=None, timeout: float = DEFAULT_TIMEOUT):
        if (command is None) == (streams is None):
            raise ValueError("pass exactly one of command or streams")
        self._proc = None
        if command is not None:
            self._proc = subprocess.Popen(
                command, shell=isinstance(command, str),
                stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1)
            self._io = _LineTransport(self._proc.stdin, self._proc.stdout, timeout)
        else:
            self._io = _LineTransport(streams[0], streams[1], timeout)
        self._step = 0
        self._pending_reward = 0.0

    def reset(self, seed: int) -> None:
        self._step = 0
        self._pending_reward = 0.0
        self._io.send_line(json.dumps({"type": "reset", "seed": int(seed)}))
        rec = parse_record(self._io.recv_line())
        if rec.get("type") != "ack":
            raise ProtocolError(f"expected ack after reset, got {rec.get('type')!r}")

    def push_reward(self, reward: float) -> None:
        """Reward for the latest action; shipped with the next observation."""
        self._pending_reward = float(reward)

    def act(self, obs: Observation) -> tuple[float, float]:
        self._io.send_line(encode_obs(self._step, obs, self._pending_reward))
        self._pending_reward = 0.0
        action = parse_action(self._io.recv_line())
        self._step += 1
        return action

    def end_episode(self, outcome: str, steps: int, total_energy: float,
                    total_reward: float) -> None:
        try:
            self._io.send_line(json.dumps({
                "type": "end", "outcome": outcome, "steps": int(steps),
                "total_energy": float(total_energy), "total_reward": float(total_reward),
                "reward": self._pending_reward}))  # the final action's reward
        except ProtocolError:
            pass  # a policy gone after the final act is not an error

    def close(self) -> None:
        self._io.close()
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()


def stdio_policy(timeout: float = DEFAULT_TIMEOUT) -> ExternalPolicy:
    """Run the protocol over this process's own stdout/stdin: the parent
    process acts as the policy (used by trainers that drive the simulator)."""
    return ExternalPolicy(streams=(sys.stdout, sys.stdin), timeout=timeout)
