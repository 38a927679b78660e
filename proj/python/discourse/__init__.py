"""Obligation-driven discourse engine.

Thin wrapper over the C++ core: records are exchanged as dicts.
"""

import json

from . import _core
from ._core import DATA_DIR, DecodeError, DiscourseError, kb_query, parse_term

__all__ = [
    "DATA_DIR",
    "DecodeError",
    "DiscourseError",
    "Session",
    "kb_query",
    "parse_command",
    "parse_term",
    "replay",
]


class Session:
    """One protocol conversation, as served over the wire."""

    def __init__(self, policy=None, world=None, seed=None, pause_ticks=None):
        self._s = _core.Session(policy=policy, world=world, seed=seed, pause_ticks=pause_ticks)

    def hello(self):
        return [json.loads(r) for r in self._s.hello()]

    def send(self, message):
        """Handles one client record (dict or raw line); returns engine records."""
        line = message if isinstance(message, str) else json.dumps(message)
        return [json.loads(r) for r in self._s.handle_line(line)]

    def context(self):
        return json.loads(self._s.context())

    def trace(self):
        return [json.loads(r) for r in self._s.trace()]

    @property
    def ended(self):
        return self._s.ended


def replay(script, golden=None, policy=None, world=None, seed=None, pause_ticks=None):
    return json.loads(
        _core.replay(script, golden=golden, policy=policy, world=world, seed=seed,
                     pause_ticks=pause_ticks))


def parse_command(line, utt, tick):
    return json.loads(_core.parse_command(line, utt, tick))
