"""Crane slewing simulator and input-shaping toolkit."""

import json as _json

from . import _core
from ._core import natural_frequency, design_mumzv, residual_vibration, speed_scaling

__all__ = [
    "natural_frequency",
    "design_mumzv",
    "residual_vibration",
    "speed_scaling",
    "default_config",
    "fingerprint",
    "static_load_limit",
    "run_analysis",
    "run_trial",
    "Session",
]


def default_config():
    return _json.loads(_core.default_config())


def fingerprint(config=None):
    return _core.fingerprint(_json.dumps(config or {}))


def static_load_limit(radius, boom_length, crane=None):
    return _core.static_load_limit(radius, boom_length, _json.dumps(crane or {}))


def run_analysis(kind, config=None):
    """Returns {artifact name: (rows, csv text)}."""
    return {name: (rows, text) for name, rows, text in _core.run_analysis(kind, _json.dumps(config or {}))}


def run_trial(scenario, rate, shaped=False):
    return _json.loads(_core.run_trial(_json.dumps(scenario), rate, shaped))


class Session:
    """Live trial driven by joystick samples in [-1, 1]."""

    def __init__(self, scenario, shaped=False):
        self._s = _core.LiveSession(_json.dumps(scenario), shaped)

    def step(self, joystick, now):
        return _json.loads(self._s.step(joystick, now))

    def abort(self):
        self._s.abort()

    @property
    def phase(self):
        return self._s.phase

    @property
    def terminal(self):
        return self._s.terminal

    @property
    def commanded_rate(self):
        return self._s.commanded_rate

    def state(self):
        return _json.loads(self._s.state())

    def metrics(self):
        return _json.loads(self._s.metrics())
