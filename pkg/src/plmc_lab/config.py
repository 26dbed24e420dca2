"""Experiment configuration: one JSON document per run.

Validation errors carry the file name and the line of the offending key,
e.g. ``study.json:7: eta must be > 0``.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .chains import ChainConfig
from .exceptions import HypothesisError
from .geometry import ConvexBody, body_from_dict
from .potentials import Potential, potential_from_dict


class ConfigError(ValueError):
    """Invalid experiment configuration (exit status 2)."""


class Config:
    """A parsed config document that can point validation errors at lines."""

    def __init__(self, data: dict, text: str = "", source: str = "<config>"):
        if not isinstance(data, dict):
            raise ConfigError(f"{source}:1: top level must be a JSON object")
        self.data = data
        self.text = text
        self.source = source

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
        return cls.parse(text, str(path))

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> "Config":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
        return cls(data, text, source)

    def line_of(self, key: str) -> int:
        match = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, match.start()) + 1 if match else 1

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(f"{self.source}:{self.line_of(key)}: {message}")

    def require(self, key: str):
        if key not in self.data:
            raise ConfigError(f"{self.source}:1: missing required field {key!r}")
        return self.data[key]

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def number(self, key: str, default=None, positive: bool = False, integer: bool = False):
        if key not in self.data:
            if default is None:
                raise ConfigError(f"{self.source}:1: missing required field {key!r}")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(key, f"{key} must be a number")
        if integer and not float(value).is_integer():
            raise self.error(key, f"{key} must be an integer")
        if positive and not value > 0:
            raise self.error(key, f"{key} must be > 0")
        return int(value) if integer else float(value)

    def body(self, key: str = "body") -> ConvexBody:
        desc = self.require(key)
        try:
            return body_from_dict(desc)
        except (KeyError, TypeError, ValueError) as exc:
            raise self.error(key, f"invalid {key}: {_describe(exc)}") from exc

    def potential(self, key: str = "potential") -> Potential:
        desc = self.require(key)
        try:
            return potential_from_dict(desc)
        except (KeyError, TypeError, ValueError) as exc:
            raise self.error(key, f"invalid {key}: {_describe(exc)}") from exc

    def chain(self, body: ConvexBody, potential: Potential, eta: float, steps: int,
              seed: int, lipschitz: float | None = None) -> ChainConfig:
        x0 = self.get("x0")
        x0 = body.interior_point() if x0 is None else np.asarray(x0, dtype=float)
        try:
            return ChainConfig(body, potential, x0, eta, steps, seed, lipschitz=lipschitz)
        except HypothesisError as exc:
            raise self.error("eta", f"{exc} (step-size hypothesis eta < n / L^2)") from exc
        except (TypeError, ValueError) as exc:
            key = "x0" if "x0" in str(exc) else "potential"
            raise self.error(key, f"invalid chain setup: {_describe(exc)}") from exc

    def resolved(self, **extra) -> dict:
        out = dict(self.data)
        out.update(extra)
        return out


def _describe(exc: Exception) -> str:
    if isinstance(exc, KeyError):
        return f"missing field {exc.args[0]!r}"
    return str(exc)
