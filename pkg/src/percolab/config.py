"""Experiment configuration and its ``key = value`` text form.

Grammar: one ``key = value`` per line; ``#`` starts a comment; blank lines are
ignored. Lists are comma-separated. Unset optional keys are omitted. Text
produced by :meth:`ExperimentConfig.to_text` parses back to an equal config.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from . import ValidationError

KINDS = ("growth", "rates", "genfun", "tauberian", "diffineq", "ks", "zeta", "cheeger",
         "variance", "triangle", "fixtures")

_FLOAT_LISTS = {"p_grid", "alpha_fracs"}
_INT_LISTS = {"r_list", "k_list", "size_grid"}


@dataclass
class ExperimentConfig:
    kind: str = "growth"
    family: str = "tree:d=3"
    p: float | None = None
    p_grid: list = field(default_factory=list)
    r_max: int | None = None
    samples: int | None = None
    seed: int = 0
    r_inf: int | None = None
    cap: int | None = None
    out: str = "out"
    threads: int = 1
    engine: str = "auto"
    alpha_fracs: list = field(default_factory=list)
    r_list: list = field(default_factory=list)
    k_list: list = field(default_factory=list)
    size_grid: list = field(default_factory=list)
    L: int | None = None
    p_tilt: float | None = None
    max_edges: int | None = None
    min_survivors: int | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown experiment kind {self.kind!r}")

    # --- serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None or (isinstance(val, list) and not val):
                continue
            if isinstance(val, list):
                val = ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{f.name} = {val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, val = line.partition("=")
            if not eq:
                raise ValidationError(f"line {n}: expected 'key = value', got {raw!r}")
            values[key.strip()] = val.strip()
        return cls.from_strings(values)

    @classmethod
    def from_strings(cls, values: dict) -> "ExperimentConfig":
        types = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, val in values.items():
            if key not in types:
                raise ValidationError(f"unknown config key {key!r}")
            kwargs[key] = _convert(key, val)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def updated(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _convert(key: str, val: str):
    try:
        if key in _FLOAT_LISTS:
            return [float(x) for x in val.split(",") if x.strip()]
        if key in _INT_LISTS:
            return [int(x) for x in val.split(",") if x.strip()]
        if key in {"p", "p_tilt", "delta"}:
            return float(val)
        if key in {"r_max", "samples", "seed", "r_inf", "cap", "threads", "L", "max_edges",
                   "min_survivors"}:
            return int(val)
    except ValueError:
        raise ValidationError(f"bad value {val!r} for config key {key!r}") from None
    return val
