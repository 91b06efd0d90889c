"""Stateless, seed-indexed Bernoulli bond configurations.

Every edge carries a uniform variate computed from a 64-bit hash, so an edge
is re-read consistently no matter when or how often the explorer asks for it,
and nothing but the explored region is ever stored.

Variate definition (fixed byte-for-byte)::

    msg  = master_seed.to_bytes(8, "little")
         + sample_index.to_bytes(8, "little")
         + edge_string.encode("utf-8")          # "lo~hi", lo < hi
    h    = BLAKE2b(msg, digest_size=8)           # RFC 7693, no key
    x    = int.from_bytes(h, "little")           # 64-bit unsigned
    u    = (x >> 11) * 2**-53                    # in [0, 1)

The edge is open at parameter p iff ``u < p``. One variate per edge gives the
standard monotone coupling across all p.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import ValidationError
from .graphs import EdgeKey

_MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


@dataclass(frozen=True)
class ConfigSeed:
    master_seed: int
    sample_index: int

    def __post_init__(self):
        for name in ("master_seed", "sample_index"):
            val = getattr(self, name)
            if not isinstance(val, int) or not 0 <= val <= _MASK64:
                raise ValidationError(f"{name} must be a 64-bit unsigned integer, got {val!r}")

    def prefix(self) -> bytes:
        return self.master_seed.to_bytes(8, "little") + self.sample_index.to_bytes(8, "little")


def hash64(seed: ConfigSeed, edge_string: str) -> int:
    h = hashlib.blake2b(seed.prefix(), digest_size=8)
    h.update(edge_string.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def uniform_variate(seed: ConfigSeed, edge_string: str) -> float:
    return (hash64(seed, edge_string) >> 11) * _INV_2_53


@dataclass(frozen=True)
class EdgeConfig:
    seed: ConfigSeed
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {self.p!r}")

    @classmethod
    def make(cls, master_seed: int, sample_index: int, p: float) -> "EdgeConfig":
        return cls(ConfigSeed(master_seed, sample_index), p)

    def variate_fn(self):
        """Fast ``edge_string -> variate`` closure used by the explorer."""
        base = hashlib.blake2b(self.seed.prefix(), digest_size=8)
        from_bytes = int.from_bytes

        def variate(edge_string: str) -> float:
            h = base.copy()
            h.update(edge_string.encode())
            return (from_bytes(h.digest(), "little") >> 11) * _INV_2_53

        return variate

    def is_open_fn(self):
        """Fast ``edge_string -> bool`` closure; short-circuits p in {0, 1}."""
        p = self.p
        if p <= 0.0:
            return lambda s: False
        if p >= 1.0:
            return lambda s: True
        variate = self.variate_fn()
        return lambda s: variate(s) < p


def edge_state(cfg: EdgeConfig, e: EdgeKey | str) -> bool:
    """True iff the edge is open under ``cfg``."""
    s = e if isinstance(e, str) else e.serialize()
    if cfg.p <= 0.0:
        return False
    if cfg.p >= 1.0:
        return True
    return uniform_variate(cfg.seed, s) < cfg.p


def empirical_density(cfg: EdgeConfig, edges) -> float:
    """Fraction of ``edges`` (EdgeKeys or edge strings) that are open."""
    edges = list(edges)
    if not edges:
        raise ValidationError("empirical_density needs a non-empty edge list")
    is_open = cfg.is_open_fn()
    n_open = sum(1 for e in edges if is_open(e if isinstance(e, str) else e.serialize()))
    return n_open / len(edges)
