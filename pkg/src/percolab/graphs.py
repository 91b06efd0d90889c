"""Implicit infinite transitive graphs: the d-regular tree and the d-regular
tree crossed with the integer line.

Tree vertices are words over ``d`` self-inverse letters ``a, b, c, ...`` with no
letter repeated twice in a row (the Cayley graph of the free product of ``d``
copies of Z/2). A vertex of the product family is a pair ``(word, k)``.

Vertices serialize to plain strings, ``"w"`` for trees and ``"w|k"`` for the
product, and the hot loops of the explorer work directly on those strings.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from functools import total_ordering

from . import ResourceError, ValidationError

DEFAULT_MEMORY_CAP = 2**27


@total_ordering
@dataclass(frozen=True)
class VertexCode:
    family_tag: str
    word: str = ""
    coord: int | None = None

    def sort_key(self):
        return (len(self.word), self.word, 0 if self.coord is None else self.coord)

    def __lt__(self, other):
        if not isinstance(other, VertexCode):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def serialize(self) -> str:
        if self.coord is None:
            return self.word
        return f"{self.word}|{self.coord}"

    def __str__(self):
        return self.serialize() or "ε"


@dataclass(frozen=True)
class EdgeKey:
    lo: VertexCode
    hi: VertexCode

    def serialize(self) -> str:
        return f"{self.lo.serialize()}~{self.hi.serialize()}"


def _reduce_word(word: str) -> str:
    out = []
    for ch in word:
        if out and out[-1] == ch:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def _tree_distance(u: str, v: str) -> int:
    n = min(len(u), len(v))
    c = 0
    while c < n and u[c] == v[c]:
        c += 1
    return len(u) + len(v) - 2 * c


class GraphFamily:
    """Common machinery; subclasses define the vertex encoding."""

    tag: str
    degree: int
    pc: float | None

    # --- code level -----------------------------------------------------
    def root(self) -> VertexCode:
        raise NotImplementedError

    def validate(self, v: VertexCode) -> None:
        raise NotImplementedError

    def code(self, key: str) -> VertexCode:
        raise NotImplementedError

    def neighbors(self, v: VertexCode) -> list[VertexCode]:
        self.validate(v)
        return [self.code(k) for k in self.neighbor_keys(v.serialize())]

    def edge_key(self, u: VertexCode, v: VertexCode) -> EdgeKey:
        self.validate(u)
        self.validate(v)
        if self.graph_distance(u, v) != 1:
            raise ValidationError(f"{u} and {v} are not adjacent")
        lo, hi = (u, v) if u < v else (v, u)
        return EdgeKey(lo, hi)

    def ball_enumerate(self, center: VertexCode, L: int,
                       cap: int = DEFAULT_MEMORY_CAP) -> list[VertexCode]:
        """All vertices within graph distance ``L`` of ``center``, sorted."""
        if L < 0:
            raise ValidationError("radius must be non-negative")
        self.validate(center)
        start = center.serialize()
        seen = {start}
        frontier = [start]
        for radius in range(1, L + 1):
            nxt = []
            for x in frontier:
                for y in self.neighbor_keys(x):
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            if len(seen) > cap:
                raise ResourceError(
                    f"ball of radius {radius} exceeds memory cap {cap}",
                    attained=radius - 1)
            frontier = nxt
        return sorted((self.code(k) for k in seen), key=VertexCode.sort_key)

    # --- string level (hot paths) ----------------------------------------
    def neighbor_keys(self, key: str) -> list[str]:
        raise NotImplementedError

    def edge_string(self, a: str, b: str) -> str:
        raise NotImplementedError

    def graph_distance(self, u: VertexCode, v: VertexCode) -> int:
        raise NotImplementedError

    @property
    def is_tree(self) -> bool:
        return False


@dataclass(frozen=True)
class RegularTree(GraphFamily):
    d: int

    tag = "tree"

    def __post_init__(self):
        if not isinstance(self.d, int) or not 3 <= self.d <= 26:
            raise ValidationError(f"tree degree must be an integer in [3, 26], got {self.d!r}")

    @property
    def degree(self) -> int:
        return self.d

    @property
    def pc(self) -> float:
        return 1.0 / (self.d - 1)

    @property
    def alphabet(self) -> str:
        return string.ascii_lowercase[: self.d]

    @property
    def is_tree(self) -> bool:
        return True

    @property
    def descriptor(self) -> str:
        return f"tree:d={self.d}"

    def root(self) -> VertexCode:
        return VertexCode(self.tag)

    def normalize(self, word: str) -> str:
        bad = set(word) - set(self.alphabet)
        if bad:
            raise ValidationError(f"letters {sorted(bad)} not in alphabet {self.alphabet!r}")
        return _reduce_word(word)

    def vertex(self, word: str = "") -> VertexCode:
        v = VertexCode(self.tag, word)
        self.validate(v)
        return v

    def validate(self, v: VertexCode) -> None:
        if v.family_tag != self.tag or v.coord is not None:
            raise ValidationError(f"{v!r} is not a {self.descriptor} vertex")
        self._check_word(v.word)

    def _check_word(self, word: str) -> None:
        alphabet = self.alphabet
        prev = ""
        for ch in word:
            if ch not in alphabet:
                raise ValidationError(f"letter {ch!r} not in alphabet {alphabet!r}")
            if ch == prev:
                raise ValidationError(f"word {word!r} is not in normal form")
            prev = ch

    def code(self, key: str) -> VertexCode:
        return VertexCode(self.tag, key)

    def neighbor_keys(self, key: str) -> list[str]:
        if not key:
            return list(self.alphabet)
        last = key[-1]
        out = [key[:-1]]
        out.extend(key + ch for ch in self.alphabet if ch != last)
        return out

    def child_keys(self, key: str) -> list[str]:
        """Neighbours one step further from the root than ``key``."""
        if not key:
            return list(self.alphabet)
        last = key[-1]
        return [key + ch for ch in self.alphabet if ch != last]

    def edge_string(self, a: str, b: str) -> str:
        return f"{a}~{b}" if len(a) < len(b) else f"{b}~{a}"

    def graph_distance(self, u: VertexCode, v: VertexCode) -> int:
        self.validate(u)
        self.validate(v)
        return _tree_distance(u.word, v.word)

    def ball_size(self, L: int) -> int:
        d = self.d
        return 1 + d * ((d - 1) ** L - 1) // (d - 2)

    def sphere_size(self, r: int) -> int:
        return 1 if r == 0 else self.d * (self.d - 1) ** (r - 1)


@dataclass(frozen=True)
class TreeCrossZ(GraphFamily):
    """The d-regular tree times the integer line; degree d + 2.

    ``pc`` has no closed form and must be supplied (see
    ``scripts/estimate_pc_treez.py``) by experiments that need it.
    """

    d: int
    pc: float | None = None
    pc_stderr: float | None = None

    tag = "treez"

    def __post_init__(self):
        if not isinstance(self.d, int) or not 3 <= self.d <= 26:
            raise ValidationError(f"tree degree must be an integer in [3, 26], got {self.d!r}")

    @property
    def degree(self) -> int:
        return self.d + 2

    @property
    def alphabet(self) -> str:
        return string.ascii_lowercase[: self.d]

    @property
    def descriptor(self) -> str:
        s = f"treez:d={self.d}"
        if self.pc is not None:
            s += f",pc={self.pc!r}"
        return s

    def root(self) -> VertexCode:
        return VertexCode(self.tag, "", 0)

    def vertex(self, word: str = "", coord: int = 0) -> VertexCode:
        v = VertexCode(self.tag, word, coord)
        self.validate(v)
        return v

    def validate(self, v: VertexCode) -> None:
        if v.family_tag != self.tag or not isinstance(v.coord, int):
            raise ValidationError(f"{v!r} is not a {self.descriptor} vertex")
        RegularTree(self.d)._check_word(v.word)

    def code(self, key: str) -> VertexCode:
        word, _, k = key.partition("|")
        return VertexCode(self.tag, word, int(k))

    def neighbor_keys(self, key: str) -> list[str]:
        word, _, k = key.partition("|")
        ki = int(k)
        if word:
            last = word[-1]
            out = [f"{word[:-1]}|{k}"]
            out.extend(f"{word}{ch}|{k}" for ch in self.alphabet if ch != last)
        else:
            out = [f"{ch}|{k}" for ch in self.alphabet]
        out.append(f"{word}|{ki + 1}")
        out.append(f"{word}|{ki - 1}")
        return out

    def edge_string(self, a: str, b: str) -> str:
        wa, _, ka = a.partition("|")
        wb, _, kb = b.partition("|")
        if (len(wa), wa, int(ka)) < (len(wb), wb, int(kb)):
            return f"{a}~{b}"
        return f"{b}~{a}"

    def graph_distance(self, u: VertexCode, v: VertexCode) -> int:
        self.validate(u)
        self.validate(v)
        return _tree_distance(u.word, v.word) + abs(u.coord - v.coord)


def parse_family(descriptor: str) -> GraphFamily:
    """Parse ``"tree:d=3"`` or ``"treez:d=3[,pc=0.4[,pc_se=0.01]]"``."""
    kind, _, rest = descriptor.strip().partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValidationError(f"bad family parameter {item!r} in {descriptor!r}")
        params[key.strip()] = val.strip()
    try:
        d = int(params.pop("d"))
    except (KeyError, ValueError):
        raise ValidationError(f"family descriptor {descriptor!r} needs an integer d") from None
    if kind == "tree":
        if params:
            raise ValidationError(f"unknown tree parameters {sorted(params)}")
        return RegularTree(d)
    if kind == "treez":
        pc = params.pop("pc", None)
        pc_se = params.pop("pc_se", None)
        if params:
            raise ValidationError(f"unknown treez parameters {sorted(params)}")
        return TreeCrossZ(d, None if pc is None else float(pc),
                          None if pc_se is None else float(pc_se))
    raise ValidationError(f"unknown graph family {kind!r}")
