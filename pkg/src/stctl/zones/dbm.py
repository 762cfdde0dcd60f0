"""Difference bound matrices over integer-bounded clock zones.

Clocks are addressed by their network ``ClockId`` (0-based).  Internally the
matrix reserves index 0 for the reference clock, so clock ``c`` lives at row
and column ``c + 1``; entry ``(i, j)`` bounds ``x_i - x_j``.

Every public operation is pure: inputs are never mutated and every returned
:class:`Dbm` is canonical.  The empty zone is the singleton :data:`EMPTY`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels as K
from ._kernels import INF, LE_ZERO

__all__ = [
    "Bound",
    "Interval",
    "Dbm",
    "EMPTY",
    "ZoneError",
    "canonicalize",
    "intersect",
    "time_elapse",
    "reset",
    "includes",
    "extrapolate",
    "split_on_interval",
    "subtract",
    "covered_by",
    "render",
]


class ZoneError(ValueError):
    """Misuse of the zone API (dimension mismatch, unknown clock, ...)."""


@dataclass(frozen=True, order=False)
class Bound:
    """Upper bound ``value`` on a clock difference; ``strict`` means ``<``."""

    value: float
    strict: bool

    def __post_init__(self):
        if self.value == math.inf and not self.strict:
            raise ZoneError("an infinite bound is always strict")

    @classmethod
    def inf(cls) -> "Bound":
        return cls(math.inf, True)

    def encode(self) -> int:
        if self.value == math.inf:
            return int(INF)
        return 2 * int(self.value) + (0 if self.strict else 1)

    @classmethod
    def decode(cls, e: int) -> "Bound":
        e = int(e)
        if e == INF:
            return cls.inf()
        return cls(e >> 1, not (e & 1))

    def __add__(self, other: "Bound") -> "Bound":
        return Bound(self.value + other.value, self.strict or other.strict)

    def __lt__(self, other: "Bound") -> bool:
        return (self.value, not self.strict) < (other.value, not other.strict)

    def __le__(self, other: "Bound") -> bool:
        return self == other or self < other


@dataclass(frozen=True)
class Interval:
    """Non-empty interval of non-negative reals with integer endpoints.

    ``upper is None`` stands for +infinity (always open).
    """

    lower: int = 0
    upper: Optional[int] = None
    lower_strict: bool = False
    upper_strict: bool = True

    def __post_init__(self):
        if self.lower < 0:
            raise ZoneError("interval lower bound must be non-negative")
        if self.upper is None:
            object.__setattr__(self, "upper_strict", True)
            return
        if self.upper < self.lower:
            raise ZoneError(f"malformed interval: lower {self.lower} > upper {self.upper}")
        if self.upper == self.lower and (self.lower_strict or self.upper_strict):
            raise ZoneError("interval is empty")

    @property
    def max_constant(self) -> int:
        return self.lower if self.upper is None else max(self.lower, self.upper)

    def contains(self, t: float) -> bool:
        lo = t > self.lower if self.lower_strict else t >= self.lower
        if self.upper is None:
            return lo
        hi = t < self.upper if self.upper_strict else t <= self.upper
        return lo and hi

    def __str__(self):
        left = "(" if self.lower_strict else "["
        if self.upper is None:
            return f"{left}{self.lower};inf)"
        right = ")" if self.upper_strict else "]"
        return f"{left}{self.lower};{self.upper}{right}"


class _EmptyZone:
    """The distinguished empty zone."""

    __slots__ = ()
    is_empty = True
    canonical = True

    def __repr__(self):
        return "EMPTY"

    def __reduce__(self):
        return "EMPTY"


EMPTY = _EmptyZone()


class Dbm:
    """A zone over ``nclocks`` clocks, stored as an ``(n+1) x (n+1)`` int64 matrix."""

    __slots__ = ("m", "canonical", "_key")
    is_empty = False

    def __init__(self, matrix: np.ndarray, canonical: bool = False):
        m = np.asarray(matrix, dtype=np.int64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ZoneError("DBM matrix must be square")
        m.setflags(write=False)
        self.m = m
        self.canonical = canonical
        self._key = None

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    @property
    def nclocks(self) -> int:
        return self.m.shape[0] - 1

    @classmethod
    def universe(cls, nclocks: int) -> "Dbm":
        n = nclocks + 1
        m = np.full((n, n), INF, dtype=np.int64)
        m[0, :] = LE_ZERO
        np.fill_diagonal(m, LE_ZERO)
        return cls(m, canonical=True)

    @classmethod
    def zero(cls, nclocks: int) -> "Dbm":
        n = nclocks + 1
        return cls(np.full((n, n), LE_ZERO, dtype=np.int64), canonical=True)

    @classmethod
    def from_constraints(cls, nclocks: int, constraints: Iterable[tuple]) -> "Dbm | _EmptyZone":
        """Build a canonical zone from ``(i, j, Bound)`` triples on raw matrix
        indices (0 = reference clock), each meaning ``x_i - x_j ~ bound``."""
        m = cls.universe(nclocks).m.copy()
        for i, j, b in constraints:
            e = b.encode() if isinstance(b, Bound) else int(b)
            if e < m[i, j]:
                m[i, j] = e
        return _closed(m)

    def bound(self, i: int, j: int) -> Bound:
        return Bound.decode(self.m[i, j])

    def key(self) -> bytes:
        if self._key is None:
            self._key = self.m.tobytes()
        return self._key

    def __eq__(self, other):
        return isinstance(other, Dbm) and self.dim == other.dim and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Dbm({render(self)})"

    def contains_point(self, valuation: Sequence[float]) -> bool:
        """Membership of a concrete valuation (indexed by ClockId)."""
        vals = (0.0, *valuation)
        n = self.dim
        for i in range(n):
            for j in range(n):
                e = self.m[i, j]
                if e == INF:
                    continue
                d = vals[i] - vals[j]
                c = e >> 1
                if d > c or (d == c and not (e & 1)):
                    return False
        return True


def _closed(m: np.ndarray):
    if not K.close(m):
        return EMPTY
    return Dbm(m, canonical=True)


def _check_dim(z1, z2):
    if z1.dim != z2.dim:
        raise ZoneError(f"dimension mismatch: {z1.dim} vs {z2.dim}")


def _index(z: Dbm, clock: int) -> int:
    if not 0 <= clock < z.nclocks:
        raise ZoneError(f"unknown clock index {clock}")
    return clock + 1


def canonicalize(z):
    """Shortest-path closure; returns :data:`EMPTY` on a negative cycle."""
    if z.is_empty or z.canonical:
        return z
    return _closed(z.m.copy())


def intersect(z1, z2):
    if z1.is_empty or z2.is_empty:
        return EMPTY
    _check_dim(z1, z2)
    return _closed(np.minimum(z1.m, z2.m))


def constrain(z, i: int, j: int, bound) -> "Dbm | _EmptyZone":
    """Conjoin ``x_i - x_j ~ bound`` (raw matrix indices)."""
    if z.is_empty:
        return EMPTY
    e = bound.encode() if isinstance(bound, Bound) else int(bound)
    if z.m[i, j] <= e:
        return z
    m = z.m.copy()
    m[i, j] = e
    return _closed(m)


def time_elapse(z):
    if z.is_empty:
        return EMPTY
    z = canonicalize(z)
    if z.is_empty:
        return EMPTY
    m = z.m.copy()
    K.up(m)
    # up() preserves canonicity of a canonical input
    return Dbm(m, canonical=True)


def reset(z, clocks: Iterable[int]):
    if z.is_empty:
        return EMPTY
    idx = np.array(sorted(_index(z, c) for c in clocks), dtype=np.int64)
    if idx.size == 0:
        return z
    z = canonicalize(z)
    if z.is_empty:
        return EMPTY
    m = z.m.copy()
    K.reset(m, idx)
    return Dbm(m, canonical=True)


def includes(z1, z2) -> bool:
    """True iff every valuation of ``z2`` lies in ``z1``."""
    if z2.is_empty:
        return True
    if z1.is_empty:
        return False
    _check_dim(z1, z2)
    if not (z1.canonical and z2.canonical):
        raise ZoneError("includes() needs canonical operands")
    return bool(K.includes(z1.m, z2.m))


def extrapolate(z, max_const: Sequence[int]):
    """Classic M-extrapolation with per-clock maximal constants (by ClockId)."""
    if z.is_empty:
        return EMPTY
    if len(max_const) != z.nclocks:
        raise ZoneError("max constant table does not match the zone dimension")
    maxc = np.zeros(z.dim, dtype=np.int64)
    maxc[1:] = max_const
    m = z.m.copy()
    K.extrapolate(m, maxc)
    return _closed(m)


def _lower_constraint(idx: int, value: int, strict: bool):
    # x >= v  <=>  0 - x <= -v
    return (0, idx, Bound(-value, strict))


def _upper_constraint(idx: int, value: int, strict: bool):
    return (idx, 0, Bound(value, strict))


def split_on_interval(z, formula_clock: int, interval: Interval):
    """Partition ``z`` by where ``formula_clock`` sits relative to ``interval``.

    Returns ``(inside, before, after)``; absent parts are ``None``.
    """
    if z.is_empty:
        return None, None, None
    z = canonicalize(z)
    if z.is_empty:
        return None, None, None
    f = _index(z, formula_clock)
    I = interval

    def part(*cons):
        r = z
        for i, j, b in cons:
            r = constrain(r, i, j, b)
        return None if r.is_empty else r

    inside_cons = [_lower_constraint(f, I.lower, I.lower_strict)]
    if I.upper is not None:
        inside_cons.append(_upper_constraint(f, I.upper, I.upper_strict))
    inside = part(*inside_cons)

    before = None
    if I.lower > 0 or I.lower_strict:
        # f below I: f < lower, or f <= lower when I is left-open
        before = part(_upper_constraint(f, I.lower, not I.lower_strict))
    after = None
    if I.upper is not None:
        after = part(_lower_constraint(f, I.upper, not I.upper_strict))
    return inside, before, after


def subtract(z, w) -> list:
    """``z \\ w`` as a list of pairwise-disjoint canonical zones."""
    if z.is_empty:
        return []
    if w.is_empty:
        return [z]
    _check_dim(z, w)
    pieces = []
    rest = z
    n = z.dim
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            e = int(w.m[i, j])
            if e == INF or rest.m[i, j] <= e:
                continue
            # complement of x_i - x_j ~ e is x_j - x_i ~' (1 - e)
            piece = constrain(rest, j, i, 1 - e)
            if not piece.is_empty:
                pieces.append(piece)
            rest = constrain(rest, i, j, e)
            if rest.is_empty:
                return pieces
    return pieces


def covered_by(z, zones: Sequence) -> bool:
    """True iff ``z`` is included in the union of ``zones``."""
    pieces = [] if z.is_empty else [z]
    for w in zones:
        if not pieces:
            break
        nxt = []
        for p in pieces:
            nxt.extend(subtract(p, w))
        pieces = nxt
    return not pieces


def _fmt_upper(name: str, b: Bound) -> str:
    return f"{name} {'<' if b.strict else '<='} {b.value}"


def render(z, names: Optional[Sequence[str]] = None) -> str:
    """Stable textual form, e.g. ``0 <= x & x - y < 2``.

    Single-clock bounds come first by clock id; differences follow ordered by
    ``(i, j)`` and are only printed when tighter than the single-clock bounds
    already imply.
    """
    if z.is_empty:
        return "false"
    z = canonicalize(z)
    if z.is_empty:
        return "false"
    n = z.nclocks
    if names is None:
        names = [f"x{c}" for c in range(n)]
    parts = []
    for c in range(n):
        i = c + 1
        lo = Bound.decode(z.m[0, i])
        hi = Bound.decode(z.m[i, 0])
        lo_val = -lo.value
        if hi.value != math.inf and not hi.strict and not lo.strict and hi.value == lo_val:
            parts.append(f"{names[c]} = {hi.value}")
            continue
        parts.append(f"{lo_val} {'<' if lo.strict else '<='} {names[c]}")
        if hi.value != math.inf:
            parts.append(_fmt_upper(names[c], hi))
    def implied(i, j):
        return _add_enc(int(z.m[i, 0]), int(z.m[0, j]))

    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            e = int(z.m[i, j])
            if e == INF:
                continue
            back = int(z.m[j, i])
            if (e & 1) and back != INF and (back & 1) and (back >> 1) == -(e >> 1):
                if i < j and (e < implied(i, j) or back < implied(j, i)):
                    parts.append(f"{names[i - 1]} - {names[j - 1]} = {e >> 1}")
                continue
            if e < implied(i, j):
                parts.append(_fmt_upper(f"{names[i - 1]} - {names[j - 1]}", Bound.decode(e)))
    return " & ".join(parts) if parts else "true"


def _add_enc(a: int, b: int) -> int:
    if a == INF or b == INF:
        return int(INF)
    return ((a >> 1) + (b >> 1)) * 2 + (a & b & 1)
