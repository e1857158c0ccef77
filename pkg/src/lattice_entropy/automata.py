"""Cellular automata on the full shift over a finite alphabet.

A rule is a finite domain ``I`` plus either a dense lookup table (mixed-radix
index, first domain cell most significant) or, over a prime field, one
nonzero coefficient per domain cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InvalidInputError, ResourceLimitError, WindowExhaustedError
from .polytope import IntVec, Polytope, with_origin

TABLE_CAP = 2**24
_CHUNK = 1 << 16


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % f for f in range(2, math.isqrt(p) + 1))


def _ivec(p: Iterable) -> IntVec:
    out = []
    for c in p:
        if int(c) != c:
            raise InvalidInputError(f"non-integer lattice coordinate {c!r}")
        out.append(int(c))
    return tuple(out)


def _dtype(q: int):
    return np.uint8 if q <= 256 else np.uint16


@dataclass(frozen=True, eq=False)
class LocalRule:
    """Local rule ``F : A^I -> A`` of a cellular automaton.

    Build instances with :meth:`from_table`, :meth:`algebraic`, or the
    small constructors below; they validate the invariants.
    """

    dim: int
    q: int
    domain: tuple[IntVec, ...]
    table: np.ndarray | None = None
    coefficients: tuple[int, ...] | None = None

    # -------------------------------------------------------- builders
    @classmethod
    def from_table(cls, dim: int, q: int, domain: Sequence[Sequence[int]],
                   table: Sequence[int] | np.ndarray, *, minimal: bool = True) -> "LocalRule":
        dom = tuple(_ivec(p) for p in domain)
        _check_domain(dim, q, dom)
        if q > 65536:
            raise InvalidInputError("alphabets above 65536 symbols are not supported")
        size = q ** len(dom)
        if size > TABLE_CAP:
            raise ResourceLimitError(f"table of {size} entries exceeds the cap {TABLE_CAP}")
        arr = np.asarray(table)
        if arr.shape != (size,):
            raise InvalidInputError(f"table needs {size} entries, got {arr.size}")
        if arr.size and (arr.min() < 0 or arr.max() >= q):
            raise InvalidInputError("table entries must be symbols below the alphabet size")
        rule = cls(dim, q, dom, arr.astype(_dtype(q)))
        if minimal:
            idle = [c for c, dep in zip(dom, _dependent_axes(rule.lookup, q, len(dom))) if not dep]
            if idle:
                raise InvalidInputError(f"rule does not depend on domain cells {idle}")
        return rule

    @classmethod
    def algebraic(cls, dim: int, p: int, coefficients: Mapping[Sequence[int], int]) -> "LocalRule":
        if not is_prime(p):
            raise InvalidInputError(f"{p} is not prime")
        items = sorted((_ivec(k), int(v)) for k, v in coefficients.items())
        dom = tuple(k for k, _ in items)
        _check_domain(dim, p, dom)
        coeffs = tuple(v % p for _, v in items)
        for cell, a in zip(dom, coeffs):
            if a == 0:
                raise InvalidInputError(f"coefficient of cell {cell} is zero mod {p}")
        return cls(dim, p, dom, None, coeffs)

    # ------------------------------------------------------ properties
    @property
    def is_algebraic(self) -> bool:
        return self.coefficients is not None

    @cached_property
    def lookup(self) -> np.ndarray:
        """Dense table, built on demand for algebraic rules."""
        if self.table is not None:
            return self.table
        return algebraic_to_table(self).table

    @cached_property
    def hull(self) -> Polytope:
        """``cv(I U {0})``."""
        return with_origin(self.domain, self.dim)

    @cached_property
    def extremes(self) -> tuple[IntVec, ...]:
        """Nonzero extreme points of ``cv(I U {0})``."""
        zero = (0,) * self.dim
        return tuple(v for v in (_ivec(p) for p in self.hull.vertices) if v != zero)

    def as_mapping(self) -> dict[IntVec, int]:
        if self.coefficients is None:
            raise InvalidInputError("rule is not algebraic")
        return dict(zip(self.domain, self.coefficients))

    def same_function(self, other: "LocalRule") -> bool:
        if (self.dim, self.q) != (other.dim, other.q):
            return False
        if set(self.domain) != set(other.domain):
            return False
        if self.is_algebraic and other.is_algebraic:
            return self.as_mapping() == other.as_mapping()
        order = [other.domain.index(c) for c in self.domain]
        k = len(self.domain)
        a = self.lookup.reshape((self.q,) * k)
        b = other.lookup.reshape((self.q,) * k).transpose(order)
        return bool(np.array_equal(a, b))

    def __repr__(self) -> str:
        kind = "algebraic" if self.is_algebraic else "table"
        return f"LocalRule(dim={self.dim}, q={self.q}, {kind}, domain={list(self.domain)})"


def _check_domain(dim: int, q: int, dom: tuple[IntVec, ...]) -> None:
    if dim not in (1, 2, 3):
        from .errors import UnsupportedDimensionError

        raise UnsupportedDimensionError(f"dimension {dim} not in {{1, 2, 3}}")
    if q < 2:
        raise InvalidInputError("alphabet needs at least two symbols")
    if not dom:
        raise InvalidInputError("rule domain is empty")
    if len(set(dom)) != len(dom):
        raise InvalidInputError("rule domain has repeated cells")
    if any(len(c) != dim for c in dom):
        raise InvalidInputError("domain cell length differs from the dimension")


def identity_rule(dim: int, q: int) -> LocalRule:
    return LocalRule.from_table(dim, q, [(0,) * dim], np.arange(q))


def shift_rule(dim: int, q: int, step: Sequence[int]) -> LocalRule:
    return LocalRule.from_table(dim, q, [tuple(step)], np.arange(q))


def and_rule(dim: int = 1, domain: Sequence[Sequence[int]] | None = None) -> LocalRule:
    dom = domain if domain is not None else [(0,) * dim, (1,) + (0,) * (dim - 1)]
    k = len(dom)
    table = np.zeros(2**k, dtype=np.uint8)
    table[-1] = 1
    return LocalRule.from_table(dim, 2, dom, table)


def algebraic_to_table(rule: LocalRule) -> LocalRule:
    """Dense table of ``sum a_i u_i mod p``."""
    if rule.coefficients is None:
        return rule
    k = len(rule.domain)
    size = rule.q**k
    if size > TABLE_CAP:
        raise ResourceLimitError(f"table of {size} entries exceeds the cap {TABLE_CAP}")
    acc = np.zeros(1, dtype=np.int64)
    for a in rule.coefficients:  # first cell ends up most significant
        acc = (acc[:, None] + a * np.arange(rule.q)[None, :]).reshape(-1) % rule.q
    return LocalRule(rule.dim, rule.q, rule.domain, acc.astype(_dtype(rule.q)))


def _dependent_axes(table: np.ndarray, q: int, k: int) -> list[bool]:
    t = table.reshape((q,) * k) if k else table
    out = []
    for axis in range(k):
        first = np.take(t, [0], axis=axis)
        out.append(not bool(np.all(t == first)))
    return out


def minimize(rule: LocalRule) -> LocalRule:
    """Drop domain cells the rule does not depend on."""
    if rule.coefficients is not None:
        return rule
    k = len(rule.domain)
    dep = _dependent_axes(rule.table, rule.q, k)
    if all(dep):
        return rule
    t = rule.table.reshape((rule.q,) * k)
    for axis in reversed(range(k)):
        if not dep[axis]:
            t = np.take(t, 0, axis=axis)
    dom = tuple(c for c, d in zip(rule.domain, dep) if d)
    if not dom:
        raise InvalidInputError("composition produced a constant rule")
    return LocalRule(rule.dim, rule.q, dom, np.ascontiguousarray(t).reshape(-1))


# ------------------------------------------------------------- patterns

@dataclass(frozen=True, eq=False)
class Pattern:
    """Symbols on a finite set of cells, stored over its bounding box with a mask."""

    origin: IntVec
    values: np.ndarray
    mask: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> "Pattern":
        shape = (0,) * dim
        return cls((0,) * dim, np.zeros(shape, np.uint8), np.zeros(shape, bool))

    @classmethod
    def from_points(cls, points: Sequence[Sequence[int]], symbols: Sequence[int],
                    dim: int | None = None) -> "Pattern":
        pts = np.asarray([_ivec(p) for p in points], dtype=np.int64)
        if len(pts) == 0:
            if dim is None:
                raise InvalidInputError("empty pattern needs a dimension")
            return cls.empty(dim)
        sym = np.asarray(symbols)
        if sym.shape != (len(pts),):
            raise InvalidInputError("one symbol per point is required")
        lo = pts.min(axis=0)
        shape = tuple(pts.max(axis=0) - lo + 1)
        values = np.zeros(shape, dtype=_dtype(int(sym.max()) + 1 if sym.size else 2))
        mask = np.zeros(shape, dtype=bool)
        idx = tuple((pts - lo).T)
        if len({tuple(p) for p in pts.tolist()}) != len(pts):
            raise InvalidInputError("pattern points repeat")
        values[idx] = sym
        mask[idx] = True
        return cls(tuple(int(x) for x in lo), values, mask)

    @classmethod
    def from_mapping(cls, mapping: Mapping[Sequence[int], int], dim: int | None = None) -> "Pattern":
        items = sorted(mapping.items())
        return cls.from_points([k for k, _ in items], [v for _, v in items], dim)

    @property
    def dim(self) -> int:
        return len(self.origin)

    def is_empty(self) -> bool:
        return not self.mask.any()

    def support(self) -> list[IntVec]:
        idx = np.argwhere(self.mask)
        return [tuple(int(a + o) for a, o in zip(row, self.origin)) for row in idx]

    def symbols(self) -> list[int]:
        return [int(v) for v in self.values[self.mask]]

    def as_mapping(self) -> dict[IntVec, int]:
        return dict(zip(self.support(), self.symbols()))

    def __getitem__(self, point: Sequence[int]) -> int:
        rel = tuple(int(p) - o for p, o in zip(point, self.origin))
        if any(r < 0 or r >= s for r, s in zip(rel, self.mask.shape)) or not self.mask[rel]:
            raise KeyError(point)
        return int(self.values[rel])

    def translate(self, v: Sequence[int]) -> "Pattern":
        return Pattern(tuple(o + int(a) for o, a in zip(self.origin, v)), self.values, self.mask)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.as_mapping() == other.as_mapping()

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.as_mapping().items())))


def random_pattern(points: Sequence[Sequence[int]], q: int, rng: np.random.Generator) -> Pattern:
    return Pattern.from_points(points, rng.integers(0, q, size=len(points)))


# ------------------------------------------------------------ evaluation

def _offsets(rule: LocalRule) -> tuple[np.ndarray, np.ndarray]:
    dom = np.asarray(rule.domain, dtype=np.int64)
    return dom.min(axis=0), dom.max(axis=0)


def apply_dense(rule: LocalRule, arr: np.ndarray) -> np.ndarray:
    """Apply the rule to a batch of full boxes ``arr[b, *box]``.

    Output cell ``t`` is the cell ``t - min(I)`` of the input box; the output box
    shrinks by ``max(I) - min(I)`` along each axis.
    """
    lo, hi = _offsets(rule)
    shape = np.asarray(arr.shape[1:]) - (hi - lo)
    if np.any(shape <= 0):
        return np.zeros((arr.shape[0],) + tuple(np.maximum(shape, 0)), dtype=arr.dtype)
    slices = []
    for cell in rule.domain:
        start = np.asarray(cell) - lo
        slices.append((slice(None),) + tuple(slice(int(s), int(s + n)) for s, n in zip(start, shape)))
    if rule.coefficients is not None:
        acc = np.zeros((arr.shape[0],) + tuple(shape), dtype=np.int64)
        for a, sl in zip(rule.coefficients, slices):
            acc += a * arr[sl].astype(np.int64)
        return (acc % rule.q).astype(arr.dtype)
    idx = np.zeros((arr.shape[0],) + tuple(shape), dtype=np.int64)
    for sl in slices:
        idx = idx * rule.q + arr[sl]
    return rule.lookup[idx].astype(arr.dtype)


def local_apply(rule: LocalRule, x: Pattern) -> Pattern:
    """One step of the automaton on a finite pattern; the support erodes by ``I``."""
    if x.dim != rule.dim:
        raise InvalidInputError("pattern and rule dimensions differ")
    if x.is_empty():
        return Pattern.empty(rule.dim)
    lo, hi = _offsets(rule)
    vals = apply_dense(rule, x.values[None].astype(_dtype(rule.q)))[0]
    if vals.size == 0:
        return Pattern.empty(rule.dim)
    shape = vals.shape
    mask = np.ones(shape, dtype=bool)
    for cell in rule.domain:
        start = np.asarray(cell) - lo
        mask &= x.mask[tuple(slice(int(s), int(s + n)) for s, n in zip(start, shape))]
    if not mask.any():
        return Pattern.empty(rule.dim)
    origin = np.asarray(x.origin) - lo
    nz = np.argwhere(mask)
    a, b = nz.min(axis=0), nz.max(axis=0) + 1
    box = tuple(slice(int(s), int(e)) for s, e in zip(a, b))
    vals = np.where(mask, vals, 0)
    return Pattern(tuple(int(o) for o in origin + a), vals[box], mask[box])


def iterate(rule: LocalRule, x: Pattern, k: int) -> list[Pattern]:
    """``[x, f x, ..., f^k x]`` on the shrinking supports."""
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    out = [x]
    for step in range(1, k + 1):
        nxt = local_apply(rule, out[-1])
        if nxt.is_empty():
            raise WindowExhaustedError(f"window exhausted at step {step} of {k}")
        out.append(nxt)
    return out


# ------------------------------------------------------------ composition

def _convolve(outer: LocalRule, inner: LocalRule) -> LocalRule:
    p = outer.q
    acc: dict[IntVec, int] = {}
    for i, a in zip(outer.domain, outer.coefficients):
        for j, b in zip(inner.domain, inner.coefficients):
            key = tuple(x + y for x, y in zip(i, j))
            acc[key] = (acc.get(key, 0) + a * b) % p
    coeffs = {k: v for k, v in acc.items() if v}
    if not coeffs:
        raise InvalidInputError("composition produced a constant rule")
    return LocalRule.algebraic(outer.dim, p, coeffs)


def compose(outer: LocalRule, inner: LocalRule, cap: int = TABLE_CAP) -> LocalRule:
    """Minimized local rule of ``outer o inner`` (apply ``inner`` first)."""
    if (outer.dim, outer.q) != (inner.dim, inner.q):
        raise InvalidInputError("rules act on different shifts")
    if outer.is_algebraic and inner.is_algebraic:
        return _convolve(outer, inner)
    q = outer.q
    dom = sorted({tuple(a + b for a, b in zip(i, j)) for i in outer.domain for j in inner.domain})
    m = len(dom)
    if q**m > cap:
        raise ResourceLimitError(f"composed table of {q}^{m} entries exceeds the cap {cap}")
    where = {c: n for n, c in enumerate(dom)}
    pos = np.array([[where[tuple(a + b for a, b in zip(i, j))] for j in inner.domain]
                    for i in outer.domain], dtype=np.int64)
    weights_in = q ** np.arange(len(inner.domain) - 1, -1, -1, dtype=np.int64)
    weights_out = q ** np.arange(len(outer.domain) - 1, -1, -1, dtype=np.int64)
    place = q ** np.arange(m - 1, -1, -1, dtype=np.int64)
    inner_t = inner.lookup.astype(np.int64)
    outer_t = outer.lookup.astype(np.int64)
    table = np.empty(q**m, dtype=_dtype(q))
    for start in range(0, q**m, _CHUNK):
        a = np.arange(start, min(start + _CHUNK, q**m), dtype=np.int64)
        digits = (a[:, None] // place[None, :]) % q
        mid = inner_t[(digits[:, pos] * weights_in).sum(axis=2)]
        table[start:start + len(a)] = outer_t[mid @ weights_out]
    return minimize(LocalRule(outer.dim, q, tuple(dom), table))


class DerivedDomain(NamedTuple):
    k: int
    domain_k: tuple[IntVec, ...] | None
    hull_k: Polytope


def power(rule: LocalRule, k: int, cap: int = TABLE_CAP) -> tuple[LocalRule | None, DerivedDomain]:
    """``f^k`` with its minimized domain; bound-only domain when the table cap is hit."""
    if k < 1:
        raise InvalidInputError("power needs k >= 1")
    cur = rule
    for step in range(2, k + 1):
        try:
            cur = compose(rule, cur, cap)
        except ResourceLimitError:
            return None, DerivedDomain(k, None, rule.hull.scale(k))
    return cur, DerivedDomain(k, cur.domain, with_origin(cur.domain, rule.dim))


# ---------------------------------------------------------- permutativity

def is_permutative_at(rule: LocalRule, cell: Sequence[int]) -> bool:
    """Whether ``b -> F(..., b at cell, ...)`` is a bijection for every context."""
    cell = _ivec(cell)
    if cell not in rule.domain:
        raise InvalidInputError(f"{cell} is not in the rule domain")
    axis = rule.domain.index(cell)
    if rule.coefficients is not None and rule.q ** len(rule.domain) > TABLE_CAP:
        return rule.coefficients[axis] % rule.q != 0
    k = len(rule.domain)
    t = np.moveaxis(rule.lookup.reshape((rule.q,) * k), axis, -1).reshape(-1, rule.q)
    return bool(np.all(np.sort(t, axis=1) == np.arange(rule.q)))


@dataclass(frozen=True)
class PermutativityReport:
    permutative: bool
    checked: tuple[IntVec, ...]
    failed: tuple[IntVec, ...]

    def __bool__(self) -> bool:
        return self.permutative


def is_permutative(rule: LocalRule) -> PermutativityReport:
    """Permutativity at every nonzero extreme point of ``cv(I U {0})``."""
    checked = rule.extremes
    failed = tuple(c for c in checked if not is_permutative_at(rule, c))
    return PermutativityReport(not failed, checked, failed)


# -------------------------------------------------- determined coordinates

def determined_coordinates(rule: LocalRule, x: Pattern) -> list[IntVec]:
    """Cells ``j`` where ``(f y)_j`` is the same for every ``y`` extending ``x``.

    Only the unknown cells of ``j + I`` are enumerated.
    """
    pts = np.asarray(x.support(), dtype=np.int64).reshape(-1, rule.dim)
    if len(pts) == 0:
        return []
    dom = np.asarray(rule.domain, dtype=np.int64)
    cand = np.unique((pts[:, None, :] - dom[None, :, :]).reshape(-1, rule.dim), axis=0)
    win = cand[:, None, :] + dom[None, :, :]
    rel = win - np.asarray(x.origin)
    shape = np.asarray(x.mask.shape)
    inb = np.all((rel >= 0) & (rel < shape), axis=2)
    clipped = np.clip(rel, 0, shape - 1)
    idx = tuple(clipped[..., a] for a in range(rule.dim))
    known = inb & x.mask[idx]
    vals = np.where(known, x.values[idx].astype(np.int64), 0)
    keep = np.zeros(len(cand), dtype=bool)
    if rule.coefficients is not None:
        keep = known.all(axis=1)
    else:
        q, k = rule.q, len(rule.domain)
        place = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
        base = vals @ place
        groups, inverse = np.unique(known, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for g, flags in enumerate(groups):
            rows = np.flatnonzero(inverse == g)
            unknown = np.flatnonzero(~flags)
            if len(unknown) == 0:
                keep[rows] = True
                continue
            comp = np.array([sum(d * place[u] for d, u in zip(digs, unknown))
                             for digs in itertools.product(range(q), repeat=len(unknown))],
                            dtype=np.int64)
            step = max(1, (1 << 22) // len(comp))
            for s in range(0, len(rows), step):
                r = rows[s:s + step]
                out = rule.lookup[base[r][:, None] + comp[None, :]]
                keep[r] = np.all(out == out[:, :1], axis=1)
    return [tuple(int(c) for c in row) for row in cand[keep]]
