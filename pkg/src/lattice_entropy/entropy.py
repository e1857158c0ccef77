"""Itinerary counts and rescaled-entropy bounds.

``N_k(J)`` is the number of distinct histories ``(x|J, fx|J, ..., f^{k-1}x|J)``.
It is computed by exhaustive enumeration over the cells that influence the
history, by a rank computation for rules that are linear over a prime field,
or estimated from below by sampling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .automata import LocalRule, apply_dense, is_permutative, power
from .errors import InvalidInputError, NotApplicableError, ResourceLimitError
from .polytope import (
    IntVec,
    Polytope,
    boundary_measure,
    dot,
    inner_boundary_points,
    lattice_points,
    morphological_boundary_counts,
    quermass,
    support_function,
)

ENUMERATION_CAP = 2**28
SAMPLE_BLOCK = 1 << 14


# ------------------------------------------------------- dependence sets

@lru_cache(maxsize=256)
def _power_domain(rule: LocalRule, l: int) -> tuple[IntVec, ...]:
    """Domain of ``f^l``: minimized when the table fits, else the l-fold sum of ``I``."""
    if l == 0:
        return ((0,) * rule.dim,)
    _, derived = power(rule, l)
    if derived.domain_k is not None:
        return derived.domain_k
    acc = {(0,) * rule.dim}
    for _ in range(l):
        acc = {tuple(a + b for a, b in zip(x, i)) for x in acc for i in rule.domain}
    return tuple(sorted(acc))


@lru_cache(maxsize=64)
def _power_coefficients(rule: LocalRule, l: int) -> tuple[tuple[IntVec, int], ...]:
    rule_l, _ = power(rule, l)
    return tuple(zip(rule_l.domain, rule_l.coefficients))


def _points_array(points: Sequence[IntVec], dim: int) -> np.ndarray:
    return np.asarray(points, dtype=np.int64).reshape(-1, dim)


def dependence_support(rule: LocalRule, j: Polytope, k: int) -> list[IntVec]:
    """Cells whose values can influence the first ``k`` steps of the history on ``J``."""
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    jp = _points_array(lattice_points(j), rule.dim)
    parts = [jp]
    for l in range(1, k):
        dom = _points_array(_power_domain(rule, l), rule.dim)
        parts.append((jp[:, None, :] + dom[None, :, :]).reshape(-1, rule.dim))
    w = np.unique(np.vstack(parts), axis=0)
    return [tuple(int(c) for c in row) for row in w]


# --------------------------------------------------------- enumeration

@dataclass(frozen=True, eq=False)
class _Setup:
    rule: LocalRule
    k: int
    shape: tuple[int, ...]
    w_flat: np.ndarray
    j_flat: tuple[np.ndarray, ...]
    n_j: int

    @property
    def n_w(self) -> int:
        return len(self.w_flat)


def _setup(rule: LocalRule, j: Polytope, k: int) -> _Setup:
    jpts = _points_array(lattice_points(j), rule.dim)
    if len(jpts) == 0:
        raise InvalidInputError("window has no lattice points")
    w = _points_array(dependence_support(rule, j, k), rule.dim)
    dom = _points_array(rule.domain, rule.dim)
    dmin = np.minimum(dom.min(axis=0), 0)
    dmax = np.maximum(dom.max(axis=0), 0)
    lo = jpts.min(axis=0) + (k - 1) * dmin
    hi = jpts.max(axis=0) + (k - 1) * dmax
    shape = tuple(int(x) for x in hi - lo + 1)
    w_flat = np.ravel_multi_index(tuple((w - lo).T), shape)
    origin = lo.copy()
    step_min = dom.min(axis=0)
    j_flat = []
    cur_shape = np.asarray(shape)
    span = dom.max(axis=0) - dom.min(axis=0)
    for _ in range(k):
        j_flat.append(np.ravel_multi_index(tuple((jpts - origin).T), tuple(cur_shape)))
        origin = origin - step_min
        cur_shape = cur_shape - span
    return _Setup(rule, k, shape, w_flat, tuple(j_flat), len(jpts))


def _keys(setup: _Setup, digits: np.ndarray) -> np.ndarray:
    """Distinct itinerary keys for a batch of assignments of the dependence cells."""
    q = setup.rule.q
    b = digits.shape[0]
    arr = np.zeros((b, int(np.prod(setup.shape))), dtype=np.uint8 if q <= 256 else np.uint16)
    arr[:, setup.w_flat] = digits
    arr = arr.reshape((b,) + setup.shape)
    parts = []
    for l in range(setup.k):
        if l:
            arr = apply_dense(setup.rule, arr)
        parts.append(arr.reshape(b, -1)[:, setup.j_flat[l]])
    hist = np.concatenate(parts, axis=1)
    width = hist.shape[1]
    if q**width < 2**63:
        key = np.zeros(b, dtype=np.int64)
        for c in range(width):
            key = key * q + hist[:, c]
        return np.unique(key)
    if q == 2:
        hist = np.packbits(hist.astype(np.uint8), axis=1)
    elif q > 256:
        hist = hist.astype(">u2").view(np.uint8).reshape(b, -1)
    hist = np.ascontiguousarray(hist.astype(np.uint8, copy=False))
    return np.unique(hist.view(np.dtype((np.void, hist.shape[1]))).reshape(-1))


def _digits(start: int, stop: int, n_w: int, q: int) -> np.ndarray:
    a = np.arange(start, stop, dtype=np.int64)
    if q == 2:
        return ((a[:, None] >> np.arange(n_w, dtype=np.int64)) & 1).astype(np.uint8)
    place = q ** np.arange(n_w, dtype=np.int64)
    return ((a[:, None] // place[None, :]) % q).astype(np.uint8 if q <= 256 else np.uint16)


def _batch(setup: _Setup) -> int:
    return max(1, (1 << 22) // max(1, int(np.prod(setup.shape))))


def _enumerate_range(setup: _Setup, start: int, stop: int) -> np.ndarray:
    found: list[np.ndarray] = []
    step = _batch(setup)
    for s in range(start, stop, step):
        found.append(_keys(setup, _digits(s, min(s + step, stop), setup.n_w, setup.rule.q)))
        if len(found) > 16:
            found = [np.unique(np.concatenate(found))]
    return np.unique(np.concatenate(found)) if found else np.zeros(0, dtype=np.int64)


def _sample_blocks(setup: _Setup, seed: int, blocks: Sequence[tuple[int, int]]) -> np.ndarray:
    found = []
    dtype = np.uint8 if setup.rule.q <= 256 else np.uint16
    for block, size in blocks:
        rng = np.random.default_rng([seed, block])
        digits = rng.integers(0, setup.rule.q, size=(size, setup.n_w)).astype(dtype)
        found.append(_keys(setup, digits))
    return np.unique(np.concatenate(found)) if found else np.zeros(0, dtype=np.int64)


def _merge(parts: Iterable[np.ndarray]) -> int:
    parts = [p for p in parts if len(p)]
    return len(np.unique(np.concatenate(parts))) if parts else 0


def itinerary_count_exact(rule: LocalRule, j: Polytope, k: int, *, cap: int = ENUMERATION_CAP,
                          threads: int = 1, method: str = "auto") -> int:
    """Exact ``N_k(J)``.

    ``method`` is ``"enumerate"`` (all assignments of the dependence cells),
    ``"rank"`` (linear rules only) or ``"auto"`` (rank for linear rules).
    """
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    if method == "auto":
        method = "rank" if rule.is_algebraic else "enumerate"
    if method == "rank":
        return _rank_count(rule, j, k)
    if method != "enumerate":
        raise InvalidInputError(f"unknown counting method {method!r}")
    setup = _setup(rule, j, k)
    total = rule.q**setup.n_w
    if total > cap:
        raise ResourceLimitError(
            f"{rule.q}^{setup.n_w} assignments exceed the enumeration cap {cap}; "
            "use sampled mode")
    if threads <= 1 or total < (1 << 16):
        return _merge([_enumerate_range(setup, 0, total)])
    bounds = np.linspace(0, total, threads + 1, dtype=np.int64)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(_enumerate_range, [setup] * threads,
                         [int(b) for b in bounds[:-1]], [int(b) for b in bounds[1:]])
        return _merge(parts)


def itinerary_count_sampled(rule: LocalRule, j: Polytope, k: int, samples: int, seed: int,
                            *, threads: int = 1) -> int:
    """Distinct histories among uniformly sampled inputs: a lower bound on ``N_k``.

    Each block of ``SAMPLE_BLOCK`` samples has its own random stream keyed by
    ``(seed, block)``, so the result does not depend on ``threads``.
    """
    if samples < 1:
        raise InvalidInputError("samples must be at least 1")
    setup = _setup(rule, j, k)
    blocks = [(b, min(SAMPLE_BLOCK, samples - b * SAMPLE_BLOCK))
              for b in range(math.ceil(samples / SAMPLE_BLOCK))]
    if threads <= 1 or len(blocks) == 1:
        return _merge([_sample_blocks(setup, seed, blocks)])
    chunks = [blocks[i::threads] for i in range(threads)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return _merge(pool.map(_sample_blocks, [setup] * threads, [seed] * threads, chunks))


# ------------------------------------------------------------ rank route

def rank_mod_p(matrix: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over the field with ``p`` elements."""
    m = np.asarray(matrix, dtype=np.int64) % p
    if m.size == 0:
        return 0
    if p == 2:
        return _rank_gf2(m.astype(np.uint8))
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        nz = np.flatnonzero(m[r:, c])
        if len(nz) == 0:
            continue
        piv = r + nz[0]
        m[[r, piv]] = m[[piv, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        below = r + 1 + np.flatnonzero(m[r + 1:, c])
        if len(below):
            m[below] = (m[below] - np.outer(m[below, c], m[r])) % p
        r += 1
        if r == rows:
            break
    return r


def _rank_gf2(m: np.ndarray) -> int:
    packed = np.packbits(m, axis=1)
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        byte, bit = divmod(c, 8)
        mask = np.uint8(0x80 >> bit)
        nz = np.flatnonzero(packed[r:, byte] & mask)
        if len(nz) == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            packed[[r, piv]] = packed[[piv, r]]
        below = r + 1 + np.flatnonzero(packed[r + 1:, byte] & mask)
        if len(below):
            packed[below] ^= packed[r]
        r += 1
        if r == rows:
            break
    return r


def _rank_count(rule: LocalRule, j: Polytope, k: int) -> int:
    """``N_k`` for a linear rule: ``p^(#J + rank)`` of the outside-window couplings."""
    if not rule.is_algebraic:
        raise NotApplicableError("rank counting needs a rule that is linear over a prime field")
    jp = _points_array(lattice_points(j), rule.dim)
    n_j = len(jp)
    if k == 1 or n_j == 0:
        return rule.q**n_j
    reach = max(max(abs(c) for c in cell) for cell in rule.domain) * (k - 1)
    lo = jp.min(axis=0) - reach
    shape = tuple(int(x) for x in jp.max(axis=0) + reach - lo + 1)
    in_j = np.zeros(shape, dtype=bool)
    in_j[tuple((jp - lo).T)] = True
    row_ids, col_ids, vals = [], [], []
    for l in range(1, k):
        for cell, a in _power_coefficients(rule, l):
            tgt = jp + np.asarray(cell)
            idx = tuple((tgt - lo).T)
            out = ~in_j[idx]
            rows = np.flatnonzero(out) + (l - 1) * n_j
            row_ids.append(rows)
            col_ids.append(np.ravel_multi_index(tuple((tgt[out] - lo).T), shape))
            vals.append(np.full(len(rows), a, dtype=np.int64))
    rows = np.concatenate(row_ids)
    if len(rows) == 0:
        return rule.q**n_j
    cols = np.concatenate(col_ids)
    urows, ri = np.unique(rows, return_inverse=True)
    ucols, ci = np.unique(cols, return_inverse=True)
    mat = np.zeros((len(urows), len(ucols)), dtype=np.int64)
    np.add.at(mat, (ri, ci), np.concatenate(vals))
    return rule.q ** (n_j + rank_mod_p(mat, rule.q))


# ------------------------------------------------------------ ∂⊥ boundary

@dataclass(frozen=True)
class FaceChoice:
    """A facet of ``J`` with the extreme points of ``cv(I U {0})`` maximizing ``u . N``."""

    normal: IntVec
    offset: Fraction
    depth: Fraction
    maximizers: tuple[IntVec, ...]

    @property
    def retained(self) -> bool:
        return len(self.maximizers) == 1 and self.depth > 0

    @property
    def u(self) -> IntVec | None:
        return self.maximizers[0] if len(self.maximizers) == 1 else None

    def excess(self, x: Sequence[int]) -> Fraction:
        """``x . N + h(N) - offset``; positive exactly on the strict band."""
        return dot(self.normal, x) + self.depth - self.offset


@dataclass(frozen=True)
class PerpBoundary:
    """Bands of the facets with a unique maximizer, ordered for the refinement argument.

    ``order`` lists the whole inner boundary by increasing depth key (ties broken
    lexicographically); ``assignment`` maps each of those points to the facet
    index ``F_j`` attaining its key. ``points`` is the union of the retained
    bands and ``certified`` the subset whose ``F_j`` is retained.
    """

    faces: tuple[FaceChoice, ...]
    points: tuple[IntVec, ...]
    order: tuple[IntVec, ...]
    assignment: dict
    certified: tuple[IntVec, ...]

    @property
    def retained_faces(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.faces) if f.retained)

    def __len__(self) -> int:
        return len(self.points)


def _face_choices(j: Polytope, i_points: Sequence[Sequence[int]]) -> tuple[FaceChoice, ...]:
    from .polytope import with_origin

    hull = with_origin(i_points, j.dim)
    ext = [tuple(int(c) for c in v) for v in hull.vertices]
    faces = []
    for f in j.facets:
        vals = [dot(v, f.normal) for v in ext]
        h = max(vals)
        faces.append(FaceChoice(f.normal, f.offset, Fraction(h),
                                tuple(v for v, s in zip(ext, vals) if s == h)))
    return tuple(faces)


def perp_boundary(j: Polytope, i_points: Sequence[Sequence[int]]) -> PerpBoundary:
    if not j.is_full:
        raise InvalidInputError("the window must be full-dimensional")
    faces = _face_choices(j, i_points)
    inner = inner_boundary_points(j, i_points)
    keyed = []
    assignment = {}
    for x in inner:
        best = None
        for idx, f in enumerate(faces):
            e = f.excess(x)
            if e <= 0:
                continue
            key = e * e / dot(f.normal, f.normal)  # squared distance past the facet
            cand = (key, f.retained, -idx)
            if best is None or cand > best:
                best = cand
        assignment[x] = -best[2]
        keyed.append((best[0], x))
    keyed.sort()
    order = tuple(x for _, x in keyed)
    retained = [f for f in faces if f.retained]
    points = tuple(x for x in order if any(f.excess(x) > 0 for f in retained))
    certified = tuple(x for x in order if faces[assignment[x]].retained)
    return PerpBoundary(faces, points, order, assignment, certified)


def refinement_lower_bound(rule: LocalRule, j: Polytope, k: int) -> int:
    """Certified lower bound ``q^(k #∂⊥)`` on the growth of ``N`` over ``k`` extra steps."""
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    if not is_permutative(rule):
        raise NotApplicableError("refinement bound needs a permutative rule")
    if k == 0:
        return 1
    return rule.q ** (k * len(perp_boundary(j, rule.domain).certified))


# --------------------------------------------------------------- rates

def perimeter(j: Polytope) -> float:
    return 2.0 if j.dim == 1 else boundary_measure(j)


def upper_bound_rate(rule: LocalRule, o: Polytope) -> float:
    """Asymptotic bound ``V_I(O) / p(O) * log q`` with ``I = cv(I U {0})``."""
    if o.dim == 1:
        width = support_function(rule.hull, (1,)) + support_function(rule.hull, (-1,))
        return float(width) / 2 * math.log(rule.q)
    return quermass(rule.hull, o) / perimeter(o) * math.log(rule.q)


def window_upper_bound(rule: LocalRule, j: Polytope, boundary: str = "outer") -> float:
    """``#∂± J * log q``: bound on the per-step entropy of the window partition."""
    counts = morphological_boundary_counts(j, rule.domain)
    if boundary == "outer":
        n = counts.outer
    elif boundary == "inner":
        n = counts.inner
    else:
        raise InvalidInputError("boundary must be 'inner' or 'outer'")
    return n * math.log(rule.q)


def entropy_slope(counts: Sequence) -> float:
    """``log N_K - log N_{K-1}`` at the largest ``K`` where both counts are exact.

    Items are integers (exact) or ``(count, exact)`` pairs.
    """
    vals = [(c, True) if not isinstance(c, tuple) else c for c in counts]
    for kk in range(len(vals) - 1, 0, -1):
        (a, ea), (b, eb) = vals[kk - 1], vals[kk]
        if ea and eb and a is not None and b is not None:
            return math.log(b) - math.log(a)
    raise InvalidInputError("slope needs two consecutive exact counts")


# --------------------------------------------------------------- tables

@dataclass(frozen=True)
class ExhaustionSpec:
    base: Polytope
    scales: tuple
    label: str = "O"

    def __post_init__(self):
        if not all(Fraction(a) < Fraction(b) for a, b in zip(self.scales, self.scales[1:])):
            raise InvalidInputError("exhaustion scales must increase")
        if self.base.dim > 1 and not self.base.contains_interior((0,) * self.base.dim):
            raise InvalidInputError("the limit domain must contain the origin in its interior")

    def window(self, n) -> Polytope:
        return self.base.scale(n)


@dataclass
class EntropyRow:
    n: object
    J_id: str
    p_J: float
    k: int
    N_k: int | None
    exact: bool | None
    slope: float | None
    lower_rate: float
    upper_rate: float
    perp_count: int = 0
    inner_count: int = 0

    HEADER = ("n", "p_J", "k", "N_k", "exact", "slope", "lower_rate", "upper_rate")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class EntropyTable:
    label: str
    q: int
    rows: list[EntropyRow] = field(default_factory=list)
    asymptotic_upper: float | None = None


def _row_counts(rule: LocalRule, j: Polytope, k: int, mode: str, samples: int, seed: int,
                threads: int, cap: int) -> tuple[int | None, bool | None]:
    if mode == "none":
        return None, None
    if mode in ("exact", "auto"):
        try:
            return itinerary_count_exact(rule, j, k, cap=cap, threads=threads), True
        except ResourceLimitError:
            if mode == "exact":
                raise
    return itinerary_count_sampled(rule, j, k, samples, seed, threads=threads), False


def rescaled_entropy_table(rule: LocalRule, spec: ExhaustionSpec, k_max: int,
                           mode: str = "auto", *, samples: int = 100_000, seed: int = 0,
                           threads: int = 1, cap: int = ENUMERATION_CAP) -> EntropyTable:
    """One row per ``(n, k)``; the rate columns come from exact geometry only.

    ``lower_rate`` is ``#∂⊥ log q / p(J)`` over the certified band points and
    ``upper_rate`` is ``#∂⁻ log q / p(J)``, a per-window bound that holds for
    every ``n``. ``mode`` is ``exact``, ``sampled``, ``auto`` or ``none``.
    """
    if mode not in ("exact", "sampled", "auto", "none"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if k_max < 1:
        raise InvalidInputError("k_max must be at least 1")
    logq = math.log(rule.q)
    table = EntropyTable(spec.label, rule.q, asymptotic_upper=upper_bound_rate(rule, spec.base))
    for n in spec.scales:
        j = spec.window(n)
        p_j = perimeter(j)
        n_perp = len(perp_boundary(j, rule.domain).certified)
        inner = morphological_boundary_counts(j, rule.domain).inner
        prev = None
        for k in range(1, k_max + 1):
            count, exact = _row_counts(rule, j, k, mode, samples, seed, threads, cap)
            slope = None
            if exact and prev is not None and prev[1]:
                slope = math.log(count) - math.log(prev[0])
            table.rows.append(EntropyRow(n, f"{spec.label}*{n}", p_j, k, count, exact, slope,
                                         n_perp * logq / p_j, inner * logq / p_j, n_perp, inner))
            prev = (count, exact)
    return table

