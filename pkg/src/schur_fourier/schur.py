"""Majorization, T-transform chains and black-box Schur/log-convexity testers."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, LengthMismatch, NonFinite, NonPositive, NotComparable

MAJ_TOL = 1e-12


def _pair(x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"vectors of shapes {x.shape} and {y.shape}")
    return x, y


def majorizes(x, y, tol: float = MAJ_TOL) -> bool:
    """True when x ≺ y (y majorizes x): equal totals, dominated decreasing prefix sums."""
    x, y = _pair(x, y)
    scale = max(1.0, float(np.abs(y).sum()))
    cx = np.cumsum(np.sort(x)[::-1])
    cy = np.cumsum(np.sort(y)[::-1])
    if abs(cx[-1] - cy[-1]) > tol * scale:
        return False
    return bool(np.all(cx <= cy + tol * scale))


def t_transform(v: np.ndarray, i: int, j: int, lam: float) -> np.ndarray:
    """λ v + (1 - λ) v∘(i j): mixes coordinates i and j, leaves the rest."""
    out = v.copy()
    out[i] = lam * v[i] + (1 - lam) * v[j]
    out[j] = lam * v[j] + (1 - lam) * v[i]
    return out


def _search_chain(x, y, budget: int):
    """Depth-first search for a chain that fixes one coordinate of x per step."""
    n = x.size
    tol = 1e-12 * max(1.0, float(np.abs(y).sum()))
    expansions = 0

    def rec(v, path):
        nonlocal expansions
        free = [i for i in range(n) if abs(v[i] - x[i]) > tol]
        if not free:
            return path
        if len(path) - 1 >= n - 1 or expansions > budget:
            return None
        for i in free:
            for k in free:
                if k == i:
                    continue
                lo, hi = min(v[i], v[k]), max(v[i], v[k])
                if not lo - tol <= x[i] <= hi + tol or hi - lo <= tol:
                    continue
                lam = (x[i] - v[k]) / (v[i] - v[k])
                nxt = t_transform(v, i, k, min(1.0, max(0.0, lam)))
                nxt[i] = x[i]
                expansions += 1
                if not majorizes(x, nxt, 1e-10):
                    continue
                found = rec(nxt, path + [nxt])
                if found is not None:
                    return found
        return None

    return rec(y.copy(), [y.copy()])


def _sorted_chain(x, y):
    """Transpositions bringing y into x's order, then the classical sorted reduction."""
    n = x.size
    order = np.argsort(-x, kind="stable")  # positions of x in decreasing order
    chain = [y.copy()]
    v = y.copy()
    target = np.empty(n)
    target[order] = np.sort(y)[::-1]
    # selection sort by swaps (λ = 0 T-transforms)
    for pos in range(n):
        idx = order[pos]
        if v[idx] != target[idx]:
            cand = [k for k in order[pos + 1:] if v[k] == target[idx]]
            k = cand[0]
            v = t_transform(v, idx, k, 0.0)
            chain.append(v.copy())
    # both now decreasing along `order`
    tol = 1e-13 * max(1.0, float(np.abs(y).sum()))
    for _ in range(n):
        xs, vs = x[order], v[order]
        above = np.flatnonzero(vs - xs > tol)
        if above.size == 0:
            break
        j = above[-1]
        below = np.flatnonzero(xs[j + 1:] - vs[j + 1:] > tol)
        if below.size == 0:
            break
        k = j + 1 + below[0]
        delta = min(vs[j] - xs[j], xs[k] - vs[k])
        ij, ik = order[j], order[k]
        lam = 1 - delta / (v[ij] - v[ik])
        v = t_transform(v, ij, ik, lam)
        chain.append(v.copy())
    chain[-1] = x.copy()
    return chain


def t_transform_chain(x, y, search_budget: int = 20000) -> list:
    """Chain y = v_0, ..., v_m = x of single T-transforms with v_{k+1} ≺ v_k.

    A chain of length at most n - 1 fixing one coordinate per step is searched
    for first; when x and y are ordered differently such a chain need not exist,
    and the fallback (transpositions, then the sorted reduction) has length at
    most 2(n - 1).
    """
    x, y = _pair(x, y)
    if not majorizes(x, y):
        raise NotComparable("x is not majorized by y")
    if np.allclose(x, y, rtol=0, atol=1e-15):
        return []
    found = _search_chain(x, y, search_budget) if x.size <= 8 else None
    chain = found if found is not None else _sorted_chain(x, y)
    chain[-1] = x.copy()
    return chain


@dataclass
class MajorizationPair:
    x: np.ndarray
    y: np.ndarray
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "y": self.y.tolist(), "provenance": self.provenance}


def _draw_pair(n: int, rng: np.random.Generator) -> MajorizationPair:
    u = rng.random()
    if u < 0.25:
        kind, conc = "near-boundary", 0.1
    elif u < 0.5:
        kind, conc = "near-barycenter", 20.0
    else:
        kind, conc = "dirichlet", 1.0
    y = rng.dirichlet(np.full(n, conc))
    x = y.copy()
    steps = []
    for _ in range(int(rng.integers(1, 4))):
        i, j = rng.choice(n, size=2, replace=False)
        lam = float(rng.random())
        x = t_transform(x, int(i), int(j), lam)
        steps.append([int(i), int(j), lam])
    x = x / x.sum()
    y = y / y.sum()
    if not majorizes(x, y, 1e-10):
        raise AssertionError("generated pair is not comparable")
    return MajorizationPair(x, y, {"kind": kind, "t_transforms": steps})


def random_comparable_pairs(n: int, count: int, seed: int) -> list:
    if n < 2:
        raise ConfigError("n must be at least 2")
    rng = np.random.default_rng(seed)
    return [_draw_pair(n, rng) for _ in range(count)]


def random_comparable_pair(n: int, seed: int) -> MajorizationPair:
    """y ~ Dirichlet on the simplex (biased to the edges and the centre), x from 1-3 T-transforms."""
    return random_comparable_pairs(n, 1, seed)[0]


def random_simplex_pairs(n: int, count: int, seed: int) -> list:
    """Independent uniform pairs (a, b) on the simplex, for midpoint tests."""
    rng = np.random.default_rng(seed)
    return [(rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))) for _ in range(count)]


# --- testers -----------------------------------------------------------------

@dataclass
class OstrowskiReport:
    ok: bool
    mode: str
    worst_violation: float
    worst_pair: tuple

    def to_dict(self) -> dict:
        return asdict(self)


def _finite(v, where):
    v = float(v)
    if not math.isfinite(v):
        raise NonFinite(f"non-finite function value at {where}")
    return v


def schur_ostrowski_check(f: Callable, point, fd_step: float | None = None, tol: float = 1e-8,
                          mode: str = "convex") -> OstrowskiReport:
    """Sign of (x_i - x_j)(∂_i f - ∂_j f) over all pairs, by central differences.

    Convex mode needs every product >= -tol, concave mode <= tol.  The point
    must be interior to [0, ∞)^n.
    """
    if mode not in ("convex", "concave"):
        raise ConfigError("mode must be 'convex' or 'concave'")
    x = np.atleast_1d(np.asarray(point, dtype=float))
    h = 1e-5 * max(1.0, float(np.abs(x).max())) if fd_step is None else fd_step
    if np.any(x <= h):
        raise ConfigError("Schur-Ostrowski checks need an interior point")
    grad = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        grad[i] = (_finite(f(x + e), x + e) - _finite(f(x - e), x - e)) / (2 * h)
    sign = 1.0 if mode == "convex" else -1.0
    worst, pair = 0.0, (-1, -1)
    for i in range(x.size):
        for j in range(i + 1, x.size):
            v = -sign * (x[i] - x[j]) * (grad[i] - grad[j])
            if v > worst:
                worst, pair = float(v), (i, j)
    return OstrowskiReport(worst <= tol, mode, worst, pair)


@dataclass
class SchurReport:
    mode: str
    trials: int
    violations: int
    max_gap: float
    extremal_values: dict
    extremal_ok: bool
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def test_schur(f: Callable, n: int, trials: int = 100, tol: float = 1e-9, seed: int = 0,
               mode: str = "convex", pairs=None) -> SchurReport:
    """Evaluate f on comparable pairs x ≺ y.

    Convex mode requires f(x) <= f(y) + tol |f(y)|, concave mode the reverse.
    The barycenter and the vertex e_1 are also compared with every tested value.
    """
    if mode not in ("convex", "concave"):
        raise ConfigError("mode must be 'convex' or 'concave'")
    if pairs is None:
        pairs = random_comparable_pairs(n, trials, seed)
    sign = 1.0 if mode == "convex" else -1.0
    bary = np.full(n, 1.0 / n)
    vertex = np.zeros(n)
    vertex[0] = 1.0
    f_bary, f_vertex = float(f(bary)), float(f(vertex))
    violations, max_gap = 0, -np.inf
    seen = []
    for pr in pairs:
        fx, fy = float(f(pr.x)), float(f(pr.y))
        if not (math.isfinite(fx) and math.isfinite(fy)):
            raise NonFinite("non-finite value on the simplex")
        gap = sign * (fx - fy)
        max_gap = max(max_gap, gap)
        if gap > tol * max(1.0, abs(fy)):
            violations += 1
        seen += [fx, fy]
    lo, hi = (f_bary, f_vertex) if mode == "convex" else (f_vertex, f_bary)
    scale = tol * max(1.0, abs(lo), abs(hi))
    extremal_ok = bool(all(lo - scale <= v <= hi + scale for v in seen))
    extremes = {"barycenter": f_bary, "vertex": f_vertex,
                "min_tested": float(min(seen)) if seen else None,
                "max_tested": float(max(seen)) if seen else None}
    return SchurReport(mode, len(pairs), violations, float(max_gap), extremes, extremal_ok,
                       violations == 0 and extremal_ok)


test_schur.__test__ = False  # not a pytest test


@dataclass
class MidpointReport:
    pairs: int
    violations: int
    max_log_gap: float  # max over pairs of 2 log f(mid) - log f(a) - log f(b)
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def test_log_convex_midpoint(f: Callable, pairs, tol: float = 1e-9) -> MidpointReport:
    """Check f((a+b)/2)^2 <= f(a) f(b) (1 + tol) on each pair."""
    violations, worst = 0, -np.inf
    count = 0
    for a, b in pairs:
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        fa, fb, fm = float(f(a)), float(f(b)), float(f((a + b) / 2))
        if min(fa, fb, fm) <= 0:
            raise NonPositive("f must be positive on tested points")
        count += 1
        if fm * fm > fa * fb * (1 + tol):
            violations += 1
        worst = max(worst, 2 * math.log(fm) - math.log(fa) - math.log(fb))
    return MidpointReport(count, violations, float(worst), violations == 0)


test_log_convex_midpoint.__test__ = False
