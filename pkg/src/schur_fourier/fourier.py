"""Quadrature for products of characteristic functions.

Section functions of product measures are computed by Fourier inversion,

    S(y, t) = |y|^d ∫_{R^d} cos(2π<s, t>) prod_k cf(y_k s) ds,

on a truncated domain chosen from a monotone envelope of the integrand, with
composite Gauss--Legendre rules refined until successive values agree.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import (ConfigError, FrameNotOrthonormal, IsotropyViolated, NonPositiveCf,
                     NotIntegrable, QuadratureDiverged, UnsupportedEvaluation)
from .geometry import DiscreteLp, Ellipsoid, Euclidean, isotropy_check
from .laws import (ExpPower, Gaussian, GaussianMixtureDiscrete, SymmetricLaw, UniformBox)

TWO_PI = 2 * np.pi
_GL_NODES = 32
_MAX_DOUBLINGS = 80


@dataclass(frozen=True)
class QuadratureSpec:
    tail_eps: float = 1e-8
    rel_tol: float = 1e-10
    max_levels: int = 8
    initial_radius: float = 1.0

    def __post_init__(self):
        if not (0 < self.tail_eps < 1 and 0 < self.rel_tol < 1):
            raise ConfigError("tail_eps and rel_tol must lie in (0, 1)")
        if self.max_levels < 1 or self.initial_radius <= 0:
            raise ConfigError("max_levels must be >= 1 and initial_radius > 0")

    @classmethod
    def from_dict(cls, spec: dict | None) -> "QuadratureSpec":
        if not spec:
            return cls()
        known = {k: spec[k] for k in ("tail_eps", "rel_tol", "max_levels", "initial_radius") if k in spec}
        return cls(**known)

    @classmethod
    def from_json(cls, text: str) -> "QuadratureSpec":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_QUAD = QuadratureSpec()


# --- composite Gauss--Legendre on [0, R] -------------------------------------------

_gl_cache: dict = {}


def _gl(m: int = _GL_NODES):
    if m not in _gl_cache:
        _gl_cache[m] = np.polynomial.legendre.leggauss(m)
    return _gl_cache[m]


def _panel_edges(R: float, h0: float, max_width: float) -> np.ndarray:
    """Uniform panels of width h0 up to min(R, 8 h0), dyadic beyond, none wider than max_width."""
    first = min(R, 8 * h0)
    edges = list(np.linspace(0.0, first, int(round(first / h0)) + 1 if first >= h0 else 2))
    while edges[-1] < R:
        edges.append(min(2 * edges[-1], R))
    edges = np.asarray(edges)
    widths = np.diff(edges)
    pieces = np.maximum(1, np.ceil(widths / max_width).astype(int))
    out = [edges[:1]]
    for a, b, k in zip(edges[:-1], edges[1:], pieces):
        out.append(np.linspace(a, b, k + 1)[1:])
    return np.concatenate(out)


def _composite(fn, edges: np.ndarray, split: int) -> float:
    x, w = _gl()
    if split > 1:
        fine = [edges[:1]]
        for a, b in zip(edges[:-1], edges[1:]):
            fine.append(np.linspace(a, b, split + 1)[1:])
        edges = np.concatenate(fine)
    a, b = edges[:-1, None], edges[1:, None]
    half = (b - a) / 2
    nodes = (a + b) / 2 + half * x
    vals = fn(nodes.ravel()).reshape(nodes.shape)
    return float(np.sum(vals * w * half))


def _refine(fn, edges, quad: QuadratureSpec) -> float:
    prev = _composite(fn, edges, 1)
    for level in range(1, quad.max_levels + 1):
        cur = _composite(fn, edges, 2 ** level)
        if abs(cur - prev) <= quad.rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureDiverged(f"no convergence after {quad.max_levels} refinements "
                             f"(last change {abs(cur - prev):.3e})")


def _truncation_radius(envelope, quad: QuadratureSpec) -> float:
    R = quad.initial_radius
    ref = max(float(envelope(0.0)), 1e-300)
    for _ in range(_MAX_DOUBLINGS):
        if float(envelope(R)) <= quad.tail_eps * ref:
            return R
        R *= 2
    raise NotIntegrable("integrand envelope never fell below tail_eps")


def _quiet_quad(*args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(*args, **kw)[0]


def _half_line(g, envelope, omega: float, quad: QuadratureSpec, scale: float) -> float:
    """∫_0^∞ g(s) cos(omega s) ds for a g whose |g| is bounded by a nonincreasing envelope.

    ``scale`` is the frequency scale of g itself, used to size panels.
    """
    R = _truncation_radius(envelope, quad)
    h0 = min(quad.initial_radius, 1.0 / max(scale, 1e-300)) / 4
    max_width = np.inf
    if omega > 0 or scale > 0:
        max_width = TWO_PI / max(omega + TWO_PI * scale, 1e-300)
    edges = _panel_edges(R, h0, max_width)
    if omega == 0:
        head = _refine(g, edges, quad)
        # s = R / u maps the tail onto (0, 1]
        tail = _quiet_quad(lambda u: float(g(np.array([R / u]))[0]) * R / (u * u) if u > 0 else 0.0,
                           0.0, 1.0, limit=200, epsabs=1e-16)
    else:
        head = _refine(lambda s: g(s) * np.cos(omega * s), edges, quad)
        tail = _quiet_quad(lambda s: float(g(np.array([s]))[0]), R, np.inf, weight="cos",
                           wvar=omega, limlst=100)
    if not np.isfinite(head + tail):
        raise QuadratureDiverged("non-finite quadrature value")
    return head + tail


# --- product-of-sinc exact tails (UniformBox) ---------------------------------------

def _sinc_product_line(w: float, b: np.ndarray, omega0: float, quad: QuadratureSpec) -> float:
    """∫_0^∞ prod_k sinc(2 w b_k s) cos(omega0 s) ds.

    The head [0, R] uses Gauss--Legendre; on [R, ∞) the product of sines is
    expanded into single trigonometric terms over s^m and each term is integrated
    with a Fourier-weighted rule, so a single factor (conditionally convergent)
    is admitted.
    """
    a = TWO_PI * w * np.abs(b)
    m = a.size
    R = 16.0 * TWO_PI / a.min()

    def g(s):
        return np.prod(np.sinc(np.multiply.outer(s, 2 * w * np.abs(b))), axis=-1)

    edges = _panel_edges(R, R / 64, TWO_PI / (a.sum() + omega0))
    head = _refine(lambda s: g(s) * np.cos(omega0 * s), edges, quad)

    # prod sin(a_k s) cos(omega0 s) = Re sum_j c_j exp(i f_j s)
    signs = np.array(np.meshgrid(*[[1.0, -1.0]] * m, indexing="ij")).reshape(m, -1).T
    base = (2j) ** (-m) * np.prod(signs, axis=1)
    freqs = signs @ a
    terms = {}
    for sigma in (1.0, -1.0):
        for c, f in zip(base, freqs + sigma * omega0):
            key = round(float(abs(f)), 12)
            # cos part is even in f, sin part odd
            cc, ss = terms.get(key, (0.0, 0.0))
            terms[key] = (cc + 0.5 * c.real, ss - 0.5 * c.imag * np.sign(f))
    tail = 0.0
    pw = lambda s: s ** (-m)
    for f, (cc, ss) in terms.items():
        if f == 0.0:
            if abs(cc) > 1e-15:
                if m == 1:
                    raise NotIntegrable("single sinc factor with a resonant frequency")
                tail += cc * R ** (1 - m) / (m - 1)
            continue
        if abs(cc) > 1e-15:
            tail += cc * _quiet_quad(pw, R, np.inf, weight="cos", wvar=f, limlst=200)
        if abs(ss) > 1e-15:
            tail += ss * _quiet_quad(pw, R, np.inf, weight="sin", wvar=f, limlst=200)
    return head + tail / np.prod(a)


# --- sections ---------------------------------------------------------------------

def _nonzero_weights(y) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.ndim != 1 or not np.all(np.isfinite(y)):
        raise ValueError("y must be a finite vector")
    nz = y[y != 0]
    if nz.size == 0:
        raise ValueError("y must be nonzero")
    return nz


def _radial_profile(law: SymmetricLaw):
    """Return (g, substitution matrix) when cf(s) = g(|M s|), else None."""
    if isinstance(law, Gaussian):
        return (lambda r: law.cf_envelope(r)), None
    if isinstance(law, GaussianMixtureDiscrete) and law._isotropic:
        e = np.zeros(law.dim)
        e[0] = 1.0
        return (lambda r: law.cf(np.multiply.outer(r, e))), None
    if isinstance(law, ExpPower) and isinstance(law.body, Euclidean):
        e = np.zeros(law.dim)
        e[0] = 1.0
        return (lambda r: law.cf(np.multiply.outer(r, e))), None
    if isinstance(law, ExpPower) and isinstance(law.body, Ellipsoid):
        e = np.zeros(law.dim)
        e[0] = 1.0
        # cf(s) = g(|A^{-1/2} s|): substitute s = A^{1/2} u
        return (lambda r: law.cf(np.multiply.outer(r, e) @ law.body._sqrt)), law.body._sqrt
    return None


def _line_section(law: SymmetricLaw, b: np.ndarray, t: float, quad: QuadratureSpec) -> float:
    """∫_R cos(2π s t) prod_k cf(b_k s) ds for a law on R."""
    if isinstance(law, UniformBox):
        return 2 * _sinc_product_line(law.w, b, TWO_PI * abs(t), quad)
    if not law.cf_integrable and b.size < 2:
        raise NotIntegrable(f"{law.family} cf is not integrable with a single factor")
    ab = np.abs(b)
    g = lambda s: np.prod(law.cf(np.multiply.outer(s, ab)), axis=-1)
    env = lambda r: np.prod(law.cf_envelope(np.multiply.outer(r, ab)), axis=-1)
    return 2 * _half_line(g, env, TWO_PI * abs(t), quad, scale=float(ab.max()))


def _radial_section(profile, b, t_norm: float, d: int, quad) -> float:
    nu = d / 2 - 1
    ab = np.abs(b)
    sphere = 2 * np.pi ** (d / 2) / math.gamma(d / 2)

    def g(r):
        val = np.prod(profile(np.multiply.outer(r, ab)), axis=-1) * r ** (d - 1)
        if t_norm == 0:
            return val
        x = TWO_PI * r * t_norm
        with np.errstate(invalid="ignore", divide="ignore"):
            omega = math.gamma(d / 2) * (2 / x) ** nu * special.jv(nu, x)
        return val * np.where(x == 0, 1.0, omega)

    env = lambda r: np.prod(profile(np.multiply.outer(r, ab)), axis=-1) * np.maximum(r, 1.0) ** (d - 1)
    R = _truncation_radius(env, quad)
    h0 = min(quad.initial_radius, 1.0 / ab.max()) / 4
    max_width = TWO_PI / (TWO_PI * t_norm + TWO_PI * ab.max())
    edges = _panel_edges(R, h0, max_width)
    head = _refine(g, edges, quad)
    tail = _quiet_quad(lambda u: float(g(np.array([R / u]))[0]) * R / (u * u) if u > 0 else 0.0,
                       0.0, 1.0, limit=200, epsabs=1e-16)
    return sphere * (head + tail)


def _tensor_integral(fn, k: int, R: float, quad: QuadratureSpec, h0: float = 0.25,
                     max_width: float = np.inf, budget: float = 3e7) -> float:
    """∫ over [-R, R]^k of fn(points (N, k)) by tensor composite Gauss--Legendre.

    Each axis uses the same graded panels as the one-dimensional engine,
    mirrored about 0; panels are halved until the value settles or the node
    budget is exhausted.
    """
    x, w = _gl(16)
    half_edges = _panel_edges(R, h0, max_width)
    base = np.concatenate((-half_edges[:0:-1], half_edges))

    def rule(split):
        edges = base
        if split > 1:
            edges = np.concatenate([base[:1]] + [np.linspace(a, b, split + 1)[1:]
                                                 for a, b in zip(base[:-1], base[1:])])
        a, b = edges[:-1, None], edges[1:, None]
        return ((a + b) / 2 + (b - a) / 2 * x).ravel(), (w * (b - a) / 2).ravel()

    def total(split):
        nodes, weights = rule(split)
        rest = np.stack([g.ravel() for g in np.meshgrid(*[nodes] * (k - 1), indexing="ij")], axis=-1)
        wrest = np.ones(rest.shape[0])
        for ax in range(k - 1):
            wrest = wrest * weights[np.unravel_index(np.arange(rest.shape[0]), [nodes.size] * (k - 1))[ax]]
        acc = 0.0
        for x0, w0 in zip(nodes, weights):
            pts = np.column_stack((np.full(rest.shape[0], x0), rest))
            acc += w0 * float(np.sum(fn(pts) * wrest))
        return acc

    prev = total(1)
    split = 1
    for _ in range(quad.max_levels):
        split *= 2
        if (16 * (base.size - 1) * split) ** k > budget:
            break
        cur = total(split)
        if abs(cur - prev) <= quad.rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureDiverged(f"{k}-dimensional quadrature did not converge within the node budget")


def section_at(law: SymmetricLaw, y, t=0.0, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """S(y, t) = |y|^d ∫ cos(2π<s, t>) prod_k cf(y_k s) ds, the section at level t."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    b = _nonzero_weights(y)
    d = law.dim
    norm_y = float(np.linalg.norm(y))
    t = np.asarray(t, dtype=float)
    if d == 1:
        return norm_y * _line_section(law, b, float(t.reshape(-1)[0]) if t.size else 0.0, quad)
    if d > 3:
        raise UnsupportedEvaluation("sections are computed for d <= 3")
    t = np.broadcast_to(t, (d,)) if t.ndim == 0 else t.reshape(d)
    radial = _radial_profile(law)
    if radial is not None:
        profile, sub = radial
        if sub is None:
            return norm_y ** d * _radial_section(profile, b, float(np.linalg.norm(t)), d, quad)
        jac = float(np.sqrt(np.linalg.det(law.body.matrix)))
        return norm_y ** d * jac * _radial_section(profile, b, float(np.linalg.norm(sub @ t)), d, quad)
    if not law.cf_integrable and b.size < 2:
        raise NotIntegrable(f"{law.family} cf is not integrable with a single factor")
    ab = np.abs(b)
    env = lambda r: np.prod(law.cf_envelope(np.multiply.outer(r, ab)), axis=-1)
    R = _truncation_radius(env, quad)

    def fn(pts):
        vals = np.prod(law.cf(pts[:, None, :] * ab[None, :, None]), axis=-1)
        return vals * np.cos(TWO_PI * pts @ t)

    return norm_y ** d * _tensor_integral(fn, d, R, quad)


def section_zero(law: SymmetricLaw, y, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Central section S(y) = S(y, 0)."""
    return section_at(law, y, np.zeros(law.dim) if law.dim > 1 else 0.0, quad)


def codim_section(law: SymmetricLaw, frame, quad: QuadratureSpec = DEFAULT_QUAD,
                  ortho_tol: float = 1e-10) -> float:
    """∫_{R^k} prod_m cf(<u^m, s>) ds for a k x n frame with orthonormal rows.

    ``u^m`` is the m-th column of the frame.  Coordinates of s that never share
    a column are integrated separately.
    """
    if law.dim != 1:
        raise UnsupportedEvaluation("codimension-k sections need a law on R")
    U = np.atleast_2d(np.asarray(frame, dtype=float))
    k, n = U.shape
    if k > 3 or k > n:
        raise UnsupportedEvaluation("codim_section supports k <= min(3, n)")
    if np.linalg.norm(U @ U.T - np.eye(k), 2) > ortho_tol:
        raise FrameNotOrthonormal("frame rows must be orthonormal")
    cols = U[:, np.any(U != 0, axis=0)]
    # connected components of coordinates linked through shared columns
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for col in cols.T:
        idx = np.flatnonzero(col)
        for j in idx[1:]:
            parent[find(j)] = find(idx[0])
    groups: dict = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)

    value = 1.0
    for coords in groups.values():
        sub = cols[coords][:, np.any(cols[coords] != 0, axis=0)]
        if len(coords) == 1:
            value *= _line_section(law, sub[0], 0.0, quad)
            continue
        kk = len(coords)
        n_sub = sub.shape[1]
        if isinstance(law, UniformBox) or not law.cf_integrable:
            raise UnsupportedEvaluation("multi-dimensional components need an integrable cf")
        # max_m |<u^m, s>| >= |s| / sqrt(n) because the columns form a tight frame
        env = lambda r: law.cf_envelope(np.asarray(r) / np.sqrt(n_sub)) ** 1
        R = _truncation_radius(env, quad)
        fn = lambda pts: np.prod(law.cf(pts @ sub), axis=-1)
        value *= _tensor_integral(fn, kk, R, quad, h0=min(quad.initial_radius, 1.0) / 4)
    return float(value)


# --- condition checker ------------------------------------------------------------

@dataclass
class ConditionVerdict:
    verdict: str
    max_convexity_violation: float
    max_concavity_violation: float
    grid: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def default_directions(dim: int, seed: int = 0, n_random: int = 8) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rand = rng.standard_normal((n_random, dim))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    return np.vstack([np.eye(dim), rand])


def default_r_grid() -> np.ndarray:
    return np.geomspace(1e-3, 1e3, 61)


def condition_check(law: SymmetricLaw, q: float, directions=None, r_grid=None,
                    tol: float = 1e-9, seed: int = 0) -> ConditionVerdict:
    """Classify r -> log cf(r^{1/q} t) as log-convex, log-concave, affine or neither.

    For consecutive grid points the middle value is compared to the chord through
    its neighbours; the deviation is divided by max(1, |values|) so the test
    is scale-free for large logarithms.
    """
    if q <= 0:
        raise ConfigError("q must be positive")
    dirs = default_directions(law.dim, seed) if directions is None else np.atleast_2d(
        np.asarray(directions, dtype=float))
    if law.dim == 1:
        dirs = dirs.reshape(-1, 1)
    r = default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ConfigError("r_grid must be increasing and positive")
    conv = conc = 0.0
    usable = 0
    scaled = r ** (1 / q)
    for t in dirs:
        pts = np.multiply.outer(scaled, t)
        vals = law.cf(pts[:, 0] if law.dim == 1 else pts)
        if np.any(vals <= 0) and not np.all(np.isfinite(law.log_cf(pts[:, 0] if law.dim == 1 else pts))):
            raise NonPositiveCf(f"{law.family} cf is not positive on the grid (min {vals.min():.3e})")
        logs = law.log_cf(pts[:, 0] if law.dim == 1 else pts)
        if np.any(np.isnan(logs)):
            raise NonPositiveCf(f"{law.family} cf is not positive on the grid")
        ok = np.isfinite(logs)
        rr, ff = r[ok], logs[ok]
        if rr.size < 3:
            continue
        usable += 1
        r0, r1, r2 = rr[:-2], rr[1:-1], rr[2:]
        f0, f1, f2 = ff[:-2], ff[1:-1], ff[2:]
        chord = f0 + (f2 - f0) * (r1 - r0) / (r2 - r0)
        scale = np.maximum(1.0, np.maximum(np.abs(f0), np.maximum(np.abs(f1), np.abs(f2))))
        dev = (f1 - chord) / scale
        conv = max(conv, float(np.max(dev, initial=0.0)))
        conc = max(conc, float(np.max(-dev, initial=0.0)))
    grid = {"r_min": float(r[0]), "r_max": float(r[-1]), "r_points": int(r.size),
            "directions": int(dirs.shape[0]), "q": float(q), "tol": tol}
    if usable == 0:
        return ConditionVerdict("Indeterminate", conv, conc, grid)
    if conv <= tol and conc <= tol:
        verdict = "Affine"
    elif conv <= tol:
        verdict = "LogConvex"
    elif conc <= tol:
        verdict = "LogConcave"
    else:
        verdict = "Neither"
    return ConditionVerdict(verdict, conv, conc, grid)


# --- cf of exp(-||x||^p) for discrete isotropic norms --------------------------------

_THETA_NODES, _THETA_WEIGHTS = np.polynomial.legendre.leggauss(200)


def one_sided_stable_density(alpha: float, x) -> np.ndarray:
    """Density of S > 0 with E exp(-λS) = exp(-λ^alpha), alpha in (0, 1).

    Kanter's integral representation, evaluated with a 200-point
    Gauss--Legendre rule in the angle.
    """
    x = np.asarray(x, dtype=float)
    theta = (np.pi / 2) * (_THETA_NODES + 1)
    w = (np.pi / 2) * _THETA_WEIGHTS
    with np.errstate(over="ignore", under="ignore"):
        A = ((np.sin(alpha * theta) / np.sin(theta)) ** (1 / (1 - alpha))
             * np.sin((1 - alpha) * theta) / np.sin(alpha * theta))
        z = np.multiply.outer(x ** (-alpha / (1 - alpha)), A)
        integ = np.sum(A * np.exp(-z) * w, axis=-1) / np.pi
    return alpha / (1 - alpha) * x ** (-1 / (1 - alpha)) * integ


def _mixing_rule(alpha: float, h: float):
    """Trapezoid rule in u = log a for the law of S, renormalised to mass 1.

    The lower end sits where the density is below e^{-40}; the upper end is
    where a^{-alpha - 1/2} (mixing tail times the Gaussian normaliser) drops
    below 1e-11.
    """
    c = (1 - alpha) * alpha ** (alpha / (1 - alpha))
    lo = -(1 - alpha) / alpha * math.log(40.0 / c)
    hi = math.log(1e11) / (alpha + 0.5)
    u = np.arange(lo, hi + h, h)
    a = np.exp(u)
    weights = one_sided_stable_density(alpha, a) * a * h
    keep = weights > 0
    return a[keep], weights[keep] / weights[keep].sum()


def cf_exp_power_discrete(body: DiscreteLp, p: float, t, quad: QuadratureSpec = DEFAULT_QUAD,
                          step: float | None = None) -> np.ndarray:
    """Normalised cf of exp(-sum_j c_j |<x, u_j>|^p), p in (0, 2].

    Each factor exp(-c_j λ^{p/2}) with λ = <x,u_j>^2 is a Laplace transform of
    the law of c_j^{2/p} S (S one-sided (p/2)-stable), so the density is a
    mixture of centred Gaussians exp(-<A_a x, x>), A_a = sum_j a_j u_j u_j^T,
    whose transforms are (π^d / det A_a)^{1/2} exp(-π^2 <A_a^{-1} t, t>).
    """
    if not isinstance(body, DiscreteLp):
        raise ConfigError("cf_exp_power_discrete needs a DiscreteLp body")
    rep = isotropy_check(body.coeffs, body.directions)
    if body.isotropic and not rep.ok:
        raise IsotropyViolated(f"deviation {rep.deviation:.3e}")
    if not 0 < p <= 2:
        raise ConfigError("p must lie in (0, 2]")
    d = body.dim
    t = np.asarray(t, dtype=float)
    pts = t.reshape(-1, d)
    c, u = body.coeffs, body.directions
    M = c.size

    def evaluate(a_grid, w_grid):
        # a_grid (K, M) scale multipliers, w_grid (K,) weights
        A = np.einsum("km,mi,mj->kij", a_grid, u, u)
        sign, logdet = np.linalg.slogdet(A)
        if np.any(sign <= 0):
            raise QuadratureDiverged("degenerate Gaussian component in the mixture")
        Ainv = np.linalg.inv(A)
        quadform = np.einsum("ni,kij,nj->nk", pts, Ainv, pts)
        logw = np.log(w_grid) - 0.5 * logdet
        num = special.logsumexp(logw[None, :] - np.pi ** 2 * quadform, axis=1)
        return np.exp(num - special.logsumexp(logw))

    if p == 2:
        return evaluate(c[None, :], np.ones(1)).reshape(t.shape[:-1] if t.ndim > 1 else ())

    alpha = p / 2
    h = 0.25 if step is None else float(step)

    def grid(hh):
        a1, w1 = _mixing_rule(alpha, hh)
        if a1.size ** M > 2e7:
            raise UnsupportedEvaluation(f"{M} atoms need {a1.size}^{M} mixture nodes; too many")
        mesh = np.meshgrid(*[np.arange(a1.size)] * M, indexing="ij")
        idx = np.stack([g.ravel() for g in mesh], axis=-1)
        return a1[idx] * c ** (1 / alpha), np.prod(w1[idx], axis=1)

    coarse = evaluate(*grid(2 * h))
    fine = evaluate(*grid(h))
    err = np.max(np.abs(fine - coarse))
    if err > max(1e-7, 1e3 * quad.rel_tol):
        raise QuadratureDiverged(f"mixture discretisation unresolved (change {err:.2e})")
    return fine.reshape(t.shape[:-1] if t.ndim > 1 else ())
