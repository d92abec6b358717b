"""Star-body quasi-norms, volumes of B_p^n(K) and exact samplers.

The samplers follow the Schechtman--Zinn mechanism: a vector with density
proportional to ``exp(-||x||_K^p)`` splits into an independent direction,
distributed according to the cone measure of K, and a radius whose p-th power
is Gamma(d/p, 1).  Stacking n such vectors gives the cone measure of
``B_p^n(K)``; dividing by ``(||X||^p + Z)^(1/p)`` with Z ~ Exp(1) gives the
uniform measure on the ball.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from . import _parallel
from .errors import ConfigError, IsotropyViolated, UnsupportedBody

ISOTROPY_TOL = 1e-8


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise ValueError(f"expected points in R^{dim}, got shape {x.shape}")
    return x


class StarBody:
    """Base class; subclasses define ``norm`` on arrays of shape (..., dim)."""

    family: str = ""
    dim: int

    def norm(self, x) -> np.ndarray:
        raise NotImplementedError

    def volume(self) -> float:
        raise UnsupportedBody(f"no closed-form volume for {self.family}")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(eq=False)
class Euclidean(StarBody):
    dim: int = 1
    family = "Euclidean"

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError("dim must be positive")

    def norm(self, x):
        return np.linalg.norm(_as_points(x, self.dim), axis=-1)

    def volume(self):
        d = self.dim
        return float(np.exp(0.5 * d * np.log(np.pi) - gammaln(1 + d / 2)))

    def to_dict(self):
        return {"family": self.family, "dim": self.dim}


@dataclass(eq=False)
class Ellipsoid(StarBody):
    """K = {x : x^T A x <= 1} for a symmetric positive definite A."""

    matrix: np.ndarray = None
    family = "Ellipsoid"
    dim: int = field(init=False)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if a.shape[0] != a.shape[1] or not np.allclose(a, a.T, rtol=0, atol=1e-12):
            raise ConfigError("ellipsoid matrix must be square and symmetric")
        evals, evecs = np.linalg.eigh(a)
        if evals.min() <= 0:
            raise ConfigError("ellipsoid matrix must be positive definite")
        self.matrix = a
        self.dim = a.shape[0]
        self._inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.T
        self._sqrt = (evecs * np.sqrt(evals)) @ evecs.T
        self._logdet = float(np.sum(np.log(evals)))

    def norm(self, x):
        x = _as_points(x, self.dim)
        return np.sqrt(np.einsum("...i,ij,...j->...", x, self.matrix, x))

    def volume(self):
        return Euclidean(self.dim).volume() * float(np.exp(-0.5 * self._logdet))

    def to_dict(self):
        return {"family": self.family, "dim": self.dim, "matrix": self.matrix.tolist()}


@dataclass(eq=False)
class WeightedLq(StarBody):
    """||x|| = (sum_i |x_i / w_i|^q)^(1/q)."""

    q: float = 2.0
    weights: np.ndarray = None
    family = "WeightedLq"
    dim: int = field(init=False)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.q <= 0 or np.any(w <= 0):
            raise ConfigError("WeightedLq needs q > 0 and positive weights")
        self.weights = w
        self.dim = w.size

    def norm(self, x):
        z = np.abs(_as_points(x, self.dim)) / self.weights
        if np.isinf(self.q):
            return z.max(axis=-1)
        m = z.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return safe[..., 0] * np.sum((z / safe) ** self.q, axis=-1) ** (1 / self.q)

    def volume(self):
        q, d = self.q, self.dim
        log_v = np.sum(np.log(2 * self.weights)) + d * gammaln(1 + 1 / q) - gammaln(1 + d / q)
        return float(np.exp(log_v))

    def to_dict(self):
        return {"family": self.family, "dim": self.dim, "q": self.q,
                "weights": self.weights.tolist()}


@dataclass(eq=False)
class DiscreteLp(StarBody):
    """||x||^p = sum_j c_j |<x, u_j>|^p with unit directions u_j.

    With ``isotropic=True`` the atoms must satisfy sum_j c_j u_j u_j^T = I,
    i.e. the body is already in (discrete) Lewis position.
    """

    p: float = 2.0
    coeffs: np.ndarray = None
    directions: np.ndarray = None
    isotropic: bool = True
    family = "DiscreteLp"
    dim: int = field(init=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        u = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if u.shape[0] != c.size:
            u = u.T if u.shape[1] == c.size else u
        if u.shape[0] != c.size:
            raise ConfigError("need one direction per coefficient")
        if not 0 < self.p <= 2:
            raise ConfigError("DiscreteLp requires p in (0, 2]")
        if np.any(c <= 0):
            raise ConfigError("DiscreteLp coefficients must be positive")
        lengths = np.linalg.norm(u, axis=1)
        if np.any(np.abs(lengths - 1) > 1e-10):
            raise ConfigError("DiscreteLp directions must be unit vectors")
        self.coeffs, self.directions, self.dim = c, u, u.shape[1]
        if self.isotropic:
            report = isotropy_check(c, u)
            if not report.ok:
                raise IsotropyViolated(f"atoms deviate from isotropy by {report.deviation:.3e}")

    def norm(self, x):
        x = _as_points(x, self.dim)
        proj = np.abs(x @ self.directions.T)
        return np.sum(self.coeffs * proj ** self.p, axis=-1) ** (1 / self.p)

    def to_dict(self):
        return {"family": self.family, "dim": self.dim, "p": self.p,
                "coeffs": self.coeffs.tolist(), "directions": self.directions.tolist(),
                "isotropic": self.isotropic}


@dataclass
class IsotropyReport:
    ok: bool
    deviation: float


def isotropy_check(coeffs, directions, tol: float = ISOTROPY_TOL) -> IsotropyReport:
    """Operator-norm distance of sum_j c_j u_j u_j^T from the identity."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    u = np.atleast_2d(np.asarray(directions, dtype=float))
    if c.size == 0:
        raise ValueError("atoms must be nonempty")
    gram = (u.T * c) @ u
    dev = float(np.linalg.norm(gram - np.eye(u.shape[1]), 2))
    return IsotropyReport(ok=dev <= tol, deviation=dev)


def body_from_dict(spec: dict) -> StarBody:
    spec = dict(spec)
    family = spec.pop("family", None)
    try:
        if family == "Euclidean":
            return Euclidean(int(spec.get("dim", 1)))
        if family == "Ellipsoid":
            return Ellipsoid(np.asarray(spec["matrix"], dtype=float))
        if family == "WeightedLq":
            dim = int(spec.get("dim", len(spec.get("weights", [1.0]))))
            weights = spec.get("weights", [1.0] * dim)
            return WeightedLq(float(spec["q"]), np.asarray(weights, dtype=float))
        if family == "DiscreteLp":
            return DiscreteLp(float(spec["p"]), np.asarray(spec["coeffs"], dtype=float),
                              np.asarray(spec["directions"], dtype=float),
                              bool(spec.get("isotropic", True)))
    except KeyError as exc:
        raise ConfigError(f"body spec for {family} is missing field {exc}") from None
    raise ConfigError(f"unknown body family {family!r}")


# --- B_p^n(K) ---------------------------------------------------------------

def bpn_log_volume(n: int, d: int, p: float, vol_k: float) -> float:
    if n < 1 or d < 1 or p <= 0 or vol_k <= 0:
        raise ValueError("bpn_volume needs positive n, d, p and |K|")
    return float(n * np.log(vol_k) + n * gammaln(1 + d / p) - gammaln(1 + n * d / p))


def bpn_volume(n: int, d: int, p: float, vol_k: float) -> float:
    """|B_p^n(K)| = |K|^n Gamma(1 + d/p)^n / Gamma(1 + nd/p)."""
    return float(np.exp(bpn_log_volume(n, d, p, vol_k)))


def bpn_norm_p(points, body: StarBody, p: float) -> np.ndarray:
    """sum_i ||x_i||_K^p for points of shape (..., n, d)."""
    return np.sum(body.norm(points) ** p, axis=-1)


def _check_sampling_body(body: StarBody):
    if isinstance(body, DiscreteLp):
        raise UnsupportedBody("exp(-||x||^p) sampling is not provided for DiscreteLp bodies")
    if not isinstance(body, (Euclidean, Ellipsoid, WeightedLq)):
        raise UnsupportedBody(f"cannot sample from body family {body.family!r}")


def _cone_directions(body: StarBody, rng: np.random.Generator, size: int) -> np.ndarray:
    d = body.dim
    if isinstance(body, WeightedLq):
        q = body.q
        y = rng.standard_gamma(1 / q, size=(size, d)) ** (1 / q)
        y *= rng.choice((-1.0, 1.0), size=(size, d))
        y *= body.weights
        return y / body.norm(y)[:, None]
    g = rng.standard_normal((size, d))
    g /= np.linalg.norm(g, axis=1)[:, None]
    if isinstance(body, Ellipsoid):
        g = g @ body._inv_sqrt
    return g


def _exp_power_chunk(body: StarBody, p: float):
    d = body.dim

    def fn(rng, size):
        theta = _cone_directions(body, rng, size)
        radius = rng.standard_gamma(d / p, size=size) ** (1 / p)
        return theta * radius[:, None]

    return fn


def sample_exp_power(body: StarBody, p: float, seed: int, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. points with density exp(-||x||_K^p) / (|K| Gamma(1 + d/p)).

    Returns an array of shape (count, d).
    """
    _check_sampling_body(body)
    if p <= 0:
        raise ValueError("p must be positive")
    return _parallel.draw(seed, count, _exp_power_chunk(body, p))


@dataclass
class ConeSample:
    directions: np.ndarray  # (count, n, d), each row on S_p^n(K)
    radius_p: np.ndarray  # (count,) = ||X||^p, Gamma(nd/p, 1)


@dataclass
class BpnSample:
    points: np.ndarray  # (count, n, d)
    norm_p: np.ndarray  # (count,) cached ||Y||_{l_p^n(K)}^p
    p: float

    def norm(self) -> np.ndarray:
        return self.norm_p ** (1 / self.p)


def _block_draws(body, p, n, include_exponential):
    inner = _exp_power_chunk(body, p)
    d = body.dim

    def fn(rng, size):
        x = inner(rng, size * n).reshape(size, n, d)
        r = bpn_norm_p(x, body, p)
        if include_exponential:
            z = rng.standard_exponential(size)
            return x, r, z
        return x, r

    return fn


def sample_cone_bpnk(body: StarBody, p: float, n: int, seed: int, count: int) -> ConeSample:
    """Cone measure on S_p^n(K) together with the independent Gamma(nd/p) radius."""
    _check_sampling_body(body)
    parts = _parallel.map_chunks(seed, count, _block_draws(body, p, n, False))
    x = np.concatenate([a for a, _ in parts])
    r = np.concatenate([b for _, b in parts])
    return ConeSample(directions=x / (r ** (1 / p))[:, None, None], radius_p=r)


def sample_uniform_bpnk(body: StarBody, p: float, n: int, seed: int, count: int) -> BpnSample:
    """Uniform probability measure on B_p^n(K) via X / (||X||^p + Z)^(1/p)."""
    _check_sampling_body(body)
    parts = _parallel.map_chunks(seed, count, _block_draws(body, p, n, True))
    x = np.concatenate([a for a, _, _ in parts])
    r = np.concatenate([b for _, b, _ in parts])
    z = np.concatenate([c for _, _, c in parts])
    scale = (r + z) ** (1 / p)
    y = x / scale[:, None, None]
    return BpnSample(points=y, norm_p=r / (r + z), p=p)


def block_section_volume(section_value: float, n: int, d: int, p: float) -> float:
    """|B_p^n(K) ∩ H_theta| from the section of the product of exp(-||x||_K^p).

    ``section_value`` is the unnormalised section S(theta) of the product
    measure with density exp(-||x||_K^p) in each block.
    """
    return float(section_value * np.exp(-gammaln(1 + (n * d - d) / p)))


# --- batch output -------------------------------------------------------------

def write_batch_csv(points, path) -> None:
    pts = np.asarray(points, dtype=float).reshape(len(points), -1)
    np.savetxt(path, pts, delimiter=",", fmt="%.17g")


def write_batch_binary(points, path) -> None:
    """Little-endian float64 rows preceded by an unsigned 64-bit row count."""
    pts = np.ascontiguousarray(np.asarray(points, dtype="<f8").reshape(len(points), -1))
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", pts.shape[0]))
        fh.write(pts.tobytes())


def read_batch_binary(path, width: int) -> np.ndarray:
    raw = Path(path).read_bytes()
    (count,) = struct.unpack("<Q", raw[:8])
    data = np.frombuffer(raw[8:], dtype="<f8")
    if data.size != count * width:
        raise ValueError(f"expected {count}x{width} floats, found {data.size}")
    return data.reshape(count, width)
