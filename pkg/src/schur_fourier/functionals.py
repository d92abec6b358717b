"""Functionals H(a) = E h(sum_i a_i^{1/q} X_i) of weighted sums of i.i.d. vectors.

Two routes are provided: the Bochner representation for h = ν̂ with a discrete
spectral measure ν (exact given the cf), and Monte Carlo for everything else.
Monte-Carlo draws are generated chunk by chunk from per-chunk seeds, so every
estimate is reproducible and independent of the worker count.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _parallel
from .errors import (ConfigError, NegativeMomentUnstable, NoSampler, UnsupportedBody)
from .fourier import condition_check
from .geometry import Ellipsoid, Euclidean, StarBody, WeightedLq
from .laws import SymmetricLaw, gaussian_abs_moment

CI_MULT = 4.0
MOM_BLOCKS = 32


@dataclass
class WeightVector:
    a: np.ndarray
    simplex: bool = False

    def __post_init__(self):
        self.a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if self.a.ndim != 1 or np.any(self.a < 0) or not np.all(np.isfinite(self.a)):
            raise ConfigError("weights must be a finite nonnegative vector")
        if self.simplex and abs(self.a.sum() - 1) > 1e-12:
            raise ConfigError(f"simplex weights sum to {self.a.sum()!r}")

    @classmethod
    def on_simplex(cls, a) -> "WeightVector":
        a = np.asarray(a, dtype=float)
        return cls(a / a.sum(), simplex=True)

    def coefficients(self, q: float) -> np.ndarray:
        return self.a ** (1 / q)


def _weights(a) -> np.ndarray:
    return a.a if isinstance(a, WeightVector) else WeightVector(a).a


@dataclass
class SpectralMeasure:
    """Discrete symmetric measure ν = sum_j w_j δ_{s_j}; h = ν̂ is sum_j w_j cos(2π<x, s_j>)."""

    weights: np.ndarray
    atoms: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        s = np.asarray(self.atoms, dtype=float)
        s = s.reshape(w.size, -1) if s.ndim < 2 else s
        if s.shape[0] != w.size:
            raise ConfigError("one atom per weight is required")
        if np.any(w < 0) or not np.isfinite(w.sum()):
            raise ConfigError("spectral weights must be nonnegative and finite")
        self.weights, self.atoms = w, s

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def h(self, x) -> np.ndarray:
        """ν̂(x) for points of shape (..., d) (or (...) when d = 1)."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return np.cos(2 * np.pi * x @ self.atoms.T) @ self.weights

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "atoms": self.atoms.tolist()}


@dataclass
class McEstimate:
    estimate: float
    stderr: float
    n_samples: int
    n_blocks: int
    seed: int
    unstable: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


# --- Bochner route -------------------------------------------------------------

def h_functional_bochner(law: SymmetricLaw, nu: SpectralMeasure, a, q: float) -> float:
    """H(a) = sum_j w_j prod_i cf(a_i^{1/q} s_j) for a discrete spectral measure."""
    coef = _weights(a) ** (1 / q)
    atoms = nu.atoms[:, 0] if law.dim == 1 else nu.atoms
    if law.dim == 1:
        pts = np.multiply.outer(atoms, coef)  # (J, n)
    else:
        pts = atoms[:, None, :] * coef[None, :, None]  # (J, n, d)
    if law.cf_positive:
        vals = np.exp(np.sum(law.log_cf(pts), axis=1))
    else:
        vals = np.prod(law.cf(pts), axis=1)
    return float(np.sum(nu.weights * vals))


# --- Monte-Carlo machinery ---------------------------------------------------------

def _check_sampler(law: SymmetricLaw):
    if not law.has_sampler:
        raise NoSampler(f"{law.family} has no sampler")


def _sum_values(law: SymmetricLaw, coefs: np.ndarray, seed: int, N: int, fn) -> np.ndarray:
    """fn(S) for N draws of S_k = sum_i coefs[k, i] X_i, all k sharing the same X.

    Returns an array of shape (N, K).
    """
    _check_sampler(law)
    coefs = np.atleast_2d(coefs)
    n, d = coefs.shape[1], law.dim

    def chunk(rng, size):
        x = law._draw(rng, size * n).reshape(size, n, d)
        s = np.einsum("ki,mid->mkd", coefs, x)
        return np.asarray(fn(s[..., 0] if d == 1 else s), dtype=float).reshape(size, -1)

    return np.concatenate(_parallel.map_chunks(seed, N, chunk), axis=0)


def _mean_estimate(values: np.ndarray, seed: int) -> McEstimate:
    n = values.size
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(float(values.mean()), se, int(n), 1, int(seed))


def _mom_estimate(values: np.ndarray, seed: int, blocks: int = MOM_BLOCKS):
    """Median of block means; stderr from the spread of block means."""
    n = values.size
    blocks = min(blocks, n)
    means = np.array([b.mean() for b in np.array_split(values, blocks)])
    est = float(np.median(means))
    se = float(math.sqrt(math.pi / 2) * means.std(ddof=1) / math.sqrt(blocks)) if blocks > 1 else 0.0
    return McEstimate(est, se, int(n), int(blocks), int(seed)), means


def h_functional_mc(law: SymmetricLaw, h, a, q: float, seed: int, N: int) -> McEstimate:
    """Monte-Carlo estimate of E h(sum_i a_i^{1/q} X_i) for an even callable h."""
    coef = _weights(a) ** (1 / q)
    values = _sum_values(law, coef[None, :], seed, N, lambda s: h(s[:, 0]))[:, 0]
    return _mean_estimate(values, seed)


def _norm_fn(body: StarBody | None, d: int):
    if body is None:
        return (lambda s: np.abs(s)) if d == 1 else (lambda s: np.linalg.norm(s, axis=-1))
    if body.dim != d:
        raise ConfigError("body dimension does not match the law")
    return (lambda s: body.norm(s[..., None])) if d == 1 else body.norm


def moment_mc(law: SymmetricLaw, a, q: float, p: float, body: StarBody | None = None,
              seed: int = 0, N: int = 100_000) -> McEstimate:
    """E||sum_i a_i^{1/q} X_i||^p; negative p uses median-of-means over 32 blocks."""
    d = law.dim
    if p <= -d:
        raise ConfigError(f"E||S||^p diverges for p <= -{d}")
    norm = _norm_fn(body, d)
    coef = _weights(a) ** (1 / q)
    values = _sum_values(law, coef[None, :], seed, N, lambda s: norm(s[:, 0]) ** p)[:, 0]
    if p >= 0:
        return _mean_estimate(values, seed)
    est, means = _mom_estimate(values, seed)
    if p <= -d / 2:
        q25, q75 = np.percentile(means, [25, 75])
        if (q75 - q25) > 0.1 * abs(est.estimate):
            est.unstable = True
            warnings.warn(f"negative moment p={p} has heavy-tailed block means "
                          f"(IQR {q75 - q25:.3g})", NegativeMomentUnstable, stacklevel=2)
    return est


def laplace_mc(law: SymmetricLaw, a, q: float, p: float, lam: float, seed: int = 0,
               N: int = 100_000) -> McEstimate:
    """E exp(-lam |sum_i a_i^{1/q} X_i|^p) for p in (0, 2]."""
    if not 0 < p <= 2 or lam <= 0:
        raise ConfigError("laplace_mc needs p in (0, 2] and lam > 0")
    norm = _norm_fn(None, law.dim)
    coef = _weights(a) ** (1 / q)
    values = _sum_values(law, coef[None, :], seed, N, lambda s: np.exp(-lam * norm(s[:, 0]) ** p))[:, 0]
    return _mean_estimate(values, seed)


# --- negative-moment log-convexity probe ---------------------------------------------

@dataclass
class ProbeRecord:
    a: list
    b: list
    log_gap: float  # log M(mid) - (log M(a) + log M(b)) / 2, <= 0 under log-convexity
    stderr: float
    violation: bool


@dataclass
class ProbeReport:
    l: float
    n_samples: int
    seed: int
    violations: int
    max_normalised_gap: float
    records: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _check_embedded_body(body: StarBody):
    if isinstance(body, (Euclidean, Ellipsoid)):
        return
    if isinstance(body, WeightedLq) and 0 < body.q <= 2:
        return
    raise UnsupportedBody(f"{body.family} body is outside the supported embedded families")


def neg_moment_logconvexity_probe(law: SymmetricLaw, body: StarBody, l: float, pairs,
                                  q: float = 2.0, seed: int = 0, N: int = 100_000) -> ProbeReport:
    """Midpoint log-convexity of a -> E||sum sqrt(a_i) X_i||^{-l} on pairs (a, b).

    All three weight vectors of a pair reuse the same draws, and the log-gap's
    standard error comes from the delta method on the per-sample values.
    """
    d = law.dim
    if not 0 < l < d:
        raise ConfigError(f"l must lie in (0, d) = (0, {d})")
    _check_embedded_body(body)
    norm = _norm_fn(body, d)
    records = []
    worst = -np.inf
    for k, (a, b) in enumerate(pairs):
        a, b = _weights(a), _weights(b)
        mid = (a + b) / 2
        coefs = np.vstack([mid, a, b]) ** (1 / q)
        vals = _sum_values(law, coefs, seed, N, lambda s: norm(s) ** (-l))
        m = vals.mean(axis=0)
        y = vals[:, 0] / m[0] - 0.5 * vals[:, 1] / m[1] - 0.5 * vals[:, 2] / m[2]
        se = float(y.std(ddof=1) / math.sqrt(N))
        gap = float(math.log(m[0]) - 0.5 * (math.log(m[1]) + math.log(m[2])))
        viol = gap > CI_MULT * se
        worst = max(worst, gap / se if se > 0 else (np.inf if gap > 0 else 0.0))
        records.append(ProbeRecord(a.tolist(), b.tolist(), gap, se, bool(viol)))
    return ProbeReport(float(l), int(N), int(seed), sum(r.violation for r in records),
                       float(worst), records)


# --- Khinchin -------------------------------------------------------------------

@dataclass
class KhinchinConstants:
    p: float
    c_gauss: float
    c_self: float


def khinchin_constants(law: SymmetricLaw, p: float) -> KhinchinConstants:
    """(||Z||_p / ||X||_2, ||X||_p / ||X||_2) with Z Gaussian of the same variance."""
    if law.dim != 1:
        raise ConfigError("Khinchin constants are for laws on R")
    if not -1 < p <= 2 or p == 0:
        raise ConfigError("p must lie in (-1, 0) or (0, 2]")
    var = law.second_moment()
    if not np.isfinite(var):
        raise ConfigError("law must have a finite second moment")
    c_gauss = gaussian_abs_moment(p) ** (1 / p)
    c_self = law.abs_moment(p) ** (1 / p) / math.sqrt(var)
    return KhinchinConstants(float(p), float(c_gauss), float(c_self))


@dataclass
class KhinchinTrial:
    theta: list
    norm_p: float
    stderr: float
    lower: float
    upper: float
    slack: float  # min distance to the nearer endpoint, in stderr units (negative = outside)
    violation: bool


@dataclass
class KhinchinReport:
    p: float
    n: int
    orientation: str
    c_gauss: float
    c_self: float
    norm_2: float
    n_samples: int
    seed: int
    violations: int
    worst_slack: float
    trials: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def random_unit_vectors(n: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def khinchin_norms(law: SymmetricLaw, p: float, thetas: np.ndarray, seed: int, N: int):
    """MC ||theta . X||_p for each row theta, with common draws; returns (norms, stderrs)."""
    thetas = np.atleast_2d(thetas)
    n = thetas.shape[1]
    _check_sampler(law)

    def chunk(rng, size):
        x = law._draw(rng, size * n).reshape(size, n)
        v = np.abs(x @ thetas.T) ** p
        return np.stack([v.sum(axis=0), (v * v).sum(axis=0)])

    parts = _parallel.map_chunks(seed, N, chunk)
    tot = np.sum(parts, axis=0)
    m = tot[0] / N
    var = np.maximum(tot[1] / N - m * m, 0.0) * N / (N - 1)
    se_m = np.sqrt(var / N)
    norms = m ** (1 / p)
    return norms, np.abs(norms / (p * m)) * se_m


def khinchin_verify(law: SymmetricLaw, p: float, n: int, trials: int = 100, seed: int = 0,
                    N: int = 100_000, thetas=None, orientation: str | None = None) -> KhinchinReport:
    """Check the two-sided Khinchin sandwich for random directions theta.

    Log-convex cf at q = 2: c_self ||X||_2 <= ||theta.X||_p <= c_gauss ||X||_2.
    Log-concave: the same with the roles of the constants exchanged.
    """
    if orientation is None:
        verdict = condition_check(law, 2.0).verdict
        if verdict not in ("LogConvex", "LogConcave", "Affine"):
            raise ConfigError(f"law fails the q=2 condition (verdict {verdict})")
        orientation = "LogConcave" if verdict == "LogConcave" else "LogConvex"
    consts = khinchin_constants(law, p)
    sigma = math.sqrt(law.second_moment())
    if thetas is None:
        thetas = random_unit_vectors(n, trials, seed)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    thetas = thetas / np.linalg.norm(thetas, axis=1, keepdims=True)
    norms, ses = khinchin_norms(law, p, thetas, seed, N)
    if orientation == "LogConvex":
        lo_c, hi_c = consts.c_self, consts.c_gauss
    else:
        lo_c, hi_c = consts.c_gauss, consts.c_self
    lower, upper = lo_c * sigma, hi_c * sigma
    out = []
    for th, v, se in zip(thetas, norms, ses):
        slack = min(v - lower, upper - v) / se if se > 0 else np.inf
        viol = bool(v < lower - CI_MULT * se or v > upper + CI_MULT * se)
        out.append(KhinchinTrial(th.tolist(), float(v), float(se), float(lower), float(upper),
                                 float(slack), viol))
    return KhinchinReport(float(p), int(thetas.shape[1]), orientation, consts.c_gauss, consts.c_self,
                          sigma, int(N), int(seed), sum(t.violation for t in out),
                          float(min(t.slack for t in out)), out)
