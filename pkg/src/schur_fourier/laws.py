"""Symmetric probability laws with exact characteristic functions.

Fourier convention throughout: ``cf(t) = ∫ φ(x) exp(-2πi<t, x>) dx``.  All laws
here are symmetric, so the transform is real and even.

Arrays of frequencies follow one rule: for ``dim == 1`` any shape is accepted
and the result has the same shape; for ``dim > 1`` the last axis holds the
coordinates and is reduced.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from . import _parallel
from .errors import ConfigError, DivergentMoment, NoSampler, NonFinite, UnsupportedEvaluation
from .geometry import (Ellipsoid, Euclidean, StarBody, WeightedLq, _exp_power_chunk,
                       body_from_dict)

TWO_PI = 2 * np.pi


def gaussian_abs_moment(p: float, dim: int = 1) -> float:
    """E|Z|^p for a standard Gaussian vector in R^dim (Euclidean norm)."""
    if p <= -dim:
        raise DivergentMoment(f"E|Z|^p diverges for p <= -{dim}")
    return float(np.exp(0.5 * p * np.log(2) + special.gammaln((dim + p) / 2)
                        - special.gammaln(dim / 2)))


def _sq_norm(t, dim):
    t = np.asarray(t, dtype=float)
    if dim == 1:
        return t * t
    if t.shape[-1] != dim:
        raise ValueError(f"frequencies must have trailing dimension {dim}")
    return np.sum(t * t, axis=-1)


def _abs_moment_from_cf(cf1d: Callable[[float], float], p: float, second_moment=None) -> float:
    """E|X|^p of a symmetric law on R from its cf alone, for p in (-1, 2].

    Uses ∫_0^∞ (1 - cos ux) u^{-1-p} du = π |x|^p / (2 Γ(1+p) sin(πp/2)) for
    p in (0, 2) and ∫_0^∞ cos(ux) u^{r-1} du = Γ(r) cos(πr/2) |x|^{-r} for
    r in (0, 1); ``u`` is angular frequency, so the cf is read at u / 2π.
    """
    if p == 0:
        return 1.0
    if p == 2:
        if second_moment is None:
            raise UnsupportedEvaluation("second moment needs a closed form")
        return float(second_moment)
    phi = lambda u: cf1d(u / TWO_PI)
    if 0 < p < 2:
        f = lambda u: (1 - phi(u)) * u ** (-1 - p)
        val = sum(integrate.quad(f, a, b, limit=400, epsabs=0, epsrel=1e-11)[0]
                  for a, b in ((0, 1), (1, np.inf)))
        return float(2 * math.gamma(1 + p) * math.sin(math.pi * p / 2) / math.pi * val)
    if -1 < p < 0:
        r = -p
        f = lambda u: phi(u) * u ** (r - 1)
        val = sum(integrate.quad(f, a, b, limit=400, epsabs=0, epsrel=1e-11)[0]
                  for a, b in ((0, 1), (1, np.inf)))
        return float(val / (math.gamma(r) * math.cos(math.pi * r / 2)))
    raise DivergentMoment(f"cf route covers p in (-1, 2], got {p}")


class SymmetricLaw:
    """Base class.  Subclasses set the capability flags and override ``cf``."""

    family: str = ""
    dim: int = 1
    has_density: bool = False
    has_sampler: bool = False
    cf_positive: bool = True
    cf_integrable: bool = True

    def cf(self, t) -> np.ndarray:
        raise NotImplementedError

    def log_cf(self, t) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.asarray(self.cf(t), dtype=float)
            return np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), np.nan if np.any(v < 0) else -np.inf)

    def cf_envelope(self, r) -> np.ndarray:
        """Nonincreasing majorant of |cf| on the sphere of radius ``r``."""
        r = np.abs(np.asarray(r, dtype=float))
        if self.dim == 1:
            return np.abs(self.cf(r))
        e = np.zeros(self.dim)
        e[0] = 1.0
        return np.abs(self.cf(r[..., None] * e))

    def density(self, x) -> np.ndarray:
        if not self.has_density:
            raise UnsupportedEvaluation(f"{self.family} has no density")
        return self._density(x)

    def _density(self, x):
        if self.dim != 1 or not self.cf_integrable:
            raise UnsupportedEvaluation(f"no density route for {self.family}")
        return _invert_cf(self, x)

    def sample(self, seed: int, count: int) -> np.ndarray:
        """``count`` i.i.d. draws, shape (count,) for dim 1 and (count, dim) otherwise."""
        if not self.has_sampler:
            raise NoSampler(f"{self.family} has no sampler")
        out = _parallel.draw(seed, count, self._draw)
        return out[:, 0] if self.dim == 1 else out

    def _draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NoSampler(f"{self.family} has no sampler")

    def abs_moment(self, p: float) -> float:
        raise UnsupportedEvaluation(f"no moment routine for {self.family}")

    def second_moment(self) -> float:
        """E|X|^2 (trace of the covariance)."""
        return self.abs_moment(2.0)

    def to_dict(self) -> dict:
        raise NotImplementedError


def _invert_cf(law: SymmetricLaw, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    f = lambda t: float(law.cf(t))

    def one(xx):
        if xx == 0:
            val, _ = integrate.quad(f, 0, np.inf, limit=400, epsabs=1e-14)
        else:
            val, _ = integrate.quad(f, 0, np.inf, weight="cos", wvar=TWO_PI * abs(xx), limlst=200)
        if not np.isfinite(val):
            raise NonFinite("cf inversion failed")
        return 2 * val

    return np.vectorize(one, otypes=[float])(x)


# --- concrete families --------------------------------------------------------

@dataclass(eq=False)
class Gaussian(SymmetricLaw):
    sigma: float = 1.0
    dim: int = 1
    family = "Gaussian"
    has_density = True
    has_sampler = True

    def __post_init__(self):
        if self.sigma <= 0 or self.dim < 1:
            raise ConfigError("Gaussian needs sigma > 0 and dim >= 1")

    def cf(self, t):
        return np.exp(self.log_cf(t))

    def log_cf(self, t):
        return -2 * np.pi ** 2 * self.sigma ** 2 * _sq_norm(t, self.dim)

    def cf_envelope(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-2 * np.pi ** 2 * self.sigma ** 2 * r * r)

    def _density(self, x):
        s2 = self.sigma ** 2
        return np.exp(-_sq_norm(x, self.dim) / (2 * s2)) / (2 * np.pi * s2) ** (self.dim / 2)

    def _draw(self, rng, size):
        return self.sigma * rng.standard_normal((size, self.dim))

    def abs_moment(self, p):
        return self.sigma ** p * gaussian_abs_moment(p, self.dim)

    def to_dict(self):
        return {"family": self.family, "dim": self.dim, "sigma": self.sigma}


@dataclass(eq=False)
class Laplace(SymmetricLaw):
    """Density exp(-|x|/b) / (2b)."""

    b: float = 1.0
    family = "Laplace"
    has_density = True
    has_sampler = True

    def __post_init__(self):
        if self.b <= 0:
            raise ConfigError("Laplace scale must be positive")

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 / (1.0 + (TWO_PI * self.b * t) ** 2)

    def log_cf(self, t):
        t = np.asarray(t, dtype=float)
        return -np.log1p((TWO_PI * self.b * t) ** 2)

    cf_envelope = cf

    def _density(self, x):
        return np.exp(-np.abs(np.asarray(x, dtype=float)) / self.b) / (2 * self.b)

    def _draw(self, rng, size):
        return rng.laplace(0.0, self.b, size=(size, 1))

    def abs_moment(self, p):
        if p <= -1:
            raise DivergentMoment("Laplace: E|X|^p diverges for p <= -1")
        return float(self.b ** p * special.gamma(p + 1))

    def to_dict(self):
        return {"family": self.family, "dim": 1, "b": self.b}


def _cms_symmetric(alpha: float, rng: np.random.Generator, size) -> np.ndarray:
    """Chambers--Mallows--Stuck draw with E exp(iuX) = exp(-|u|^alpha)."""
    v = rng.uniform(-np.pi / 2, np.pi / 2, size=size)
    if alpha == 1:
        return np.tan(v)
    w = rng.standard_exponential(size=size)
    return (np.sin(alpha * v) / np.cos(v) ** (1 / alpha)
            * (np.cos((1 - alpha) * v) / w) ** ((1 - alpha) / alpha))


def _stable_std_abs_moment(alpha: float, p: float) -> float:
    """E|X|^p for E exp(iuX) = exp(-|u|^alpha)."""
    if alpha == 2:
        return 2 ** (p / 2) * gaussian_abs_moment(p)
    if not -1 < p < alpha:
        raise DivergentMoment(f"stable({alpha}) has finite E|X|^p only for p in (-1, {alpha})")
    return float(2 ** p * special.gamma((1 + p) / 2) * special.gamma(1 - p / alpha)
                 / (special.gamma(1 - p / 2) * np.sqrt(np.pi)))


@dataclass(eq=False)
class Stable(SymmetricLaw):
    """Symmetric alpha-stable law with cf exp(-c |2πt|^alpha)."""

    alpha: float = 1.0
    c: float = 1.0
    family = "Stable"
    has_density = True
    has_sampler = True

    def __post_init__(self):
        if not 0 < self.alpha <= 2 or self.c <= 0:
            raise ConfigError("Stable needs alpha in (0, 2] and c > 0")

    def cf(self, t):
        return np.exp(self.log_cf(t))

    def log_cf(self, t):
        return -self.c * np.abs(TWO_PI * np.asarray(t, dtype=float)) ** self.alpha

    def cf_envelope(self, r):
        return self.cf(r)

    def _density(self, x):
        x = np.asarray(x, dtype=float)
        if self.alpha == 1:
            return self.c / (np.pi * (self.c ** 2 + x * x))
        if self.alpha == 2:
            return Gaussian(np.sqrt(2 * self.c)).density(x)
        return _invert_cf(self, x)

    def _draw(self, rng, size):
        return self.c ** (1 / self.alpha) * _cms_symmetric(self.alpha, rng, (size, 1))

    def abs_moment(self, p):
        return self.c ** (p / self.alpha) * _stable_std_abs_moment(self.alpha, p)

    def to_dict(self):
        return {"family": self.family, "dim": 1, "alpha": self.alpha, "c": self.c}


def _is_pseudo_stable_exponent(p: float) -> bool:
    n = math.floor(p / 4)
    return n >= 1 and 4 * n < p < 4 * n + 2


@dataclass(eq=False)
class PseudoStable(SymmetricLaw):
    """cf exp(-c1|t|^p - c2 t^2), p in ∪_n (4n, 4n+2); only the cf is available."""

    p: float = 5.0
    c1: float = 1.0
    c2: float = 1.0
    family = "PseudoStable"

    def __post_init__(self):
        if not _is_pseudo_stable_exponent(self.p):
            raise ConfigError(f"pseudo-stable exponent must lie in some (4n, 4n+2), got {self.p}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ConfigError("PseudoStable needs c1, c2 > 0")

    def cf(self, t):
        return np.exp(self.log_cf(t))

    def log_cf(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        return -self.c1 * t ** self.p - self.c2 * t * t

    def cf_envelope(self, r):
        return self.cf(r)

    def abs_moment(self, p):
        return _abs_moment_from_cf(lambda u: float(self.cf(u)), p,
                                   second_moment=self.c2 / (2 * np.pi ** 2))

    def to_dict(self):
        return {"family": self.family, "dim": 1, "p": self.p, "c1": self.c1, "c2": self.c2}


@dataclass(eq=False)
class MixingLaw:
    """Law of the positive multiplier Y in a q-stable mixture Y * Z_q.

    ``kind`` is one of ``constant``, ``discrete``, ``lognormal``, ``uniform``,
    ``gamma``.
    """

    kind: str = "constant"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        k, pr = self.kind, self.params
        self._atoms = None
        self._dist = None
        if k == "constant":
            v = float(pr.get("value", 1.0))
            self._atoms = (np.array([v]), np.array([1.0]))
        elif k == "discrete":
            v = np.asarray(pr["values"], dtype=float)
            w = np.asarray(pr.get("weights", np.ones_like(v)), dtype=float)
            self._atoms = (v, w / w.sum())
        elif k == "lognormal":
            self._dist = stats.lognorm(float(pr.get("sigma", 1.0)), scale=float(pr.get("scale", 1.0)))
        elif k == "uniform":
            lo, hi = float(pr["low"]), float(pr["high"])
            self._dist = stats.uniform(lo, hi - lo)
        elif k == "gamma":
            self._dist = stats.gamma(float(pr["shape"]), scale=float(pr.get("scale", 1.0)))
        else:
            raise ConfigError(f"unknown mixing law {k!r}")
        if self._atoms is not None and np.any(self._atoms[0] <= 0):
            raise ConfigError("mixing law must be supported on (0, ∞)")
        if self._dist is not None and self._dist.support()[0] < 0:
            raise ConfigError("mixing law must be supported on (0, ∞)")

    def expect(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        if self._atoms is not None:
            v, w = self._atoms
            return float(np.sum(w * g(v)))
        lo, hi = self._dist.support()
        val, _ = integrate.quad(lambda y: g(np.asarray(y)) * self._dist.pdf(y), lo, hi,
                                limit=400, epsabs=1e-15, epsrel=1e-12)
        return float(val)

    def draw(self, rng, size):
        if self._atoms is not None:
            v, w = self._atoms
            return v[rng.choice(v.size, size=size, p=w)]
        return self._dist.rvs(size=size, random_state=rng)

    def moment(self, p: float) -> float:
        if self._atoms is not None:
            v, w = self._atoms
            return float(np.sum(w * v ** p))
        m = self._dist.expect(lambda y: y ** p)
        if not np.isfinite(m):
            raise DivergentMoment(f"E Y^{p} diverges for the mixing law")
        return float(m)

    def to_dict(self):
        return {"kind": self.kind, **self.params}


@dataclass(eq=False)
class QStableMixture(SymmetricLaw):
    """X = Y * Z with Z symmetric alpha-stable (cf exp(-c|2πt|^alpha)) and Y > 0."""

    alpha: float = 1.0
    mixing: MixingLaw = field(default_factory=MixingLaw)
    c: float = 1.0
    family = "QStableMixture"
    has_density = True
    has_sampler = True

    def __post_init__(self):
        if not 0 < self.alpha < 2 or self.c <= 0:
            raise ConfigError("QStableMixture needs alpha in (0, 2) and c > 0")
        self._stable = Stable(self.alpha, self.c)

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        a = self.alpha
        base = self.c * np.abs(TWO_PI * t) ** a

        def one(b):
            return self.mixing.expect(lambda y: np.exp(-b * y ** a))

        return np.vectorize(one, otypes=[float])(base)

    def cf_envelope(self, r):
        return self.cf(r)

    def _draw(self, rng, size):
        y = self.mixing.draw(rng, size)
        return (y * self._stable._draw(rng, size)[:, 0])[:, None]

    def abs_moment(self, p):
        return self.mixing.moment(p) * self._stable.abs_moment(p)

    def to_dict(self):
        return {"family": self.family, "dim": 1, "alpha": self.alpha, "c": self.c,
                "mixing": self.mixing.to_dict()}


def _tricube_cf(omega):
    # 12 (ω² - 2 + 2 cos ω) / ω⁴, with its Taylor series near 0 to avoid cancellation
    w = np.abs(np.asarray(omega, dtype=float))
    out = np.empty_like(w)
    small = w < 0.5
    ws = w[small] ** 2
    series = np.zeros_like(ws)
    for k in range(2, 12):
        coeff = 24.0 * (-1) ** k / math.factorial(2 * k)
        series += coeff * ws ** (k - 2)
    out[small] = series
    wl = w[~small]
    out[~small] = 12.0 * (wl * wl - 2.0 + 2.0 * np.cos(wl)) / wl ** 4
    return out


@dataclass(eq=False)
class TriCube(SymmetricLaw):
    """Density 2 (1 - |x|)_+^3 on [-1, 1]."""

    family = "TriCube"
    has_density = True
    has_sampler = True

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        return _tricube_cf(TWO_PI * t).reshape(t.shape)

    def cf_envelope(self, r):
        w = TWO_PI * np.abs(np.asarray(r, dtype=float))
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, 12.0 / (w * w))

    def _density(self, x):
        return 2.0 * np.clip(1.0 - np.abs(np.asarray(x, dtype=float)), 0.0, None) ** 3

    def _draw(self, rng, size):
        mag = 1.0 - rng.random(size) ** 0.25
        return (mag * rng.choice((-1.0, 1.0), size=size))[:, None]

    def abs_moment(self, p):
        if p <= -1:
            raise DivergentMoment("TriCube: E|X|^p diverges for p <= -1")
        return float(4 * np.exp(special.gammaln(p + 1) + special.gammaln(4) - special.gammaln(p + 5)))

    def to_dict(self):
        return {"family": self.family, "dim": 1}


@dataclass(eq=False)
class UniformBox(SymmetricLaw):
    """Uniform law on [-w, w]; its cf sinc(2wt) changes sign."""

    w: float = 0.5
    family = "UniformBox"
    has_density = True
    has_sampler = True
    cf_positive = False
    cf_integrable = False

    def __post_init__(self):
        if self.w <= 0:
            raise ConfigError("UniformBox half-width must be positive")

    def cf(self, t):
        return np.sinc(2 * self.w * np.asarray(t, dtype=float))

    def cf_envelope(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, 1.0 / (TWO_PI * self.w * r))

    def _density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.w, 1 / (2 * self.w), 0.0)

    def _draw(self, rng, size):
        return rng.uniform(-self.w, self.w, size=(size, 1))

    def abs_moment(self, p):
        if p <= -1:
            raise DivergentMoment("UniformBox: E|X|^p diverges for p <= -1")
        return float(self.w ** p / (p + 1))

    def to_dict(self):
        return {"family": self.family, "dim": 1, "w": self.w}


@dataclass(eq=False)
class GaussianMixtureDiscrete(SymmetricLaw):
    """Finite mixture sum_j w_j N(0, Σ_j); ``scales`` are σ_j (Σ_j = σ_j² I) or matrices."""

    weights: np.ndarray = None
    scales: np.ndarray = None
    dim: int = 1
    family = "GaussianMixtureDiscrete"
    has_density = True
    has_sampler = True

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        s = np.asarray(self.scales, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise ConfigError("mixture weights must be nonnegative with positive total")
        self.weights = w / w.sum()
        if s.ndim == 1:
            if np.any(s <= 0) or s.size != w.size:
                raise ConfigError("need one positive scale per weight")
            self._isotropic = True
            self.scales = s
            self._cov = s[:, None, None] ** 2 * np.eye(self.dim)
        else:
            if s.shape != (w.size, s.shape[1], s.shape[1]):
                raise ConfigError("covariances must have shape (m, d, d)")
            self.dim = s.shape[1]
            self._isotropic = False
            self.scales = s
            self._cov = s
        evals = np.linalg.eigvalsh(self._cov)
        if evals.min() <= 0:
            raise ConfigError("covariances must be positive definite")
        self._lmin = evals.min(axis=1)
        self._chol = np.linalg.cholesky(self._cov)

    def log_cf(self, t):
        t = np.asarray(t, dtype=float)
        if self.dim == 1:
            q = np.multiply.outer(t * t, self._cov[:, 0, 0])
        else:
            q = np.einsum("...i,jik,...k->...j", t, self._cov, t)
        return special.logsumexp(-2 * np.pi ** 2 * q, b=self.weights, axis=-1)

    def cf(self, t):
        return np.exp(self.log_cf(t))

    def cf_envelope(self, r):
        r = np.asarray(r, dtype=float)
        return np.sum(self.weights * np.exp(-2 * np.pi ** 2 * np.multiply.outer(r * r, self._lmin)),
                      axis=-1)

    def _density(self, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            x = x[..., None]
        out = 0.0
        for wj, cov in zip(self.weights, self._cov):
            out = out + wj * stats.multivariate_normal(np.zeros(self.dim), cov).pdf(x)
        return out

    def _draw(self, rng, size):
        comp = rng.choice(self.weights.size, size=size, p=self.weights)
        z = rng.standard_normal((size, self.dim))
        return np.einsum("nij,nj->ni", self._chol[comp], z)

    def abs_moment(self, p):
        if not self._isotropic and self.dim > 1:
            raise UnsupportedEvaluation("moments of anisotropic mixtures need Monte Carlo")
        sig = np.sqrt(self._cov[:, 0, 0])
        return float(np.sum(self.weights * sig ** p) * gaussian_abs_moment(p, self.dim))

    def second_moment(self):
        return float(np.sum(self.weights * np.trace(self._cov, axis1=1, axis2=2)))

    def to_dict(self):
        return {"family": self.family, "dim": self.dim, "weights": self.weights.tolist(),
                "scales": np.asarray(self.scales).tolist()}


@functools.lru_cache(maxsize=65536)
def _exp_power_profile_quad(p: float, omega: float) -> float:
    if omega == 0:
        return 1.0
    if omega < 1.0:
        # QAWF loses accuracy for slow oscillation; integrate to where e^{-u^p} underflows
        top = 745.0 ** (1 / p)
        edges = np.concatenate(([0.0], np.geomspace(1e-3, top, 60)))
        val = sum(integrate.quad(lambda u: np.exp(-u ** p) * np.cos(omega * u), a, b,
                                 limit=200, epsabs=1e-15)[0] for a, b in zip(edges[:-1], edges[1:]))
    else:
        val, _ = integrate.quad(lambda u: np.exp(-u ** p), 0, np.inf, weight="cos",
                                wvar=omega, limlst=200)
    if not np.isfinite(val):
        raise NonFinite(f"exp-power cf quadrature failed at omega={omega}")
    return val / math.gamma(1 + 1 / p)


def _exp_power_profile(p: float, omega) -> np.ndarray:
    """(1/Γ(1+1/p)) ∫_0^∞ exp(-u^p) cos(ωu) du, the cf of exp(-|x|^p) at ω = 2πt."""
    w = np.abs(np.asarray(omega, dtype=float))
    if p == 2:
        return np.exp(-w * w / 4)
    if p == 1:
        return 1 / (1 + w * w)
    if p == 0.5:
        return _exp_half_profile(w)
    return np.vectorize(lambda x: _exp_power_profile_quad(p, float(x)), otypes=[float])(w)


def _exp_half_profile(w):
    # ∫_0^∞ e^{-√u} cos(ωu) du / 2 = Re[(1 - J)/(2β)], β = -iω,
    # J = (√π / 2√β) erfcx(1 / 2√β); small ω uses the moment series.
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = w < 1e-4
    ws = w[small] ** 2
    out[small] = 1 - 60 * ws + 15120 * ws * ws
    wl = w[~small]
    beta = -1j * wl
    sb = np.sqrt(beta)
    j = 0.5 * np.sqrt(np.pi) / sb * special.erfcx(1 / (2 * sb))
    out[~small] = ((1 - j) / (2 * beta)).real
    return out


@dataclass(eq=False)
class ExpPower(SymmetricLaw):
    """Density exp(-||x||_K^p) / (|K| Γ(1 + d/p))."""

    p: float = 2.0
    body: StarBody = field(default_factory=Euclidean)
    family = "ExpPower"
    has_density = True

    def __post_init__(self):
        if self.p <= 0:
            raise ConfigError("ExpPower needs p > 0")
        self.dim = self.body.dim
        self.has_sampler = isinstance(self.body, (Euclidean, Ellipsoid, WeightedLq))
        self.cf_positive = self.p <= 2
        self._norm_const = None

    def _normaliser(self):
        if self._norm_const is None:
            self._norm_const = self.body.volume() * math.gamma(1 + self.dim / self.p)
        return self._norm_const

    def _scale_1d(self):
        return 1.0 / float(self.body.norm(np.array([1.0])))

    def cf(self, t):
        t = np.asarray(t, dtype=float)
        body, p = self.body, self.p
        if self.dim == 1:
            return _exp_power_profile(p, TWO_PI * self._scale_1d() * t)
        if isinstance(body, WeightedLq) and body.q == p:
            return np.prod(_exp_power_profile(p, TWO_PI * body.weights * t), axis=-1)
        if isinstance(body, Euclidean):
            return _radial_exp_power_cf(p, self.dim, np.linalg.norm(t, axis=-1))
        if isinstance(body, Ellipsoid):
            return _radial_exp_power_cf(p, self.dim, np.linalg.norm(t @ body._inv_sqrt, axis=-1))
        raise UnsupportedEvaluation(
            f"cf of exp(-||x||^{p}) for a {body.family} body in R^{self.dim} is not radial; "
            "use fourier.cf_exp_power_discrete for DiscreteLp bodies")

    def log_cf(self, t):
        if self.p == 2 and self.dim == 1:
            w = TWO_PI * self._scale_1d() * np.asarray(t, dtype=float)
            return -w * w / 4
        return super().log_cf(t)

    def cf_envelope(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.dim == 1:
            return np.abs(self.cf(r))
        body = self.body
        if isinstance(body, Ellipsoid):
            lam_max = np.linalg.eigvalsh(body.matrix).max()
            return np.abs(_radial_exp_power_cf(self.p, self.dim, r / np.sqrt(lam_max)))
        if isinstance(body, WeightedLq) and body.q == self.p:
            return np.abs(_exp_power_profile(self.p, TWO_PI * body.weights.min() * r))
        return super().cf_envelope(r)

    def _density(self, x):
        return np.exp(-self.body.norm(x) ** self.p) / self._normaliser()

    def _draw(self, rng, size):
        if not self.has_sampler:
            raise NoSampler(f"exp-power sampling is not provided for {self.body.family} bodies")
        return _exp_power_chunk(self.body, self.p)(rng, size)

    def abs_moment(self, r):
        p = self.p
        if r <= -self.dim:
            raise DivergentMoment(f"E|X|^{r} diverges in dimension {self.dim}")
        if self.dim == 1:
            w = self._scale_1d()
            return float(w ** r * np.exp(special.gammaln((r + 1) / p) - special.gammaln(1 / p)))
        if isinstance(self.body, Euclidean):
            d = self.dim
            return float(np.exp(special.gammaln((d + r) / p) - special.gammaln(d / p)))
        raise UnsupportedEvaluation("Euclidean moments of non-radial exp-power laws need Monte Carlo")

    def to_dict(self):
        return {"family": self.family, "dim": self.dim, "p": self.p, "body": self.body.to_dict()}


@functools.lru_cache(maxsize=65536)
def _radial_exp_power_cf_one(p: float, d: int, rho: float) -> float:
    if rho == 0:
        return 1.0
    # Hankel transform of exp(-r^p), normalised by its value at 0
    nu = d / 2 - 1
    rmax = (745.0) ** (1 / p)
    f = lambda r: np.exp(-r ** p) * special.jv(nu, TWO_PI * rho * r) * r ** (d / 2)
    n_osc = max(1, int(2 * rho * rmax) + 1)
    edges = np.linspace(0, rmax, min(n_osc, 4000) + 1)
    val = sum(integrate.quad(f, a, b, limit=200, epsabs=1e-15)[0] for a, b in zip(edges[:-1], edges[1:]))
    mass = math.gamma(d / p) / p  # ∫_0^∞ e^{-r^p} r^{d-1} dr
    # f̂(ρ) = 2π ρ^{1-d/2} ∫ g(r) J_{d/2-1}(2πρr) r^{d/2} dr and f̂(0) = |S^{d-1}| ∫ g r^{d-1} dr
    sphere = 2 * np.pi ** (d / 2) / math.gamma(d / 2)
    return float(TWO_PI * rho ** (1 - d / 2) * val / (sphere * mass))


def _radial_exp_power_cf(p, d, rho):
    if p == 2:
        return np.exp(-np.pi ** 2 * np.asarray(rho, dtype=float) ** 2)
    return np.vectorize(lambda x: _radial_exp_power_cf_one(p, d, float(x)), otypes=[float])(rho)


@dataclass(eq=False)
class CfOnly(SymmetricLaw):
    """A law known only through its cf: a callable, a tabulated grid, or the
    (p, r)-pseudo-stable form exp(-c1|t|^p - c2|t|^r)."""

    func: Callable | None = None
    grid_t: np.ndarray | None = None
    grid_cf: np.ndarray | None = None
    positive: bool = True
    integrable: bool = True
    form: dict | None = None
    family = "CfOnly"

    def __post_init__(self):
        self.cf_positive = bool(self.positive)
        self.cf_integrable = bool(self.integrable)
        if self.form is not None:
            c1, p = float(self.form["c1"]), float(self.form["p"])
            c2, r = float(self.form.get("c2", 0.0)), float(self.form.get("r", 2.0))
            self.func = lambda t: np.exp(-c1 * np.abs(t) ** p - c2 * np.abs(t) ** r)
        elif self.grid_t is not None:
            gt = np.asarray(self.grid_t, dtype=float)
            gc = np.asarray(self.grid_cf, dtype=float)
            order = np.argsort(gt)
            self.grid_t, self.grid_cf = gt[order], gc[order]
            if self.grid_t[0] < 0:
                raise ConfigError("tabulated cf grid must use t >= 0 (the cf is even)")
        elif self.func is None:
            raise ConfigError("CfOnly needs func, grid or form")

    def cf(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.func is not None:
            return np.asarray(self.func(t), dtype=float)
        if np.any(t > self.grid_t[-1]):
            raise UnsupportedEvaluation("frequency outside the tabulated cf grid")
        return np.interp(t, self.grid_t, self.grid_cf)

    def cf_envelope(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.func is None:
            # running maximum from the right keeps the majorant nonincreasing
            tail = np.maximum.accumulate(np.abs(self.grid_cf)[::-1])[::-1]
            return np.interp(r, self.grid_t, tail, right=0.0)
        return np.abs(self.cf(r))

    def abs_moment(self, p):
        return _abs_moment_from_cf(lambda u: float(self.cf(u)), p)

    def to_dict(self):
        if self.form is not None:
            return {"family": self.family, "dim": 1, "form": self.form}
        if self.grid_t is not None:
            return {"family": self.family, "dim": 1, "grid_t": self.grid_t.tolist(),
                    "grid_cf": self.grid_cf.tolist(), "positive": self.positive}
        return {"family": self.family, "dim": 1, "func": repr(self.func)}


# --- public operations ----------------------------------------------------------

def cf_eval(law: SymmetricLaw, t) -> np.ndarray | float:
    """φ̂(t) under the exp(-2πi<t,x>) convention."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("frequencies must be finite")
    out = law.cf(t)
    return float(out) if np.ndim(out) == 0 else out


def sample(law: SymmetricLaw, seed: int, count: int) -> np.ndarray:
    return law.sample(seed, count)


def abs_moment(law: SymmetricLaw, p: float) -> float:
    """E|X|^p; raises DivergentMoment outside the law's finite range."""
    if p <= -1 and law.dim == 1:
        raise DivergentMoment("E|X|^p diverges for p <= -1 for densities bounded near 0")
    return law.abs_moment(p)


def law_from_dict(spec: dict) -> SymmetricLaw:
    """Build a law from its JSON form ``{"family": ..., "dim": d, ...}``."""
    spec = dict(spec)
    family = spec.get("family")
    try:
        if family == "Gaussian":
            return Gaussian(float(spec.get("sigma", 1.0)), int(spec.get("dim", 1)))
        if family == "Laplace":
            return Laplace(float(spec.get("b", 1.0)))
        if family == "Stable":
            return Stable(float(spec["alpha"]), float(spec.get("c", 1.0)))
        if family == "PseudoStable":
            return PseudoStable(float(spec["p"]), float(spec.get("c1", 1.0)), float(spec.get("c2", 1.0)))
        if family == "QStableMixture":
            mix = dict(spec.get("mixing", {"kind": "constant", "value": 1.0}))
            kind = mix.pop("kind", "constant")
            return QStableMixture(float(spec["alpha"]), MixingLaw(kind, mix), float(spec.get("c", 1.0)))
        if family == "TriCube":
            return TriCube()
        if family == "UniformBox":
            return UniformBox(float(spec.get("w", 0.5)))
        if family == "GaussianMixtureDiscrete":
            return GaussianMixtureDiscrete(np.asarray(spec["weights"], dtype=float),
                                           np.asarray(spec["scales"], dtype=float),
                                           int(spec.get("dim", 1)))
        if family == "ExpPower":
            body = body_from_dict(spec.get("body", {"family": "Euclidean", "dim": spec.get("dim", 1)}))
            return ExpPower(float(spec["p"]), body)
        if family == "CfOnly":
            if "form" in spec:
                return CfOnly(form=dict(spec["form"]))
            return CfOnly(grid_t=spec["grid_t"], grid_cf=spec["grid_cf"],
                          positive=bool(spec.get("positive", True)))
    except KeyError as exc:
        raise ConfigError(f"law spec for {family} is missing field {exc}") from None
    raise ConfigError(f"unknown law family {family!r}")
