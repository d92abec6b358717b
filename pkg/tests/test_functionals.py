import math
import warnings

import numpy as np
import pytest

from schur_fourier import functionals as fn
from schur_fourier import laws
from schur_fourier.errors import ConfigError, UnsupportedBody
from schur_fourier.geometry import DiscreteLp, Euclidean, WeightedLq

LAP = laws.Laplace(1.0)


def test_weight_vector():
    w = fn.WeightVector.on_simplex([1.0, 3.0])
    assert np.allclose(w.a, [0.25, 0.75]) and w.simplex
    assert np.allclose(w.coefficients(2.0), [0.5, math.sqrt(0.75)])
    with pytest.raises(ConfigError):
        fn.WeightVector([-1.0, 2.0])
    with pytest.raises(ConfigError):
        fn.WeightVector([0.5, 0.6], simplex=True)


def test_bochner_trivial_and_gaussian():
    delta0 = fn.SpectralMeasure([1.0], [0.0])
    assert fn.h_functional_bochner(LAP, delta0, [0.3, 0.7], 2.0) == pytest.approx(1.0)
    nu = fn.SpectralMeasure([0.5, 0.5], [0.4, -0.9])
    g = laws.Gaussian(1.0)
    vals = [fn.h_functional_bochner(g, nu, a, 2.0) for a in ([1, 0, 0], [0.2, 0.3, 0.5], [1 / 3] * 3)]
    assert np.ptp(vals) < 1e-15


def test_bochner_laplace_closed_form():
    nu = fn.SpectralMeasure([1.0, 1.0], [1.0, -1.0])
    H = lambda a: 2 * np.prod(1 / (1 + 4 * math.pi ** 2 * np.asarray(a)))
    for a in ([0.5, 0.5], [1.0, 0.0], [0.2, 0.8]):
        assert fn.h_functional_bochner(LAP, nu, a, 2.0) == pytest.approx(H(a), rel=1e-13)
    assert fn.h_functional_bochner(LAP, nu, [0.5, 0.5], 2.0) <= fn.h_functional_bochner(LAP, nu, [1.0, 0.0], 2.0)


def test_h_mc_constant_and_against_bochner():
    one = fn.h_functional_mc(LAP, lambda x: np.ones(np.shape(x)[0]), [0.5, 0.5], 2.0, 1, 1000)
    assert one.estimate == 1.0 and one.stderr == 0.0
    nu = fn.SpectralMeasure([1.0], [0.3])
    a = [0.4, 0.6]
    est = fn.h_functional_mc(LAP, nu.h, a, 2.0, 3, 200_000)
    assert abs(est.estimate - fn.h_functional_bochner(LAP, nu, a, 2.0)) < 4 * est.stderr


def test_moment_mc():
    est = fn.moment_mc(LAP, [1.0, 0.0], 2.0, 1.0, seed=2, N=200_000)
    assert abs(est.estimate - 1.0) < 4 * est.stderr
    g3 = laws.Gaussian(1.0, dim=3)
    est = fn.moment_mc(g3, [1.0, 0.0], 2.0, -1.0, Euclidean(3), seed=4, N=200_000)
    assert abs(est.estimate - math.sqrt(2 / math.pi)) < 4 * est.stderr
    vals = [fn.moment_mc(g3, a, 2.0, 0.7, Euclidean(3), seed=5, N=100_000) for a in ([1, 0], [0.5, 0.5])]
    assert abs(vals[0].estimate - vals[1].estimate) < 4 * math.hypot(vals[0].stderr, vals[1].stderr)


def test_moment_mc_unstable_flag():
    g = laws.Gaussian(1.0)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        est = fn.moment_mc(g, [1.0], 2.0, -0.9, seed=1, N=20_000)
    assert est.n_blocks == fn.MOM_BLOCKS


def test_laplace_mc():
    small = fn.laplace_mc(LAP, [0.5, 0.5], 2.0, 1.0, 1e-12, seed=1, N=10_000)
    assert small.estimate == pytest.approx(1.0, abs=1e-10)
    # Gaussian, p = 2: E exp(-lam X^2) = (1 + 2 lam)^{-1/2}
    est = fn.laplace_mc(laws.Gaussian(1.0), [0.3, 0.7], 2.0, 2.0, 0.8, seed=3, N=200_000)
    assert abs(est.estimate - 2.6 ** -0.5) < 4 * est.stderr


def test_probe_gaussian_and_mixture():
    pairs = [(np.array([0.7, 0.2, 0.1]), np.array([0.1, 0.3, 0.6])),
             (np.array([1.0, 0.0, 0.0]), np.array([0.2, 0.4, 0.4]))]
    g3 = laws.Gaussian(1.0, dim=3)
    rep = fn.neg_moment_logconvexity_probe(g3, Euclidean(3), 1.0, pairs, seed=1, N=200_000)
    for r in rep.records:
        assert abs(r.log_gap) < 4 * r.stderr + 1e-12
    gm = laws.GaussianMixtureDiscrete(np.array([0.5, 0.5]), np.array([1.0, 3.0]), dim=3)
    rep = fn.neg_moment_logconvexity_probe(gm, Euclidean(3), 1.0, pairs, seed=1, N=200_000)
    assert rep.violations == 0


def test_probe_preconditions():
    g3 = laws.Gaussian(1.0, dim=3)
    with pytest.raises(ConfigError):
        fn.neg_moment_logconvexity_probe(g3, Euclidean(3), 3.0, [([1, 0], [0, 1])], seed=1, N=100)
    with pytest.raises(UnsupportedBody):
        body = WeightedLq(3.0, np.ones(3))
        fn.neg_moment_logconvexity_probe(g3, body, 1.0, [([1, 0], [0, 1])], seed=1, N=100)


def test_khinchin_constants():
    c = fn.khinchin_constants(LAP, 1.0)
    assert c.c_gauss == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)
    assert c.c_self == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    g = fn.khinchin_constants(laws.Gaussian(2.0), 0.5)
    assert g.c_gauss == pytest.approx(g.c_self, rel=1e-10)
    two = fn.khinchin_constants(LAP, 2.0)
    assert two.c_gauss == pytest.approx(1.0) and two.c_self == pytest.approx(1.0)


def test_khinchin_saturation_and_gaussian():
    rep = fn.khinchin_verify(LAP, 1.0, 4, seed=3, N=200_000, thetas=np.eye(4)[:1])
    t = rep.trials[0]
    assert abs(t.norm_p - t.lower) < 4 * t.stderr
    rep = fn.khinchin_verify(laws.Gaussian(1.0), 1.0, 5, trials=5, seed=3, N=100_000)
    assert rep.violations == 0
    for t in rep.trials:
        assert abs(t.norm_p - t.upper) < 4 * t.stderr


def test_khinchin_rejects_cf_sign_change():
    from schur_fourier.errors import NonPositiveCf
    with pytest.raises(NonPositiveCf):
        fn.khinchin_verify(laws.UniformBox(0.5), 1.0, 3, trials=2, seed=1, N=1000)


def test_discrete_body_is_not_an_embedded_family():
    ang = np.deg2rad([0.0, 60.0, 120.0])
    u = np.column_stack([np.cos(ang), np.sin(ang)])
    body = DiscreteLp(1.0, np.full(3, 2 / 3), u)
    g2 = laws.Gaussian(1.0, dim=2)
    with pytest.raises(UnsupportedBody):
        fn.neg_moment_logconvexity_probe(g2, body, 0.5, [([0.8, 0.2], [0.3, 0.7])], seed=2, N=1000)
