import math

import numpy as np
import pytest
from scipy import stats

from schur_fourier import geometry as g
from schur_fourier.errors import ConfigError, IsotropyViolated, UnsupportedBody


def test_norms():
    assert float(g.Euclidean(2).norm([3.0, 4.0])) == pytest.approx(5.0)
    assert float(g.WeightedLq(1.0, np.ones(2)).norm([1.0, -2.0])) == pytest.approx(3.0)
    body = g.DiscreteLp(2.0, np.ones(2), np.eye(2))
    x = np.array([[0.3, -1.2], [2.0, 0.5]])
    assert np.allclose(body.norm(x), np.linalg.norm(x, axis=1), rtol=1e-14)


def test_ellipsoid_norm_and_volume():
    m = np.diag([1 / 4, 1 / 9])  # {x : x^T M x <= 1}, semi-axes 2 and 3
    e = g.Ellipsoid(m)
    assert float(e.norm([2.0, 0.0])) == pytest.approx(1.0)
    assert float(e.norm([0.0, 3.0])) == pytest.approx(1.0)
    assert e.volume() == pytest.approx(6 * math.pi)


def test_isotropy():
    ok = g.isotropy_check([1.0, 1.0], np.eye(2))
    assert ok.ok and ok.deviation == 0.0
    bad = g.isotropy_check([2.0], [[1.0, 0.0]])
    assert not bad.ok and bad.deviation == pytest.approx(1.0)
    ang = np.deg2rad([0.0, 60.0, 120.0])
    u = np.column_stack([np.cos(ang), np.sin(ang)])
    tri = g.isotropy_check(np.full(3, 2 / 3), u)
    assert tri.ok and tri.deviation <= 1e-12
    with pytest.raises(IsotropyViolated):
        g.DiscreteLp(1.0, [2.0], [[1.0, 0.0]])


def test_bpn_volume():
    assert g.bpn_volume(2, 1, 2, 2.0) == pytest.approx(math.pi, rel=1e-14)
    assert g.bpn_volume(1, 3, 1.7, 5.5) == pytest.approx(5.5, rel=1e-14)
    assert g.bpn_volume(3, 1, 1, 2.0) == pytest.approx(4 / 3, rel=1e-14)
    # unit ball of R^4 as B_2^2 of discs
    assert g.bpn_volume(2, 2, 2, math.pi) == pytest.approx(math.pi ** 2 / 2, rel=1e-14)
    with pytest.raises(ValueError):
        g.bpn_volume(0, 1, 1, 1.0)


def test_exp_power_sampler_moments():
    x = g.sample_exp_power(g.Euclidean(1), 2.0, 9, 100_000)
    assert x.var() == pytest.approx(0.5, abs=4 * math.sqrt(2 * 0.25 / x.size))
    for body, p in [(g.Euclidean(3), 1.0), (g.WeightedLq(0.7, np.array([1.0, 2.0])), 1.5),
                    (g.Ellipsoid(np.diag([1.0, 0.25])), 0.5)]:
        r = body.norm(g.sample_exp_power(body, p, 3, 100_000)) ** p
        assert r.mean() == pytest.approx(body.dim / p, abs=4 * r.std() / math.sqrt(r.size))


def test_exp_power_sampler_rotation_invariant():
    x = g.sample_exp_power(g.Euclidean(2), 2.0, 4, 100_000)
    cov = np.cov(x.T)
    se = math.sqrt(2 * 0.25 / x.shape[0])
    assert abs(cov[0, 0] - cov[1, 1]) < 4 * math.sqrt(2) * se
    assert abs(cov[0, 1]) < 4 * math.sqrt(0.25 / x.shape[0])


def test_discrete_body_cannot_be_sampled():
    with pytest.raises(UnsupportedBody):
        g.sample_exp_power(g.DiscreteLp(1.0, np.ones(2), np.eye(2)), 1.0, 1, 10)


def test_cone_sampler():
    body = g.Euclidean(1)
    s = g.sample_cone_bpnk(body, 1.0, 4, 2, 100_000)
    r = s.radius_p
    assert r.mean() == pytest.approx(4.0, abs=4 * r.std() / math.sqrt(r.size))
    assert np.allclose(g.bpn_norm_p(s.directions, body, 1.0), 1.0, atol=1e-12)
    assert abs(np.corrcoef(r, s.directions[:, 0, 0])[0, 1]) < 4 / math.sqrt(r.size)


def test_cone_on_circle_is_uniform():
    s = g.sample_cone_bpnk(g.Euclidean(2), 2.0, 1, 8, 20_000)
    ang = np.arctan2(s.directions[:, 0, 1], s.directions[:, 0, 0])
    assert stats.kstest(ang, stats.uniform(-math.pi, 2 * math.pi).cdf).pvalue > 1e-3


def test_uniform_sampler():
    s = g.sample_uniform_bpnk(g.Euclidean(1), 1.0, 4, 3, 100_000)
    v = s.norm_p
    assert v.mean() == pytest.approx(0.8, abs=4 * v.std() / math.sqrt(v.size))
    assert np.all(s.norm() <= 1)


def test_uniform_on_disc_annuli():
    s = g.sample_uniform_bpnk(g.Euclidean(2), 2.0, 1, 5, 40_000)
    r = np.linalg.norm(s.points[:, 0, :], axis=1)
    counts = np.histogram(r, bins=np.sqrt(np.linspace(0, 1, 6)))[0]
    assert stats.chisquare(counts).pvalue > 1e-3


def test_block_section_cross_polytope():
    # B_1^2 has area 2; block_section_volume just divides by Gamma(1 + (nd-d)/p)
    assert g.block_section_volume(4.0, 3, 1, 1.0) == pytest.approx(2.0)


def test_batch_io(tmp_path):
    pts = np.arange(12, dtype=float).reshape(4, 3) / 7
    g.write_batch_binary(pts, tmp_path / "b.bin")
    assert np.array_equal(g.read_batch_binary(tmp_path / "b.bin", 3), pts)
    g.write_batch_csv(pts, tmp_path / "b.csv")
    assert np.array_equal(np.loadtxt(tmp_path / "b.csv", delimiter=","), pts)


def test_body_round_trip_and_errors():
    bodies = [g.Euclidean(3), g.Ellipsoid(np.diag([1.0, 2.0])), g.WeightedLq(1.5, np.array([1.0, 3.0])),
              g.DiscreteLp(1.0, np.ones(2), np.eye(2))]
    x = np.array([0.3, -0.8, 0.1])
    for b in bodies:
        again = g.body_from_dict(b.to_dict())
        assert float(again.norm(x[:b.dim])) == pytest.approx(float(b.norm(x[:b.dim])))
    with pytest.raises(ConfigError):
        g.body_from_dict({"family": "Cube"})
    with pytest.raises(ConfigError):
        g.WeightedLq(1.0, np.array([0.0, 1.0]))
