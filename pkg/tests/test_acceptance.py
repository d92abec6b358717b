"""Acceptance suite: nine end-to-end criteria, each reported on one line.

Run ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py`` for the plain report.
"""
import math
import time

import numpy as np
import pytest

from schur_fourier import fourier, functionals, geometry, laws, schur

RESULTS: list[str] = []
SQ2 = math.sqrt(2)


def report(num: int, title: str, ok: bool, detail: str, elapsed: float, limit: float | None = None):
    ok = ok and (limit is None or elapsed < limit)
    budget = f" (limit {limit:g}s)" if limit else ""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} | {detail} | {elapsed:.2f}s{budget}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def unit_sphere(n, count, seed):
    g = np.random.default_rng(seed).standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def block_section(p, n, d=1):
    body = geometry.Euclidean(d)
    law = laws.ExpPower(p, body)
    Z = body.volume() * math.gamma(1 + d / p)

    def f(a):
        s = fourier.section_zero(law, np.sqrt(np.asarray(a, dtype=float)))
        return geometry.block_section_volume(Z ** n * s, n, d, p)

    return f


def test_1_cube_sections():
    t0 = time.perf_counter()
    box = laws.UniformBox(0.5)
    v1 = fourier.section_zero(box, [1.0, 0.0])
    v2 = fourier.section_zero(box, [1 / SQ2, 1 / SQ2])
    vals = np.array([fourier.section_zero(box, y) for y in unit_sphere(3, 100, 1)])
    ok = abs(v1 - 1) < 1e-6 and abs(v2 - SQ2) < 1e-6 and vals.min() >= 1 - 1e-6 and vals.max() <= SQ2 + 1e-6
    report(1, "cube sections", ok,
           f"S(1,0)-1={v1 - 1:.1e}, S(diag)-sqrt2={v2 - SQ2:.1e}, n=3 range [{vals.min():.6f}, {vals.max():.6f}]",
           time.perf_counter() - t0, 5)


def test_2_condition_truth_table():
    t0 = time.perf_counter()
    grid = (0.5, 1.0, 1.5, 2.0)
    wrong = []
    for alpha in grid:
        for q in grid:
            want = "LogConvex" if alpha < q else "LogConcave" if alpha > q else "Affine"
            got = fourier.condition_check(laws.Stable(alpha, 1.0), q, tol=1e-9).verdict
            if got != want:
                wrong.append((alpha, q, got))
    ps = fourier.condition_check(laws.PseudoStable(5.0, 1.0, 1.0), 2.0, tol=1e-9).verdict
    ga = fourier.condition_check(laws.Gaussian(1.0), 2.0, tol=1e-9).verdict
    ok = not wrong and ps == "LogConcave" and ga == "Affine"
    report(2, "condition truth table", ok, f"16 stable cells, mismatches={wrong}, pseudo={ps}, gauss={ga}",
           time.perf_counter() - t0, 1)


NU_FIXTURES = [
    functionals.SpectralMeasure([1.0, 1.0], [1.0, -1.0]),
    functionals.SpectralMeasure([0.2, 0.5, 0.3], [0.1, 0.6, 1.7]),
    functionals.SpectralMeasure([1.0, 2.0, 1.0, 0.5], [0.05, 0.3, 0.9, 2.5]),
]


def test_3_bochner_forward_directions():
    t0 = time.perf_counter()
    n = 4
    lap, pseudo = laws.Laplace(1.0), laws.PseudoStable(5.0, 1.0, 1.0)
    pairs = schur.random_simplex_pairs(n, 50, seed=3)
    cmp_pairs = schur.random_comparable_pairs(n, 200, seed=3)
    mid_ok, schur_ok, worst = True, True, -np.inf
    for nu in NU_FIXTURES:
        rep = schur.test_log_convex_midpoint(lambda a: functionals.h_functional_bochner(lap, nu, a, 2.0),
                                             pairs, tol=1e-9)
        mid_ok &= rep.passed
        worst = max(worst, rep.max_log_gap)
        srep = schur.test_schur(lambda a: functionals.h_functional_bochner(pseudo, nu, a, 2.0), n,
                                tol=1e-9, mode="concave", pairs=cmp_pairs)
        schur_ok &= srep.passed
    report(3, "Bochner forward directions", mid_ok and schur_ok,
           f"Laplace midpoint ok={mid_ok} (max log gap {worst:.2e}), pseudo-stable Schur-concave ok={schur_ok}",
           time.perf_counter() - t0, 10)


def test_4_cauchy_section_schur_convex():
    t0 = time.perf_counter()
    law = laws.Stable(1.0, 1.0)
    f = lambda a: fourier.section_zero(law, np.sqrt(np.asarray(a, dtype=float)))
    rep = schur.test_schur(f, 3, trials=100, tol=1e-8, seed=4, mode="convex")
    ext = rep.extremal_values
    ok = rep.passed and ext["vertex"] >= ext["max_tested"] - 1e-8 and ext["barycenter"] <= ext["min_tested"] + 1e-8
    report(4, "Cauchy section Schur convex", ok,
           f"violations={rep.violations}, barycenter={ext['barycenter']:.8f}, vertex={ext['vertex']:.8f}, "
           f"tested range [{ext['min_tested']:.8f}, {ext['max_tested']:.8f}]",
           time.perf_counter() - t0)


def test_5_block_sections():
    t0 = time.perf_counter()
    pairs = schur.random_simplex_pairs(3, 50, seed=5)
    parts, ok = [], True
    for p in (0.5, 1.0, 2.0):
        rep = schur.test_log_convex_midpoint(block_section(p, 3), pairs, tol=1e-8)
        ok &= rep.passed
        parts.append(f"p={p:g}: {rep.violations} viol")
    f2 = block_section(2.0, 3)
    vals = [f2(a) for pr in pairs for a in pr]
    spread = max(vals) - min(vals)
    ok &= spread <= 1e-9 and abs(vals[0] - math.pi) < 1e-9
    report(5, "block sections log-convex", ok, ", ".join(parts) + f", p=2 spread={spread:.1e}",
           time.perf_counter() - t0)


def test_6_samplers():
    t0 = time.perf_counter()
    N = 100_000
    body = geometry.Euclidean(1)
    cone = geometry.sample_cone_bpnk(body, 1.0, 4, 6, N)
    r = cone.radius_p
    se_mean = r.std(ddof=1) / math.sqrt(N)
    se_var = math.sqrt(np.var((r - r.mean()) ** 2, ddof=1) / N)
    corr = np.corrcoef(r, cone.directions[:, 0, 0])[0, 1]
    uni = geometry.sample_uniform_bpnk(body, 1.0, 4, 6, N).norm_p
    se_u = uni.std(ddof=1) / math.sqrt(N)
    ok = (abs(r.mean() - 4) < 4 * se_mean and abs(r.var(ddof=1) - 4) < 4 * se_var
          and abs(corr) < 4 / math.sqrt(N) and abs(uni.mean() - 0.8) < 4 * se_u)
    report(6, "samplers", ok,
           f"mean={r.mean():.4f}, var={r.var(ddof=1):.4f}, corr={corr:.1e}, E||Y||^p={uni.mean():.5f}",
           time.perf_counter() - t0, 10)


@pytest.mark.slow
def test_7_khinchin():
    t0 = time.perf_counter()
    lap = laws.Laplace(1.0)
    viol, parts = 0, []
    for n in (2, 8, 64):
        rep = functionals.khinchin_verify(lap, 1.0, n, trials=100, seed=7 + n, N=1_000_000)
        viol += rep.violations
        parts.append(f"n={n}: {rep.violations} viol")
    flat = np.full((1, 64), 1 / 8.0)
    rep = functionals.khinchin_verify(lap, 1.0, 64, seed=99, N=1_000_000, thetas=flat)
    t = rep.trials[0]
    clt = abs(t.norm_p - t.upper) < 4 * t.stderr
    report(7, "Khinchin sandwich", viol == 0 and clt,
           ", ".join(parts) + f", flat theta n=64: {t.norm_p:.5f} vs gaussian {t.upper:.5f} (se {t.stderr:.1e})",
           time.perf_counter() - t0, 300)


@pytest.mark.slow
def test_8_negative_moment_probe():
    t0 = time.perf_counter()
    pairs = schur.random_simplex_pairs(3, 30, seed=8)
    body = geometry.Euclidean(3)
    gm = laws.GaussianMixtureDiscrete(np.array([0.5, 0.5]), np.array([1.0, 3.0]), dim=3)
    rep = functionals.neg_moment_logconvexity_probe(gm, body, 1.0, pairs, seed=8, N=1_000_000)
    ctrl = functionals.neg_moment_logconvexity_probe(laws.Gaussian(1.0, dim=3), body, 1.0, pairs,
                                                     seed=8, N=1_000_000)
    ctrl_ok = all(abs(r.log_gap) < 4 * r.stderr + 1e-12 for r in ctrl.records)
    report(8, "negative moment probe", rep.violations == 0 and ctrl_ok,
           f"mixture violations={rep.violations}, max gap/se={rep.max_normalised_gap:.2f}, gaussian control ok={ctrl_ok}",
           time.perf_counter() - t0, 300)


def test_9_degenerate_identities():
    t0 = time.perf_counter()
    g = laws.Gaussian(1.0)
    pts = [np.array([1.0, 0, 0]), np.full(3, 1 / 3), np.array([0.6, 0.3, 0.1])]
    sec = [fourier.section_zero(g, np.sqrt(a)) for a in pts]
    nu = NU_FIXTURES[1]
    hs = [functionals.h_functional_bochner(g, nu, a, 2.0) for a in pts]
    mom = [functionals.moment_mc(g, a, 2.0, 1.0, seed=9, N=200_000) for a in pts]
    lapl = [functionals.laplace_mc(g, a, 2.0, 1.0, 0.7, seed=9, N=200_000) for a in pts]

    def within_ci(ests):
        return all(abs(e.estimate - ests[0].estimate) < 4 * math.hypot(e.stderr, ests[0].stderr) for e in ests)

    gauss_ok = np.ptp(sec) < 1e-9 and np.ptp(hs) < 1e-12 and within_ci(mom) and within_ci(lapl)
    stable_ok = True
    for alpha in (0.7, 1.0, 1.6):
        st = laws.Stable(alpha, 1.0)
        same_sum = [np.array([2.0, 0.0, 0.0]), np.array([0.5, 0.7, 0.8]), np.array([1.0, 1.0, 0.0])]
        ests = [functionals.laplace_mc(st, a, alpha, 0.5, 1.0, seed=9, N=200_000) for a in same_sum]
        stable_ok &= within_ci(ests)
    report(9, "degenerate identities", gauss_ok and stable_ok,
           f"gaussian section spread={np.ptp(sec):.1e}, H spread={np.ptp(hs):.1e}, MC constant={gauss_ok}, "
           f"stable q=alpha depends on sum only={stable_ok}",
           time.perf_counter() - t0)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
