"""Numerical tools for Schur-monotone functionals of sums of independent vectors.

Modules: ``laws`` (characteristic functions and samplers), ``geometry``
(star bodies and B_p^n(K)), ``fourier`` (section functions and condition
checks), ``functionals`` (Bochner and Monte-Carlo evaluation), ``schur``
(majorization testers) and ``cli``.
"""

__version__ = "0.1.0"
