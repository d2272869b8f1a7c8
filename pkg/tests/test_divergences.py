"""Closed-form divergences against quadrature and known identities."""

import math

import numpy as np
import pytest

from geotex.distributions import GammaParams, WeibullParams
from geotex.divergences import (
    QuadratureFailure,
    kld,
    kld_gamma,
    kld_numeric,
    kld_weibull,
    skld,
)


def test_self_divergence_zero():
    p = GammaParams(1.7, 2.3)
    assert kld_gamma(p, p) == pytest.approx(0.0, abs=1e-14)
    q = WeibullParams(1.7, 2.3)
    assert kld_weibull(q, q) == pytest.approx(0.0, abs=1e-14)


def test_exponential_pair_closed_value():
    # both families contain the exponentials, so the same scale pair
    # must give the same divergence log(2) - 1/2 in each
    expected = math.log(2.0) - 0.5
    assert kld_gamma(GammaParams(1.0, 1.0), GammaParams(2.0, 1.0)) == pytest.approx(expected, abs=1e-12)
    assert kld_weibull(WeibullParams(1.0, 1.0), WeibullParams(2.0, 1.0)) == pytest.approx(expected, abs=1e-12)


def test_asymmetry():
    p = GammaParams(1.0, 1.0)
    q = GammaParams(2.0, 1.0)
    forward = kld_gamma(p, q)
    backward = kld_gamma(q, p)
    assert backward == pytest.approx(1.0 - math.log(2.0), abs=1e-12)
    assert abs(forward - backward) > 0.1


def test_skld_halved_symmetrisation():
    p = GammaParams(1.0, 1.0)
    q = GammaParams(2.0, 1.0)
    assert skld(p, q) == pytest.approx(0.25, abs=1e-12)
    assert skld(p, q) == skld(q, p)
    w1 = WeibullParams(0.8, 1.9)
    w2 = WeibullParams(1.4, 1.1)
    assert skld(w1, w2) == pytest.approx(0.5 * (kld(w1, w2) + kld(w2, w1)), rel=1e-14)


def test_type_dispatch():
    with pytest.raises(TypeError):
        kld(GammaParams(1.0, 1.0), WeibullParams(1.0, 1.0))
    with pytest.raises(TypeError):
        kld_numeric(GammaParams(1.0, 1.0), WeibullParams(1.0, 1.0))


def test_closed_forms_match_quadrature():
    rng = np.random.default_rng(31)
    for _ in range(25):
        a1, b1, a2, b2 = rng.uniform(0.4, 4.0, size=4)
        p, q = GammaParams(a1, b1), GammaParams(a2, b2)
        assert kld_gamma(p, q) == pytest.approx(kld_numeric(p, q), abs=1e-8)
        pw, qw = WeibullParams(a1, b1), WeibullParams(a2, b2)
        assert kld_weibull(pw, qw) == pytest.approx(kld_numeric(pw, qw), abs=1e-8)


def test_nonnegativity_random_pairs():
    rng = np.random.default_rng(32)
    for _ in range(200):
        a1, b1, a2, b2 = rng.uniform(0.2, 5.0, size=4)
        assert kld_gamma(GammaParams(a1, b1), GammaParams(a2, b2)) >= 0.0
        assert kld_weibull(WeibullParams(a1, b1), WeibullParams(a2, b2)) >= 0.0


def test_second_order_expansion():
    # KL(theta || theta + eps v) ~ eps^2/2 v^T g v, so the ratio of the
    # divergence to the quadratic form must approach one as eps shrinks
    from geotex.geometry import fisher_matrix

    rng = np.random.default_rng(33)
    for make in (GammaParams, WeibullParams):
        for _ in range(20):
            th = rng.uniform(0.5, 3.0, size=2)
            v = rng.normal(size=2)
            v /= np.linalg.norm(v)
            g = fisher_matrix(make(*th))
            quad = float(v @ g @ v)
            eps = 1e-4
            d = kld(make(*th), make(*(th + eps * v)))
            assert d / (0.5 * eps * eps * quad) == pytest.approx(1.0, abs=2e-3)


def test_quadrature_failure_raises():
    p = GammaParams(1.0, 1.0)
    q = GammaParams(2.0, 1.0)
    with pytest.raises(QuadratureFailure):
        kld_numeric(p, q, tol=0.0)
