import math

import numpy as np
import pytest

from willmore_lab import grid as G
from willmore_lab.grid import DegenerateSubdiskError, DiskGrid, GridField, Subdisk, UNIT_DISK, UndefinedValueError
from willmore_lab.norms import harnack_ratio, lp_norm, weak_l2_quasinorm


def test_grid_size_rules():
    with pytest.raises(ValueError):
        DiskGrid(64)
    with pytest.raises(ValueError):
        DiskGrid(31)
    g = DiskGrid(65)
    assert g.h == pytest.approx(2 / 64)


def test_classification_partitions_square():
    g = DiskGrid(65)
    total = g.interior.astype(int) + g.band.astype(int) + g.exterior.astype(int)
    assert np.all(total == 1)
    assert g.interior[32, 32] and g.exterior[0, 0]


def test_exact_derivatives_of_linear_and_quadratic():
    g = DiskGrid(65)
    X1, X2 = g.coords
    d = G.grad(X1, g.h)
    np.testing.assert_allclose(d[1:-1, 1:-1, 0], 1.0, atol=1e-12)
    np.testing.assert_allclose(d[1:-1, 1:-1, 1], 0.0, atol=1e-12)
    dp = G.grad_perp(X1, g.h)
    np.testing.assert_allclose(dp[1:-1, 1:-1, 1], 1.0, atol=1e-12)
    lap = G.laplacian(1 - X1**2 - X2**2, g.h)
    np.testing.assert_allclose(lap[1:-1, 1:-1], -4.0, atol=1e-9)
    assert np.isnan(lap[0, 5])


def test_forward_backward_compose_to_five_point():
    g = DiskGrid(33)
    f = np.random.default_rng(0).normal(size=(33, 33))
    a = G.div_backward(G.grad_forward(f, g.h), g.h)
    b = G.laplacian(f, g.h)
    np.testing.assert_allclose(a[1:-1, 1:-1], b[1:-1, 1:-1], atol=1e-8)


def test_restrict_area_and_errors():
    g = DiskGrid(129)
    one = GridField(g, np.ones((129, 129)), "scalar")
    half = G.restrict(one, Subdisk(0, 0, 0.5))
    assert g.area(half.mask) == pytest.approx(math.pi / 4, abs=2 * g.h)
    with pytest.raises(UndefinedValueError):
        half.at(0, 0)
    with pytest.raises(DegenerateSubdiskError):
        G.restrict(one, Subdisk(0, 0, g.h / 2))
    with pytest.raises(DegenerateSubdiskError):
        G.restrict(one, Subdisk(0.8, 0, 0.5))
    full = G.restrict(one, UNIT_DISK)
    assert full.at(64, 64) == 1.0


def test_observed_order():
    assert G.observed_order([4.0, 1.0, 0.25], [65, 129, 257])[0] == pytest.approx(2.0, abs=0.05)


@pytest.mark.parametrize("n", [65, 129])
def test_lp_norm_examples(n):
    g = DiskGrid(n)
    X1, _ = g.coords
    assert lp_norm(np.ones((n, n)), 2, UNIT_DISK, g).value == pytest.approx(math.sqrt(math.pi), abs=2 * g.h)
    assert lp_norm(np.zeros((n, n)), 2, UNIT_DISK, g).value == 0.0
    assert lp_norm(X1, 2, UNIT_DISK, g).value == pytest.approx(math.sqrt(math.pi / 4), abs=2 * g.h)
    assert lp_norm(X1, np.inf, UNIT_DISK, g).value <= 1.0


def test_lp_rejects_missing_values():
    g = DiskGrid(33)
    f = np.ones((33, 33))
    f[16, 16] = np.nan
    with pytest.raises(UndefinedValueError):
        lp_norm(f, 2, UNIT_DISK, g)


def test_weak_l2_constant_and_zero():
    g = DiskGrid(129)
    assert weak_l2_quasinorm(np.ones((129, 129)), UNIT_DISK, g).value == pytest.approx(math.sqrt(math.pi), abs=2 * g.h)
    assert weak_l2_quasinorm(np.zeros((129, 129)), UNIT_DISK, g).value == 0.0


def _inverse_radius(g):
    r = g.radius.copy()
    f = np.zeros_like(r)
    f[r > 0] = 1 / r[r > 0]
    return f


def test_weak_l2_inverse_radius_sampled_sup():
    # the four nodes at distance h give value 1/h on measure 4h^2, so the
    # exact sup of the sampled distribution is 2 on every grid
    for n in (65, 129):
        g = DiskGrid(n)
        assert weak_l2_quasinorm(_inverse_radius(g), UNIT_DISK, g).value == pytest.approx(2.0, rel=1e-12)


@pytest.mark.xfail(strict=True, reason="sampled distribution sup is 2, continuum value sqrt(pi)")
def test_weak_l2_inverse_radius_continuum_value():
    g = DiskGrid(129)
    assert weak_l2_quasinorm(_inverse_radius(g), UNIT_DISK, g).value == pytest.approx(math.sqrt(math.pi), rel=0.05)


def test_harnack_ratio():
    g = DiskGrid(129)
    assert harnack_ratio(np.zeros((129, 129)), UNIT_DISK, g).value == 1.0
    lam = np.log(2 / (1 + g.radius**2))
    v = harnack_ratio(lam, Subdisk(0, 0, 0.5), g).value
    assert 1.0 <= v <= 1.25
    assert v == pytest.approx(1.25, abs=2 * g.h)
    rng = np.random.default_rng(4)
    assert harnack_ratio(rng.normal(size=(129, 129)), UNIT_DISK, g).value >= 1.0
