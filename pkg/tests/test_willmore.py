import math
import warnings

import numpy as np
import pytest
import sympy as sp

from willmore_lab import grid as G
from willmore_lab.geometry import curvature, make_immersion
from willmore_lab.grid import Subdisk, UNIT_DISK
from willmore_lab.norms import lp_norm
from willmore_lab.willmore import (
    DivergenceDefectWarning,
    Inhomogeneity,
    UnsupportedCodimensionError,
    base_flux,
    build_inhomogeneity,
    classical_residual,
    divergence_flux,
    q_from_coeffs,
    t_decompose,
    tangential_bound_probe,
    umbilic_term,
)

from conftest import grid, surface

HALF = Subdisk(0, 0, 0.5)


def _l1(f, cd, sd=HALF):
    return lp_norm(np.nan_to_num(f), 1, sd, cd.grid).value


def test_plane_residuals_vanish():
    _, cd = surface("plane", 65)
    assert np.all(np.nan_to_num(classical_residual(cd)) == 0)
    flux, res = divergence_flux(cd)
    assert np.all(np.nan_to_num(flux) == 0) and np.all(np.nan_to_num(res) == 0)


def test_sphere_classical_residual_second_order():
    sizes = [65, 129, 257]
    res = [lp_norm(np.nan_to_num(classical_residual(surface("sphere", n)[1])), 2, HALF, grid(n)).value
           for n in sizes]
    assert np.all(G.observed_order(res, sizes) >= 1.8)


def test_minimal_surfaces_classical_residual():
    for name in ("catenoid", "enneper"):
        _, cd = surface(name, 65)
        assert _l1(classical_residual(cd), cd) <= 1e-12


def test_clifford_is_willmore():
    _, cd = surface("clifford", 65)
    assert _l1(classical_residual(cd), cd) < 1e-10
    res = [_l1(divergence_flux(surface("clifford", n)[1])[1], surface("clifford", n)[1]) for n in (129, 257)]
    assert res[1] < res[0] / 3


def test_sphere_divergence_residual_order():
    res = [_l1(divergence_flux(surface("sphere", n)[1])[1], surface("sphere", n)[1]) for n in (65, 129, 257)]
    assert np.all(G.observed_order(res, [65, 129, 257]) >= 1.0)


def test_divergence_form_equals_minus_weighted_classical():
    # on a non-Willmore bump both forms are O(1) and agree up to O(h^2)
    sd = Subdisk(0, 0, 0.9)
    gaps = []
    for n in (129, 257):
        _, cd = surface("graph_bump", n, t=0.05)
        div_form = G.div(base_flux(cd), cd.grid.h)
        weighted = -np.exp(2 * cd.lam)[..., None] * classical_residual(cd)
        scale = _l1(div_form, cd, sd)
        assert scale > 1.0
        gaps.append(_l1(div_form - weighted, cd, sd) / scale)
    assert gaps[0] < 0.01 and gaps[1] < gaps[0] / 3
    # the opposite sign is far off
    assert _l1(div_form + weighted, cd, sd) > scale


def _helfrich_oracle():
    """Mean and Gauss curvature of a round sphere from sympy, relation frozen."""
    R, u, v = sp.symbols("R u v", positive=True)
    X = sp.Matrix([R * sp.sin(u) * sp.cos(v), R * sp.sin(u) * sp.sin(v), R * sp.cos(u)])
    Xu, Xv = X.diff(u), X.diff(v)
    N = Xu.cross(Xv)
    N = N / sp.sqrt(N.dot(N))
    E, F, Gm = Xu.dot(Xu), Xu.dot(Xv), Xv.dot(Xv)
    L, M, Nn = X.diff(u, 2).dot(N), X.diff(u, v).dot(N), X.diff(v, 2).dot(N)
    pt = {u: sp.pi / 3, v: sp.pi / 5}
    K = sp.simplify(((L * Nn - M**2) / (E * Gm - F**2)).subs(pt))
    H = sp.simplify(((E * Nn - 2 * F * M + Gm * L) / (2 * (E * Gm - F**2))).subs(pt))
    assert not (H.free_symbols - {R}) and not (K.free_symbols - {R})
    return sp.lambdify(R, sp.Abs(H)), sp.lambdify(R, K)


H_OF_R, K_OF_R = _helfrich_oracle()


def _triples(R):
    H, K = H_OF_R(R), K_OF_R(R)
    on = [(1.0, -H, 0.0), (0.0, -K, 1.0), (2.0, -2 * H + K, -1.0)]
    off = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, -H, 1.0)]
    return on, off


@pytest.mark.parametrize("R", [1.0, 2.0])
def test_helfrich_equilibrium_relation(R):
    n = 129
    _, cd = surface("sphere", n, R=R)
    tol = 10 * cd.grid.h**2
    on, off = _triples(R)
    for a, b, c in on:
        inh = build_inhomogeneity("helfrich", {"alpha": a, "beta": b, "gamma": c}, cd)
        assert _l1(divergence_flux(cd, inh)[1], cd) <= tol
    for a, b, c in off:
        inh = build_inhomogeneity("helfrich", {"alpha": a, "beta": b, "gamma": c}, cd)
        assert _l1(divergence_flux(cd, inh)[1], cd) > tol


def test_helfrich_zero_and_codimension():
    _, cd = surface("sphere", 65)
    inh = build_inhomogeneity("helfrich", {}, cd)
    assert np.all(inh.v == 0)
    _, cl = surface("clifford", 65)
    with pytest.raises(UnsupportedCodimensionError):
        build_inhomogeneity("helfrich", {"beta": 1.0}, cl)
    with pytest.raises(UnsupportedCodimensionError):
        build_inhomogeneity("cubic", {}, cl)


def test_q_zero_gives_zero_T():
    _, cd = surface("catenoid", 65)
    inh = build_inhomogeneity("conformal_q", {"q": "zero"}, cd)
    assert np.all(np.nan_to_num(inh.T) == 0)


@pytest.mark.parametrize("preset", ["constant", "linear", "quadratic", "mixed"])
def test_sphere_umbilic_kills_q_term(preset):
    _, cd = surface("sphere", 65)
    inh = build_inhomogeneity("conformal_q", {"q": preset}, cd)
    assert inh.diagnostics["umbilic_term_max"] <= 1e-12
    assert inh.diagnostics["q_divergence_defect"] <= 1e-6 * 10


def test_conformal_q_flux_matches_umbilic_term():
    sd = Subdisk(0, 0, 0.8)
    errs = []
    for n in (65, 129):
        _, cd = surface("catenoid", n)
        inh = build_inhomogeneity("conformal_q", {"q": "mixed"}, cd)
        divT = G.div(inh.T, cd.grid.h)
        target = -np.exp(2 * cd.lam)[..., None] * inh.W
        errs.append(_l1(divT - target, cd, sd) / _l1(target, cd, sd))
    assert errs[1] < errs[0] / 3 and errs[1] < 1e-2


def test_non_holomorphic_q_warns():
    _, cd = surface("catenoid", 65)
    X1, X2 = cd.grid.coords
    q = np.stack([X1**2 + 0 * X2, np.zeros_like(X1)], -1)
    with pytest.warns(DivergenceDefectWarning):
        build_inhomogeneity("conformal_q", {"q": q}, cd)


def test_cubic_and_self_data():
    _, cd = surface("graph_bump", 65, t=0.05)
    inh = build_inhomogeneity("cubic", {"c": 2.0}, cd)
    absA = np.sqrt(np.exp(-4 * cd.lam) * np.sum(cd.A**2, axis=(2, 3, 4)))
    np.testing.assert_allclose(np.linalg.norm(inh.W, axis=-1), 2 * absA**3, atol=1e-12)
    s = build_inhomogeneity("self", {}, cd)
    _, res = divergence_flux(cd, s)
    assert np.nanmax(np.abs(res)) == 0.0


def test_chen_reports_diagnostics_only():
    _, cd = surface("sphere", 65)
    inh = build_inhomogeneity("chen", {}, cd)
    assert inh.T is None and inh.v is None
    assert set(inh.diagnostics) == {"laplace_g_H_l2", "abs_A_cubed_l2", "ratio"}


def test_unknown_tag():
    _, cd = surface("plane", 33)
    with pytest.raises(ValueError):
        build_inhomogeneity("bogus", {}, cd)


def test_t_decomposition_identities_random():
    _, cd = surface("graph_bump", 65, t=0.1)
    rng = np.random.default_rng(11)
    for _ in range(3):
        T = rng.normal(size=cd.dphi.shape)
        dec = t_decompose(T, cd)
        assert dec.wedge_defect <= 1e-10 and dec.dot_defect <= 1e-10


def test_t_decomposition_tangential_case():
    _, cd = surface("sphere", 65)
    A1 = np.random.default_rng(0).normal(size=cd.lam.shape)
    T = np.stack([A1[..., None] * cd.dphi[:, :, 0], A1[..., None] * cd.dphi[:, :, 1]], 2)
    dec = t_decompose(T, cd)
    lhs = np.einsum("xyik,xyik->xy", cd.dphi, T)
    np.testing.assert_allclose(lhs, 2 * np.exp(2 * cd.lam) * A1, rtol=1e-12)
    np.testing.assert_allclose(np.abs(dec.U).max(), 0.0, atol=1e-12)


def test_tangential_bound_probe():
    _, cd = surface("plane", 65)
    assert tangential_bound_probe(cd)["status_degenerate"] == 1.0
    _, cd = surface("graph_bump", 129, t=0.05)
    out = tangential_bound_probe(cd)
    assert np.isfinite(out["ratio"]) and out["ratio"] > 0
