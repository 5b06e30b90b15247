import math

import numpy as np
import pytest

from willmore_lab import grid as G
from willmore_lab.geometry import (
    CATALOG,
    MalformedFileError,
    RejectedImmersionError,
    analyze,
    coulomb_identity_check,
    curvature,
    energy,
    liouville_residual,
    make_immersion,
    read_wimm,
    write_wimm,
)
from willmore_lab.grid import DiskGrid, Subdisk, UNIT_DISK
from willmore_lab.norms import lp_norm

from conftest import grid, surface

D34 = Subdisk(0, 0, 0.75)


def test_catalog_entries():
    assert sorted(CATALOG) == ["catenoid", "clifford", "enneper", "graph_bump", "plane", "sphere"]
    assert CATALOG["clifford"].ambient_dim == 4


def test_plane_is_flat():
    imm, cd = surface("plane", 65)
    assert np.all(cd.lam == 0)
    assert np.all(cd.H == 0) and np.all(cd.K == 0) and np.all(cd.A == 0)
    assert imm.invariants["conformal_defect"] == 0.0


def test_sphere_conformal_factor_and_curvature():
    imm, cd = surface("sphere", 129)
    g = imm.grid
    mask = g.subdisk_mask(D34)
    np.testing.assert_allclose(cd.lam[mask], np.log(2 / (1 + g.radius[mask] ** 2)), atol=1e-12)
    assert np.max(np.abs(np.linalg.norm(cd.H, axis=-1) - 1)[mask]) <= 5 * g.h**2
    assert np.max(np.abs(cd.K - 1)[mask]) <= 5 * g.h**2
    assert lp_norm(cd.h0, np.inf, D34, g).value <= 5 * g.h**2
    assert imm.invariants["conformal_defect"] <= 1e-12


def test_sphere_radius_scaling():
    _, cd = surface("sphere", 65, R=2.0)
    mask = cd.grid.subdisk_mask(D34)
    np.testing.assert_allclose(cd.scalar_H[mask], 0.5, atol=1e-10)
    np.testing.assert_allclose(cd.K[mask], 0.25, atol=1e-10)


def test_minimal_surfaces():
    for name in ("catenoid", "enneper"):
        imm, cd = surface(name, 129)
        assert lp_norm(cd.H, np.inf, UNIT_DISK, imm.grid).value <= 5 * imm.grid.h**2
        assert np.all(cd.K[imm.grid.subdisk_mask(D34)] < 0)


def test_clifford_constant_factor():
    imm, cd = surface("clifford", 65)
    mask = imm.grid.subdisk_mask(UNIT_DISK)
    np.testing.assert_allclose(np.exp(cd.lam[mask]), 1 / math.sqrt(2), atol=1e-12)
    assert cd.star_n.shape[-1] == 6


def _general_curvature_oracle(phi_fn, pts):
    """H vector and Gauss curvature from the first and second fundamental
    forms, with no conformality assumption, by automatic differentiation."""
    jax = pytest.importorskip("jax")
    jax.config.update("jax_enable_x64", True)
    jnp = jax.numpy
    J = jax.jacfwd(phi_fn)
    Hs = jax.jacfwd(J)
    out_H, out_K = [], []
    for p in pts:
        d = J(jnp.asarray(p))  # (m, 2)
        dd = Hs(jnp.asarray(p))  # (m, 2, 2)
        g = d.T @ d
        gi = jnp.linalg.inv(g)
        P = jnp.eye(d.shape[0]) - d @ gi @ d.T
        II = jnp.einsum("ab,bij->aij", P, dd)
        out_H.append(0.5 * jnp.einsum("ij,aij->a", gi, II))
        out_K.append((II[:, 0, 0] @ II[:, 1, 1] - II[:, 0, 1] @ II[:, 0, 1]) / jnp.linalg.det(g))
    return np.array(out_H), np.array(out_K)


def _jax_surfaces():
    import jax.numpy as jnp

    def sphere2(x):
        r2 = x[0] ** 2 + x[1] ** 2
        return 2.0 * jnp.stack([2 * x[0], 2 * x[1], r2 - 1]) / (1 + r2)

    def catenoid(x):
        u, v = x[0], x[1]
        return jnp.stack([jnp.cosh(u) * jnp.cos(v), jnp.cosh(u) * jnp.sin(v), u])

    def enneper(x):
        u, v = x[0], x[1]
        return jnp.stack([u - u**3 / 3 + u * v**2, v - v**3 / 3 + v * u**2, u**2 - v**2])

    def clifford(x):
        return jnp.stack([jnp.cos(x[0]), jnp.sin(x[0]), jnp.cos(x[1]), jnp.sin(x[1])]) / jnp.sqrt(2.0)

    return [("sphere", {"R": 2.0}, sphere2), ("catenoid", {}, catenoid), ("enneper", {}, enneper),
            ("clifford", {}, clifford)]


@pytest.mark.parametrize("idx", range(4))
def test_curvature_against_autodiff_oracle(idx):
    pytest.importorskip("jax")
    name, params, fn = _jax_surfaces()[idx]
    _, cd = surface(name, 65, **params)
    nodes = [(20, 33), (33, 33), (40, 25), (45, 41)]
    pts = [(cd.grid.x[i], cd.grid.x[j]) for i, j in nodes]
    Hj, Kj = _general_curvature_oracle(fn, pts)
    for (i, j), h, k in zip(nodes, Hj, Kj):
        np.testing.assert_allclose(cd.H[i, j], h, atol=1e-10)
        assert cd.K[i, j] == pytest.approx(k, abs=1e-10)


def test_graph_bump_against_graph_formulas():
    # oracle: mean and Gauss curvature of z = f(|u|) in graph coordinates u
    t, a = 0.05, 0.8
    imm, cd = surface("graph_bump", 129, t=t)
    mask = imm.grid.subdisk_mask(Subdisk(0, 0, 0.9))
    u = imm.phi[..., :2]
    rho = np.linalg.norm(u, axis=-1)
    sel = mask & (rho > 0.05) & (rho < a - 0.02)
    r = rho[sel]
    q = 1 - r**2 / a**2
    f1 = t * 6 * q**5 * (-2 * r / a**2)
    f2 = t * (30 * q**4 * (2 * r / a**2) ** 2 - 12 * q**5 / a**2)
    W = np.sqrt(1 + f1**2)
    K = f1 * f2 / (r * W**4)
    divn = f2 / W**3 + f1 / (r * W)
    uh = u[sel] / r[:, None]
    nu = np.concatenate([-(f1[:, None] * uh), np.ones((len(r), 1))], axis=1) / W[:, None]
    Hvec = 0.5 * divn[:, None] * nu
    np.testing.assert_allclose(cd.K[sel], K, atol=1e-8)
    np.testing.assert_allclose(cd.H[sel], Hvec, atol=1e-8)
    assert imm.invariants["conformal_defect"] <= 1e-10


def test_graph_bump_seeded_center_is_reproducible():
    g = grid(65)
    a = make_immersion("graph_bump", g, {"seed": 7})
    b = make_immersion("graph_bump", g, {"seed": 7})
    assert np.array_equal(a.phi, b.phi)
    c = a.source["params"]
    assert math.hypot(c["cx"], c["cy"]) <= 0.2


def test_energy_of_hemisphere():
    # |grad n|^2 = 2 e^{2 lambda} on the unit sphere; D_1 covers a hemisphere
    _, cd = surface("sphere", 257)
    assert energy(cd) == pytest.approx(4 * math.pi, rel=2e-2)


def test_energy_scale_invariant():
    imm, cd = surface("graph_bump", 65, t=0.05)
    cd2 = curvature(imm.scaled(3.0))
    assert energy(cd2) == pytest.approx(energy(cd), rel=1e-12)


def test_liouville_order():
    res = [liouville_residual(surface("graph_bump", n, t=0.05)[1]) for n in (65, 129, 257)]
    assert np.all(G.observed_order(res, [65, 129, 257]) >= 1.5)
    assert liouville_residual(surface("sphere", 129)[1]) <= 1e-3


def test_coulomb_identity():
    g = grid(65)
    out = coulomb_identity_check(make_immersion("plane", g))
    assert out["identity_l1"] == 0.0 and out["harnack_ratio"] == 1.0
    s = coulomb_identity_check(make_immersion("sphere", grid(129)))
    assert s["identity_l1"] <= 1e-2
    res = [coulomb_identity_check(make_immersion("graph_bump", grid(n), {"t": 0.1, "seed": 3}))["identity_l1"]
           for n in (65, 129, 257)]
    assert np.all(G.observed_order(res, [65, 129, 257]) >= 1.0)


def test_analyze_summary():
    imm, _ = surface("sphere", 65)
    out = analyze(imm)
    assert out["energy_below_flag"] == 0.0
    assert out["A_normality"] <= 1e-10
    out = analyze(surface("plane", 65)[0])
    assert all(out[k] == 0.0 for k in ("H_max", "K_max", "A_max", "energy"))


def test_wimm_round_trip(tmp_path):
    imm, _ = surface("sphere", 65)
    path = tmp_path / "s.wimm"
    write_wimm(path, imm.phi)
    phi, dom = read_wimm(path)
    assert np.array_equal(phi, imm.phi) and dom == (-1.0, 1.0, -1.0, 1.0)
    imm2 = make_immersion(str(path), DiskGrid(33))
    assert imm2.grid.n == 65 and not imm2.analytic
    cd2 = curvature(imm2)
    mask = imm2.grid.subdisk_mask(Subdisk(0, 0, 0.5))
    assert np.max(np.abs(cd2.K - 1)[mask]) < 5e-3


@pytest.mark.parametrize("body", [
    "WIMX 1\n3 33 -1 1 -1 1\n",
    "WIMM 1\n3 33 -1 1 -1\n",
    "WIMM 1\n2 33 -1.0 1.0 -1.0 1.0\n",
    "WIMM 1\n3 2 -1.0 1.0 -1.0 1.0\n0 0 0\n0 0 0\n0 0 0\n",
    "WIMM 1\n3 1 -1.0 1.0 -1.0 1.0\nnan 0 0\n",
    "WIMM 1\n3 1 -1.0 1.0 -1.0 1.0\n0 0\n",
    "WIMM 1\n3 1 0.0 1.0 -1.0 1.0\n0 0 0\n",
])
def test_wimm_malformed(tmp_path, body):
    path = tmp_path / "bad.wimm"
    path.write_text(body)
    with pytest.raises(MalformedFileError):
        read_wimm(path)


def test_degenerate_immersion_rejected(tmp_path):
    g = DiskGrid(33)
    X1, X2 = g.coords
    phi = np.stack([X1, 0.001 * X2, np.zeros_like(X1)], -1)
    path = tmp_path / "flat.wimm"
    write_wimm(path, phi)
    with pytest.raises(RejectedImmersionError):
        make_immersion(str(path), g)


def test_unknown_catalog_name():
    with pytest.raises(KeyError):
        make_immersion("torus", grid(33))


def test_perturbation_is_seeded():
    g = grid(65)
    a = make_immersion("sphere", g, None, {"seed": 1, "amplitude": 0.02})
    b = make_immersion("sphere", g, None, {"seed": 1, "amplitude": 0.02})
    c = make_immersion("sphere", g, None, {"seed": 2, "amplitude": 0.02})
    assert np.array_equal(a.phi, b.phi) and not np.array_equal(a.phi, c.phi)
    assert a.tag == "sphere+pert1"
