"""Immersions of the unit disk, the immersion catalog, WIMM files, curvature.

Every catalog entry is defined on a neighbourhood of [-1, 1]^2 and carries
closed-form first and second derivatives. File-based and perturbed data fall
back to centred differences where no closed form exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy.integrate import solve_ivp

from . import grid as G
from . import multivec as mv
from .grid import DiskGrid, Subdisk, UNIT_DISK
from .norms import harnack_ratio, lp_norm, weak_l2_quasinorm

ENERGY_FLAG = 8 * math.pi / 3


class MalformedFileError(ValueError):
    pass


class RejectedImmersionError(ValueError):
    pass


class SingularImmersionError(ValueError):
    pass


Evaluator = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


# ---------------------------------------------------------------------------
# catalog


def _plane(params):
    m = int(params.get("m", 3))

    def ev(x1, x2):
        shp = x1.shape
        phi = np.zeros(shp + (m,))
        phi[..., 0], phi[..., 1] = x1, x2
        d = np.zeros(shp + (2, m))
        d[..., 0, 0] = d[..., 1, 1] = 1.0
        return phi, d, np.zeros(shp + (2, 2, m))

    return ev


def _sphere(params):
    R = float(params.get("R", 1.0))

    def ev(x1, x2):
        shp = x1.shape
        D = 1.0 + x1**2 + x2**2
        inv = 1.0 / D
        xs = (x1, x2)
        di = [-2 * x * inv**2 for x in xs]  # d(1/D)/dx_i
        phi = np.stack([2 * x1 * inv, 2 * x2 * inv, 1 - 2 * inv], axis=-1) * R
        d = np.zeros(shp + (2, 3))
        dd = np.zeros(shp + (2, 2, 3))
        for i in range(2):
            for a in range(2):
                d[..., i, a] = 2 * ((i == a) * inv + xs[a] * di[i])
            d[..., i, 2] = -2 * di[i]
            for j in range(2):
                dij = -2 * (i == j) * inv**2 + 8 * xs[i] * xs[j] * inv**3
                for a in range(2):
                    dd[..., i, j, a] = 2 * ((i == a) * di[j] + (j == a) * di[i] + xs[a] * dij)
                dd[..., i, j, 2] = -2 * dij
        return phi, d * R, dd * R

    return ev


def _chart(params):
    s = float(params.get("scale", 1.0))
    u0 = float(params.get("u0", 0.0))
    v0 = float(params.get("v0", 0.0))
    return s, u0, v0


def _catenoid(params):
    s, u0, v0 = _chart(params)

    def ev(x1, x2):
        u, v = s * x1 + u0, s * x2 + v0
        ch, sh, c, sn = np.cosh(u), np.sinh(u), np.cos(v), np.sin(v)
        phi = np.stack([ch * c, ch * sn, u], axis=-1)
        du = np.stack([sh * c, sh * sn, np.ones_like(u)], axis=-1)
        dv = np.stack([-ch * sn, ch * c, np.zeros_like(u)], axis=-1)
        duu = np.stack([ch * c, ch * sn, np.zeros_like(u)], axis=-1)
        duv = np.stack([-sh * sn, sh * c, np.zeros_like(u)], axis=-1)
        dvv = np.stack([-ch * c, -ch * sn, np.zeros_like(u)], axis=-1)
        return _pack(phi, du, dv, duu, duv, dvv, s)

    return ev


def _enneper(params):
    s, u0, v0 = _chart(params)

    def ev(x1, x2):
        u, v = s * x1 + u0, s * x2 + v0
        one, zero = np.ones_like(u), np.zeros_like(u)
        phi = np.stack([u - u**3 / 3 + u * v**2, v - v**3 / 3 + v * u**2, u**2 - v**2], axis=-1)
        du = np.stack([1 - u**2 + v**2, 2 * u * v, 2 * u], axis=-1)
        dv = np.stack([2 * u * v, 1 - v**2 + u**2, -2 * v], axis=-1)
        duu = np.stack([-2 * u, 2 * v, 2 * one], axis=-1)
        duv = np.stack([2 * v, 2 * u, zero], axis=-1)
        dvv = np.stack([2 * u, -2 * v, -2 * one], axis=-1)
        return _pack(phi, du, dv, duu, duv, dvv, s)

    return ev


def _clifford(params):
    s, u0, v0 = _chart(params)
    k = 1 / math.sqrt(2)

    def ev(x1, x2):
        u, v = s * x1 + u0, s * x2 + v0
        z = np.zeros_like(u)
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        phi = k * np.stack([cu, su, cv, sv], axis=-1)
        du = k * np.stack([-su, cu, z, z], axis=-1)
        dv = k * np.stack([z, z, -sv, cv], axis=-1)
        duu = k * np.stack([-cu, -su, z, z], axis=-1)
        dvv = k * np.stack([z, z, -cv, -sv], axis=-1)
        return _pack(phi, du, dv, duu, np.zeros_like(duu), dvv, s)

    return ev


def _pack(phi, du, dv, duu, duv, dvv, s):
    d = np.stack([du, dv], axis=-2) * s
    dd = np.stack([np.stack([duu, duv], axis=-2), np.stack([duv, dvv], axis=-2)], axis=-3) * s**2
    return phi, d, dd


@lru_cache(maxsize=32)
def _bump_profile(t: float, a: float):
    """Solve for g(sigma) = log(psi/r) as a function of sigma = r^2.

    psi(r) is the radius at which the graph z = t*beta(psi^2) is sampled so
    that the radial map is conformal; psi = r outside the support.
    """

    def beta1(P):
        return -6 / a**2 * np.clip(1 - P / a**2, 0, None) ** 5

    def rhs(sig, y):
        E2 = math.exp(2 * y[0])
        P = E2 * sig
        b1 = beta1(P)
        w = math.sqrt(1 + 4 * t * t * P * b1 * b1)
        return [-2 * t * t * E2 * b1 * b1 / (w * (1 + w))]

    if t == 0:
        return None
    sol = solve_ivp(rhs, (a * a, 0.0), [0.0], method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
    if not sol.success:
        raise RuntimeError("conformal profile integration failed")
    return sol.sol


def _graph_bump(params):
    t = float(params.get("t", 0.05))
    a = float(params.get("a", 0.8))
    cx = float(params.get("cx", 0.0))
    cy = float(params.get("cy", 0.0))
    m = int(params.get("m", 3))
    prof = _bump_profile(t, a)

    def ev(x1, x2):
        shp = x1.shape
        d1, d2 = x1 - cx, x2 - cy
        sig = d1**2 + d2**2
        inside = sig < a * a
        g = np.zeros(shp)
        if prof is not None and inside.any():
            g[inside] = prof(sig[inside])[0]
        E2 = np.exp(2 * g)
        P = np.where(inside, E2 * sig, a * a)
        q = np.clip(1 - P / a**2, 0, None)
        b0 = q**6
        b1 = -6 / a**2 * q**5
        b2 = 30 / a**4 * q**4
        w = np.sqrt(1 + 4 * t * t * P * b1 * b1)
        w1 = 2 * t * t * (b1 * b1 + 2 * P * b1 * b2) / w  # dw/dP
        B = b1 * b1 / (w * (1 + w))
        B1 = (2 * b1 * b2 * w * (1 + w) - b1 * b1 * (1 + 2 * w) * w1) / (w * (1 + w)) ** 2
        g1 = -2 * t * t * E2 * B
        P1 = E2 / w
        g2 = -2 * t * t * (2 * g1 * E2 * B + E2 * B1 * P1)
        E = np.exp(g)
        Ep = E * g1
        Epp = E * (g2 + g1**2)
        P2 = 2 * Ep**2 * sig + 2 * E * Epp * sig + 4 * E * Ep
        dd_ = (d1, d2)
        phi = np.zeros(shp + (m,))
        d = np.zeros(shp + (2, m))
        dd = np.zeros(shp + (2, 2, m))
        phi[..., 0] = cx + E * d1
        phi[..., 1] = cy + E * d2
        phi[..., 2] = t * b0
        for i in range(2):
            for al in range(2):
                d[..., i, al] = E * (i == al) + 2 * Ep * dd_[i] * dd_[al]
            d[..., i, 2] = t * b1 * P1 * 2 * dd_[i]
            for j in range(2):
                for al in range(2):
                    dd[..., i, j, al] = 4 * Epp * dd_[i] * dd_[j] * dd_[al] + 2 * Ep * (
                        (i == j) * dd_[al] + (i == al) * dd_[j] + (j == al) * dd_[i]
                    )
                dd[..., i, j, 2] = t * ((b2 * P1**2 + b1 * P2) * 4 * dd_[i] * dd_[j] + 2 * b1 * P1 * (i == j))
        return phi, d, dd

    return ev


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    ambient_dim: int
    defaults: dict
    builder: Callable[[dict], Evaluator]
    summary: str


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry("plane", 3, {"m": 3}, _plane, "flat coordinate plane x -> (x1, x2, 0, ...)"),
        CatalogEntry(
            "graph_bump", 3, {"t": 0.05, "a": 0.8, "cx": 0.0, "cy": 0.0, "m": 3}, _graph_bump,
            "graph z = t(1 - psi^2/a^2)^6 over a disk of radius a, conformally reparametrized by radius",
        ),
        CatalogEntry("sphere", 3, {"R": 1.0}, _sphere, "stereographic sphere R(2x1, 2x2, r^2 - 1)/(1 + r^2)"),
        CatalogEntry("catenoid", 3, {"scale": 1.0, "u0": 0.0, "v0": 0.0}, _catenoid,
                     "(cosh u cos v, cosh u sin v, u) with (u, v) = scale*x + (u0, v0)"),
        CatalogEntry("enneper", 3, {"scale": 1.0, "u0": 0.0, "v0": 0.0}, _enneper,
                     "Enneper surface with (u, v) = scale*x + (u0, v0)"),
        CatalogEntry("clifford", 4, {"scale": 1.0, "u0": 0.0, "v0": 0.0}, _clifford,
                     "(cos u, sin u, cos v, sin v)/sqrt(2) in R^4 with (u, v) = scale*x + (u0, v0)"),
    ]
}


def _perturbation(params: dict, m: int) -> Evaluator:
    """Seeded sum of Gaussian bumps along random unit directions of R^m."""
    rng = np.random.default_rng(int(params.get("seed", 0)))
    count = int(params.get("count", 3))
    amp = float(params.get("amplitude", 0.05))
    width = float(params.get("width", 0.3))
    centers = rng.uniform(-0.5, 0.5, size=(count, 2))
    dirs = rng.normal(size=(count, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    def ev(x1, x2):
        shp = x1.shape
        phi = np.zeros(shp + (m,))
        d = np.zeros(shp + (2, m))
        dd = np.zeros(shp + (2, 2, m))
        for c, nu in zip(centers, dirs):
            y = (x1 - c[0], x2 - c[1])
            gval = amp * np.exp(-(y[0] ** 2 + y[1] ** 2) / width**2)
            gi = [-2 * y[i] / width**2 * gval for i in range(2)]
            phi += gval[..., None] * nu
            for i in range(2):
                d[..., i, :] += gi[i][..., None] * nu
                for j in range(2):
                    gij = (4 * y[i] * y[j] / width**4 - 2 * (i == j) / width**2) * gval
                    dd[..., i, j, :] += gij[..., None] * nu
        return phi, d, dd

    return ev


# ---------------------------------------------------------------------------
# immersions


@dataclass(frozen=True)
class Immersion:
    grid: DiskGrid
    phi: np.ndarray  # (n, n, m)
    dphi: np.ndarray  # (n, n, 2, m)
    ddphi: np.ndarray  # (n, n, 2, 2, m)
    source: dict
    analytic: bool
    evaluator: Evaluator | None = field(default=None, repr=False, compare=False)
    invariants: dict = field(default_factory=dict)

    @property
    def ambient_dim(self) -> int:
        return self.phi.shape[-1]

    @property
    def tag(self) -> str:
        s = self.source
        if s.get("kind") == "file":
            return f"file:{Path(s['path']).name}"
        base = s.get("name", "custom")
        if "perturbation" in s:
            base += f"+pert{s['perturbation'].get('seed', 0)}"
        return base

    def scaled(self, c: float) -> "Immersion":
        ev = None
        if self.evaluator is not None:
            base = self.evaluator

            def ev(x1, x2):
                p, d, dd = base(x1, x2)
                return c * p, c * d, c * dd

        src = dict(self.source, scale_factor=c * self.source.get("scale_factor", 1.0))
        return _finish(self.grid, c * self.phi, c * self.dphi, c * self.ddphi, src, self.analytic, ev)


def fd_derivatives(phi: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    d = G.grad(phi, h)
    dd = np.full(phi.shape[:2] + (2, 2) + phi.shape[2:], np.nan)
    f = phi
    dd[1:-1, :, 0, 0] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    dd[:, 1:-1, 1, 1] = (f[:, 2:] - 2 * f[:, 1:-1] + f[:, :-2]) / h**2
    mixed = G.d2(G.d1(f, h), h)
    dd[:, :, 0, 1] = dd[:, :, 1, 0] = mixed
    return d, dd


def conformality_defect(dphi: np.ndarray, mask: np.ndarray) -> float:
    p1, p2 = dphi[:, :, 0][mask], dphi[:, :, 1][mask]
    n1, n2 = np.linalg.norm(p1, axis=-1), np.linalg.norm(p2, axis=-1)
    dot = np.abs(np.sum(p1 * p2, axis=-1))
    return float(np.max(np.maximum(dot, np.abs(n1 - n2)) / (n1 * n1)))


def _finish(grid, phi, dphi, ddphi, source, analytic, evaluator, conformal_tol=1e-3, c_cap=100.0) -> Immersion:
    mask = grid.subdisk_mask(UNIT_DISK)
    p1, p2 = dphi[:, :, 0][mask], dphi[:, :, 1][mask]
    if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
        raise RejectedImmersionError("derivatives undefined inside the unit disk")
    q = np.sum(p1 * p1, axis=-1) / np.maximum(np.sum(p2 * p2, axis=-1), 1e-300)
    c = float(max(q.max(), 1 / q.min()))
    if c > c_cap:
        raise RejectedImmersionError(f"metric nondegeneracy constant {c:.3g} exceeds cap {c_cap:g}")
    defect = conformality_defect(dphi, mask)
    inv = {"nondegeneracy_c": c, "conformal_defect": defect, "conformal": defect <= conformal_tol}
    imm = Immersion(grid, phi, dphi, ddphi, source, analytic, evaluator, inv)
    return imm


def make_immersion(
    spec: Any,
    grid: DiskGrid,
    params: dict | None = None,
    perturbation: dict | None = None,
    conformal_tol: float = 1e-3,
    c_cap: float = 100.0,
) -> Immersion:
    """Build an immersion from a catalog name, a WIMM path, or a spec dict.

    Dict specs look like ``{"name": "sphere", "params": {...},
    "perturbation": {"seed": 1, "amplitude": 0.05}}``.
    """
    if isinstance(spec, dict):
        params = {**spec.get("params", {}), **(params or {})}
        perturbation = spec.get("perturbation", perturbation)
        spec = spec.get("name", spec.get("path"))
    params = dict(params or {})
    if isinstance(spec, Path) or (isinstance(spec, str) and spec not in CATALOG and Path(spec).exists()):
        phi, dom = read_wimm(spec)
        if phi.shape[0] != grid.n:
            grid = DiskGrid(phi.shape[0])
        d, dd = fd_derivatives(phi, grid.h)
        src = {"kind": "file", "path": str(spec)}
        imm = _finish(grid, phi, d, dd, src, False, None, conformal_tol, c_cap)
    else:
        if spec not in CATALOG:
            raise KeyError(f"unknown immersion {spec!r}; catalog has {sorted(CATALOG)}")
        entry = CATALOG[spec]
        full = {**entry.defaults, **params}
        if spec == "graph_bump" and "seed" in full:
            rng = np.random.default_rng(int(full.pop("seed")))
            r, th = 0.2 * np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
            full["cx"], full["cy"] = float(r * np.cos(th)), float(r * np.sin(th))
        ev = entry.builder(full)
        src = {"kind": "catalog", "name": spec, "params": full}
        if perturbation:
            m = entry.ambient_dim if spec not in ("plane", "graph_bump") else int(full.get("m", 3))
            pev = _perturbation(perturbation, m)
            base = ev

            def ev(x1, x2, base=base, pev=pev):
                a, b, c = base(x1, x2)
                pa, pb, pc = pev(x1, x2)
                return a + pa, b + pb, c + pc

            src["perturbation"] = dict(perturbation)
        X1, X2 = grid.coords
        phi, d, dd = ev(X1, X2)
        imm = _finish(grid, phi, d, dd, src, True, ev, conformal_tol, c_cap)
    return imm


# ---------------------------------------------------------------------------
# WIMM format


def write_wimm(path, phi: np.ndarray, domain=(-1.0, 1.0, -1.0, 1.0)) -> None:
    """Write node values in row-major order (x1 index outer, x2 index inner)."""
    phi = np.asarray(phi, float)
    N, N2, m = phi.shape
    if N != N2:
        raise ValueError("WIMM data must be square")
    lines = ["WIMM 1", f"{m} {N} " + " ".join(repr(float(x)) for x in domain)]
    for row in phi.reshape(-1, m):
        lines.append(" ".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_wimm(path, components=range(3, 7)) -> tuple[np.ndarray, tuple[float, ...]]:
    """Parse a WIMM file; ``components`` lists the accepted value widths."""
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != "WIMM 1":
        raise MalformedFileError("missing 'WIMM 1' header")
    if len(text) < 2:
        raise MalformedFileError("missing dimension line")
    head = text[1].split()
    if len(head) != 6:
        raise MalformedFileError("dimension line must read 'm N x_lo x_hi y_lo y_hi'")
    try:
        m, N = int(head[0]), int(head[1])
        dom = tuple(float(x) for x in head[2:])
    except ValueError as exc:
        raise MalformedFileError(f"bad dimension line: {exc}") from None
    if m not in components:
        raise MalformedFileError(f"component count {m} not in {list(components)}")
    if dom != (-1.0, 1.0, -1.0, 1.0):
        raise MalformedFileError("only the domain [-1, 1]^2 is supported")
    body = [ln for ln in text[2:] if ln.strip()]
    if len(body) != N * N:
        raise MalformedFileError(f"expected {N * N} node lines, found {len(body)}")
    try:
        vals = np.array([[float(x) for x in ln.split()] for ln in body])
    except ValueError as exc:
        raise MalformedFileError(f"non-numeric entry: {exc}") from None
    if vals.ndim != 2 or vals.shape[1] != m:
        raise MalformedFileError(f"every node line must hold {m} reals")
    if not np.all(np.isfinite(vals)):
        raise MalformedFileError("non-finite entries")
    return vals.reshape(N, N, m), dom


# ---------------------------------------------------------------------------
# curvature


@dataclass(frozen=True)
class CurvatureData:
    grid: DiskGrid
    lam: np.ndarray  # (n, n)
    e1: np.ndarray  # (n, n, m)
    e2: np.ndarray
    star_n: np.ndarray  # (n, n, C(m,2)) components of e1 ∧ e2
    A: np.ndarray  # (n, n, 2, 2, m)
    H: np.ndarray  # (n, n, m)
    K: np.ndarray  # (n, n)
    h0: np.ndarray  # (n, n, 2, 2, m)
    grad_n: np.ndarray  # (n, n, 2, C(m,2))
    dphi: np.ndarray
    phi: np.ndarray

    @property
    def m(self) -> int:
        return self.H.shape[-1]

    def proj_n(self, v: np.ndarray) -> np.ndarray:
        """Normal projection of R^m-valued arrays shaped (n, n, ..., m)."""
        extra = v.ndim - 3
        e1 = self.e1.reshape(self.e1.shape[:2] + (1,) * extra + (self.m,))
        e2 = self.e2.reshape(e1.shape)
        return v - np.sum(v * e1, -1, keepdims=True) * e1 - np.sum(v * e2, -1, keepdims=True) * e2

    def proj_t(self, v: np.ndarray) -> np.ndarray:
        return v - self.proj_n(v)

    @property
    def unit_normal(self) -> np.ndarray:
        """n̂ = ⋆(⋆n) for m = 3 (e1 × e2)."""
        if self.m != 3:
            raise ValueError("a unit normal vector exists only for m = 3")
        return np.einsum("...i,ki->...k", self.star_n, mv.hodge_matrix(3, 2))

    @property
    def scalar_H(self) -> np.ndarray:
        return np.sum(self.H * self.unit_normal, -1)


def curvature(imm: Immersion, require_conformal: bool = False) -> CurvatureData:
    if require_conformal and not imm.invariants.get("conformal", False):
        raise ValueError("curvature requires a conformal immersion")
    m = imm.ambient_dim
    d, dd = imm.dphi, imm.ddphi
    p1, p2 = d[:, :, 0], d[:, :, 1]
    el = np.linalg.norm(p1, axis=-1)
    mask = imm.grid.subdisk_mask(UNIT_DISK)
    if np.nanmin(el[mask]) < 1e-8:
        raise SingularImmersionError("conformal factor vanishes")
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.log(el)
        e1 = p1 / el[..., None]
        w = p2 - np.sum(p2 * e1, -1, keepdims=True) * e1
        e2 = w / np.linalg.norm(w, axis=-1, keepdims=True)
    star_n = mv.field_wedge(e1, 1, e2, 1, m)

    def pn(v):
        extra = v.ndim - 3
        a = e1.reshape(e1.shape[:2] + (1,) * extra + (m,))
        b = e2.reshape(a.shape)
        return v - np.sum(v * a, -1, keepdims=True) * a - np.sum(v * b, -1, keepdims=True) * b

    A = pn(dd)
    e2l = np.exp(2 * lam)
    H = 0.5 / e2l[..., None] * (A[:, :, 0, 0] + A[:, :, 1, 1])
    K = (np.sum(A[:, :, 0, 0] * A[:, :, 1, 1], -1) - np.sum(A[:, :, 0, 1] ** 2, -1)) / e2l**2
    eye = np.eye(2)[None, None, :, :, None]
    h0 = A - H[:, :, None, None, :] * e2l[:, :, None, None, None] * eye
    # exact derivative of the unit 2-vector W/|W| with W = d1Φ ∧ d2Φ
    W = mv.field_wedge(p1, 1, p2, 1, m)
    Wn = np.linalg.norm(W, axis=-1, keepdims=True)
    gn = []
    for i in range(2):
        dW = mv.field_wedge(dd[:, :, i, 0], 1, p2, 1, m) + mv.field_wedge(p1, 1, dd[:, :, i, 1], 1, m)
        gn.append((dW - np.sum(dW * star_n, -1, keepdims=True) * star_n) / Wn)
    grad_n = np.stack(gn, axis=2)
    return CurvatureData(imm.grid, lam, e1, e2, star_n, A, H, K, h0, grad_n, imm.dphi, imm.phi)


def energy(cd: CurvatureData, sd: Subdisk = UNIT_DISK) -> float:
    """Integral of |∇n|^2 over the subdisk."""
    return lp_norm(cd.grad_n, 2, sd, cd.grid).value ** 2


def analyze(imm: Immersion, sd: Subdisk = Subdisk(0.0, 0.0, 0.75)) -> dict[str, float]:
    """Curvature summary: max-norm quantities on ``sd`` and global invariants."""
    cd = curvature(imm)
    g = imm.grid
    mask = g.subdisk_mask(sd)
    Hn = np.linalg.norm(cd.H, axis=-1)
    norm_A = lp_norm(cd.A, np.inf, sd, g).value
    tang = max(
        float(np.max(np.abs(np.sum(cd.A[mask] * cd.e1[mask][:, None, None, :], -1)))),
        float(np.max(np.abs(np.sum(cd.A[mask] * cd.e2[mask][:, None, None, :], -1)))),
    )
    E = energy(cd)
    return {
        "lambda_min": float(cd.lam[mask].min()),
        "lambda_max": float(cd.lam[mask].max()),
        "H_max": float(Hn[mask].max()),
        "H_min": float(Hn[mask].min()),
        "K_max": float(cd.K[mask].max()),
        "K_min": float(cd.K[mask].min()),
        "h0_max": lp_norm(cd.h0, np.inf, sd, g).value,
        "A_max": norm_A,
        "A_normality": tang,
        "star_n_unit_defect": float(np.max(np.abs(np.linalg.norm(cd.star_n[mask], axis=-1) - 1))),
        "energy": E,
        "energy_below_flag": float(E < ENERGY_FLAG),
        "conformal_defect": imm.invariants["conformal_defect"],
        "nondegeneracy_c": imm.invariants["nondegeneracy_c"],
        "liouville_l1": liouville_residual(cd, sd),
    }


def liouville_residual(cd: CurvatureData, sd: Subdisk = Subdisk(0.0, 0.0, 0.75)) -> float:
    """L^1 norm of -Δλ - e^{2λ}K on the subdisk."""
    r = -G.laplacian(cd.lam, cd.grid.h) - np.exp(2 * cd.lam) * cd.K
    return lp_norm(r, 1, sd, cd.grid).value


def coulomb_identity_check(
    imm: Immersion, sd: Subdisk = Subdisk(0.0, 0.0, 0.9), inner: Subdisk = Subdisk(0.0, 0.0, 0.5)
) -> dict[str, float]:
    """Δλ = ∇e1 · ∇⊥e2, the Wente split λ = μ + ν, and the Harnack ratio."""
    from .elliptic import wente_solve

    cd = curvature(imm)
    g = imm.grid
    h = g.h
    lap = G.laplacian(cd.lam, h)
    rhs = np.sum(G.grad(cd.e1, h) * G.grad_perp(cd.e2, h), axis=(2, 3))
    res = lp_norm(lap - rhs, 1, sd, g).value
    scale = lp_norm(lap, 1, sd, g).value
    mu, wrep = wente_solve(cd.e1, cd.e2, sd, g)
    nu = np.where(mu.mask, cd.lam - mu.values, np.nan)
    harmonic = G.laplacian(nu, h)
    hsd = sd.scaled(0.9)
    harm_res = lp_norm(np.nan_to_num(harmonic), 1, hsd, g).value
    gl_w = weak_l2_quasinorm(G.grad(cd.lam, h), sd, g).value
    eps2 = energy(cd, sd)
    hr = harnack_ratio(cd.lam, inner, g).value
    out = {
        "identity_l1": res,
        "laplace_lambda_l1": scale,
        "wente_lhs": wrep["lhs"],
        "wente_product": wrep["product"],
        "wente_ratio": wrep.values.get("ratio", 0.0),
        "nu_harmonic_l1": harm_res,
        "grad_lambda_weak_l2": gl_w,
        "energy": eps2,
        "harnack_ratio": hr,
    }
    data = gl_w + eps2
    out["harnack_log_over_data"] = math.log(hr) / data if data > 0 else 0.0
    return out
