"""Willmore operator in classical and divergence form, and inhomogeneities.

Sign relation between the two forms, checked pointwise on analytic surfaces:

    div(∇H - 2π_n∇H + |H|²∇Φ) = -e^{2λ} (Δ⊥H + <A·H, A>_g - 2|H|²H).

So a classical target W corresponds to the divergence-form datum
v = -e^{2λ} W. :class:`Inhomogeneity` stores both.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import grid as G
from . import multivec as mv
from .geometry import CurvatureData
from .grid import Subdisk, UNIT_DISK
from .norms import lp_norm


class UnsupportedCodimensionError(ValueError):
    pass


class DivergenceDefectWarning(UserWarning):
    pass


def _grad(cd: CurvatureData, f: np.ndarray) -> np.ndarray:
    return G.grad(f, cd.grid.h)


def laplace_perp(cd: CurvatureData, H: np.ndarray | None = None) -> np.ndarray:
    """Δ⊥H = e^{-2λ} π_n div(π_n ∇H)."""
    H = cd.H if H is None else H
    h = cd.grid.h
    inner = cd.proj_n(G.grad(H, h))
    return np.exp(-2 * cd.lam)[..., None] * cd.proj_n(G.div(inner, h))


def a_h_a(cd: CurvatureData) -> np.ndarray:
    """<A·H, A>_g = e^{-4λ} Σ_ij (A_ij·H) A_ij."""
    AH = np.einsum("xyijk,xyk->xyij", cd.A, cd.H)
    return np.exp(-4 * cd.lam)[..., None] * np.einsum("xyij,xyijk->xyk", AH, cd.A)


def classical_operator(cd: CurvatureData) -> np.ndarray:
    H2 = np.sum(cd.H**2, -1)
    return laplace_perp(cd) + a_h_a(cd) - 2 * H2[..., None] * cd.H


def classical_residual(cd: CurvatureData, W: np.ndarray | None = None) -> np.ndarray:
    r = classical_operator(cd)
    return r if W is None else r - W


def base_flux(cd: CurvatureData) -> np.ndarray:
    """∇H - 2π_n∇H + |H|²∇Φ, shape (n, n, 2, m)."""
    gH = _grad(cd, cd.H)
    H2 = np.sum(cd.H**2, -1)
    return gH - 2 * cd.proj_n(gH) + H2[:, :, None, None] * cd.dphi


@dataclass
class Inhomogeneity:
    tag: str = "none"
    T: np.ndarray | None = None  # (n, n, 2, m)
    v: np.ndarray | None = None  # (n, n, m)
    W: np.ndarray | None = None  # classical-form target, when meaningful
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


NO_DATA = Inhomogeneity()


def divergence_flux(cd: CurvatureData, inh: Inhomogeneity = NO_DATA) -> tuple[np.ndarray, np.ndarray]:
    flux = base_flux(cd)
    if inh.T is not None:
        flux = flux + inh.T
    res = G.div(flux, cd.grid.h)
    if inh.v is not None:
        res = res - inh.v
    return flux, res


# ---------------------------------------------------------------------------
# q presets: q11 - i q12 holomorphic makes q divergence-free and trace-free


def q_from_coeffs(cd: CurvatureData, coeffs) -> np.ndarray:
    """q11 - i q12 = sum_k c_k z^k for complex coefficients c_k."""
    X1, X2 = cd.grid.coords
    z = X1 + 1j * X2
    w = sum(complex(c) * z**k for k, c in enumerate(coeffs))
    return np.stack([w.real, -w.imag], axis=-1)


Q_PRESETS = {
    "zero": [0],
    "constant": [1],
    "linear": [0, 1],
    "quadratic": [0, 0, 1],
    "mixed": [0.5, 1 - 0.5j, 0.25j],
}


def q_divergence(cd: CurvatureData, q: np.ndarray) -> np.ndarray:
    h = cd.grid.h
    q11, q12 = q[..., 0], q[..., 1]
    return np.stack([G.d1(q11, h) + G.d2(q12, h), G.d1(q12, h) - G.d2(q11, h)], axis=-1)


def umbilic_term(cd: CurvatureData, q: np.ndarray) -> np.ndarray:
    """(h0)_ij q^ij with both indices raised by g = e^{2λ}δ."""
    Q = np.stack([np.stack([q[..., 0], q[..., 1]], -1), np.stack([q[..., 1], -q[..., 0]], -1)], -2)
    return np.exp(-4 * cd.lam)[..., None] * np.einsum("xyij,xyijk->xyk", Q, cd.h0)


def build_inhomogeneity(tag: str, params: dict | None, cd: CurvatureData,
                        sd: Subdisk = UNIT_DISK, div_tol: float = 1e-6) -> Inhomogeneity:
    params = dict(params or {})
    n = cd.grid.n
    m = cd.m
    if tag == "none":
        return Inhomogeneity()
    if tag == "conformal_q":
        q = params.get("q", "zero")
        if isinstance(q, str):
            q = q_from_coeffs(cd, Q_PRESETS[q])
        elif "coeffs" in params:
            q = q_from_coeffs(cd, params["coeffs"])
        q = np.asarray(q, float)
        if q.shape != (n, n, 2):
            raise ValueError("q must hold (q11, q12) at every node")
        Mq = np.stack([np.stack([-q[..., 1], q[..., 0]], -1), np.stack([q[..., 0], q[..., 1]], -1)], -2)
        perp_phi = G.perp(cd.dphi)
        T = -np.exp(-2 * cd.lam)[:, :, None, None] * np.einsum("xyij,xyjk->xyik", Mq, perp_phi)
        dq = q_divergence(cd, q)
        defect = lp_norm(np.nan_to_num(dq), np.inf, sd.scaled(0.95), cd.grid).value
        scale = max(lp_norm(q, np.inf, sd, cd.grid).value, 1.0)
        if defect > div_tol * scale:
            warnings.warn(f"q has divergence defect {defect:.3e}", DivergenceDefectWarning, stacklevel=2)
        W = umbilic_term(cd, q)
        return Inhomogeneity("conformal_q", T=T, W=W, params={"q": "field"},
                             diagnostics={"q_divergence_defect": defect, "umbilic_term_max": lp_norm(W, np.inf, sd, cd.grid).value})
    if tag == "helfrich":
        if m != 3:
            raise UnsupportedCodimensionError("helfrich data needs m = 3")
        a, b, c = (float(params.get(k, 0.0)) for k in ("alpha", "beta", "gamma"))
        nh = cd.unit_normal
        scal = 2 * (b + a * cd.scalar_H + c * cd.K)
        W = scal[..., None] * nh
        v = -np.exp(2 * cd.lam)[..., None] * W
        return Inhomogeneity("helfrich", v=v, W=W, params={"alpha": a, "beta": b, "gamma": c})
    if tag == "chen":
        # the target is Δ_g H = 0; the cubic size bound is only probed
        lapH = np.exp(-2 * cd.lam)[..., None] * G.laplacian(cd.H, cd.grid.h)
        absA3 = (np.exp(-4 * cd.lam) * np.sum(cd.A**2, axis=(2, 3, 4))) ** 1.5
        num = lp_norm(np.nan_to_num(lapH), 2, sd.scaled(0.9), cd.grid).value
        den = lp_norm(absA3, 2, sd.scaled(0.9), cd.grid).value
        return Inhomogeneity("chen", params={}, diagnostics={
            "laplace_g_H_l2": num, "abs_A_cubed_l2": den, "ratio": num / den if den > 0 else 0.0})
    if tag == "cubic":
        c = float(params.get("c", 1.0))
        absA = np.sqrt(np.exp(-4 * cd.lam) * np.sum(cd.A**2, axis=(2, 3, 4)))
        nh = cd.unit_normal if m == 3 else None
        if nh is None:
            raise UnsupportedCodimensionError("cubic data needs m = 3")
        W = (c * absA**3)[..., None] * nh
        return Inhomogeneity("cubic", v=-np.exp(2 * cd.lam)[..., None] * W, W=W, params={"c": c})
    if tag == "self":
        # the surface's own defect as data, so div(F0 + ∇V) = 0 with -ΔV = v
        v = G.div(base_flux(cd), cd.grid.h)
        return Inhomogeneity("self", v=v, W=-np.exp(-2 * cd.lam)[..., None] * v, params={})
    if tag == "custom":
        return Inhomogeneity("custom", T=params.get("T"), v=params.get("v"), W=params.get("W"), params={})
    raise ValueError(f"unknown inhomogeneity tag {tag!r}")


# ---------------------------------------------------------------------------
# tangential/normal decomposition of T


@dataclass
class TDecomposition:
    A: np.ndarray  # (n, n, 2): A_i
    B: np.ndarray
    U: np.ndarray  # (n, n, 2, m)
    wedge_defect: float
    dot_defect: float


def t_decompose(T: np.ndarray, cd: CurvatureData, mask: np.ndarray | None = None) -> TDecomposition:
    """Write T_i = A_i ∂1Φ + B_i ∂2Φ + U_i with U_i normal, and check

    ∇Φ ∧ T = e^{2λ}(B1 - A2) ⋆n - U1∧∂1Φ - U2∧∂2Φ and ∇Φ·T = e^{2λ}(A1 + B2).
    """
    m = cd.m
    mask = cd.grid.subdisk_mask(UNIT_DISK) if mask is None else mask
    d = cd.dphi
    g11 = np.sum(d[:, :, 0] ** 2, -1)
    g22 = np.sum(d[:, :, 1] ** 2, -1)
    g12 = np.sum(d[:, :, 0] * d[:, :, 1], -1)
    det = g11 * g22 - g12**2
    t1 = np.einsum("xyik,xyk->xyi", T, d[:, :, 0])
    t2 = np.einsum("xyik,xyk->xyi", T, d[:, :, 1])
    A = (g22[..., None] * t1 - g12[..., None] * t2) / det[..., None]
    B = (g11[..., None] * t2 - g12[..., None] * t1) / det[..., None]
    U = T - A[..., None] * d[:, :, None, 0] - B[..., None] * d[:, :, None, 1]
    lhs_w = sum(mv.field_wedge(d[:, :, i], 1, T[:, :, i], 1, m) for i in range(2))
    e2l = np.exp(2 * cd.lam)
    rhs_w = (e2l * (B[..., 0] - A[..., 1]))[..., None] * cd.star_n \
        - mv.field_wedge(U[:, :, 0], 1, d[:, :, 0], 1, m) - mv.field_wedge(U[:, :, 1], 1, d[:, :, 1], 1, m)
    lhs_d = np.einsum("xyik,xyik->xy", d, T)
    rhs_d = e2l * (A[..., 0] + B[..., 1])
    scale = max(1.0, float(np.max(np.abs(T[mask]))) * float(np.max(e2l[mask])))
    wd = float(np.max(np.abs(lhs_w - rhs_w)[mask])) / scale
    dd = float(np.max(np.abs(lhs_d - rhs_d)[mask])) / scale
    return TDecomposition(A, B, U, wd, dd)


def tangential_bound_probe(cd: CurvatureData, sd: Subdisk = Subdisk(0.0, 0.0, 0.9)) -> dict[str, float]:
    """sup |π_T ∇H| / (e^λ |∇n|²) over nodes where |∇n| is not negligible."""
    g = cd.grid
    mask = g.subdisk_mask(sd)
    gH = G.grad(cd.H, g.h)
    tang = np.sqrt(np.sum(cd.proj_t(gH) ** 2, axis=(2, 3)))
    gn2 = np.sum(cd.grad_n**2, axis=(2, 3))
    den = np.exp(cd.lam) * gn2
    scale = float(np.max(den[mask])) if mask.any() else 0.0
    if scale == 0.0:
        return {"ratio": float("nan"), "status_degenerate": 1.0, "tangential_max": float(np.nanmax(tang[mask]))}
    ok = mask & (den > 1e-8 * scale)
    return {"ratio": float(np.max(tang[ok] / den[ok])), "status_degenerate": 0.0,
            "tangential_max": float(np.max(tang[mask]))}
