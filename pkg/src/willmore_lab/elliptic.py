"""Elliptic solves on subdisks D_rho(c) of the grid.

Dirichlet problems use the Shortley-Weller five-point stencil: arms that
leave the disk are shortened to the boundary crossing, where the Dirichlet
value is imposed. The resulting matrix is not symmetric, so each domain is
factorized once with a sparse LU and reused.

Potentials with prescribed gradient are recovered by least squares over the
grid edges inside the disk. The normal equations are the graph Laplacian
with natural boundary conditions, i.e. a discrete form of Delta L = div G.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RegularGridInterpolator

from . import grid as G
from .grid import DiskGrid, GridField, Subdisk, UNIT_DISK
from .norms import lp_norm, weak_l2_quasinorm, magnitude

DEFAULT_TOL = 1e-10
MIN_ARM = 1e-8  # arms shorter than this fraction of h are clamped


@dataclass
class SolveReport:
    iterations: int
    residual: float
    tolerance: float
    method: str = "sparse LU"


class SolverFailure(RuntimeError):
    def __init__(self, msg: str, report: SolveReport):
        super().__init__(msg)
        self.report = report


class CompatibilityWarning(UserWarning):
    pass


@dataclass
class ProbeReport:
    experiment: str
    values: dict[str, float] = field(default_factory=dict)
    status: str = "ok"
    notes: list[str] = field(default_factory=list)

    def __getitem__(self, key: str) -> float:
        return self.values[key]


# ---------------------------------------------------------------------------
# Dirichlet problems


class DirichletDomain:
    """Node set |x - c| < rho with Shortley-Weller arms to the circle."""

    def __init__(self, grid: DiskGrid, sd: Subdisk):
        self.grid = grid
        self.sd = grid.check_subdisk(sd)
        self.mask = grid.subdisk_mask(sd)
        n, h = grid.n, grid.h
        ii, jj = np.nonzero(self.mask)
        self.nodes = (ii, jj)
        self.count = ii.size
        index = -np.ones((n, n), dtype=np.int64)
        index[ii, jj] = np.arange(self.count)
        self.index = index
        X1, X2 = grid.coords
        px, py = X1[ii, jj] - sd.cx, X2[ii, jj] - sd.cy

        # arms[d] for directions (+x1, -x1, +x2, -x2), as fractions of h
        self.arms = np.ones((4, self.count))
        self.neighbor = -np.ones((4, self.count), dtype=np.int64)
        self.cross_pts = np.zeros((4, self.count, 2))
        dirs = [(1, 0), (-1, 0), (0, 1), (0, -1)]
        for d, (di, dj) in enumerate(dirs):
            ni, nj = ii + di, jj + dj
            inside = (ni >= 0) & (ni < n) & (nj >= 0) & (nj < n)
            nb = np.where(inside, index[np.clip(ni, 0, n - 1), np.clip(nj, 0, n - 1)], -1)
            self.neighbor[d] = nb
            out = nb < 0
            # crossing: |p + s*e| = rho, s in (0, h]
            pe = px * di + py * dj
            pp = px**2 + py**2
            s = -pe + np.sqrt(np.maximum(pe**2 - pp + sd.radius**2, 0.0))
            theta = np.clip(s / h, MIN_ARM, 1.0)
            self.arms[d] = np.where(out, theta, 1.0)
            self.cross_pts[d, :, 0] = X1[ii, jj] + di * self.arms[d] * h
            self.cross_pts[d, :, 1] = X2[ii, jj] + dj * self.arms[d] * h
        self.boundary_arm = self.neighbor < 0
        self._assemble()

    def _assemble(self) -> None:
        h = self.grid.h
        N = self.count
        rows, cols, vals = [], [], []
        diag = np.zeros(N)
        self.bcoef = np.zeros((4, N))
        for axis, (dp, dm) in enumerate([(0, 1), (2, 3)]):
            hp, hm = self.arms[dp] * h, self.arms[dm] * h
            cp = 2.0 / (hp * (hp + hm))
            cm = 2.0 / (hm * (hp + hm))
            diag -= 2.0 / (hp * hm)
            for d, c in ((dp, cp), (dm, cm)):
                inner = ~self.boundary_arm[d]
                rows.append(np.nonzero(inner)[0])
                cols.append(self.neighbor[d][inner])
                vals.append(c[inner])
                self.bcoef[d] = np.where(self.boundary_arm[d], c, 0.0)
        rows.append(np.arange(N))
        cols.append(np.arange(N))
        vals.append(diag)
        A = sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)
        )
        self.matrix = A
        self.lu = spla.splu(A)

    def boundary_values(self, boundary, ncomp: int) -> np.ndarray:
        """Dirichlet data at every crossing point, shape (4, N, ncomp)."""
        out = np.zeros((4, self.count, ncomp))
        if boundary is None:
            return out
        if np.isscalar(boundary):
            out[:] = float(boundary)
            return out
        pts = self.cross_pts.reshape(-1, 2)
        if callable(boundary):
            vals = np.asarray(boundary(pts[:, 0], pts[:, 1]), float)
        else:
            arr = boundary.values if isinstance(boundary, GridField) else np.asarray(boundary, float)
            flat = arr.reshape(self.grid.n, self.grid.n, -1)
            vals = np.stack(
                [
                    RegularGridInterpolator((self.grid.x, self.grid.x), flat[:, :, c], method="cubic")(pts)
                    for c in range(flat.shape[2])
                ],
                axis=-1,
            )
        vals = vals.reshape(4 * self.count, -1)
        if vals.shape[1] != ncomp:
            raise ValueError("boundary data has the wrong number of components")
        # only arms that actually cross carry data
        return np.where(self.boundary_arm[:, :, None], vals.reshape(4, self.count, ncomp), 0.0)

    def solve(self, rhs: np.ndarray, boundary=None, tol: float = DEFAULT_TOL) -> "DirichletSolution":
        rhs = np.asarray(rhs, float)
        comp_shape = rhs.shape[2:]
        flat = rhs.reshape(self.grid.n, self.grid.n, -1)
        ncomp = flat.shape[2]
        b_data = self.boundary_values(boundary, ncomp)
        ii, jj = self.nodes
        b = flat[ii, jj, :].copy()
        if not np.all(np.isfinite(b)):
            raise ValueError("right-hand side is undefined inside the solve domain")
        b -= np.einsum("dn,dnc->nc", self.bcoef, b_data)
        u = self.lu.solve(b)
        res, bnorm = self._residual(u, b)
        iters = 1
        # one round of iterative refinement if the factorization lost digits
        while res > tol * max(bnorm, 1.0) and iters < 3:
            u = u + self.lu.solve(b - self.matrix @ u)
            res, bnorm = self._residual(u, b)
            iters += 1
        rel = res / bnorm if bnorm > 0 else res
        report = SolveReport(iters, rel, tol)
        if rel > tol and res > tol:
            raise SolverFailure(f"Dirichlet solve residual {rel:.3e} above tolerance {tol:.1e}", report)
        full = np.full((self.grid.n, self.grid.n, ncomp), np.nan)
        full[ii, jj] = u
        return DirichletSolution(self, full.reshape((self.grid.n, self.grid.n) + comp_shape), u, b_data, comp_shape, report)

    def _residual(self, u, b):
        r = self.matrix @ u - b
        return float(np.linalg.norm(r)), float(np.linalg.norm(b))


@lru_cache(maxsize=64)
def dirichlet_domain(grid: DiskGrid, sd: Subdisk) -> DirichletDomain:
    return DirichletDomain(grid, sd)


@dataclass
class DirichletSolution:
    domain: DirichletDomain
    values: np.ndarray  # (n, n, *comp), NaN outside the domain
    _u: np.ndarray
    _bdata: np.ndarray
    comp_shape: tuple
    report: SolveReport

    def gradient(self) -> np.ndarray:
        """Second-order gradient using the boundary values at shortened arms."""
        dom = self.domain
        h = dom.grid.h
        u0 = self._u
        out = np.full((dom.grid.n, dom.grid.n, 2, u0.shape[1]), np.nan)
        ii, jj = dom.nodes
        for axis, (dp, dm) in enumerate([(0, 1), (2, 3)]):
            vals = []
            for d in (dp, dm):
                nb = dom.neighbor[d]
                vals.append(np.where(dom.boundary_arm[d][:, None], self._bdata[d], dom_get(u0, nb)))
            up, um = vals
            hp = (dom.arms[dp] * h)[:, None]
            hm = (dom.arms[dm] * h)[:, None]
            g = (-hp / (hm * (hp + hm))) * um + ((hp - hm) / (hp * hm)) * u0 + (hm / (hp * (hp + hm))) * up
            out[ii, jj, axis] = g
        return out.reshape((dom.grid.n, dom.grid.n, 2) + self.comp_shape)


def dom_get(u: np.ndarray, nb: np.ndarray) -> np.ndarray:
    safe = np.where(nb < 0, 0, nb)
    return u[safe]


def poisson_dirichlet(
    rhs, boundary=None, subdisk: Subdisk = UNIT_DISK, grid: DiskGrid | None = None, tol: float = DEFAULT_TOL
) -> tuple[GridField, SolveReport]:
    """Solve Delta u = rhs in the subdisk with u = boundary on its circle."""
    if isinstance(rhs, GridField):
        grid = rhs.grid
        rhs = rhs.values
    if grid is None:
        raise ValueError("a grid is required for raw arrays")
    sol = dirichlet_domain(grid, subdisk).solve(rhs, boundary, tol)
    kind = "scalar" if sol.values.ndim == 2 else "ambient"
    return GridField(grid, sol.values, kind, sol.domain.mask), sol.report


def solve_dirichlet(grid: DiskGrid, sd: Subdisk, rhs, boundary=None, tol: float = DEFAULT_TOL) -> DirichletSolution:
    return dirichlet_domain(grid, sd).solve(rhs, boundary, tol)


# ---------------------------------------------------------------------------
# potentials from gradient data


@dataclass
class PotentialReport:
    defect_l2: float  # sqrt(sum_e r_e^2 h^2), edge residual of grad u - G
    data_l2: float
    relative_defect: float
    compatible: bool
    nodal_defect_l2: float = 0.0  # centred-difference gradient vs G at full-stencil nodes


class EdgeDomain:
    """Edges between adjacent nodes of D_rho(c); least-squares gradient fits."""

    def __init__(self, grid: DiskGrid, sd: Subdisk):
        self.grid = grid
        self.sd = grid.check_subdisk(sd)
        self.mask = grid.subdisk_mask(sd)
        n = grid.n
        ii, jj = np.nonzero(self.mask)
        self.nodes = (ii, jj)
        self.count = ii.size
        index = -np.ones((n, n), dtype=np.int64)
        index[ii, jj] = np.arange(self.count)
        self.index = index
        edges = []
        for axis, (di, dj) in enumerate([(1, 0), (0, 1)]):
            a = index[: n - di, : n - dj]
            b = index[di:, dj:]
            ok = (a >= 0) & (b >= 0)
            edges.append((axis, a[ok], b[ok]))
        self.edges = edges
        E = sum(e[1].size for e in edges)
        rows = np.arange(E)
        tail = np.concatenate([e[1] for e in edges])
        head = np.concatenate([e[2] for e in edges])
        h = grid.h
        D = sp.csr_matrix(
            (np.concatenate([-np.ones(E) / h, np.ones(E) / h]), (np.concatenate([rows, rows]), np.concatenate([tail, head]))),
            shape=(E, self.count),
        )
        self.D = D
        # pin node 0 to remove the constant kernel
        Lap = (D.T @ D).tocsc()[1:, 1:]
        self.lu = spla.splu(Lap.tocsc())

    def edge_data(self, Gv: np.ndarray) -> np.ndarray:
        """Average of the endpoint components along each edge: (E, ncomp)."""
        ii, jj = self.nodes
        parts = []
        for axis, a, b in self.edges:
            comp = Gv[ii, jj, axis]  # (N, ncomp)
            parts.append(0.5 * (comp[a] + comp[b]))
        return np.concatenate(parts, axis=0)

    def fit(
        self, Gv: np.ndarray, compat_tol: float = 1e-2, abs_floor: float = 0.0
    ) -> tuple[np.ndarray, PotentialReport]:
        """u minimizing sum_e ((u_j - u_i)/h - G_e)^2, mean zero over nodes."""
        Gv = np.asarray(Gv, float)
        comp_shape = Gv.shape[3:]
        flat = Gv.reshape(self.grid.n, self.grid.n, 2, -1)
        ii, jj = self.nodes
        if not np.all(np.isfinite(flat[ii, jj])):
            raise ValueError("gradient data is undefined inside the domain")
        P = self.edge_data(flat)
        rhs = (self.D.T @ P)[1:]
        u = np.zeros((self.count, P.shape[1]))
        u[1:] = self.lu.solve(np.asarray(rhs))
        u -= u.mean(axis=0)
        r = self.D @ u - P
        h2 = self.grid.h**2
        defect = float(np.sqrt(np.sum(r**2) * h2))
        data = float(np.sqrt(np.sum(P**2) * h2))
        rel = defect / data if data > 0 else 0.0
        ok = rel <= compat_tol or defect <= abs_floor
        full = np.full((self.grid.n, self.grid.n, P.shape[1]), np.nan)
        full[ii, jj] = u
        inner = G.stencil_mask(self.mask)
        nodal = G.grad(full, self.grid.h) - flat
        nodal_l2 = float(np.sqrt(np.sum(nodal[inner] ** 2) * h2)) if inner.any() else 0.0
        rep = PotentialReport(defect, data, rel, ok, nodal_l2)
        return full.reshape((self.grid.n, self.grid.n) + comp_shape), rep


@lru_cache(maxsize=64)
def edge_domain(grid: DiskGrid, sd: Subdisk) -> EdgeDomain:
    return EdgeDomain(grid, sd)


def _fit(Gv, grid, sd, compat_tol, label, abs_floor=0.0):
    u, rep = edge_domain(grid, sd).fit(Gv, compat_tol, abs_floor)
    if not rep.compatible:
        warnings.warn(
            f"{label}: relative reconstruction defect {rep.relative_defect:.3e} exceeds {compat_tol:.1e}",
            CompatibilityWarning,
            stacklevel=3,
        )
    return u, rep


def _unwrap(Gf, grid):
    if isinstance(Gf, GridField):
        return Gf.values, Gf.grid
    if grid is None:
        raise ValueError("a grid is required for raw arrays")
    return np.asarray(Gf, float), grid


def potential_from_curlfree(
    Gf,
    subdisk: Subdisk = UNIT_DISK,
    grid: DiskGrid | None = None,
    compat_tol: float = 1e-2,
    abs_floor: float = 0.0,
) -> tuple[np.ndarray, PotentialReport]:
    """R with grad R = G, mean zero on the subdisk. G has shape (n, n, 2, ...)."""
    Gv, grid = _unwrap(Gf, grid)
    return _fit(Gv, grid, subdisk, compat_tol, "curl-free potential", abs_floor)


def potential_from_divfree(
    Gf,
    subdisk: Subdisk = UNIT_DISK,
    grid: DiskGrid | None = None,
    compat_tol: float = 1e-2,
    abs_floor: float = 0.0,
) -> tuple[np.ndarray, PotentialReport]:
    """L with grad-perp L = G, i.e. grad L = (G2, -G1), mean zero."""
    Gv, grid = _unwrap(Gf, grid)
    rot = np.stack([Gv[:, :, 1], -Gv[:, :, 0]], axis=2)
    return _fit(rot, grid, subdisk, compat_tol, "divergence-free potential", abs_floor)


# ---------------------------------------------------------------------------
# Wente problems


def jacobian_rhs(a: np.ndarray, b: np.ndarray, h: float) -> np.ndarray:
    """grad a . grad-perp b, summed over trailing component axes."""
    ga, gb = G.grad(a, h), G.grad_perp(b, h)
    prod = ga * gb
    prod = prod.reshape(prod.shape[0], prod.shape[1], -1)
    return prod.sum(axis=-1)


def wente_solve(
    a, b, subdisk: Subdisk = UNIT_DISK, grid: DiskGrid | None = None, tol: float = DEFAULT_TOL
) -> tuple[GridField, ProbeReport]:
    """mu with Delta mu = grad a . grad-perp b, mu = 0 on the circle.

    ``a`` and ``b`` are sampled on the whole square so the centred stencils
    near the circle are fed. Vector-valued inputs are contracted componentwise.
    """
    if isinstance(a, GridField):
        grid, a = a.grid, a.values
    if isinstance(b, GridField):
        b = b.values
    h = grid.h
    rhs = jacobian_rhs(a, b, h)
    sol = solve_dirichlet(grid, subdisk, rhs, None, tol)
    mu = sol.values
    gmu = sol.gradient()
    mu_inf = lp_norm(mu, np.inf, subdisk, grid).value
    gmu_l2 = lp_norm(gmu, 2, subdisk, grid).value
    ga = lp_norm(G.grad(a, h), 2, subdisk, grid).value
    gb = lp_norm(G.grad(b, h), 2, subdisk, grid).value
    lhs = mu_inf + gmu_l2
    prod = ga * gb
    rep = ProbeReport("wente")
    rep.values.update(mu_inf=mu_inf, grad_mu_l2=gmu_l2, lhs=lhs, grad_a_l2=ga, grad_b_l2=gb, product=prod,
                      residual=sol.report.residual)
    if prod > 0:
        rep.values["ratio"] = lhs / prod
    elif lhs == 0:
        rep.values["ratio"] = 0.0
        rep.status = "degenerate"
    else:
        rep.status = "degenerate"
    return GridField(grid, mu, "scalar", sol.domain.mask), rep


# ---------------------------------------------------------------------------
# weak-L2 potential lemma


def negative_norm_surrogate(Gv: np.ndarray, grid: DiskGrid, sd: Subdisk) -> float:
    """L^2 size of the primitives of G = grad a + grad-perp b (mean-zero a, b)."""
    if not np.any(Gv[grid.subdisk_mask(sd)]):
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompatibilityWarning)
        a, _ = potential_from_curlfree(Gv, sd, grid)
        ga = edge_gradient(a, grid, sd)
        rest = Gv - ga
        b, _ = potential_from_divfree(rest, sd, grid)
    return lp_norm(np.nan_to_num(a), 2, sd, grid).value + lp_norm(np.nan_to_num(b), 2, sd, grid).value


def edge_gradient(u: np.ndarray, grid: DiskGrid, sd: Subdisk) -> np.ndarray:
    """Nodal gradient of a least-squares potential: averaged adjacent edge slopes."""
    mask = grid.subdisk_mask(sd)
    h = grid.h
    u = np.asarray(u, float)
    flat = u.reshape(grid.n, grid.n, -1)
    out = np.zeros((grid.n, grid.n, 2, flat.shape[2]))
    for axis in (0, 1):
        fw = np.full(flat.shape, np.nan)
        if axis == 0:
            fw[:-1] = (flat[1:] - flat[:-1]) / h
            ok = np.zeros(mask.shape, bool)
            ok[:-1] = mask[:-1] & mask[1:]
        else:
            fw[:, :-1] = (flat[:, 1:] - flat[:, :-1]) / h
            ok = np.zeros(mask.shape, bool)
            ok[:, :-1] = mask[:, :-1] & mask[:, 1:]
        fw = np.where(ok[..., None], fw, 0.0)
        bw = np.roll(fw, 1, axis=axis)
        okb = np.roll(ok, 1, axis=axis)
        cnt = ok.astype(float) + okb.astype(float)
        out[:, :, axis] = (fw + bw) / np.maximum(cnt, 1.0)[..., None]
    return out.reshape((grid.n, grid.n, 2) + u.shape[2:])


def weak_lemma_check(G1, G2, subdisk: Subdisk = UNIT_DISK, grid: DiskGrid | None = None) -> ProbeReport:
    """||L - L_D||_{L^{2,inf}} against ||G1||_{W^{-1,2}} + ||G2||_{L^1}."""
    G1v, grid = _unwrap(G1, grid)
    G2v, _ = _unwrap(G2, grid)
    total = G1v + G2v
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompatibilityWarning)
        L, prep = potential_from_divfree(total, subdisk, grid)
    num = weak_l2_quasinorm(L, subdisk, grid).value
    s1 = negative_norm_surrogate(G1v, grid, subdisk)
    s2 = lp_norm(G2v, 1, subdisk, grid).value
    rep = ProbeReport("weak_lemma")
    rep.values.update(weak_l2=num, g1_surrogate=s1, g2_l1=s2, defect=prep.relative_defect)
    den = s1 + s2
    if den > 0:
        rep.values["ratio"] = num / den
    else:
        rep.status = "degenerate"
        rep.values["ratio"] = float("nan")
    return rep


# ---------------------------------------------------------------------------
# decay probe for Delta u = grad b . grad-perp u + div(b grad f)


def morrey_decay_probe(
    b,
    f,
    p: float,
    subdisk: Subdisk = UNIT_DISK,
    grid: DiskGrid | None = None,
    s: float | None = None,
    max_iter: int = 50,
    tol: float = 1e-10,
) -> ProbeReport:
    """Synthesize u by Picard iteration and compare both sides of the decay bound.

    F is taken to be the Laplacian of f. The default exponent s is the
    midpoint of (2, 2/(2-p)).
    """
    if not 1 < p < 2:
        raise ValueError("p must lie in (1, 2)")
    if isinstance(b, GridField):
        grid, b = b.grid, b.values
    if isinstance(f, GridField):
        f = f.values
    h = grid.h
    s = 1.0 + 1.0 / (2.0 - p) if s is None else s
    if not s < 2.0 / (2.0 - p):
        raise ValueError("s must be below 2/(2-p)")
    rho = subdisk.radius
    gb = G.grad(b, h)
    src = G.div(b[:, :, None] * G.grad(f, h), h)
    dom = dirichlet_domain(grid, subdisk)
    rep = ProbeReport("morrey_decay")
    u = np.zeros((grid.n, grid.n))
    gu = np.zeros((grid.n, grid.n, 2))
    prev_inc = np.inf
    status = "inconclusive"
    it = 0
    for it in range(1, max_iter + 1):
        rhs = np.einsum("ijk,ijk->ij", gb, G.perp(np.nan_to_num(gu))) + src
        sol = dom.solve(rhs)
        new = np.nan_to_num(sol.values)
        inc = float(np.max(np.abs(new - u)))
        scale = max(float(np.max(np.abs(new))), 1e-300)
        u, gu = new, sol.gradient()
        if inc <= tol * scale or inc == 0.0:
            status = "ok"
            break
        if inc >= prev_inc and it > 2:
            status = "inconclusive"
            break
        prev_inc = inc
    rep.values.update(iterations=float(it), s=s, p=p)
    inner = subdisk.scaled(5.0 / 8.0)
    gu_nan = np.where(dom.mask[..., None], gu, np.nan)
    lhs = lp_norm(np.nan_to_num(gu_nan), s, inner, grid).value
    gu_w = weak_l2_quasinorm(np.nan_to_num(gu_nan), subdisk, grid).value
    F = G.laplacian(f, h)
    F_p = lp_norm(F, p, subdisk, grid).value
    rhs_val = rho ** (2 / s - 1) * gu_w + rho ** (2 / s - 2 / p + 1) * F_p
    rep.values.update(lhs=lhs, grad_u_weak_l2=gu_w, F_lp=F_p, rhs=rhs_val,
                      grad_b_l2=lp_norm(gb, 2, subdisk, grid).value)
    if status != "ok":
        rep.status = "inconclusive"
        rep.values["ratio"] = float("nan")
    elif rhs_val > 0:
        rep.values["ratio"] = lhs / rhs_val
    else:
        rep.values["ratio"] = 0.0
        rep.status = "degenerate"
    rep._u = u  # exposed for tests
    return rep
