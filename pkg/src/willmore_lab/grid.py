"""Uniform grid on [-1, 1]^2 covering the unit disk, plus flat calculus.

Arrays are indexed ``[i, j, ...]`` with ``i`` along x1 and ``j`` along x2.
Derivative operators insert the planar index as axis 2, so ``grad(f)[i, j, k]``
is the k-th partial of ``f`` at node (i, j).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

INTERIOR, BAND, EXTERIOR = 0, 1, 2


class DegenerateSubdiskError(ValueError):
    pass


class UndefinedValueError(ValueError):
    pass


@dataclass(frozen=True)
class Subdisk:
    cx: float
    cy: float
    radius: float

    @property
    def center(self) -> np.ndarray:
        return np.array([self.cx, self.cy])

    def half(self) -> "Subdisk":
        return Subdisk(self.cx, self.cy, self.radius / 2)

    def scaled(self, f: float) -> "Subdisk":
        return Subdisk(self.cx, self.cy, self.radius * f)


UNIT_DISK = Subdisk(0.0, 0.0, 1.0)


class DiskGrid:
    """Node-centred grid with ``n`` nodes per axis (odd, at least 33)."""

    def __init__(self, n: int):
        n = int(n)
        if n < 33 or n % 2 == 0:
            raise ValueError(f"grid size must be odd and >= 33, got {n}")
        self.n = n
        self.h = 2.0 / (n - 1)
        self.x = np.linspace(-1.0, 1.0, n)

    def __repr__(self) -> str:
        return f"DiskGrid(n={self.n})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DiskGrid) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("DiskGrid", self.n))

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        X1, X2 = np.meshgrid(self.x, self.x, indexing="ij")
        X1.setflags(write=False)
        X2.setflags(write=False)
        return X1, X2

    @cached_property
    def radius(self) -> np.ndarray:
        X1, X2 = self.coords
        return np.hypot(X1, X2)

    @cached_property
    def classification(self) -> np.ndarray:
        """INTERIOR for |x| < 1 - h/2, BAND up to 1 + h, EXTERIOR beyond."""
        r = self.radius
        cls = np.full(r.shape, EXTERIOR, dtype=np.int8)
        cls[r <= 1.0 + self.h] = BAND
        cls[r < 1.0 - self.h / 2] = INTERIOR
        return cls

    @property
    def interior(self) -> np.ndarray:
        return self.classification == INTERIOR

    @property
    def band(self) -> np.ndarray:
        return self.classification == BAND

    @property
    def exterior(self) -> np.ndarray:
        return self.classification == EXTERIOR

    def check_subdisk(self, sd: Subdisk) -> Subdisk:
        if sd.radius <= 0 or np.hypot(sd.cx, sd.cy) + sd.radius > 1.0 + 1e-12:
            raise DegenerateSubdiskError(f"subdisk {sd} is not contained in the unit disk")
        if sd.radius < self.h:
            raise DegenerateSubdiskError(f"subdisk radius {sd.radius} below grid spacing {self.h}")
        return sd

    def subdisk_mask(self, sd: Subdisk) -> np.ndarray:
        self.check_subdisk(sd)
        X1, X2 = self.coords
        mask = np.hypot(X1 - sd.cx, X2 - sd.cy) < sd.radius
        if not mask.any():
            raise DegenerateSubdiskError(f"subdisk {sd} contains no nodes")
        return mask

    def area(self, mask: np.ndarray) -> float:
        return float(np.count_nonzero(mask)) * self.h**2


@dataclass(frozen=True)
class GridField:
    """Values sampled on a grid; ``mask`` marks nodes carrying meaningful data.

    ``kind`` is one of ``scalar``, ``plane`` (R^2), ``ambient`` (R^m),
    ``plane_ambient`` (R^2 ⊗ R^m) or ``grade<k>`` (k-vector components).
    """

    grid: DiskGrid
    values: np.ndarray
    kind: str = "scalar"
    mask: np.ndarray | None = field(default=None)
    units: str = "dimensionless"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape[:2] != (self.grid.n, self.grid.n):
            raise ValueError("field values must start with the grid shape")
        object.__setattr__(self, "values", v)
        if self.mask is None:
            m = self.grid.classification != EXTERIOR
        else:
            m = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "mask", m)

    def at(self, i: int, j: int) -> np.ndarray:
        if not self.mask[i, j]:
            raise UndefinedValueError(f"node ({i}, {j}) carries no data for this field")
        return self.values[i, j]

    def with_values(self, values: np.ndarray, kind: str | None = None, mask: np.ndarray | None = None) -> "GridField":
        return GridField(self.grid, values, kind or self.kind, self.mask if mask is None else mask, self.units)


def restrict(f: GridField, sd: Subdisk) -> GridField:
    """Mask every node outside ``sd``; later norms see only the subdisk."""
    return GridField(f.grid, f.values, f.kind, f.mask & f.grid.subdisk_mask(sd), f.units)


# ---------------------------------------------------------------------------
# array-level operators. NaNs propagate from undefined nodes; the outermost
# ring of the square has no centred stencil and is NaN.

def _shift_diff(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    out = np.full(f.shape, np.nan)
    sl_c = [slice(None)] * f.ndim
    sl_p = [slice(None)] * f.ndim
    sl_m = [slice(None)] * f.ndim
    sl_c[axis], sl_p[axis], sl_m[axis] = slice(1, -1), slice(2, None), slice(None, -2)
    out[tuple(sl_c)] = (f[tuple(sl_p)] - f[tuple(sl_m)]) / (2 * h)
    return out


def d1(f: np.ndarray, h: float) -> np.ndarray:
    return _shift_diff(np.asarray(f, float), 0, h)


def d2(f: np.ndarray, h: float) -> np.ndarray:
    return _shift_diff(np.asarray(f, float), 1, h)


def grad(f: np.ndarray, h: float) -> np.ndarray:
    """Centred gradient; result has shape (n, n, 2, *f.shape[2:])."""
    return np.stack([d1(f, h), d2(f, h)], axis=2)


def perp(F: np.ndarray) -> np.ndarray:
    """Rotate the planar axis: (F1, F2) -> (-F2, F1)."""
    return np.stack([-F[:, :, 1], F[:, :, 0]], axis=2)


def grad_perp(f: np.ndarray, h: float) -> np.ndarray:
    return perp(grad(f, h))


def div(F: np.ndarray, h: float) -> np.ndarray:
    return d1(F[:, :, 0], h) + d2(F[:, :, 1], h)


def laplacian(f: np.ndarray, h: float) -> np.ndarray:
    """Five-point Laplacian."""
    f = np.asarray(f, float)
    out = np.full(f.shape, np.nan)
    out[1:-1, 1:-1] = (f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2] - 4 * f[1:-1, 1:-1]) / h**2
    return out


def grad_forward(f: np.ndarray, h: float) -> np.ndarray:
    f = np.asarray(f, float)
    g1 = np.full(f.shape, np.nan)
    g2 = np.full(f.shape, np.nan)
    g1[:-1] = (f[1:] - f[:-1]) / h
    g2[:, :-1] = (f[:, 1:] - f[:, :-1]) / h
    return np.stack([g1, g2], axis=2)


def div_backward(F: np.ndarray, h: float) -> np.ndarray:
    """Backward divergence; div_backward(grad_forward(f)) is the five-point Laplacian."""
    a, b = F[:, :, 0], F[:, :, 1]
    out1 = np.full(a.shape, np.nan)
    out2 = np.full(b.shape, np.nan)
    out1[1:] = (a[1:] - a[:-1]) / h
    out2[:, 1:] = (b[:, 1:] - b[:, :-1]) / h
    return out1 + out2


def stencil_mask(mask: np.ndarray, reach: int = 1) -> np.ndarray:
    """Nodes whose centred stencil of the given reach stays inside ``mask``."""
    out = mask.copy()
    for _ in range(reach):
        nxt = out.copy()
        nxt[0, :] = nxt[-1, :] = nxt[:, 0] = nxt[:, -1] = False
        nxt[1:-1, 1:-1] &= out[2:, 1:-1] & out[:-2, 1:-1] & out[1:-1, 2:] & out[1:-1, :-2]
        out = nxt
    return out


def diff_ops(f: GridField, op: str) -> GridField:
    """Apply ``grad``, ``grad_perp``, ``div`` or ``laplacian`` to a field.

    The result is masked to nodes whose whole stencil carries data.
    """
    h = f.grid.h
    vals = np.where(f.mask.reshape(f.mask.shape + (1,) * (f.values.ndim - 2)), f.values, np.nan)
    if op == "grad":
        out, kind = grad(vals, h), "plane" if f.kind == "scalar" else f"plane_{f.kind}"
    elif op == "grad_perp":
        out, kind = grad_perp(vals, h), "plane" if f.kind == "scalar" else f"plane_{f.kind}"
    elif op == "div":
        out, kind = div(vals, h), f.kind.removeprefix("plane_") if f.kind != "plane" else "scalar"
    elif op == "laplacian":
        out, kind = laplacian(vals, h), f.kind
    else:
        raise ValueError(f"unknown differential operator {op!r}")
    return GridField(f.grid, out, kind, stencil_mask(f.mask), f.units)


def observed_order(errors, sizes) -> np.ndarray:
    """Convergence orders log(e_k/e_{k+1}) / log(h_k/h_{k+1}) from node counts."""
    e = np.asarray(errors, float)
    hs = 2.0 / (np.asarray(sizes, float) - 1)
    return np.log(e[:-1] / e[1:]) / np.log(hs[:-1] / hs[1:])
