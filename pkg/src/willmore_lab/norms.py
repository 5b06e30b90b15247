"""Norm functionals on subdisks: L^p, the weak-L^2 quasi-norm, Harnack ratio.

Quadrature is the node rule: every node with |x - c| < rho carries the
weight h^2. Non-scalar fields are measured by their pointwise Euclidean
magnitude over all component axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DegenerateSubdiskError, DiskGrid, GridField, Subdisk, UNIT_DISK, UndefinedValueError


@dataclass(frozen=True)
class NormValue:
    kind: str
    subdisk: Subdisk
    value: float

    def __float__(self) -> float:
        return self.value


def magnitude(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, float)
    if v.ndim == 2:
        return np.abs(v)
    return np.sqrt(np.sum(v.reshape(v.shape[0], v.shape[1], -1) ** 2, axis=-1))


def _samples(f, subdisk: Subdisk, grid: DiskGrid | None) -> tuple[np.ndarray, DiskGrid]:
    if isinstance(f, GridField):
        grid, vals, mask = f.grid, f.values, f.mask
    else:
        if grid is None:
            raise ValueError("a grid is required for raw arrays")
        vals, mask = np.asarray(f, float), None
    sel = grid.subdisk_mask(subdisk)
    if mask is not None:
        sel = sel & mask
    if not sel.any():
        raise DegenerateSubdiskError(f"no data nodes in {subdisk}")
    mag = magnitude(vals)[sel]
    if not np.all(np.isfinite(mag)):
        raise UndefinedValueError(f"field is undefined at {np.count_nonzero(~np.isfinite(mag))} nodes of {subdisk}")
    return mag, grid


def lp_norm(f, p: float, subdisk: Subdisk = UNIT_DISK, grid: DiskGrid | None = None) -> NormValue:
    mag, grid = _samples(f, subdisk, grid)
    if np.isinf(p):
        val = float(mag.max())
    else:
        if p < 1:
            raise ValueError("p must be at least 1")
        val = float((np.sum(mag**p) * grid.h**2) ** (1.0 / p))
    return NormValue(f"L{p:g}", subdisk, val)


def weak_l2_quasinorm(f, subdisk: Subdisk = UNIT_DISK, grid: DiskGrid | None = None) -> NormValue:
    """sup_t t |{|f| > t}|^{1/2} for the node-sampled distribution.

    The sup is exact for the sampled step function; it is attained as t
    increases to one of the node magnitudes, where the level set holds every
    node with at least that magnitude.
    """
    mag, grid = _samples(f, subdisk, grid)
    v = np.sort(mag)[::-1]
    counts = np.arange(1, v.size + 1)
    val = float(np.max(v * np.sqrt(counts)) * grid.h)
    return NormValue("weakL2", subdisk, val)


def harnack_ratio(lam, subdisk: Subdisk = UNIT_DISK, grid: DiskGrid | None = None) -> NormValue:
    if isinstance(lam, GridField):
        grid, vals = lam.grid, lam.values
    else:
        vals = np.asarray(lam, float)
    sel = grid.subdisk_mask(subdisk)
    l = vals[sel]
    if not np.all(np.isfinite(l)):
        raise ValueError("conformal factor is not finite on the subdisk")
    return NormValue("harnack_ratio", subdisk, float(np.exp(l.max()) * np.exp(-l.min())))


def mean_over(f: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.asarray(f, float)[mask].mean(axis=0)
