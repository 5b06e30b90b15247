"""Exterior algebra over R^m for 3 <= m <= 6.

Elements are stored sparsely as a map from strictly increasing index tuples
(1-based, as in e_1 ... e_m) to float coefficients. The empty tuple is the
scalar blade.

Besides the single-element :class:`MultiVector` API, the module exposes
dense structure tensors for the products restricted to pure grades. Field
code on grids uses those tensors with ``numpy.einsum`` so that the sign
bookkeeping is done once, by the exact algebra below.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

MIN_DIM = 3
MAX_DIM = 6


class DimensionError(ValueError):
    pass


class GradeError(ValueError):
    pass


def permutation_sign(seq: Iterable[int]) -> int:
    """Parity of the permutation sorting ``seq``; 0 if an entry repeats."""
    s = list(seq)
    if len(set(s)) != len(s):
        return 0
    sign = 1
    # count inversions, exact integer parity
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def basis_blades(m: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Basis k-blades of R^m in lexicographic order."""
    return tuple(combinations(range(1, m + 1), k))


@lru_cache(maxsize=None)
def blade_index(m: int, k: int) -> dict[tuple[int, ...], int]:
    return {b: i for i, b in enumerate(basis_blades(m, k))}


def _blade_wedge(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    s = permutation_sign(a + b)
    if s == 0:
        return 0, ()
    return s, tuple(sorted(a + b))


def _blade_interior(g: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    # <g ⌐ b, a> = <g, b ∧ a>; nonzero only when b ⊂ g with a = g \ b
    if len(b) > len(g) or not set(b) <= set(g):
        return 0, ()
    rest = tuple(i for i in g if i not in b)
    return permutation_sign(b + rest), rest


class MultiVector:
    """Sparse element of the exterior algebra of R^m."""

    __slots__ = ("ambient_dim", "_c")

    def __init__(self, ambient_dim: int, components: Mapping[tuple[int, ...], float] | None = None):
        if not MIN_DIM <= ambient_dim <= MAX_DIM:
            raise DimensionError(f"ambient dimension must lie in {MIN_DIM}..{MAX_DIM}, got {ambient_dim}")
        self.ambient_dim = ambient_dim
        self._c: dict[tuple[int, ...], float] = {}
        for key, val in (components or {}).items():
            key = tuple(int(i) for i in key)
            if any(i < 1 or i > ambient_dim for i in key):
                raise DimensionError(f"index out of range in blade {key}")
            sign = permutation_sign(key)
            if sign == 0:
                continue
            canon = tuple(sorted(key))
            self._c[canon] = self._c.get(canon, 0.0) + sign * float(val)
        self._c = {k: v for k, v in self._c.items() if v != 0.0}

    # constructors

    @classmethod
    def scalar(cls, m: int, value: float) -> "MultiVector":
        return cls(m, {(): value})

    @classmethod
    def basis(cls, m: int, *indices: int) -> "MultiVector":
        """e_{i1} ∧ ... ∧ e_{ik} (indices may be unsorted; sign follows)."""
        return cls(m, {tuple(indices): 1.0})

    @classmethod
    def vector(cls, coeffs: Iterable[float]) -> "MultiVector":
        c = [float(x) for x in coeffs]
        return cls(len(c), {(i + 1,): x for i, x in enumerate(c)})

    @classmethod
    def from_array(cls, m: int, k: int, arr) -> "MultiVector":
        arr = np.asarray(arr, dtype=float)
        blades = basis_blades(m, k)
        if arr.shape != (len(blades),):
            raise GradeError(f"expected {len(blades)} components for grade {k} in R^{m}")
        return cls(m, dict(zip(blades, arr.tolist())))

    # accessors

    @property
    def components(self) -> dict[tuple[int, ...], float]:
        return dict(self._c)

    def grades(self) -> set[int]:
        return {len(k) for k in self._c}

    def grade(self) -> int:
        """The grade of a homogeneous element (0 is homogeneous of every grade)."""
        g = self.grades()
        if len(g) > 1:
            raise GradeError(f"mixed-grade element with grades {sorted(g)}")
        return g.pop() if g else 0

    def project(self, k: int) -> "MultiVector":
        return MultiVector(self.ambient_dim, {b: v for b, v in self._c.items() if len(b) == k})

    def to_array(self, k: int) -> np.ndarray:
        idx = blade_index(self.ambient_dim, k)
        out = np.zeros(len(idx))
        for b, v in self._c.items():
            if len(b) == k:
                out[idx[b]] = v
        return out

    def coeff(self, *indices: int) -> float:
        s = permutation_sign(indices)
        return s * self._c.get(tuple(sorted(indices)), 0.0) if s else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self._c.values())

    # linear structure

    def _check(self, other: "MultiVector") -> None:
        if not isinstance(other, MultiVector):
            raise TypeError("expected a MultiVector")
        if other.ambient_dim != self.ambient_dim:
            raise DimensionError(f"ambient dimensions differ: {self.ambient_dim} vs {other.ambient_dim}")

    def __add__(self, other: "MultiVector") -> "MultiVector":
        self._check(other)
        c = dict(self._c)
        for b, v in other._c.items():
            c[b] = c.get(b, 0.0) + v
        return MultiVector(self.ambient_dim, c)

    def __neg__(self) -> "MultiVector":
        return MultiVector(self.ambient_dim, {b: -v for b, v in self._c.items()})

    def __sub__(self, other: "MultiVector") -> "MultiVector":
        return self + (-other)

    def __mul__(self, s: float) -> "MultiVector":
        return MultiVector(self.ambient_dim, {b: s * v for b, v in self._c.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "MultiVector") -> "MultiVector":
        return wedge(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiVector):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self._c == other._c

    def allclose(self, other: "MultiVector", tol: float = 1e-12) -> bool:
        self._check(other)
        return (self - other).is_zero(tol)

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self)))

    def __repr__(self) -> str:
        if not self._c:
            return f"MultiVector(m={self.ambient_dim}, 0)"
        terms = []
        for b in sorted(self._c, key=lambda t: (len(t), t)):
            name = "1" if not b else "e" + "".join(str(i) for i in b)
            terms.append(f"{self._c[b]:+g}*{name}")
        return f"MultiVector(m={self.ambient_dim}, {' '.join(terms)})"


def _bilinear(a: MultiVector, b: MultiVector, blade_op) -> MultiVector:
    a._check(b)
    out: dict[tuple[int, ...], float] = {}
    for ba, va in a._c.items():
        for bb, vb in b._c.items():
            s, blade = blade_op(ba, bb)
            if s:
                out[blade] = out.get(blade, 0.0) + s * va * vb
    return MultiVector(a.ambient_dim, out)


def wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    return _bilinear(a, b, _blade_wedge)


def inner(a: MultiVector, b: MultiVector) -> float:
    """Induced inner product; basis blades are orthonormal, distinct grades orthogonal."""
    a._check(b)
    return float(sum(v * b._c.get(k, 0.0) for k, v in a._c.items()))


def hodge_star(a: MultiVector) -> MultiVector:
    """Hodge star with the orientation a ∧ ⋆a = |a|² e_1∧...∧e_m."""
    a.grade()  # raises on mixed grades
    m = a.ambient_dim
    full = tuple(range(1, m + 1))
    out = {}
    for b, v in a._c.items():
        comp = tuple(i for i in full if i not in b)
        out[comp] = permutation_sign(b + comp) * v
    return MultiVector(m, out)


def interior_mult(gamma: MultiVector, beta: MultiVector) -> MultiVector:
    """γ ⌐ β, the adjoint of β ∧ ·. Zero when grade(β) exceeds grade(γ)."""
    return _bilinear(gamma, beta, _blade_interior)


def _bullet_blade(alpha: MultiVector, blade: tuple[int, ...]) -> MultiVector:
    m = alpha.ambient_dim
    if len(blade) == 0:
        return MultiVector(m)
    if len(blade) == 1:
        return interior_mult(alpha, MultiVector.basis(m, *blade))
    # split e_I = e_{i1} ∧ (rest): p = 1, q = k - 1
    first = MultiVector.basis(m, blade[0])
    rest = blade[1:]
    q = len(rest)
    term1 = wedge(_bullet_blade(alpha, (blade[0],)), MultiVector.basis(m, *rest))
    term2 = wedge(_bullet_blade(alpha, rest), first)
    return term1 + term2 * ((-1) ** q)


def bullet_contract(alpha: MultiVector, beta: MultiVector) -> MultiVector:
    """First-order contraction α • β.

    α • b = α ⌐ b on 1-vectors, and
    α • (β ∧ γ) = (α • β) ∧ γ + (-1)^{pq} (α • γ) ∧ β for β, γ of grades p, q.
    Grade-zero parts of β contribute nothing.
    """
    alpha._check(beta)
    out = MultiVector(alpha.ambient_dim)
    for b, v in beta._c.items():
        out = out + _bullet_blade(alpha, b) * v
    return out


def bullet_factored(alpha: MultiVector, beta: MultiVector, gamma: MultiVector) -> MultiVector:
    """Evaluate α • (β ∧ γ) through the recursion with the given factorization."""
    p, q = beta.grade(), gamma.grade()
    return wedge(bullet_contract(alpha, beta), gamma) + wedge(bullet_contract(alpha, gamma), beta) * ((-1) ** (p * q))


def dot_scalar_part(a: MultiVector, b: MultiVector) -> float:
    """Alias of :func:`inner`, the contraction written α · β for equal grades."""
    return inner(a, b)


# ---------------------------------------------------------------------------
# dense structure tensors for field computations

@lru_cache(maxsize=None)
def wedge_tensor(m: int, p: int, q: int) -> np.ndarray:
    """C with (a ∧ b)_c = sum_ab C[a, b, c] a_a b_b for grades p, q."""
    bp, bq = basis_blades(m, p), basis_blades(m, q)
    out_idx = blade_index(m, p + q) if p + q <= m else {}
    C = np.zeros((len(bp), len(bq), len(out_idx)))
    for i, a in enumerate(bp):
        for j, b in enumerate(bq):
            s, blade = _blade_wedge(a, b)
            if s:
                C[i, j, out_idx[blade]] = s
    C.setflags(write=False)
    return C


def _op_tensor(m: int, p: int, q: int, r: int, op) -> np.ndarray:
    bp, bq = basis_blades(m, p), basis_blades(m, q)
    br = blade_index(m, r)
    C = np.zeros((len(bp), len(bq), len(br)))
    for i, a in enumerate(bp):
        for j, b in enumerate(bq):
            res = op(MultiVector.basis(m, *a), MultiVector.basis(m, *b))
            for blade, v in res.components.items():
                if len(blade) != r:
                    raise GradeError("structure tensor output grade mismatch")
                C[i, j, br[blade]] = v
    C.setflags(write=False)
    return C


@lru_cache(maxsize=None)
def interior_tensor(m: int, q: int, p: int) -> np.ndarray:
    """C with (γ ⌐ β)_c = sum C[g, b, c] γ_g β_b, grades q >= p."""
    if p > q:
        raise GradeError("interior tensor needs grade(gamma) >= grade(beta)")
    return _op_tensor(m, q, p, q - p, interior_mult)


@lru_cache(maxsize=None)
def bullet_tensor(m: int, a: int, k: int) -> np.ndarray:
    """C with (α • β)_c = sum C[i, j, c] α_i β_j for grade(α)=a, grade(β)=k >= 1."""
    r = a + k - 2
    if k < 1 or r < 0 or r > m:
        raise GradeError("bullet tensor undefined for these grades")
    return _op_tensor(m, a, k, r, bullet_contract)


@lru_cache(maxsize=None)
def hodge_matrix(m: int, k: int) -> np.ndarray:
    """Matrix S with (⋆a) = S @ a for grade-k component vectors."""
    bk = basis_blades(m, k)
    out = blade_index(m, m - k)
    S = np.zeros((len(out), len(bk)))
    for j, b in enumerate(bk):
        for blade, v in hodge_star(MultiVector.basis(m, *b)).components.items():
            S[out[blade], j] = v
    S.setflags(write=False)
    return S


# field helpers: arrays whose last axis holds grade components

def field_wedge(a: np.ndarray, p: int, b: np.ndarray, q: int, m: int) -> np.ndarray:
    return np.einsum("...i,...j,ijc->...c", a, b, wedge_tensor(m, p, q))


def field_interior(g: np.ndarray, q: int, b: np.ndarray, p: int, m: int) -> np.ndarray:
    return np.einsum("...i,...j,ijc->...c", g, b, interior_tensor(m, q, p))


def field_bullet(a: np.ndarray, ga: int, b: np.ndarray, gb: int, m: int) -> np.ndarray:
    return np.einsum("...i,...j,ijc->...c", a, b, bullet_tensor(m, ga, gb))


def field_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, b)
