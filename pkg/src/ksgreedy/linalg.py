"""Dense complex linear algebra for small Hermitian matrices.

Everything here operates on d x d matrices with d in the tens at most, so the
routines favour clarity and deterministic floating-point behaviour over raw
speed: loops run over the (small) dimension and vectorise over the (large)
number of candidate vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonConvergence, NotPositiveDefinite, NumericalResidue

HERMITIAN_TOL = 1e-12
PIVOT_RTOL = 1e-14
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class HermitianMatrix:
    """Immutable d x d complex Hermitian matrix.

    The input is checked against its conjugate transpose (entrywise, relative
    to the largest entry) and then symmetrized so that the stored matrix is
    exactly Hermitian with a real diagonal.
    """

    __slots__ = ("_data",)

    def __init__(self, entries, tol=HERMITIAN_TOL):
        a = np.array(entries, dtype=np.complex128)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        scale = max(1.0, float(np.max(np.abs(a))))
        asym = float(np.max(np.abs(a - a.conj().T)))
        if asym > tol * scale:
            raise ValueError(f"matrix is not Hermitian (max |A - A*| = {asym:.3e})")
        self._data = _symmetrize(a)

    @classmethod
    def _trusted(cls, a):
        # internal fast path: caller guarantees a is exactly Hermitian
        obj = cls.__new__(cls)
        a.setflags(write=False)
        obj._data = a
        return obj

    @classmethod
    def zeros(cls, d):
        return cls._trusted(np.zeros((d, d), dtype=np.complex128))

    @classmethod
    def identity(cls, d):
        return cls._trusted(np.eye(d, dtype=np.complex128))

    @classmethod
    def diag(cls, values):
        return cls._trusted(np.diag(np.asarray(values, dtype=np.float64)).astype(np.complex128))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def trace(self) -> float:
        return float(np.sum(self._data.diagonal().real))

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self._data))

    def __add__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return HermitianMatrix._trusted(self._data + other._data)

    def __sub__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return HermitianMatrix._trusted(self._data - other._data)

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(np.array_equal(self._data, other._data))

    def __hash__(self):
        return hash(self._data.tobytes())

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"


@dataclass(frozen=True)
class LowerTriangularFactor:
    """Cholesky factor L with L L* = A and a strictly positive real diagonal."""

    L: np.ndarray

    @property
    def dim(self) -> int:
        return self.L.shape[0]


def _symmetrize(a):
    h = 0.5 * (a + a.conj().T)
    idx = np.diag_indices(h.shape[0])
    h[idx] = h[idx].real
    return h


def _check_dims(d, n):
    if d != n:
        raise DimensionMismatch(f"dimension mismatch: {d} vs {n}")


def _as_vector(v, d):
    x = np.asarray(v, dtype=np.complex128).reshape(-1)
    _check_dims(d, x.shape[0])
    return x


def outer_product_accumulate(A: HermitianMatrix, v) -> HermitianMatrix:
    """Return A + v v*."""
    x = _as_vector(v, A.dim)
    out = A.data + np.outer(x, x.conj())
    idx = np.diag_indices(A.dim)
    out[idx] = out[idx].real
    return HermitianMatrix._trusted(out)


def shifted(A: HermitianMatrix, u: float) -> HermitianMatrix:
    """Return u I - A."""
    out = -A.data
    idx = np.diag_indices(A.dim)
    out[idx] += u
    return HermitianMatrix._trusted(out)


def cholesky(A: HermitianMatrix) -> LowerTriangularFactor:
    """Factor A = L L*.

    Raises NotPositiveDefinite as soon as a pivot drops to or below
    1e-14 times the largest diagonal entry.
    """
    a = A.data
    d = A.dim
    dmax = float(np.max(a.diagonal().real))
    if not dmax > 0.0:
        raise NotPositiveDefinite("non-positive diagonal", pivot_index=0)
    tol = PIVOT_RTOL * dmax
    L = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        row = L[j, :j]
        pivot = a[j, j].real - float(np.sum(row.real**2 + row.imag**2))
        if not pivot > tol:
            raise NotPositiveDefinite(f"pivot {j} = {pivot:.3e} below tolerance {tol:.3e}", pivot_index=j)
        ljj = math.sqrt(pivot)
        L[j, j] = ljj
        if j + 1 < d:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ row.conj()) / ljj
    L.setflags(write=False)
    return LowerTriangularFactor(L)


def forward_solve(factor: LowerTriangularFactor, B: np.ndarray) -> np.ndarray:
    """Solve L Y = B for Y, with B of shape (d,) or (d, n).

    Each column is processed by the same sequence of elementwise operations,
    so a column's result does not depend on which other columns accompany it.
    """
    L = factor.L
    d = factor.dim
    B = np.asarray(B, dtype=np.complex128)
    _check_dims(d, B.shape[0])
    Y = np.empty_like(B)
    for k in range(d):
        acc = B[k].copy()
        for i in range(k):
            acc -= L[k, i] * Y[i]
        Y[k] = acc / L[k, k].real
    return Y


def back_solve(factor: LowerTriangularFactor, Y: np.ndarray) -> np.ndarray:
    """Solve L* X = Y for X."""
    L = factor.L
    d = factor.dim
    Y = np.asarray(Y, dtype=np.complex128)
    _check_dims(d, Y.shape[0])
    X = np.empty_like(Y)
    for k in range(d - 1, -1, -1):
        acc = Y[k].copy()
        for i in range(k + 1, d):
            acc -= np.conj(L[i, k]) * X[i]
        X[k] = acc / L[k, k].real
    return X


def log_det_factor(factor: LowerTriangularFactor) -> float:
    return 2.0 * float(np.sum(np.log(factor.L.diagonal().real)))


def log_det(A: HermitianMatrix) -> float:
    """log det A for positive definite A, via the Cholesky diagonal."""
    return log_det_factor(cholesky(A))


def quadratic_form_inverse(A: HermitianMatrix, v) -> float:
    """v* A^{-1} v using two triangular solves against the Cholesky factor."""
    x = _as_vector(v, A.dim)
    factor = cholesky(A)
    sol = back_solve(factor, forward_solve(factor, x))
    val = complex(np.vdot(x, sol))
    if abs(val.imag) > 1e-10 * abs(val.real) + 1e-12:
        raise NumericalResidue(f"quadratic form has imaginary part {val.imag:.3e}")
    return val.real


def quadratic_forms(factor: LowerTriangularFactor, vectors: np.ndarray) -> np.ndarray:
    """Batched v* A^{-1} v = ||L^{-1} v||^2 for the columns of a (d, n) array."""
    Y = forward_solve(factor, vectors)
    out = np.zeros(Y.shape[1:], dtype=np.float64)
    for k in range(factor.dim):
        out += Y[k].real ** 2 + Y[k].imag ** 2
    return out


def _off_norm(a):
    iu = np.triu_indices(a.shape[0], 1)
    return math.sqrt(2.0) * float(np.linalg.norm(a[iu]))


def hermitian_eigenvalues(A: HermitianMatrix, return_vectors=False):
    """Eigenvalues of A in descending order, by cyclic complex Jacobi rotations.

    With ``return_vectors`` the unitary Q (columns ordered like the
    eigenvalues) is returned as well, and the reconstruction residual is
    checked against 1e-9 ||A||_F.
    """
    a = np.array(A.data, dtype=np.complex128)
    d = A.dim
    Q = np.eye(d, dtype=np.complex128) if return_vectors else None
    norm = float(np.linalg.norm(a))
    target = JACOBI_TOL * norm
    sweeps = 0
    while _off_norm(a) > target:
        if sweeps >= JACOBI_MAX_SWEEPS:
            raise NonConvergence(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r  # e^{i phi}
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * np.conj(phase) * cq
                a[:, q] = s * cp + c * np.conj(phase) * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * phase * rq
                a[q, :] = s * rp + c * phase * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if Q is not None:
                    qp, qq = Q[:, p].copy(), Q[:, q].copy()
                    Q[:, p] = c * qp - s * np.conj(phase) * qq
                    Q[:, q] = s * qp + c * np.conj(phase) * qq
    w = a.diagonal().real.copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    if Q is None:
        return w
    Q = Q[:, order]
    resid = float(np.linalg.norm(A.data - (Q * w) @ Q.conj().T))
    if resid > 1e-9 * max(norm, np.finfo(float).tiny):
        raise NonConvergence(f"eigendecomposition residual {resid:.3e} too large")
    return w, Q


def condition_number(A: HermitianMatrix) -> float:
    """lambda_max / lambda_min of a positive definite matrix."""
    w = hermitian_eigenvalues(A)
    if not w[-1] > 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[-1]:.3e} is not positive")
    return float(w[0] / w[-1])
