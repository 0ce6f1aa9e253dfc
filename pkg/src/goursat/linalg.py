"""Small dense complex linear algebra over any scalar backend.

binary64 matrices go through LAPACK (numpy / scipy).  Object-dtype matrices
(extended precision, Gaussian rationals) use the pure-Python LU below.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .scalars import Backend


@dataclass
class LU:
    lu: np.ndarray
    perm: list          # row permutation, LAPACK-style pivots for binary64
    sign: int
    backend: Backend
    lapack: bool = False

    @property
    def pivots(self):
        return [self.lu[k, k] for k in range(self.lu.shape[0])]

    def pivot_ratio(self) -> float:
        """min |u_kk| / max |u_kk|; zero for an exactly singular matrix."""
        mags = [abs(p) for p in self.pivots]
        top = max(mags, default=0)
        if top == 0:
            return 0.0
        return float(min(mags) / top)


def lu_factor(a: np.ndarray, backend: Backend) -> LU:
    """LU with partial pivoting (largest modulus in the column)."""
    n = a.shape[0]
    if a.dtype != object:
        with warnings.catch_warnings():
            # singularity is judged from the pivot ratio by the caller
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
        sign = -1 if np.count_nonzero(piv != np.arange(n)) % 2 else 1
        return LU(lu, list(piv), sign, backend, lapack=True)
    lu = a.copy()
    perm = list(range(n))
    sign = 1
    for k in range(n):
        best = max(range(k, n), key=lambda r: abs(lu[r, k]))
        if best != k:
            lu[[k, best]] = lu[[best, k]]
            perm[k], perm[best] = perm[best], perm[k]
            sign = -sign
        piv = lu[k, k]
        if not piv:
            continue
        for r in range(k + 1, n):
            if lu[r, k]:
                f = lu[r, k] / piv
                lu[r, k] = f
                lu[r, k + 1:] = lu[r, k + 1:] - lu[k, k + 1:] * f
    return LU(lu, perm, sign, backend)


def lu_solve(fac: LU, b: np.ndarray) -> np.ndarray:
    if fac.lapack:
        return scipy.linalg.lu_solve((fac.lu, np.asarray(fac.perm)), b, check_finite=False)
    lu = fac.lu
    n = lu.shape[0]
    y = np.empty(n, dtype=object)
    for i in range(n):
        acc = b[fac.perm[i]]
        for j in range(i):
            acc = acc - lu[i, j] * y[j]
        y[i] = acc
    x = np.empty(n, dtype=object)
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for j in range(i + 1, n):
            acc = acc - lu[i, j] * x[j]
        x[i] = acc / lu[i, i]
    return x


def det(a: np.ndarray, backend: Backend):
    if a.shape[0] == 0:
        return backend.one
    if a.dtype != object:
        return complex(np.linalg.det(a))
    fac = lu_factor(a, backend)
    out = backend.one if fac.sign > 0 else -backend.one
    for p in fac.pivots:
        out = out * p
    return out


def solve(a: np.ndarray, b: np.ndarray, backend: Backend) -> np.ndarray:
    return lu_solve(lu_factor(a, backend), b)


def cramer_solve(a: np.ndarray, b: np.ndarray, backend: Backend, det_a=None) -> np.ndarray:
    """x_i = det(a with column i replaced by b) / det(a)."""
    n = a.shape[0]
    d = det(a, backend) if det_a is None else det_a
    x = backend.zeros(n)
    for i in range(n):
        ai = a.copy()
        ai[:, i] = b
        x[i] = det(ai, backend) / d
    return x


def cond_estimate(a: np.ndarray) -> float:
    """2-norm condition number, evaluated in binary64."""
    c = np.array([[complex(v) for v in row] for row in a], dtype=np.complex128)
    with np.errstate(all="ignore"):
        return float(np.linalg.cond(c))
