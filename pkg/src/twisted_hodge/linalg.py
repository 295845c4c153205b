"""Exact and numeric rank/kernel routines.

Exact ranks go through a fraction-free Bareiss elimination over Z[i].  The
compiled kernel is used when it imports and the input is small enough for
int64; otherwise the pure-Python kernel runs.  ``TWISTED_HODGE_PURE=1``
forces the pure-Python path.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import _bareiss_py
from .scalars import GaussianRational, conj

try:
    from ._bareiss import rank_gaussian_i64 as _rank_ext
except ImportError:  # pragma: no cover - depends on the build
    _rank_ext = None

#: log2 of the largest minor modulus the int64 kernel accepts
_EXT_LOG2_BOUND = 19

#: singular values below this fraction of the largest count as zero
NUMERIC_KERNEL_RTOL = 1e-8
#: minimum ratio between the smallest "nonzero" and largest "zero" value
GAP_RATIO = 10.0


class Indeterminate(ArithmeticError):
    """Numeric kernel dimension could not be separated by a clear spectral gap."""


def kernel_backend() -> str:
    if _rank_ext is not None and os.environ.get("TWISTED_HODGE_PURE") != "1":
        return "compiled"
    return "python"


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def to_gaussian_integers(mat):
    """Scale each row by the lcm of its denominators; return (re, im) int rows."""
    re_rows, im_rows = [], []
    for row in mat:
        vals = [v if isinstance(v, GaussianRational) else GaussianRational(v) for v in row]
        den = reduce(_lcm, (x.denominator for v in vals for x in (v.re, v.im)), 1)
        re_rows.append([int(v.re * den) for v in vals])
        im_rows.append([int(v.im * den) for v in vals])
    return re_rows, im_rows


def _log2_hadamard(re_rows, im_rows) -> float:
    total = 0.0
    for rr, ii in zip(re_rows, im_rows):
        s = sum(a * a + b * b for a, b in zip(rr, ii))
        if s > 1:
            total += 0.5 * math.log2(s)
    return total


def rank_int(re_rows, im_rows, backend: str | None = None) -> int:
    """Rank of a Gaussian-integer matrix given as real/imaginary int rows."""
    if not re_rows or not re_rows[0]:
        return 0
    backend = backend or kernel_backend()
    if backend == "compiled" and _rank_ext is not None:
        if _log2_hadamard(re_rows, im_rows) <= _EXT_LOG2_BOUND:
            return _rank_ext(
                np.ascontiguousarray(re_rows, dtype=np.int64),
                np.ascontiguousarray(im_rows, dtype=np.int64),
            )
    return _bareiss_py.rank_gaussian(re_rows, im_rows)


def exact_rank(mat) -> int:
    mat = np.asarray(mat, dtype=object)
    if mat.size == 0:
        return 0
    return rank_int(*to_gaussian_integers(mat))


def nullity(mat) -> int:
    mat = np.asarray(mat, dtype=object)
    return mat.shape[1] - exact_rank(mat)


def exact_nullspace(mat):
    """Basis of the kernel (list of object vectors) by Gauss-Jordan over Q(i)."""
    mat = np.asarray(mat, dtype=object)
    m, ncols = mat.shape
    a = [[v if isinstance(v, GaussianRational) else GaussianRational(v) for v in row] for row in mat]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for fc in free:
        v = np.array([GaussianRational(0)] * ncols, dtype=object)
        v[fc] = GaussianRational(1)
        for row, pc in enumerate(pivots):
            v[pc] = -a[row][fc]
        out.append(v)
    return out


def conj_transpose(mat):
    mat = np.asarray(mat)
    if mat.dtype == object:
        out = np.empty((mat.shape[1], mat.shape[0]), dtype=object)
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                out[j, i] = conj(mat[i, j])
        return out
    return mat.conj().T


def matmul(a, b):
    """Matrix product that keeps exact entries exact (also for empty shapes)."""
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype == object or b.dtype == object:
        out = np.zeros((a.shape[0], b.shape[1]), dtype=object)
        if a.shape[1]:
            out = a.dot(b)
        return out
    return a @ b


def is_zero_matrix(mat, tol: float = 0.0) -> bool:
    mat = np.asarray(mat)
    if mat.size == 0:
        return True
    if mat.dtype == object:
        return all(x == 0 for x in mat.flat)
    return float(np.max(np.abs(mat))) <= tol


def max_abs(mat) -> float:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0.0
    return max(abs(complex(x)) for x in mat.flat)


def to_numeric(mat):
    mat = np.asarray(mat)
    if mat.dtype == object:
        return np.array([[complex(x) for x in row] for row in mat], dtype=complex).reshape(mat.shape)
    return mat.astype(complex)


@dataclass(frozen=True)
class NumericKernel:
    """Near-null count of a PSD or rectangular operator with its gap data."""

    dim: int
    largest_zero: float
    smallest_nonzero: float
    scale: float

    @property
    def gap_ratio(self) -> float:
        if self.dim == 0 or math.isinf(self.smallest_nonzero):
            return math.inf
        return self.smallest_nonzero / max(self.largest_zero, np.finfo(float).tiny)


def classify(values, scale: float, ncols: int, rtol: float = NUMERIC_KERNEL_RTOL) -> NumericKernel:
    """Split nonnegative spectral values into zero / nonzero with a gap check.

    ``values`` may be shorter than ``ncols`` (rectangular SVD); missing values
    are exact zeros.
    """
    values = np.sort(np.abs(np.asarray(values, dtype=float)))
    values = np.concatenate([np.zeros(ncols - len(values)), values]) if len(values) < ncols else values
    thresh = rtol * scale if scale > 0 else 0.0
    zero = values[values <= thresh] if scale > 0 else values
    rest = values[values > thresh] if scale > 0 else values[:0]
    res = NumericKernel(
        dim=len(zero),
        largest_zero=float(zero.max()) if len(zero) else 0.0,
        smallest_nonzero=float(rest.min()) if len(rest) else math.inf,
        scale=scale,
    )
    if res.gap_ratio < GAP_RATIO:
        raise Indeterminate(
            f"spectral gap ratio {res.gap_ratio:.3g} < {GAP_RATIO} "
            f"(largest zero {res.largest_zero:.3g}, smallest nonzero {res.smallest_nonzero:.3g})"
        )
    return res


def numeric_nullity(mat, scale: float | None = None) -> NumericKernel:
    """Kernel dimension of a rectangular matrix from its singular values."""
    mat = to_numeric(mat)
    ncols = mat.shape[1]
    if mat.size == 0:
        return NumericKernel(ncols, 0.0, math.inf, 0.0)
    sv = np.linalg.svd(mat, compute_uv=False)
    smax = float(sv.max()) if scale is None else scale
    return classify(sv, smax, ncols)
