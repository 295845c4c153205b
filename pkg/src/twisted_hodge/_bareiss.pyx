# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bareiss rank over the Gaussian integers (int64 entries).

Callers must guarantee that every minor of the input is bounded in modulus
by 2**19; the wrapper in ``twisted_hodge.linalg`` checks a Hadamard bound
and routes larger inputs to the pure-Python kernel.
"""

import numpy as np


def rank_gaussian_i64(long long[:, ::1] re, long long[:, ::1] im):
    cdef Py_ssize_t m = re.shape[0]
    cdef Py_ssize_t ncols = re.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef long long pr, pi, fr, fi, tr, ti, prev_r = 1, prev_i = 0
    cdef long long d, nr, ni
    cdef long long[:, ::1] ar
    cdef long long[:, ::1] ai
    cdef long long tmp

    if m == 0 or ncols == 0:
        return 0
    ar = np.array(re, dtype=np.int64, copy=True)
    ai = np.array(im, dtype=np.int64, copy=True)

    for c in range(ncols):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if ar[i, c] != 0 or ai[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(ncols):
                tmp = ar[r, j]; ar[r, j] = ar[piv, j]; ar[piv, j] = tmp
                tmp = ai[r, j]; ai[r, j] = ai[piv, j]; ai[piv, j] = tmp
        pr = ar[r, c]
        pi = ai[r, c]
        d = prev_r * prev_r + prev_i * prev_i
        for i in range(r + 1, m):
            fr = ar[i, c]
            fi = ai[i, c]
            for j in range(c + 1, ncols):
                tr = pr * ar[i, j] - pi * ai[i, j] - (fr * ar[r, j] - fi * ai[r, j])
                ti = pr * ai[i, j] + pi * ar[i, j] - (fr * ai[r, j] + fi * ar[r, j])
                if d == 1 and prev_i == 0:
                    ar[i, j] = prev_r * tr
                    ai[i, j] = prev_r * ti
                else:
                    nr = tr * prev_r + ti * prev_i
                    ni = ti * prev_r - tr * prev_i
                    if nr % d != 0 or ni % d != 0:
                        raise ArithmeticError("inexact Bareiss division")
                    ar[i, j] = nr // d
                    ai[i, j] = ni // d
            ar[i, c] = 0
            ai[i, c] = 0
        prev_r = pr
        prev_i = pi
        r += 1
    return r
