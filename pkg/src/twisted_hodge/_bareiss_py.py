"""Pure-Python fraction-free (Bareiss) rank over the Gaussian integers.

Reference implementation and fallback for :mod:`twisted_hodge._bareiss`.
Entries are arbitrary-precision Python ints, so this path never overflows.
"""


def _divexact(xr, xi, pr, pi):
    # (xr + i xi) / (pr + i pi), exact in Z[i]
    d = pr * pr + pi * pi
    nr = xr * pr + xi * pi
    ni = xi * pr - xr * pi
    qr, rr = divmod(nr, d)
    qi, ri = divmod(ni, d)
    if rr or ri:
        raise ArithmeticError("inexact Bareiss division")
    return qr, qi


def rank_gaussian(re_rows, im_rows):
    """Rank of the matrix ``re + i*im`` (lists of lists of ints).

    Pivot choice is deterministic: first nonzero entry in the current column,
    scanning rows top to bottom.
    """
    m = len(re_rows)
    if m == 0:
        return 0
    ncols = len(re_rows[0])
    ar = [list(r) for r in re_rows]
    ai = [list(r) for r in im_rows]
    prev_r, prev_i = 1, 0
    r = 0
    for c in range(ncols):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if ar[i][c] or ai[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            ar[r], ar[piv] = ar[piv], ar[r]
            ai[r], ai[piv] = ai[piv], ai[r]
        pr, pi = ar[r][c], ai[r][c]
        rowr, rowi = ar[r], ai[r]
        for i in range(r + 1, m):
            xr, xi = ar[i], ai[i]
            fr, fi = xr[c], xi[c]
            for j in range(c + 1, ncols):
                # pivot * a[i][j] - a[i][c] * a[r][j]
                tr = pr * xr[j] - pi * xi[j] - (fr * rowr[j] - fi * rowi[j])
                ti = pr * xi[j] + pi * xr[j] - (fr * rowi[j] + fi * rowr[j])
                if prev_r == 1 and prev_i == 0:
                    xr[j], xi[j] = tr, ti
                else:
                    xr[j], xi[j] = _divexact(tr, ti, prev_r, prev_i)
            xr[c] = 0
            xi[c] = 0
        prev_r, prev_i = pr, pi
        r += 1
    return r
