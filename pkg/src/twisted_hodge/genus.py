"""Hodge tables, the chi_y genus, fixed-point sums and Vaisman bookkeeping."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

import numpy as np


class InvalidTable(ValueError):
    pass


def _check_grid(grid, rows: int, cols: int, what: str) -> List[List[int]]:
    grid = [list(r) for r in grid]
    if len(grid) != rows or any(len(r) != cols for r in grid):
        raise InvalidTable(f"{what} must be a {rows}x{cols} grid")
    for r in grid:
        for v in r:
            if int(v) != v or v < 0:
                raise InvalidTable(f"{what} entries must be nonnegative integers, got {v!r}")
    return [[int(v) for v in r] for r in grid]


@dataclass(frozen=True)
class ChiPolynomial:
    """chi_y = sum_p coeffs[p] y^p."""

    coeffs: tuple

    def __post_init__(self):
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(int(x) for x in c) if c else (0,))

    def __call__(self, y) -> int:
        return sum(c * y**p for p, c in enumerate(self.coeffs))

    def __eq__(self, other) -> bool:
        return isinstance(other, ChiPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __mul__(self, other: "ChiPolynomial") -> "ChiPolynomial":
        return ChiPolynomial(tuple(np.polynomial.polynomial.polymul(self.coeffs, other.coeffs).astype(int)))

    def __str__(self):
        terms = []
        for p, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if p == 0 else ("y" if p == 1 else f"y^{p}")
            coef = str(c) if (mono == "" or abs(c) != 1) else ("-" if c < 0 else "")
            terms.append(f"{coef}{mono}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


@dataclass(frozen=True)
class SpecialValues:
    arithmetic_genus: int  # y = 0
    euler_number: int  # y = -1
    y_one: int
    y_one_is_signature: bool


@dataclass
class HodgeTable:
    n: int
    h: List[List[int]]
    kahler_even: bool = False
    provenance: str = ""

    def __post_init__(self):
        self.h = _check_grid(self.h, self.n + 1, self.n + 1, "Hodge table")

    def __getitem__(self, pq) -> int:
        p, q = pq
        if 0 <= p <= self.n and 0 <= q <= self.n:
            return self.h[p][q]
        return 0

    def chi_p(self, p: int) -> int:
        return sum((-1) ** q * self.h[p][q] for q in range(self.n + 1))

    def serre_symmetric(self) -> bool:
        n = self.n
        return all(self.h[p][q] == self.h[n - p][n - q] for p in range(n + 1) for q in range(n + 1))

    def as_dict(self) -> dict:
        return {"n": self.n, "h": self.h, "chi_y": list(chi(self).coeffs)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "q", "h"])
        for p in range(self.n + 1):
            for q in range(self.n + 1):
                w.writerow([p, q, self.h[p][q]])
        return buf.getvalue()

    @classmethod
    def from_dims(cls, n: int, dims: Dict, **kw) -> "HodgeTable":
        return cls(n, [[dims.get((p, q), 0) for q in range(n + 1)] for p in range(n + 1)], **kw)


def binomial_table(n: int) -> HodgeTable:
    from math import comb

    return HodgeTable(n, [[comb(n, p) * comb(n, q) for q in range(n + 1)] for p in range(n + 1)], kahler_even=n % 2 == 0)


def chi(table: HodgeTable) -> ChiPolynomial:
    return ChiPolynomial(tuple(table.chi_p(p) for p in range(table.n + 1)))


def special_values(table: HodgeTable) -> SpecialValues:
    poly = chi(table)
    return SpecialValues(poly(0), poly(-1), poly(1), bool(table.kahler_even and table.n % 2 == 0))


def kunneth(a: HodgeTable, b: HodgeTable) -> HodgeTable:
    """Hodge table of a product: 2D convolution of the grids."""
    n = a.n + b.n
    h = [[0] * (n + 1) for _ in range(n + 1)]
    for p1 in range(a.n + 1):
        for q1 in range(a.n + 1):
            for p2 in range(b.n + 1):
                for q2 in range(b.n + 1):
                    h[p1 + p2][q1 + q2] += a.h[p1][q1] * b.h[p2][q2]
    return HodgeTable(n, h, kahler_even=a.kahler_even and b.kahler_even)


def projective_line() -> HodgeTable:
    return HodgeTable(1, [[1, 0], [0, 1]], kahler_even=False)


# --- fixed points -------------------------------------------------------------


@dataclass(frozen=True)
class FixedPointDatum:
    s: int


def kosniowski_sum(data: Iterable, n: int | None = None) -> ChiPolynomial:
    """sum over fixed points of (-y)^s."""
    coeffs: Dict[int, int] = {}
    for d in data:
        s = d.s if isinstance(d, FixedPointDatum) else int(d)
        if s < 0 or (n is not None and s > n):
            raise ValueError(f"fixed-point index s={s} out of range 0..{n}")
        coeffs[s] = coeffs.get(s, 0) + (-1) ** s
    top = max(coeffs, default=0)
    return ChiPolynomial(tuple(coeffs.get(p, 0) for p in range(top + 1)))


# --- Vaisman bookkeeping -----------------------------------------------------


@dataclass
class STable:
    n: int
    s: List[List[int]]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidTable("n must be >= 1")
        self.s = _check_grid(self.s, self.n, self.n, "S table")
        for p in range(self.n):
            for q in range(p):
                if self.s[p][q] != self.s[q][p]:
                    raise InvalidTable(f"S table is not symmetric at ({p},{q})")

    def __getitem__(self, pq) -> int:
        p, q = pq
        if 0 <= p < self.n and 0 <= q < self.n:
            return self.s[p][q]
        return 0

    def as_dict(self) -> dict:
        return {"n": self.n, "s": self.s}


def vaisman_hodge(st: STable) -> HodgeTable:
    """Hodge numbers from primitive transverse dims; p+q > n by Serre duality."""
    n = st.n
    h = [[0] * (n + 1) for _ in range(n + 1)]
    for p in range(n + 1):
        for q in range(n + 1):
            if p + q <= n - 1:
                h[p][q] = st[p, q] + st[p, q - 1]
            elif p + q == n:
                h[p][q] = st[p - 1, n - p] + st[p, n - p - 1]
    for p in range(n + 1):
        for q in range(n + 1):
            if p + q > n:
                h[p][q] = h[n - p][n - q]
    return HodgeTable(n, h, provenance="vaisman")


def random_stable(rng, n: int, high: int = 3) -> STable:
    s = [[0] * n for _ in range(n)]
    for p in range(n):
        for q in range(p, n):
            s[p][q] = s[q][p] = int(rng.integers(0, high + 1))
    return STable(n, s)


# --- flat models ---------------------------------------------------------------


@dataclass
class TelescopeReport:
    p: int
    s_grid: Dict[tuple, int] = field(default_factory=dict)
    h_row: List[int] = field(default_factory=list)
    chi_p: int = 0
    reconstruction_ok: bool = True


def parallel_decomposition_chi(model, theta) -> List[TelescopeReport]:
    """Per-p chi from primitive dims, with the four-term reconstruction checked at each q."""
    from .twisted import primitive_decomposition

    n = model.n
    out = []
    for p in range(n + 1):
        rep = TelescopeReport(p)
        for q in range(n + 1):
            dec = primitive_decomposition(model, theta, p, q)
            rep.s_grid[(p, q)] = dec.s[0]
            rep.h_row.append(dec.h)
            rep.reconstruction_ok &= dec.balanced
            rep.chi_p += (-1) ** q * sum(dec.s)
        out.append(rep)
    return out
