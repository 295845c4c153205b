"""Exterior algebra of a rank-n complex coframe phi^1..phi^n, conj(phi)^1..n.

Monomials are keyed by ``(holo, anti)``: two strictly increasing tuples of
0-based indices.  Canonical order puts every holomorphic factor first, then
every antiholomorphic one, each ascending.  The coframe is unitary: distinct
monomials are orthogonal and every monomial has norm 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, Iterable, Iterator, List, Tuple

import numpy as np

from .scalars import GaussianRational, conj, is_zero

Mono = Tuple[Tuple[int, ...], Tuple[int, ...]]


class DimensionMismatch(ValueError):
    pass


class NotHomogeneous(ValueError):
    pass


def _globals(mono: Mono, n: int) -> List[int]:
    holo, anti = mono
    return list(holo) + [n + j for j in anti]


def _from_globals(idx: Iterable[int], n: int) -> Mono:
    s = sorted(idx)
    return tuple(i for i in s if i < n), tuple(i - n for i in s if i >= n)


def mono_wedge(a: Mono, b: Mono, n: int) -> Tuple[int, Mono]:
    """Return ``(sign, monomial)`` with a ^ b = sign * monomial; sign 0 if they overlap."""
    ga, gb = _globals(a, n), _globals(b, n)
    if set(ga) & set(gb):
        return 0, ((), ())
    inversions = sum(1 for x in ga for y in gb if x > y)
    return (-1 if inversions % 2 else 1), _from_globals(ga + gb, n)


def mono_conj(m: Mono) -> Tuple[int, Mono]:
    """conj(phi^I ^ phibar^J) = (-1)^{|I||J|} phi^J ^ phibar^I."""
    holo, anti = m
    return (-1 if (len(holo) * len(anti)) % 2 else 1), (anti, holo)


def basis(n: int, p: int, q: int) -> List[Mono]:
    """Monomials of bidegree (p, q), lexicographic on (holo, anti)."""
    if not (0 <= p <= n and 0 <= q <= n):
        return []
    return [(h, a) for h in combinations(range(n), p) for a in combinations(range(n), q)]


def bidim(n: int, p: int, q: int) -> int:
    if not (0 <= p <= n and 0 <= q <= n):
        return 0
    return comb(n, p) * comb(n, q)


def top_monomial(n: int) -> Mono:
    return tuple(range(n)), tuple(range(n))


@dataclass(frozen=True)
class Form:
    """A constant-coefficient form: sparse map monomial -> coefficient."""

    n: int
    terms: Dict[Mono, object] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for m, c in self.terms.items():
            holo, anti = m
            if any(i < 0 or i >= self.n for i in holo + anti):
                raise ValueError(f"index out of range in {m} for n={self.n}")
            if list(holo) != sorted(set(holo)) or list(anti) != sorted(set(anti)):
                raise ValueError(f"monomial {m} is not in canonical order")
            if c != 0:
                clean[m] = c
        object.__setattr__(self, "terms", clean)

    # construction helpers
    @classmethod
    def zero(cls, n: int) -> "Form":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, c=1) -> "Form":
        return cls(n, {((), ()): c})

    @classmethod
    def monomial(cls, n: int, holo=(), anti=(), c=1) -> "Form":
        """Wedge of the given factors in the given order (signs handled)."""
        sign, m = 1, ((), ())
        for i in holo:
            s, m = mono_wedge(m, ((i,), ()), n)
            sign *= s
        for j in anti:
            s, m = mono_wedge(m, ((), (j,)), n)
            sign *= s
        if sign == 0:
            return cls.zero(n)
        return cls(n, {m: c if sign > 0 else -c})

    @classmethod
    def one_form_01(cls, coeffs) -> "Form":
        """sum_j coeffs[j] * phibar^j."""
        n = len(coeffs)
        return cls(n, {((), (j,)): c for j, c in enumerate(coeffs)})

    @classmethod
    def one_form_10(cls, coeffs) -> "Form":
        n = len(coeffs)
        return cls(n, {((j,), ()): c for j, c in enumerate(coeffs)})

    # arithmetic
    def _check(self, other: "Form"):
        if self.n != other.n:
            raise DimensionMismatch(f"n={self.n} vs n={other.n}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Form(self.n, out)

    def __neg__(self) -> "Form":
        return Form(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, c) -> "Form":
        return Form(self.n, {m: c * v for m, v in self.terms.items()})

    def __rmul__(self, c) -> "Form":
        return self.scale(c)

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __iter__(self) -> Iterator[Tuple[Mono, object]]:
        return iter(sorted(self.terms.items()))

    def coeff(self, holo=(), anti=()):
        return self.terms.get((tuple(holo), tuple(anti)), 0)

    def bidegrees(self) -> set:
        return {(len(h), len(a)) for h, a in self.terms}

    def bidegree(self) -> Tuple[int, int]:
        bd = self.bidegrees()
        if len(bd) != 1:
            raise NotHomogeneous(f"form has bidegrees {sorted(bd)}")
        return next(iter(bd))

    def degree(self) -> int:
        degs = {p + q for p, q in self.bidegrees()}
        if len(degs) > 1:
            raise NotHomogeneous(f"form has degrees {sorted(degs)}")
        return degs.pop() if degs else 0

    def component(self, p: int, q: int) -> "Form":
        return Form(self.n, {m: c for m, c in self.terms.items() if (len(m[0]), len(m[1])) == (p, q)})

    def conj(self) -> "Form":
        out = {}
        for m, c in self.terms.items():
            s, mc = mono_conj(m)
            out[mc] = out.get(mc, 0) + s * conj(c)
        return Form(self.n, out)

    def is_zero(self, tol: float | None = None) -> bool:
        if tol is None:
            return all(is_zero(c) for c in self.terms.values())
        return all(is_zero(c, tol) for c in self.terms.values())

    def norm2(self):
        return inner(self, self)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (h, a), c in self:
            factors = [f"phi{i + 1}" for i in h] + [f"phibar{j + 1}" for j in a]
            parts.append(f"({c})" + ("*" + "^".join(factors) if factors else ""))
        return " + ".join(parts)


def wedge(a: Form, b: Form) -> Form:
    a._check(b)
    out: Dict[Mono, object] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            s, m = mono_wedge(ma, mb, a.n)
            if s:
                v = ca * cb
                out[m] = out.get(m, 0) + (v if s > 0 else -v)
    return Form(a.n, out)


def inner(a: Form, b: Form):
    """Pointwise Hermitian product, conjugate-linear in ``b``."""
    a._check(b)
    total = 0
    for m, c in a.terms.items():
        d = b.terms.get(m)
        if d is not None:
            total = total + c * conj(d)
    return total


def _contract_generator(g: Mono, v: Form) -> Form:
    """Adjoint of ``g ^`` for a single coframe generator ``g``."""
    out: Dict[Mono, object] = {}
    gg = _globals(g, v.n)[0]
    for m, c in v.terms.items():
        gm = _globals(m, v.n)
        if gg not in gm:
            continue
        rest = _from_globals([x for x in gm if x != gg], v.n)
        s, _ = mono_wedge(g, rest, v.n)
        out[rest] = out.get(rest, 0) + (c if s > 0 else -c)
    return Form(v.n, out)


def contract_adjoint(theta: Form, v: Form) -> Form:
    """Metric adjoint of ``theta ^`` applied to ``v``.

    ``theta`` is any 1-form; for a (0,1)-form this is the contraction with
    the Hermitian dual vector field.
    """
    theta._check(v)
    if theta.terms and theta.degree() != 1:
        raise NotHomogeneous("contraction needs a 1-form")
    out = Form.zero(v.n)
    for g, c in theta.terms.items():
        out = out + _contract_generator(g, v).scale(conj(c))
    return out


def hodge_star(a: Form) -> Form:
    """Conjugate-linear star: ``u ^ hodge_star(v) == inner(u, v) * dV``.

    ``dV`` is the canonical top monomial with coefficient 1.  On monomials
    the star sends ``M`` to ``sign * C`` where ``C`` is the complementary
    monomial and ``M ^ C = sign * dV``.
    """
    n = a.n
    if a.terms:
        a.degree()
    full = set(range(2 * n))
    out: Dict[Mono, object] = {}
    for m, c in a.terms.items():
        comp = _from_globals(full - set(_globals(m, n)), n)
        s, _ = mono_wedge(m, comp, n)
        out[comp] = out.get(comp, 0) + (conj(c) if s > 0 else -conj(c))
    return Form(n, out)


def volume(n: int) -> Form:
    return Form(n, {top_monomial(n): 1})


def pointwise_norm_identity(theta: Form, beta: Form):
    """|theta ^ b|^2 + |i_theta b|^2 - |theta|^2 |b|^2 (zero for any 1-form theta)."""
    if beta.terms:
        beta.bidegree()
    lhs = wedge(theta, beta).norm2() + contract_adjoint(theta, beta).norm2()
    return lhs - theta.norm2() * beta.norm2()


# ---------------------------------------------------------------------------
# matrices of linear maps on bidegree blocks


def operator_matrix(fn, n: int, src: Tuple[int, int], dst: Tuple[int, int], exact: bool = True):
    """Matrix of ``fn`` from the (p,q) block ``src`` to the block ``dst``.

    Columns are images of the basis monomials of ``src``; any output
    component outside ``dst`` raises.
    """
    rows, cols = basis(n, *dst), basis(n, *src)
    index = {m: i for i, m in enumerate(rows)}
    mat = np.zeros((len(rows), len(cols)), dtype=object if exact else complex)
    for j, m in enumerate(cols):
        img = fn(Form(n, {m: 1}))
        for mm, c in img.terms.items():
            if mm not in index:
                raise ValueError(f"image component {mm} outside target block {dst}")
            mat[index[mm], j] = c
    return mat


def vector_of(form: Form, p: int, q: int, exact: bool = True):
    """Coordinates of the (p,q) component of ``form`` in :func:`basis` order."""
    rows = basis(form.n, p, q)
    vec = np.zeros(len(rows), dtype=object if exact else complex)
    for i, m in enumerate(rows):
        vec[i] = form.terms.get(m, 0)
    return vec


def form_of(vec, n: int, p: int, q: int) -> Form:
    return Form(n, {m: c for m, c in zip(basis(n, p, q), vec)})


def random_form(rng, n: int, p: int, q: int, density: float = 0.7, span: int = 5) -> Form:
    """Random exact (p,q)-form with small Gaussian-rational coefficients."""
    terms = {}
    for m in basis(n, p, q):
        if rng.random() < density:
            re = int(rng.integers(-span, span + 1))
            im = int(rng.integers(-span, span + 1))
            den = int(rng.integers(1, 4))
            terms[m] = GaussianRational(re, im) / den
    return Form(n, terms)


def real_one_form(f, g) -> Form:
    """sum_j f_j dx_j + g_j dy_j with dz_j = phi^j, so dx = (phi + phibar)/2.

    Coefficients may be ints/Fractions (exact) or floats.
    """
    if len(f) != len(g):
        raise DimensionMismatch("f and g must have equal length")
    exact = all(isinstance(v, (int, Fraction)) for v in list(f) + list(g))
    n = len(f)
    terms = {}
    for j in range(n):
        if exact:
            terms[((j,), ())] = GaussianRational(Fraction(f[j], 2), Fraction(-g[j], 2))
            terms[((), (j,))] = GaussianRational(Fraction(f[j], 2), Fraction(g[j], 2))
        else:
            terms[((j,), ())] = complex(f[j], -g[j]) / 2
            terms[((), (j,))] = complex(f[j], g[j]) / 2
    return Form(n, terms)
