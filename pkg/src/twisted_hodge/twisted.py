"""Twisted Dolbeault complexes, twisted Dirac operators and their invariants.

Everything acts on the invariant complex of a validated model.  Adjoints are
conjugate transposes: the invariant monomial basis is orthonormal and the
models are unimodular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from .exterior import Form, basis, bidim, contract_adjoint, operator_matrix, vector_of, wedge
from .linalg import (
    classify,
    conj_transpose,
    exact_nullspace,
    exact_rank,
    is_zero_matrix,
    matmul,
    max_abs,
    numeric_nullity,
    to_numeric,
)
from .model import LieComplexModel, build_dbar, build_partial, graded_from, require_valid


class NotDbarClosed(ValueError):
    def __init__(self, theta: Form, dbar_theta: Form):
        self.theta = theta
        self.dbar_theta = dbar_theta
        super().__init__(f"dbar(theta) != 0: (0,2) component {dbar_theta}")


class NotClosed(ValueError):
    pass


class PreconditionExact(ValueError):
    """theta is dbar-exact; ``value`` carries the (untwisted) answer."""

    def __init__(self, theta: Form, value: int):
        self.theta = theta
        self.value = value
        super().__init__(f"theta is dbar-exact; H^0 is isomorphic to the untwisted one (dim {value})")


class NotFlat(ValueError):
    pass


def _check_theta(model: LieComplexModel, theta: Form) -> Form:
    if theta.n != model.n:
        raise ValueError(f"theta has n={theta.n}, model has n={model.n}")
    if theta.terms and theta.bidegrees() != {(0, 1)}:
        raise ValueError("theta must be a (0,1)-form")
    return theta


def _zeros(rows: int, cols: int, exact: bool):
    return np.zeros((rows, cols), dtype=object if exact else complex)


# --- the twisted complex -----------------------------------------------------


@dataclass
class TwistedComplex:
    model: LieComplexModel
    theta: Form
    p: int
    mats: List[np.ndarray]  # mats[q]: (p,q) -> (p,q+1), q = 0..n-1
    dbar_closed_verified: bool = True
    label: str = ""

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def exact(self) -> bool:
        return self.model.exact

    def dims(self) -> List[int]:
        return [bidim(self.n, self.p, q) for q in range(self.n + 1)]

    def incoming(self, q: int):
        if q == 0:
            return _zeros(bidim(self.n, self.p, 0), 0, self.exact)
        return self.mats[q - 1]

    def outgoing(self, q: int):
        if q == self.n:
            return _zeros(0, bidim(self.n, self.p, q), self.exact)
        return self.mats[q]


def dbar_theta_form(model: LieComplexModel, theta: Form) -> Form:
    return model.dbar(theta)


def build_twisted(model: LieComplexModel, theta: Form, p: int, label: str = "") -> TwistedComplex:
    """Matrices of dbar + theta^ on the row p of the invariant complex."""
    require_valid(model)
    _check_theta(model, theta)
    if not 0 <= p <= model.n:
        raise ValueError(f"p must be in 0..{model.n}")
    dt = model.dbar(theta)
    if not dt.is_zero():
        raise NotDbarClosed(theta, dt)
    n = model.n
    op = lambda f: model.dbar(f) + wedge(theta, f)
    mats = [operator_matrix(op, n, (p, q), (p, q + 1), model.exact) for q in range(n)]
    for q in range(n - 1):
        if not is_zero_matrix(matmul(mats[q + 1], mats[q]), 1e-12):
            raise ArithmeticError(f"twisted differential does not square to zero at q={q}")
    return TwistedComplex(model, theta, p, mats, True, label)


@dataclass
class CohomologyTable:
    n: int
    dims: Dict[Tuple[int, int], int]
    provenance: str  # "exact-rank" or "numeric-kernel"
    theta_label: str = ""
    gaps: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def row(self, p: int) -> List[int]:
        return [self.dims[(p, q)] for q in range(self.n + 1) if (p, q) in self.dims]

    def grid(self) -> List[List[int]]:
        return [[self.dims.get((p, q), 0) for q in range(self.n + 1)] for p in range(self.n + 1)]

    def merge(self, other: "CohomologyTable") -> "CohomologyTable":
        return CohomologyTable(
            self.n, {**self.dims, **other.dims}, self.provenance, self.theta_label, {**self.gaps, **other.gaps}
        )


def _laplacian(tc: TwistedComplex, q: int):
    a_in = to_numeric(tc.incoming(q))
    a_out = to_numeric(tc.outgoing(q))
    return a_in @ a_in.conj().T + a_out.conj().T @ a_out


def cohomology_dims(tc: TwistedComplex, mode: str | None = None) -> CohomologyTable:
    """dim H^{p,q}_theta for q = 0..n.

    Exact mode: nullity minus incoming rank.  Numeric mode: near-null
    dimension of the twisted Laplacian, with the spectral gap recorded.
    """
    mode = mode or ("exact" if tc.exact else "numeric")
    n, p = tc.n, tc.p
    dims, gaps = {}, {}
    if mode == "exact":
        if not tc.exact:
            raise ValueError("exact cohomology needs an exact model")
        ranks = [exact_rank(m) for m in tc.mats]
        for q in range(n + 1):
            out_rank = ranks[q] if q < n else 0
            in_rank = ranks[q - 1] if q > 0 else 0
            dims[(p, q)] = bidim(n, p, q) - out_rank - in_rank
        return CohomologyTable(n, dims, "exact-rank", tc.label)
    laps = [_laplacian(tc, q) for q in range(n + 1)]
    spectra = [np.linalg.eigvalsh(L) if L.size else np.zeros(0) for L in laps]
    scale = max((float(s.max()) for s in spectra if s.size), default=0.0)
    for q, s in enumerate(spectra):
        k = classify(s, scale, len(s))
        dims[(p, q)] = k.dim
        gaps[(p, q)] = k.gap_ratio
    return CohomologyTable(n, dims, "numeric-kernel", tc.label, gaps)


def twisted_table(model: LieComplexModel, theta: Form, mode: str | None = None, label: str = "") -> CohomologyTable:
    table = None
    for p in range(model.n + 1):
        t = cohomology_dims(build_twisted(model, theta, p, label), mode)
        table = t if table is None else table.merge(t)
    return table


def hodge_table(model: LieComplexModel, mode: str | None = None) -> CohomologyTable:
    """Untwisted Dolbeault dims of the invariant complex."""
    return twisted_table(model, Form.zero(model.n), mode, "zero")


def twisted_euler(tc_or_table, p: int | None = None) -> int:
    """Alternating sum over q of the cohomology dims in row p."""
    if isinstance(tc_or_table, TwistedComplex):
        table = cohomology_dims(tc_or_table)
        p = tc_or_table.p
    else:
        table = tc_or_table
    return sum((-1) ** q * d for q, d in enumerate(table.row(p)))


# --- twisted Dirac operator --------------------------------------------------


@dataclass
class DiracBlock:
    model: LieComplexModel
    theta: Form
    p: int
    t: object
    matrix: np.ndarray  # even -> odd
    even_qs: List[int]
    odd_qs: List[int]

    @property
    def exact(self) -> bool:
        return self.matrix.dtype == object


def _scaled(theta: Form, t) -> Form:
    return theta.scale(t)


def dirac_assemble(model: LieComplexModel, theta: Form, p: int, t=1) -> DiracBlock:
    """dbar + dbar^* + t theta^ + t i_theta from even to odd antiholomorphic degree.

    dbar(theta) = 0 is not required.
    """
    require_valid(model)
    _check_theta(model, theta)
    n, exact = model.n, model.exact
    if exact:
        t = Fraction(t)
    else:
        t = float(t)
    th = _scaled(theta, t)
    op = lambda f: model.dbar(f) + wedge(th, f)
    a = {q: operator_matrix(op, n, (p, q), (p, q + 1), exact) for q in range(n)}
    even = [q for q in range(n + 1) if q % 2 == 0]
    odd = [q for q in range(n + 1) if q % 2 == 1]
    roff = np.cumsum([0] + [bidim(n, p, q) for q in odd])
    coff = np.cumsum([0] + [bidim(n, p, q) for q in even])
    mat = _zeros(int(roff[-1]), int(coff[-1]), exact)
    for ci, qe in enumerate(even):
        for ri, qo in enumerate(odd):
            if qo == qe + 1:
                blk = a[qe]
            elif qo == qe - 1:
                blk = conj_transpose(a[qo])
            else:
                continue
            mat[roff[ri]:roff[ri + 1], coff[ci]:coff[ci + 1]] = blk
    return DiracBlock(model, theta, p, t, mat, even, odd)


@dataclass(frozen=True)
class KernelSplit:
    even: int
    odd: int
    provenance: str
    sigma_min: float | None = None
    gap_ratio: float | None = None


def kernel_even_odd(block: DiracBlock) -> KernelSplit:
    """(dim ker D on the even side, dim ker D^* on the odd side)."""
    rows, cols = block.matrix.shape
    if block.exact:
        r = exact_rank(block.matrix) if block.matrix.size else 0
        return KernelSplit(cols - r, rows - r, "exact-rank")
    mat = to_numeric(block.matrix)
    if mat.size == 0:
        return KernelSplit(cols, rows, "numeric-kernel")
    sv = np.linalg.svd(mat, compute_uv=False)
    smax = float(sv.max())
    ke = classify(sv, smax, cols)
    ko = classify(sv, smax, rows)
    nz = sv[sv > ke.largest_zero] if ke.dim else sv
    smin = float(nz.min()) if nz.size else 0.0
    return KernelSplit(ke.dim, ko.dim, "numeric-kernel", smin, min(ke.gap_ratio, ko.gap_ratio))


def dirac_index(block: DiracBlock) -> int:
    k = kernel_even_odd(block)
    return k.even - k.odd


# --- special cases -----------------------------------------------------------


def h0_twisted(model: LieComplexModel, theta: Form) -> int:
    """dim H^{0,0}_theta; raises PreconditionExact if theta is dbar-exact."""
    tc = build_twisted(model, theta, 0)
    dbar00 = operator_matrix(model.dbar, model.n, (0, 0), (0, 1), model.exact)
    vec = vector_of(theta, 0, 1, model.exact).reshape(-1, 1)
    aug = np.concatenate([dbar00, vec], axis=1)
    if model.exact:
        exact_theta = exact_rank(aug) == exact_rank(dbar00)
    else:
        exact_theta = numeric_nullity(aug).dim > numeric_nullity(dbar00).dim if max_abs(vec) > 0 else True
    dim = cohomology_dims(tc).dims[(0, 0)]
    if exact_theta:
        raise PreconditionExact(theta, dim)
    return dim


@dataclass
class MorseNovikovResult:
    dims: List[int]
    euler: int
    untwisted_euler: int
    provenance: str


def _total_basis(n: int, k: int):
    return [(p, k - p) for p in range(n + 1) if 0 <= k - p <= n]


def real_morse_novikov(model: LieComplexModel, theta: Form, mode: str | None = None) -> MorseNovikovResult:
    """Cohomology of d + theta^ for a real closed 1-form theta on the invariant complex."""
    require_valid(model)
    n = model.n
    if theta.n != n or (theta.terms and theta.degree() != 1):
        raise ValueError("theta must be a 1-form on the model")
    if not (theta - theta.conj()).is_zero(None if model.exact else 1e-12):
        raise ValueError("theta must be real")
    dtheta = model.d(theta)
    if not dtheta.is_zero(None if model.exact else 1e-12):
        raise NotClosed(f"d(theta) = {dtheta}")
    mode = mode or model.mode
    exact = model.exact

    def matrix(th: Form, k: int):
        rows = [m for bd in _total_basis(n, k + 1) for m in basis(n, *bd)]
        cols = [m for bd in _total_basis(n, k) for m in basis(n, *bd)]
        index = {m: i for i, m in enumerate(rows)}
        mat = _zeros(len(rows), len(cols), exact)
        for j, m in enumerate(cols):
            f = Form(n, {m: 1})
            for mm, c in (model.d(f) + wedge(th, f)).terms.items():
                mat[index[mm], j] = c
        return mat

    def dims_for(th: Form):
        mats = [matrix(th, k) for k in range(2 * n)]
        sizes = [sum(bidim(n, *bd) for bd in _total_basis(n, k)) for k in range(2 * n + 1)]
        if mode == "exact":
            ranks = [exact_rank(m) for m in mats]
        else:
            ranks = [m.shape[1] - numeric_nullity(m).dim if m.size else 0 for m in mats]
        return [sizes[k] - (ranks[k] if k < 2 * n else 0) - (ranks[k - 1] if k > 0 else 0) for k in range(2 * n + 1)]

    dims = dims_for(theta)
    base = dims_for(Form.zero(n))
    alt = lambda ds: sum((-1) ** k * d for k, d in enumerate(ds))
    return MorseNovikovResult(dims, alt(dims), alt(base), "exact-rank" if mode == "exact" else "numeric-kernel")


# --- flat Kähler case: commutators and primitive decomposition ---------------


def _require_flat(model: LieComplexModel, theta: Form):
    require_valid(model)
    if not model.is_abelian:
        raise NotFlat(f"model {model.name!r} is not flat (non-abelian structure equations)")
    _check_theta(model, theta)


def _laplacian_blocks(op) -> Dict[Tuple[int, int], np.ndarray]:
    """Block Laplacians B B^* + B^* B of a graded operator with shift (0,1) or (1,0)."""
    n = op.n
    dp, dq = op.shift
    out = {}
    for p in range(n + 1):
        for q in range(n + 1):
            outgoing = op.block(p, q)
            incoming = op.block(p - dp, q - dq) if p - dp >= 0 and q - dq >= 0 else None
            lap = matmul(conj_transpose(outgoing), outgoing)
            if incoming is not None and incoming.size:
                lap = lap + matmul(incoming, conj_transpose(incoming))
            out[(p, q)] = lap
    return out


def commutator_check(model: LieComplexModel, theta: Form) -> Dict[str, float]:
    """Max-norm of [Laplacian, X] for X in {theta^, thetabar^, i_theta, i_thetabar}."""
    _check_theta(model, theta)
    _require_flat(model, theta)
    n, exact = model.n, model.exact
    tbar = theta.conj()
    ops = {
        "theta_wedge": (lambda f: wedge(theta, f), (0, 1)),
        "thetabar_wedge": (lambda f: wedge(tbar, f), (1, 0)),
        "i_theta": (lambda f: contract_adjoint(theta, f), (0, -1)),
        "i_thetabar": (lambda f: contract_adjoint(tbar, f), (-1, 0)),
    }
    laps = {
        "dbar": _laplacian_blocks(build_dbar(model)),
        "partial": _laplacian_blocks(build_partial(model)),
    }
    out = {}
    for lname, lap in laps.items():
        for oname, (fn, shift) in ops.items():
            g = graded_from(fn, n, shift, exact)
            worst = 0.0
            for (p, q), x in g.blocks.items():
                tgt = (p + shift[0], q + shift[1])
                comm = matmul(lap[tgt], x) - matmul(x, lap[(p, q)])
                worst = max(worst, max_abs(comm))
            out[f"[Laplacian_{lname}, {oname}]"] = worst
    return out


@dataclass
class PrimitiveDecomposition:
    p: int
    q: int
    s: Tuple[int, int, int, int]  # s^{p,q}, s^{p-1,q}, s^{p,q-1}, s^{p-1,q-1}
    h: int
    reconstruction_rank: int

    @property
    def balanced(self) -> bool:
        return sum(self.s) == self.h == self.reconstruction_rank


def _primitive_space(model, theta, tbar, lap, a, b):
    """Exact kernel basis of Laplacian + both contractions at bidegree (a,b)."""
    n = model.n
    if not (0 <= a <= n and 0 <= b <= n):
        return []
    parts = [lap[(a, b)]]
    if b >= 1:
        parts.append(operator_matrix(lambda f: contract_adjoint(theta, f), n, (a, b), (a, b - 1), True))
    if a >= 1:
        parts.append(operator_matrix(lambda f: contract_adjoint(tbar, f), n, (a, b), (a - 1, b), True))
    return exact_nullspace(np.concatenate(parts, axis=0))


def primitive_decomposition(model: LieComplexModel, theta: Form, p: int, q: int) -> PrimitiveDecomposition:
    """Primitive harmonic dims around (p,q) and a rank check of the four-term reconstruction."""
    _require_flat(model, theta)
    if theta.is_zero():
        raise ValueError("theta must be nonzero")
    if not model.exact:
        raise ValueError("primitive decomposition runs in exact mode")
    n = model.n
    tbar = theta.conj()
    lap = _laplacian_blocks(build_dbar(model))
    spaces = {
        (a, b): _primitive_space(model, theta, tbar, lap, a, b)
        for a, b in [(p, q), (p - 1, q), (p, q - 1), (p - 1, q - 1)]
    }
    harmonic = exact_nullspace(lap[(p, q)])
    maps = {
        (p, q): lambda f: f,
        (p, q - 1): lambda f: wedge(theta, f),
        (p - 1, q): lambda f: wedge(tbar, f),
        (p - 1, q - 1): lambda f: wedge(wedge(theta, tbar), f),
    }
    cols = []
    for (a, b), vecs in spaces.items():
        for v in vecs:
            f = Form(n, {m: c for m, c in zip(basis(n, a, b), v)})
            cols.append(vector_of(maps[(a, b)](f), p, q, True))
    if cols:
        span = np.stack(cols, axis=1)
        rank = exact_rank(span)
        if not is_zero_matrix(matmul(lap[(p, q)], span)):
            raise ArithmeticError("reconstructed forms are not harmonic")
    else:
        rank = 0
    s = tuple(len(spaces[k]) for k in [(p, q), (p - 1, q), (p, q - 1), (p - 1, q - 1)])
    return PrimitiveDecomposition(p, q, s, len(harmonic), rank)
