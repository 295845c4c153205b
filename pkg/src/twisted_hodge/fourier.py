"""Fourier-truncated forms on the flat torus R^{2n}/Z^{2n}.

Coordinates z_j = x_j + i y_j, coframe dz_j, dzbar_j orthonormal, integrals
normalized to total volume 1.  A mode is an integer vector
``k = (kx_1..kx_n, ky_1..ky_n)`` standing for ``e_k = exp(2 pi i k.(x, y))``,
so the Fourier-monomial basis is orthonormal and L2 products are mode sums.

Symbols: d/dzbar_j e_k = pi i (kx_j + i ky_j) e_k and d/dz_j e_k = pi i (kx_j - i ky_j) e_k.
"""

from __future__ import annotations

import ast
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg

from .concurrency import max_workers
from .exterior import Form, basis, contract_adjoint, inner, wedge
from .linalg import NUMERIC_KERNEL_RTOL

Mode = Tuple[int, ...]


class BandOverflow(ValueError):
    pass


class CertificateFailed(ValueError):
    """The l1 dominance bound cannot certify that theta is nowhere vanishing."""


class Vacuous(Exception):
    """The truncated Dirac operator has no near-null vector to test."""

    def __init__(self, sigma_min: float, sigma_max: float):
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        super().__init__(f"kernel empty at this cutoff (sigma_min={sigma_min:.3g}, sigma_max={sigma_max:.3g})")


class ExpressionError(ValueError):
    pass


def _band(mode: Mode) -> int:
    return max((abs(c) for c in mode), default=0)


def _add(a: Mode, b: Mode) -> Mode:
    return tuple(x + y for x, y in zip(a, b))


def dz_symbol(mode: Mode, j: int) -> complex:
    n = len(mode) // 2
    return math.pi * 1j * complex(mode[j], -mode[n + j])


def dzbar_symbol(mode: Mode, j: int) -> complex:
    n = len(mode) // 2
    return math.pi * 1j * complex(mode[j], mode[n + j])


@dataclass(frozen=True)
class TorusSpec:
    n: int
    cutoff: int

    def __post_init__(self):
        if self.n < 1 or self.cutoff < 0:
            raise ValueError("need n >= 1 and cutoff >= 0")

    def modes(self, cutoff: int | None = None) -> List[Mode]:
        N = self.cutoff if cutoff is None else cutoff
        return list(itertools.product(range(-N, N + 1), repeat=2 * self.n))


# --- scalar functions ----------------------------------------------------------


@dataclass
class FourierFunction:
    n: int
    coeffs: Dict[Mode, complex] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {tuple(k): complex(c) for k, c in self.coeffs.items() if c != 0}
        for k in self.coeffs:
            if len(k) != 2 * self.n:
                raise ValueError(f"mode {k} has wrong length for n={self.n}")

    @classmethod
    def constant(cls, n: int, c) -> "FourierFunction":
        return cls(n, {(0,) * (2 * n): c})

    @property
    def band(self) -> int:
        return max((_band(k) for k in self.coeffs), default=0)

    def __add__(self, other):
        if not isinstance(other, FourierFunction):
            other = FourierFunction.constant(self.n, other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return FourierFunction(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return FourierFunction(self.n, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, FourierFunction) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, FourierFunction):
            return FourierFunction(self.n, {k: c * other for k, c in self.coeffs.items()})
        out: Dict[Mode, complex] = {}
        for ka, ca in self.coeffs.items():
            for kb, cb in other.coeffs.items():
                k = _add(ka, kb)
                out[k] = out.get(k, 0) + ca * cb
        return FourierFunction(self.n, out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if isinstance(c, FourierFunction):
            if set(c.coeffs) - {(0,) * (2 * self.n)}:
                raise ExpressionError("division by a non-constant function")
            c = c.coeffs.get((0,) * (2 * self.n), 0)
        if c == 0:
            raise ExpressionError("division by zero")
        return self * (1 / c)

    def conj(self) -> "FourierFunction":
        return FourierFunction(self.n, {tuple(-x for x in k): c.conjugate() for k, c in self.coeffs.items()})

    def d_z(self, j: int) -> "FourierFunction":
        return FourierFunction(self.n, {k: dz_symbol(k, j) * c for k, c in self.coeffs.items()})

    def d_zbar(self, j: int) -> "FourierFunction":
        return FourierFunction(self.n, {k: dzbar_symbol(k, j) * c for k, c in self.coeffs.items()})

    def d(self) -> "FourierForm":
        out = FourierForm.zero(self.n)
        for j in range(self.n):
            out = out + FourierForm.from_function(self.d_z(j), Form(self.n, {((j,), ()): 1.0}))
            out = out + FourierForm.from_function(self.d_zbar(j), Form(self.n, {((), (j,)): 1.0}))
        return out

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (..., 2n)."""
        points = np.asarray(points, dtype=float)
        out = np.zeros(points.shape[:-1], dtype=complex)
        for k, c in self.coeffs.items():
            out += c * np.exp(2j * math.pi * (points @ np.asarray(k, dtype=float)))
        return out

    def mean(self) -> complex:
        return self.coeffs.get((0,) * (2 * self.n), 0j)


# --- forms ------------------------------------------------------------------------


@dataclass
class FourierForm:
    """Sparse map mode -> constant-coefficient form (complex coefficients)."""

    n: int
    comps: Dict[Mode, Form] = field(default_factory=dict)

    def __post_init__(self):
        self.comps = {tuple(k): f for k, f in self.comps.items() if f.terms}

    @classmethod
    def zero(cls, n: int) -> "FourierForm":
        return cls(n, {})

    @classmethod
    def from_function(cls, f: FourierFunction, form: Form) -> "FourierForm":
        return cls(f.n, {k: form.scale(c) for k, c in f.coeffs.items()})

    @classmethod
    def from_terms(cls, n: int, terms: Dict[Tuple[Mode, tuple], complex]) -> "FourierForm":
        comps: Dict[Mode, Dict] = {}
        for (k, m), c in terms.items():
            comps.setdefault(tuple(k), {})[m] = complex(c)
        return cls(n, {k: Form(n, t) for k, t in comps.items()})

    @property
    def band(self) -> int:
        return max((_band(k) for k in self.comps), default=0)

    def terms(self):
        for k in sorted(self.comps):
            for m, c in sorted(self.comps[k].terms.items()):
                yield k, m, c

    def __add__(self, other: "FourierForm") -> "FourierForm":
        out = dict(self.comps)
        for k, f in other.comps.items():
            out[k] = out[k] + f if k in out else f
        return FourierForm(self.n, out)

    def __neg__(self):
        return FourierForm(self.n, {k: -f for k, f in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "FourierForm":
        return FourierForm(self.n, {k: f.scale(c) for k, f in self.comps.items()})

    def times(self, g: FourierFunction) -> "FourierForm":
        out: Dict[Mode, Form] = {}
        for kg, cg in g.coeffs.items():
            for k, f in self.comps.items():
                kk = _add(k, kg)
                piece = f.scale(cg)
                out[kk] = out[kk] + piece if kk in out else piece
        return FourierForm(self.n, out)

    def wedge(self, other: "FourierForm") -> "FourierForm":
        out: Dict[Mode, Form] = {}
        for ka, fa in self.comps.items():
            for kb, fb in other.comps.items():
                kk = _add(ka, kb)
                piece = wedge(fa, fb)
                out[kk] = out[kk] + piece if kk in out else piece
        return FourierForm(self.n, out)

    def _symbol(self, k: Mode, holo: bool, anti: bool) -> Form:
        t = {}
        for j in range(self.n):
            if holo:
                t[((j,), ())] = dz_symbol(k, j)
            if anti:
                t[((), (j,))] = dzbar_symbol(k, j)
        return Form(self.n, t)

    def _diag(self, fn) -> "FourierForm":
        return FourierForm(self.n, {k: fn(k, f) for k, f in self.comps.items()})

    def d(self) -> "FourierForm":
        return self._diag(lambda k, f: wedge(self._symbol(k, True, True), f))

    def dbar(self) -> "FourierForm":
        return self._diag(lambda k, f: wedge(self._symbol(k, False, True), f))

    def partial(self) -> "FourierForm":
        return self._diag(lambda k, f: wedge(self._symbol(k, True, False), f))

    def d_star(self) -> "FourierForm":
        return self._diag(lambda k, f: contract_adjoint(self._symbol(k, True, True), f))

    def dbar_star(self) -> "FourierForm":
        return self._diag(lambda k, f: contract_adjoint(self._symbol(k, False, True), f))

    def d_coeff(self, j: int, anti: bool) -> "FourierForm":
        """Differentiate coefficients along d/dz_j (or d/dzbar_j)."""
        sym = dzbar_symbol if anti else dz_symbol
        return self._diag(lambda k, f: f.scale(sym(k, j)))

    def contract_coframe(self, j: int, anti: bool) -> "FourierForm":
        """Interior product with d/dz_j (or d/dzbar_j)."""
        g = Form(self.n, {(((), (j,)) if anti else ((j,), ())): 1.0})
        return self._diag(lambda k, f: contract_adjoint(g, f))

    def component(self, p: int, q: int) -> "FourierForm":
        return self._diag(lambda k, f: f.component(p, q))

    def inner(self, other: "FourierForm") -> complex:
        """L2 product (volume 1), conjugate-linear in ``other``."""
        return complex(sum(inner(f, other.comps[k]) for k, f in self.comps.items() if k in other.comps))

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def truncate(self, cutoff: int) -> "FourierForm":
        return FourierForm(self.n, {k: f for k, f in self.comps.items() if _band(k) <= cutoff})

    def evaluate(self, points: np.ndarray) -> Dict[tuple, np.ndarray]:
        points = np.asarray(points, dtype=float)
        out: Dict[tuple, np.ndarray] = {}
        for k, f in self.comps.items():
            phase = np.exp(2j * math.pi * (points @ np.asarray(k, dtype=float)))
            for m, c in f.terms.items():
                out[m] = out.get(m, 0) + c * phase
        return out


def one_form_01(f: FourierFunction, j: int = 0) -> FourierForm:
    """f dzbar_j."""
    return FourierForm.from_function(f, Form(f.n, {((), (j,)): 1.0}))


# --- vector fields -------------------------------------------------------------


@dataclass
class FourierField:
    """V = sum_j a_j d/dz_j + b_j d/dzbar_j."""

    n: int
    a: List[FourierFunction]
    b: List[FourierFunction]

    @classmethod
    def sharp(cls, theta: FourierForm) -> "FourierField":
        """Hermitian dual: contraction with it is the pointwise adjoint of ``theta ^``."""
        n = theta.n
        a = [FourierFunction(n) for _ in range(n)]
        b = [FourierFunction(n) for _ in range(n)]
        for k, m, c in theta.terms():
            holo, anti = m
            if len(holo) + len(anti) != 1:
                raise ValueError("sharp needs a 1-form")
            e = FourierFunction(n, {k: c}).conj()
            if holo:
                a[holo[0]] = a[holo[0]] + e
            else:
                b[anti[0]] = b[anti[0]] + e
        return cls(n, a, b)

    def conj(self) -> "FourierField":
        return FourierField(self.n, [f.conj() for f in self.b], [f.conj() for f in self.a])

    def __add__(self, other: "FourierField") -> "FourierField":
        return FourierField(
            self.n, [x + y for x, y in zip(self.a, other.a)], [x + y for x, y in zip(self.b, other.b)]
        )

    def scale(self, t) -> "FourierField":
        return FourierField(self.n, [f * t for f in self.a], [f * t for f in self.b])

    @property
    def band(self) -> int:
        return max([f.band for f in self.a + self.b] + [0])

    def contract(self, u: FourierForm) -> FourierForm:
        out = FourierForm.zero(self.n)
        for j in range(self.n):
            out = out + u.contract_coframe(j, False).times(self.a[j])
            out = out + u.contract_coframe(j, True).times(self.b[j])
        return out

    def covariant(self, u: FourierForm) -> FourierForm:
        """Flat covariant derivative along V: differentiate coefficients."""
        out = FourierForm.zero(self.n)
        for j in range(self.n):
            out = out + u.d_coeff(j, False).times(self.a[j])
            out = out + u.d_coeff(j, True).times(self.b[j])
        return out

    def gradient_action(self, u: FourierForm) -> FourierForm:
        """Derivation extension of X -> nabla_X V acting on u (p times the averaged form)."""
        out = FourierForm.zero(self.n)
        for j in range(self.n):
            out = out + self.a[j].d().wedge(u.contract_coframe(j, False))
            out = out + self.b[j].d().wedge(u.contract_coframe(j, True))
        return out

    def lie(self, u: FourierForm) -> FourierForm:
        """Cartan formula d i_V + i_V d."""
        return self.contract(u).d() + self.contract(u.d())

    def lie_direct(self, u: FourierForm) -> FourierForm:
        return self.covariant(u) + self.gradient_action(u)

    def div(self) -> FourierFunction:
        out = FourierFunction(self.n)
        for j in range(self.n):
            out = out + self.a[j].d_z(j) + self.b[j].d_zbar(j)
        return out

    def norm2(self) -> FourierFunction:
        out = FourierFunction(self.n)
        for f in self.a + self.b:
            out = out + f * f.conj()
        return out


# --- certificate -----------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    C1: float  # |const mode| - sum |other modes|, lower bound for inf |theta|
    C2: float  # sqrt(2) pi sum |k| |theta_k|, upper bound for sup |grad theta|
    nowhere_vanishing: bool

    @property
    def threshold_shape(self) -> float:
        """C2 / C1: the t-threshold up to the unknown dimensional constant."""
        return self.C2 / self.C1 if self.C1 > 0 else math.inf


def certificate(theta: FourierForm) -> Certificate:
    zero = (0,) * (2 * theta.n)
    norms = {k: math.sqrt(max(inner(f, f).real, 0.0)) for k, f in theta.comps.items()}
    c0 = norms.get(zero, 0.0)
    rest = sum(v for k, v in norms.items() if k != zero)
    grad = sum(math.sqrt(2) * math.pi * math.sqrt(sum(x * x for x in k)) * v for k, v in norms.items())
    c1 = c0 - rest
    return Certificate(c1, grad, c1 > 0)


# --- expression grammar ------------------------------------------------------------


_FUNCS = ("cos", "sin", "exp")


def _linear(node, n: int) -> Tuple[Dict[int, float], float]:
    """Linear form in x_j, y_j: returns ({coordinate index: coefficient}, constant)."""
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return {}, float(node.value)
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return {}, math.pi
        for prefix, off in (("x_", 0), ("y_", n)):
            if node.id.startswith(prefix) and node.id[2:].isdigit():
                j = int(node.id[2:])
                if not 1 <= j <= n:
                    raise ExpressionError(f"{node.id} out of range for n={n}")
                return {off + j - 1: 1.0}, 0.0
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        lin, c = _linear(node.operand, n)
        s = -1.0 if isinstance(node.op, ast.USub) else 1.0
        return {k: s * v for k, v in lin.items()}, s * c
    if isinstance(node, ast.BinOp):
        la, ca = _linear(node.left, n)
        lb, cb = _linear(node.right, n)
        if isinstance(node.op, (ast.Add, ast.Sub)):
            s = 1.0 if isinstance(node.op, ast.Add) else -1.0
            out = dict(la)
            for k, v in lb.items():
                out[k] = out.get(k, 0.0) + s * v
            return out, ca + s * cb
        if isinstance(node.op, ast.Mult):
            if la and lb:
                raise ExpressionError("nonlinear argument")
            if la:
                return {k: v * cb for k, v in la.items()}, ca * cb
            return {k: v * ca for k, v in lb.items()}, ca * cb
        if isinstance(node.op, ast.Div) and not lb:
            return {k: v / cb for k, v in la.items()}, ca / cb
    raise ExpressionError(f"unsupported argument syntax: {ast.dump(node)}")


def _trig_mode(arg, n: int, scale: float) -> Mode:
    lin, const = _linear(arg, n)
    if abs(const) > 1e-12:
        raise ExpressionError("trig arguments must not have a constant phase")
    k = [0] * (2 * n)
    for idx, v in lin.items():
        r = v / scale
        if abs(r - round(r)) > 1e-9:
            raise ExpressionError("argument must be 2*pi times an integer combination of coordinates")
        k[idx] = int(round(r))
    return tuple(k)


def _eval_expr(node, n: int) -> FourierFunction:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return FourierFunction.constant(n, node.value)
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return FourierFunction.constant(n, math.pi)
        if node.id in ("i", "I"):
            return FourierFunction.constant(n, 1j)
        if node.id in ("cos", "sin"):
            # bare shorthand: cos means cos(2*pi*x_1)
            k = tuple([1] + [0] * (2 * n - 1))
            return _trig(node.id, k, n)
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_expr(node.operand, n)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a, b = _eval_expr(node.left, n), _eval_expr(node.right, n)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        if isinstance(node.op, ast.Div):
            return a / b
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes one argument")
        if node.func.id == "exp":
            # exp(2*pi*i*(k.x)) only
            arg = node.args[0]
            lin_node = _strip_i(arg)
            return FourierFunction(n, {_trig_mode(lin_node, n, 2 * math.pi): 1.0})
        return _trig(node.func.id, _trig_mode(node.args[0], n, 2 * math.pi), n)
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)}")


def _strip_i(node):
    """Remove a single factor ``i`` from a product expression."""
    if isinstance(node, ast.Name) and node.id in ("i", "I"):
        return ast.Constant(1.0)
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        for side in ("left", "right"):
            sub = getattr(node, side)
            if isinstance(sub, ast.Name) and sub.id in ("i", "I"):
                return getattr(node, "right" if side == "left" else "left")
            try:
                stripped = _strip_i(sub)
            except ExpressionError:
                continue
            return ast.BinOp(
                left=stripped if side == "left" else node.left,
                op=ast.Mult(),
                right=stripped if side == "right" else node.right,
            )
    raise ExpressionError("exp argument must be 2*pi*i*(integer combination of coordinates)")


def _trig(name: str, k: Mode, n: int) -> FourierFunction:
    neg = tuple(-x for x in k)
    if k == neg:
        return FourierFunction.constant(n, 1.0 if name == "cos" else 0.0)
    if name == "cos":
        return FourierFunction(n, {k: 0.5, neg: 0.5})
    return FourierFunction(n, {k: -0.5j, neg: 0.5j})


def parse_function(text: str, n: int) -> FourierFunction:
    """Trigonometric polynomial from e.g. ``2+cos(2*pi*x_1)`` or ``3*sin(2*pi*(x_1-y_2))``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from None
    return _eval_expr(tree.body, n)


def parse_theta(text: str, n: int, component: int = 1) -> FourierForm:
    """``f dzbar_component`` with ``f`` given by :func:`parse_function` (component is 1-based)."""
    if not 1 <= component <= n:
        raise ExpressionError(f"component {component} out of range for n={n}")
    return one_form_01(parse_function(text, n), component - 1)


# --- operator assembly ------------------------------------------------------------


def _basis_index(spec: TorusSpec, cutoff: int, p: int, qs: Sequence[int]):
    monos = [m for q in qs for m in basis(spec.n, p, q)]
    modes = spec.modes(cutoff)
    idx = {(k, m): i for i, (k, m) in enumerate(itertools.product(modes, monos))}
    return list(idx), idx


def _columns(op, spec: TorusSpec, src, dst_index, dtype=complex) -> np.ndarray:
    mat = np.zeros((len(dst_index), len(src)), dtype=dtype)
    for j, (k, m) in enumerate(src):
        img = op(FourierForm(spec.n, {k: Form(spec.n, {m: 1.0})}))
        for kk, mm, c in img.terms():
            i = dst_index.get((kk, mm))
            if i is not None:
                mat[i, j] = c
    return mat


def assemble_operators(spec: TorusSpec, theta: FourierForm, p: int) -> Dict[str, object]:
    """Matrices of dbar, dbar^*, theta^ and i_{theta#} on Omega^{p,*}.

    Inputs live on the cutoff box, outputs on the box padded by the band of
    theta, so nothing is truncated.
    """
    B = theta.band
    if spec.cutoff < B:
        raise BandOverflow(f"cutoff {spec.cutoff} below the band {B} of theta")
    qs = list(range(spec.n + 1))
    src, _ = _basis_index(spec, spec.cutoff, p, qs)
    dst, dst_index = _basis_index(spec, spec.cutoff + B, p, qs)
    sharp = FourierField.sharp(theta)
    return {
        "src": src,
        "dst": dst,
        "dbar": _columns(lambda u: u.dbar(), spec, src, dst_index),
        "dbar_star": _columns(lambda u: u.dbar_star(), spec, src, dst_index),
        "theta_wedge": _columns(lambda u: theta.wedge(u), spec, src, dst_index),
        "i_theta": _columns(sharp.contract, spec, src, dst_index),
    }


def dirac_truncated(spec: TorusSpec, theta: FourierForm, p: int, t: float, parity: int, cutoff: int | None = None):
    """Hard-truncated matrix of dbar + dbar^* + t theta^ + t i_{theta#} from one parity to the other."""
    N = spec.cutoff if cutoff is None else cutoff
    n = spec.n
    src_q = [q for q in range(n + 1) if q % 2 == parity]
    dst_q = [q for q in range(n + 1) if q % 2 != parity]
    src, _ = _basis_index(spec, N, p, src_q)
    _, dst_index = _basis_index(spec, N, p, dst_q)
    th = theta.scale(t)
    sharp = FourierField.sharp(th)

    def op(u):
        return u.dbar() + u.dbar_star() + th.wedge(u) + sharp.contract(u)

    return _columns(op, spec, src, dst_index)


# --- integral identities ---------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResidual:
    values: Tuple[complex, ...]
    residual: float
    scale: float

    @property
    def relative(self) -> float:
        return self.residual / max(self.scale, 1e-300)


def lie_identity_expressions(theta: FourierForm, u: FourierForm, v: FourierForm):
    """The three expressions of the Lie-derivative identity for V = theta#."""
    V = FourierField.sharp(theta)
    e1 = V.lie(u).inner(v)
    e2 = V.contract(u).inner(v.d_star()) + u.d().inner(theta.wedge(v))
    e3 = V.covariant(u).inner(v) + V.gradient_action(u).inner(v)
    return e1, e2, e3


def verify_lie_identity(theta: FourierForm, u: FourierForm, v: FourierForm) -> IdentityResidual:
    vals = lie_identity_expressions(theta, u, v)
    res = max(abs(vals[0] - vals[1]), abs(vals[1] - vals[2]), abs(vals[0] - vals[2]))
    return IdentityResidual(vals, res, max(1.0, *(abs(x) for x in vals)))


def real_dual(theta: FourierForm) -> FourierForm:
    """theta + conj(theta): the real 1-form whose dual is the real field of theta#."""
    out = {}
    for k, f in theta.comps.items():
        kk = tuple(-x for x in k)
        out[kk] = out[kk] + f.conj() if kk in out else f.conj()
    return theta + FourierForm(theta.n, out)


def prop_sides(V: FourierField, u: FourierForm):
    """(LHS, RHS) of the symmetrized Lie-derivative identity for the field V."""
    Lu = V.lie(u)
    Au = V.gradient_action(u)
    lhs = Lu.inner(u) + u.inner(Lu)
    rhs = Au.inner(u) + u.inner(Au) - u.times(V.div()).inner(u)
    return lhs, rhs


def verify_lie_symmetrized(theta: FourierForm, u: FourierForm, real_field: bool = True) -> IdentityResidual:
    """Residual of the symmetrized identity.

    The identity uses a real vector field; by default the real field dual to
    theta + conj(theta) is used.  ``real_field=False`` plugs in the complex
    field theta# itself, for which the identity does not hold in general.
    """
    V = FourierField.sharp(real_dual(theta) if real_field else theta)
    lhs, rhs = prop_sides(V, u)
    return IdentityResidual((lhs, rhs), abs(lhs - rhs), max(1.0, abs(lhs), abs(rhs)))


def cartan_residual(theta: FourierForm, u: FourierForm) -> float:
    V = FourierField.sharp(theta)
    return (V.lie(u) - V.lie_direct(u)).norm()


@dataclass
class KernelIdentityResult:
    lhs: float
    rhs: float
    residual: float
    dirac_residual: float  # ||D alpha|| / ||alpha||
    constant: float | None  # residual / (||D alpha|| ||alpha||) when D alpha != 0
    status: str  # "pass" | "relaxed"


def kernel_identity_sides(theta: FourierForm, alpha: FourierForm) -> Tuple[float, float]:
    V = FourierField.sharp(theta)
    lhs = alpha.times(V.norm2()).inner(alpha).real
    rhs = -theta.dbar().wedge(alpha).inner(alpha).real - V.lie(alpha).inner(alpha).real
    return lhs, rhs


def apply_dirac(theta: FourierForm, u: FourierForm) -> FourierForm:
    V = FourierField.sharp(theta)
    return u.dbar() + u.dbar_star() + theta.wedge(u) + V.contract(u)


def verify_kernel_identity(
    spec: TorusSpec, theta: FourierForm, p: int, alpha: FourierForm | None = None, parity: int = 0, tol: float = 1e-9
) -> KernelIdentityResult:
    """Check the kernel identity on alpha, or on a near-null vector of the truncated operator.

    Raises :class:`Vacuous` when the truncated operator has no near-null vector.
    """
    if alpha is None:
        mat = dirac_truncated(spec, theta, p, 1.0, parity)
        _, s, vh = np.linalg.svd(mat)
        smax = float(s.max()) if s.size else 0.0
        smin = float(s.min()) if s.size else 0.0
        if mat.shape[1] > mat.shape[0] or smin <= NUMERIC_KERNEL_RTOL * smax:
            vec = vh[-1].conj()
        else:
            raise Vacuous(smin, smax)
        src_q = [q for q in range(spec.n + 1) if q % 2 == parity]
        src, _ = _basis_index(spec, spec.cutoff, p, src_q)
        alpha = FourierForm.from_terms(spec.n, {(k, m): c for (k, m), c in zip(src, vec) if abs(c) > 1e-15})
    lhs, rhs = kernel_identity_sides(theta, alpha)
    norm = alpha.norm()
    dres = apply_dirac(theta, alpha).norm() / max(norm, 1e-300)
    resid = abs(lhs - rhs)
    const = resid / (dres * norm * norm) if dres > 0 and norm > 0 else None
    status = "pass" if dres <= 1e-8 and resid <= tol * max(1.0, abs(lhs)) else "relaxed"
    return KernelIdentityResult(lhs, rhs, resid, dres, const, status)


def parseval_check(u: FourierForm, v: FourierForm) -> float:
    """|mode-sum product - grid quadrature product| on a grid fine enough to be exact."""
    n = u.n
    M = u.band + v.band + 1
    axes = [np.arange(M) / M] * (2 * n)
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2 * n)
    uu, vv = u.evaluate(pts), v.evaluate(pts)
    quad = sum(np.mean(uu[m] * np.conj(vv[m])) for m in uu if m in vv)
    return abs(complex(quad) - u.inner(v))


def random_banded(rng, n: int, p: int, q: int, band: int, density: float = 0.6) -> FourierForm:
    terms = {}
    for k in itertools.product(range(-band, band + 1), repeat=2 * n):
        for m in basis(n, p, q):
            if rng.random() < density:
                terms[(k, m)] = complex(rng.normal(), rng.normal())
    return FourierForm.from_terms(n, terms)


# --- sigma_min scan ---------------------------------------------------------------------


def sigma_min(mat: np.ndarray, tol: float = 1e-10, max_iter: int = 500) -> Tuple[float, float]:
    """Smallest singular value by inverse iteration on D^H D, plus a dense-SVD cross-check."""
    dense = float(np.linalg.svd(mat, compute_uv=False).min()) if mat.size else 0.0
    if mat.shape[0] != mat.shape[1]:
        return dense, dense
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu = scipy.linalg.lu_factor(mat)
        except (scipy.linalg.LinAlgWarning, ValueError, np.linalg.LinAlgError):
            return 0.0, dense
    x = np.ones(mat.shape[1], dtype=complex) / math.sqrt(mat.shape[1])
    lam = None
    for _ in range(max_iter):
        y = scipy.linalg.lu_solve(lu, x, trans=2)
        z = scipy.linalg.lu_solve(lu, y)
        nz = float(np.linalg.norm(z))
        if not np.isfinite(nz) or nz == 0:
            return 0.0, dense
        new = 1.0 / nz  # Rayleigh-type estimate of sigma_min^2
        x = z / nz
        if lam is not None and abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    return math.sqrt(lam), dense


@dataclass
class ScanPoint:
    t: float
    cutoff: int
    sigma_even: float
    sigma_odd: float
    svd_even: float
    svd_odd: float


@dataclass
class ScanResult:
    n: int
    p: int
    cutoffs: Tuple[int, int]
    points: List[ScanPoint]
    certificate: Certificate
    witness: float | None
    stable: Dict[float, bool]
    threshold: float = 1e-6
    stability_rtol: float = 1e-3

    def rows(self):
        for pt in self.points:
            yield pt.t, pt.cutoff, pt.sigma_even, pt.sigma_odd


def _scan_point(spec: TorusSpec, theta: FourierForm, p: int, t: float, cutoff: int) -> ScanPoint:
    se, de = sigma_min(dirac_truncated(spec, theta, p, t, 0, cutoff))
    so, do = sigma_min(dirac_truncated(spec, theta, p, t, 1, cutoff))
    return ScanPoint(t, cutoff, se, so, de, do)


def sigma_min_scan(
    spec: TorusSpec,
    theta: FourierForm,
    p: int,
    t_grid: Sequence[float],
    threshold: float = 1e-6,
    stability_rtol: float = 1e-3,
) -> ScanResult:
    """sigma_min of the truncated Dirac operator at cutoffs N and N+2 over a t-grid.

    The witness is the first t where both parities exceed ``threshold`` at both
    cutoffs and change by less than ``stability_rtol`` between them.
    """
    cert = certificate(theta)
    if not cert.nowhere_vanishing:
        raise CertificateFailed(f"l1 bound gives inf|theta| >= {cert.C1:.3g}; cannot certify nowhere vanishing")
    if not 0 <= p <= spec.n:
        raise ValueError(f"p must be in 0..{spec.n}")
    cutoffs = (spec.cutoff, spec.cutoff + 2)
    jobs = [(t, N) for t in t_grid for N in cutoffs]
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        points = list(pool.map(lambda job: _scan_point(spec, theta, p, float(job[0]), job[1]), jobs))
    stable, witness = {}, None
    for t in t_grid:
        lo, hi = [pt for pt in points if pt.t == float(t)]
        ok = all(
            abs(a - b) <= stability_rtol * max(abs(a), abs(b))
            for a, b in ((lo.sigma_even, hi.sigma_even), (lo.sigma_odd, hi.sigma_odd))
        )
        stable[float(t)] = ok
        big = min(lo.sigma_even, lo.sigma_odd, hi.sigma_even, hi.sigma_odd) > threshold
        if witness is None and ok and big:
            witness = float(t)
    return ScanResult(spec.n, p, cutoffs, points, cert, witness, stable, threshold, stability_rtol)


def constant_theta_sigma_min(spec: TorusSpec, c: Sequence[complex], t: float, cutoff: int | None = None) -> float:
    """Closed form for constant theta = sum c_j dzbar_j at p = 0, n = 1: min over modes of |symbol + t c|."""
    if spec.n != 1:
        raise ValueError("closed form implemented for n = 1")
    N = spec.cutoff if cutoff is None else cutoff
    return min(abs(dzbar_symbol(k, 0) + t * c[0]) for k in spec.modes(N))
