"""Lee form, Gauduchon test and holomorphic scalar curvature on invariant models.

The Hermitian metric is the one making the coframe unitary, with fundamental
form omega = i sum_k phi^k ^ phibar^k, so <omega, omega> = n.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exterior import Form, contract_adjoint, inner, operator_matrix, real_one_form, vector_of, wedge
from .linalg import conj_transpose, matmul
from .model import LieComplexModel, require_valid
from .scalars import GaussianRational


class NotPositive(ValueError):
    pass


class DimensionTooSmall(ValueError):
    pass


class NotFlat(ValueError):
    pass


def kahler_form(n: int, exact: bool = True) -> Form:
    i = GaussianRational(0, 1) if exact else 1j
    return Form(n, {((k,), (k,)): i for k in range(n)})


def _hermitian_matrix(omega: Form) -> np.ndarray:
    """h with omega = i sum h_jk phi^j ^ phibar^k."""
    n = omega.n
    h = np.zeros((n, n), dtype=complex)
    for (holo, anti), c in omega.terms.items():
        h[holo[0], anti[0]] = complex(c) / 1j
    return h


def check_positive(omega: Form) -> None:
    if omega.terms and omega.bidegrees() != {(1, 1)}:
        raise NotPositive("omega must be a (1,1)-form")
    if not (omega - omega.conj()).is_zero(1e-12):
        raise NotPositive("omega is not real")
    h = _hermitian_matrix(omega)
    if omega.n and np.linalg.eigvalsh((h + h.conj().T) / 2).min() <= 0:
        raise NotPositive("omega is not positive definite")


def lefschetz_adjoint(a: Form, omega: Form) -> Form:
    """Metric adjoint of ``omega ^`` applied to ``a``."""
    if a.terms:
        a.bidegree()
    out = Form.zero(a.n)
    for (holo, anti), c in omega.terms.items():
        # adjoint of (phi^j ^ phibar^k ^) is i_{phibar^k} i_{phi^j}
        first = Form(a.n, {((holo[0],), ()): 1})
        second = Form(a.n, {((), (anti[0],)): 1})
        out = out + contract_adjoint(second, contract_adjoint(first, a)).scale(c.conjugate())
    return out


def _power(omega: Form, k: int) -> Form:
    out = Form.constant(omega.n, 1)
    for _ in range(k):
        out = wedge(omega, out)
    return out


@dataclass
class LeeFormResult:
    tau: Form
    theta: Form
    identity_residual: float
    gauduchon: bool
    d_star_theta: object
    theta_norm2: object
    S_J: object
    S_J_normalized: object  # S_J at |theta| = 1; None when theta = 0

    def as_dict(self) -> dict:
        f = lambda x: None if x is None else (str(x) if not isinstance(x, (float, bool)) else x)
        return {
            "tau": str(self.tau),
            "theta": str(self.theta),
            "identity_residual": self.identity_residual,
            "gauduchon": self.gauduchon,
            "d_star_theta": f(self.d_star_theta),
            "theta_norm2": f(self.theta_norm2),
            "S_J": f(self.S_J),
            "S_J_normalized": f(self.S_J_normalized),
        }


def _d_star_of_one_form(model: LieComplexModel, theta: Form):
    exact = model.exact
    d10 = operator_matrix(lambda f: model.d(f).component(1, 0), model.n, (0, 0), (1, 0), exact)
    d01 = operator_matrix(lambda f: model.d(f).component(0, 1), model.n, (0, 0), (0, 1), exact)
    v10 = vector_of(theta, 1, 0, exact).reshape(-1, 1)
    v01 = vector_of(theta, 0, 1, exact).reshape(-1, 1)
    return (matmul(conj_transpose(d10), v10) + matmul(conj_transpose(d01), v01))[0, 0]


def _real_part(x):
    return x.real if isinstance(x, (GaussianRational, complex)) else x


def lee_form(model: LieComplexModel, omega: Form | None = None) -> LeeFormResult:
    require_valid(model)
    n = model.n
    if n < 2:
        raise DimensionTooSmall("the Lee form identity needs n >= 2")
    omega = omega if omega is not None else kahler_form(n, model.exact)
    check_positive(omega)
    if not (omega - kahler_form(n, model.exact)).is_zero(1e-12):
        raise ValueError("only the coframe metric is supported; rescale the coframe in the model instead")
    tau = lefschetz_adjoint(model.partial(omega), omega)
    theta = tau + tau.conj()
    w = _power(omega, n - 1)
    residual_form = model.d(w) - wedge(theta, w).scale(n - 1)
    residual = float(np.sqrt(abs(complex(residual_form.norm2())))) if residual_form.terms else 0.0
    tol = None if model.exact else 1e-10
    gauduchon = model.partial(model.dbar(w)).is_zero(tol)
    dstar = _real_part(_d_star_of_one_form(model, theta))
    norm2 = _real_part(inner(theta, theta))
    S_J = 2 * (n - 1) * dstar + (n - 1) ** 2 * norm2
    normalized = None
    if norm2 != 0 and dstar == 0:
        # S_J is quadratic in theta once d*theta = 0
        normalized = S_J / norm2
    if gauduchon and S_J > 0 and not norm2 > 0:
        raise ArithmeticError("positive S_J with vanishing Lee form on a Gauduchon metric")
    return LeeFormResult(tau, theta, residual, gauduchon, dstar, norm2, S_J, normalized)


# --- real one-forms on flat tori ---------------------------------------------


@dataclass
class SplitResult:
    theta: Form
    part10: Form
    part01: Form
    norm2_01: object  # |theta^{0,1}|^2 = sum (f^2 + g^2) / 4

    @property
    def components_nonvanishing(self) -> bool:
        return self.norm2_01 > 0


def split_real_one_form(f, g) -> SplitResult:
    """Split sum f_j dx_j + g_j dy_j into its (1,0) and (0,1) parts."""
    theta = real_one_form(f, g)
    p10, p01 = theta.component(1, 0), theta.component(0, 1)
    exact = all(isinstance(v, (int, Fraction)) for v in list(f) + list(g))
    if exact:
        n01 = sum(Fraction(a) ** 2 + Fraction(b) ** 2 for a, b in zip(f, g)) / 4
    else:
        n01 = sum(float(a) ** 2 + float(b) ** 2 for a, b in zip(f, g)) / 4
    if _real_part(inner(p01, p01)) != n01 and exact:
        raise ArithmeticError("(0,1) norm mismatch")
    return SplitResult(theta, p10, p01, n01)


def parallel_components_check(model: LieComplexModel, f, g) -> bool:
    """Constant forms on a flat torus have constant (hence parallel) type components."""
    if not model.is_abelian:
        raise NotFlat(f"model {model.name!r} is not flat")
    if len(f) != model.n:
        raise ValueError("coefficient count does not match n")
    split = split_real_one_form(f, g)
    # constant coefficients: the flat connection kills both parts
    return (split.part10 + split.part01 - split.theta).is_zero(1e-12) and split.part01 == split.part10.conj()
