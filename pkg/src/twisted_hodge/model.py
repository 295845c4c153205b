"""Finite models: invariant complexes of Lie algebras with complex structure.

A model is given by the structure equations ``d phi^k`` (bidegrees (2,0) and
(1,1) only, so the complex structure is integrable by construction) and the
identity Hermitian metric on the coframe.  Flat tori are the abelian case.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .exterior import Form, basis, bidim, operator_matrix
from .linalg import is_zero_matrix, matmul
from .scalars import GaussianRational, parse_coeff


class ModelError(ValueError):
    pass


class ValidationFailed(ModelError):
    pass


@dataclass
class ValidationReport:
    name: str
    d_squared: Dict[str, str]
    unimodular: bool
    unimodular_detail: str
    passed: bool
    first_failure: str | None = None

    def as_dict(self):
        return {
            "name": self.name,
            "d_squared_residuals": self.d_squared,
            "unimodular": self.unimodular,
            "unimodular_detail": self.unimodular_detail,
            "passed": self.passed,
            "first_failure": self.first_failure,
        }


@dataclass
class LieComplexModel:
    name: str
    n: int
    dphi: List[Form]
    mode: str = "exact"
    theta_examples: Dict[str, Form] = field(default_factory=dict)
    _validated: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("complex dimension must be >= 1")
        if len(self.dphi) != self.n:
            raise ModelError(f"need {self.n} structure equations, got {len(self.dphi)}")
        for k, f in enumerate(self.dphi):
            if f.n != self.n:
                raise ModelError(f"dphi^{k + 1} has n={f.n}")
            bad = f.bidegrees() - {(2, 0), (1, 1)}
            if bad:
                raise ModelError(f"dphi^{k + 1} has forbidden bidegrees {sorted(bad)}")
        if self.mode not in ("exact", "numeric"):
            raise ModelError(f"unknown mode {self.mode!r}")

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def is_abelian(self) -> bool:
        return all(not f.terms for f in self.dphi)

    def as_numeric(self) -> "LieComplexModel":
        cast = lambda f: Form(f.n, {m: complex(c) for m, c in f.terms.items()})
        return LieComplexModel(
            self.name,
            self.n,
            [cast(f) for f in self.dphi],
            "numeric",
            {k: cast(v) for k, v in self.theta_examples.items()},
            self._validated,
        )

    # --- exterior derivative -------------------------------------------------
    def d_generator(self, holo: bool, k: int) -> Form:
        if holo:
            return self.dphi[k]
        return self.dphi[k].conj()

    def d(self, form: Form) -> Form:
        """Exterior derivative on invariant forms (graded Leibniz rule)."""
        n = self.n
        out = Form.zero(n)
        for (h, a), c in form.terms.items():
            gens = [(True, i) for i in h] + [(False, j) for j in a]
            for pos, (is_holo, k) in enumerate(gens):
                dg = self.d_generator(is_holo, k)
                if not dg.terms:
                    continue
                left = Form.monomial(n, [i for t, i in gens[:pos] if t], [j for t, j in gens[:pos] if not t])
                right = Form.monomial(n, [i for t, i in gens[pos + 1:] if t], [j for t, j in gens[pos + 1:] if not t])
                term = (left ^ dg) ^ right
                if pos % 2:
                    term = -term
                out = out + term.scale(c)
        return out

    def partial(self, form: Form) -> Form:
        """Component of d raising the holomorphic degree."""
        out = Form.zero(self.n)
        for (p, q) in form.bidegrees():
            out = out + self.d(form.component(p, q)).component(p + 1, q)
        return out

    def dbar(self, form: Form) -> Form:
        out = Form.zero(self.n)
        for (p, q) in form.bidegrees():
            out = out + self.d(form.component(p, q)).component(p, q + 1)
        return out


def validate(model: LieComplexModel) -> ValidationReport:
    """Check d^2 = 0 on every generator and unimodularity.

    Unimodularity is tested as ``d = 0`` on all forms of degree 2n - 1,
    which is equivalent to tr(ad_X) = 0 for every X.
    """
    n = model.n
    residuals, first = {}, None
    for k in range(n):
        for holo in (True, False):
            label = f"{'phi' if holo else 'phibar'}{k + 1}"
            dd = model.d(model.d_generator(holo, k))
            residuals[label] = str(dd)
            if not dd.is_zero() and first is None:
                first = f"d^2 {label} = {dd}"
    uni_detail = "ok"
    unimodular = True
    for p in range(n + 1):
        q = 2 * n - 1 - p
        if not 0 <= q <= n:
            continue
        for m in basis(n, p, q):
            img = model.d(Form(n, {m: 1}))
            if not img.is_zero():
                unimodular = False
                uni_detail = f"d of degree-{2 * n - 1} monomial {m} is {img}"
                break
        if not unimodular:
            break
    if first is None and not unimodular:
        first = "not unimodular: " + uni_detail
    report = ValidationReport(model.name, residuals, unimodular, uni_detail, first is None, first)
    model._validated = report.passed
    return report


def require_valid(model: LieComplexModel) -> LieComplexModel:
    if not model._validated:
        rep = validate(model)
        if not rep.passed:
            raise ValidationFailed(f"model {model.name!r} failed validation: {rep.first_failure}")
    return model


def torus_model(n: int) -> LieComplexModel:
    if n < 1:
        raise ModelError("torus dimension must be >= 1")
    m = LieComplexModel(f"torus_n{n}", n, [Form.zero(n) for _ in range(n)])
    validate(m)
    return m


# --- graded operators --------------------------------------------------------


@dataclass
class GradedOperator:
    """Per-bidegree blocks of a linear map with fixed bidegree shift."""

    n: int
    shift: Tuple[int, int]
    blocks: Dict[Tuple[int, int], np.ndarray]

    def block(self, p: int, q: int) -> np.ndarray:
        if (p, q) in self.blocks:
            return self.blocks[(p, q)]
        dp, dq = self.shift
        exact = next(iter(self.blocks.values())).dtype == object if self.blocks else True
        return np.zeros((bidim(self.n, p + dp, q + dq), bidim(self.n, p, q)), dtype=object if exact else complex)

    def compose(self, other: "GradedOperator") -> "GradedOperator":
        """self o other"""
        dp, dq = other.shift
        blocks = {}
        for (p, q), b in other.blocks.items():
            blocks[(p, q)] = matmul(self.block(p + dp, q + dq), b)
        return GradedOperator(self.n, (self.shift[0] + dp, self.shift[1] + dq), blocks)

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        if other.shift != self.shift:
            raise ValueError("shift mismatch")
        keys = set(self.blocks) | set(other.blocks)
        return GradedOperator(self.n, self.shift, {k: self.block(*k) + other.block(*k) for k in keys})

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(is_zero_matrix(b, tol) for b in self.blocks.values())


def graded_from(fn, n: int, shift: Tuple[int, int], exact: bool = True) -> GradedOperator:
    dp, dq = shift
    blocks = {}
    for p in range(n + 1):
        for q in range(n + 1):
            if 0 <= p + dp <= n and 0 <= q + dq <= n:
                blocks[(p, q)] = operator_matrix(fn, n, (p, q), (p + dp, q + dq), exact)
    return GradedOperator(n, shift, blocks)


def build_dbar(model: LieComplexModel) -> GradedOperator:
    require_valid(model)
    return graded_from(model.dbar, model.n, (0, 1), model.exact)


def build_partial(model: LieComplexModel) -> GradedOperator:
    require_valid(model)
    return graded_from(model.partial, model.n, (1, 0), model.exact)


# --- model files -------------------------------------------------------------


def _parse_terms(n: int, entries, mode: str, where: str) -> Form:
    terms = Form.zero(n)
    for idx, t in enumerate(entries):
        loc = f"{where}[{idx}]"
        try:
            coeff = parse_coeff(str(t["coeff"]), mode)
            bideg = t["bidegree"].replace(" ", "")
            i = int(t["i"]) - 1
            if bideg == "(2,0)":
                j = int(t["j"]) - 1
                if not 0 <= i < j < n:
                    raise ModelError(f"{loc}: (2,0) term needs 1 <= i < j <= n")
                f = Form.monomial(n, [i, j], [], coeff)
            elif bideg == "(1,1)":
                j = int(t["jbar"]) - 1
                if not (0 <= i < n and 0 <= j < n):
                    raise ModelError(f"{loc}: index out of range")
                f = Form.monomial(n, [i], [j], coeff)
            else:
                raise ModelError(f"{loc}: bidegree must be (2,0) or (1,1), got {t['bidegree']!r}")
        except KeyError as exc:
            raise ModelError(f"{loc}: missing field {exc}") from None
        except ValueError as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"{loc}: {exc}") from None
        terms = terms + f
    return terms


def model_from_dict(doc: dict) -> LieComplexModel:
    try:
        name = str(doc["name"])
        n = int(doc["n"])
    except KeyError as exc:
        raise ModelError(f"model document missing {exc}") from None
    mode = doc.get("mode", "exact")
    if mode not in ("exact", "numeric"):
        raise ModelError(f"mode must be exact or numeric, got {mode!r}")
    if n < 1:
        raise ModelError("n must be >= 1")
    raw = doc.get("dphi", {})
    for key in raw:
        if not key.isdigit() or not 1 <= int(key) <= n:
            raise ModelError(f"dphi key {key!r} out of range 1..{n}")
    dphi = [_parse_terms(n, raw.get(str(k + 1), []), mode, f"dphi[{k + 1}]") for k in range(n)]
    thetas = {}
    for label, entries in doc.get("theta_examples", {}).items():
        coeffs = [0] * n
        for idx, t in enumerate(entries):
            try:
                j = int(t["jbar"]) - 1
                c = parse_coeff(str(t["coeff"]), mode)
            except (KeyError, ValueError) as exc:
                raise ModelError(f"theta_examples[{label}][{idx}]: {exc}") from None
            if not 0 <= j < n:
                raise ModelError(f"theta_examples[{label}][{idx}]: jbar out of range")
            coeffs[j] = coeffs[j] + c
        thetas[label] = Form.one_form_01(coeffs)
    return LieComplexModel(name, n, dphi, mode, thetas)


def _coeff_str(c) -> str:
    if isinstance(c, GaussianRational):
        return str(c)
    return repr(complex(c)).strip("()")


def model_to_dict(model: LieComplexModel) -> dict:
    dphi = {}
    for k, f in enumerate(model.dphi):
        entries = []
        for (h, a), c in f:
            if len(h) == 2:
                entries.append({"bidegree": "(2,0)", "i": h[0] + 1, "j": h[1] + 1, "coeff": _coeff_str(c)})
            else:
                entries.append({"bidegree": "(1,1)", "i": h[0] + 1, "jbar": a[0] + 1, "coeff": _coeff_str(c)})
        dphi[str(k + 1)] = entries
    thetas = {
        label: [{"jbar": a[0] + 1, "coeff": _coeff_str(c)} for (h, a), c in th]
        for label, th in model.theta_examples.items()
    }
    return {"name": model.name, "n": model.n, "mode": model.mode, "dphi": dphi, "theta_examples": thetas}


def bundled_models() -> List[str]:
    root = resources.files("twisted_hodge") / "models"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_model(source) -> LieComplexModel:
    """Load a model from a path or a bundled name (``torus_n2``, ``hopf_surface``...)."""
    path = Path(source)
    if path.exists():
        text = path.read_text()
    else:
        stem = path.name[:-5] if path.name.endswith(".json") else path.name
        res = resources.files("twisted_hodge") / "models" / f"{stem}.json"
        if not res.is_file():
            raise FileNotFoundError(f"no model file {source!r} and no bundled model {stem!r}")
        text = res.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{source}: JSON error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return model_from_dict(doc)
