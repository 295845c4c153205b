"""twisted-hodge command line: validate, hodge, verify, scan."""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import fourier, genus, twisted
from .concurrency import max_workers
from .exterior import Form
from .linalg import Indeterminate
from .model import LieComplexModel, ModelError, ValidationFailed, load_model, validate
from .scalars import parse_coeff

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class Check:
    name: str
    status: str  # pass | fail | indeterminate | vacuous | precondition
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class RunReport:
    command: str
    model: str | None = None
    parameters: Dict = field(default_factory=dict)
    results: Dict = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    timing: float | None = None
    rows: List[List] | None = None
    header: List[str] | None = None
    trailer: List[List] | None = None

    @property
    def failed(self) -> bool:
        return any(c.status == "fail" for c in self.checks)

    def as_dict(self) -> dict:
        out = {
            "command": self.command,
            "model": self.model,
            "parameters": self.parameters,
            "results": self.results,
            "checks": [c.as_dict() for c in self.checks],
            "status": "fail" if self.failed else ("indeterminate" if any(c.status == "indeterminate" for c in self.checks) else "pass"),
        }
        if self.timing is not None:
            out["timing_s"] = round(self.timing, 6)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True, default=str) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.rows is not None:
            w.writerow(self.header)
            w.writerows(self.rows)
        else:
            w.writerow(["check", "status", "detail"])
            for c in self.checks:
                w.writerow([c.name, c.status, c.detail])
        for row in self.trailer or []:
            w.writerow(row)
        return buf.getvalue()


# --- argument helpers ---------------------------------------------------------------

_THETA_TERM = re.compile(r"\s*([+-])?\s*(?:\(([^()]*)\)|([0-9./]+))?\s*\*?\s*phi_?bar_?(\d+)\s*")


def parse_inline_theta(text: str, n: int, mode: str) -> Form:
    """``phibar1 + (1/2+i)*phibar2 - 3*phibar3`` as a (0,1)-form."""
    if text.strip() in ("0", "zero"):
        return Form.zero(n)
    pos, coeffs = 0, [0] * n
    text = text.strip()
    while pos < len(text):
        m = _THETA_TERM.match(text, pos)
        if not m or m.end() == pos:
            raise UsageError(f"cannot parse theta at column {pos + 1}: {text[pos:]!r}")
        sign, paren, plain, idx = m.groups()
        c = parse_coeff(paren or plain or "1", mode)
        if sign == "-":
            c = -c
        j = int(idx) - 1
        if not 0 <= j < n:
            raise UsageError(f"phibar{idx} out of range for n={n}")
        coeffs[j] = coeffs[j] + c
        pos = m.end()
    return Form.one_form_01(coeffs)


def resolve_theta(model: LieComplexModel, text: str | None) -> tuple:
    if text is None or text == "zero":
        return "zero", Form.zero(model.n) if "zero" not in model.theta_examples else model.theta_examples["zero"]
    if text in model.theta_examples:
        return text, model.theta_examples[text]
    return text, parse_inline_theta(text, model.n, model.mode)


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _load(args) -> LieComplexModel:
    if not getattr(args, "model", None):
        raise UsageError("--model is required")
    model = load_model(args.model)
    if getattr(args, "mode", None) == "numeric":
        model = model.as_numeric()
    return model


def _require_valid(model: LieComplexModel):
    rep = validate(model)
    if not rep.passed:
        raise ValidationFailed(rep.first_failure or "validation failed")


# --- commands -----------------------------------------------------------------------


def cmd_validate(args) -> RunReport:
    model = load_model(args.model)
    rep = validate(model)
    report = RunReport("validate", model.name, {"model": args.model})
    report.results = rep.as_dict()
    report.checks.append(Check("d^2 = 0 and unimodular", "pass" if rep.passed else "fail", rep.first_failure or ""))
    return report


def cmd_hodge(args) -> RunReport:
    model = _load(args)
    _require_valid(model)
    label, theta = resolve_theta(model, args.theta)
    ps = range(model.n + 1) if args.p == "all" else [int(args.p)]
    report = RunReport("hodge", model.name, {"theta": label, "p": args.p, "mode": model.mode})
    dims, gaps, provenance = {}, {}, None
    for p in ps:
        if not 0 <= p <= model.n:
            raise UsageError(f"p must be in 0..{model.n}")
        table = twisted.cohomology_dims(twisted.build_twisted(model, theta, p, label))
        dims.update(table.dims)
        gaps.update(table.gaps)
        provenance = table.provenance
    report.results["provenance"] = provenance
    report.results["dims"] = {f"{p},{q}": d for (p, q), d in sorted(dims.items())}
    if gaps:
        report.results["spectral_gap_ratio"] = {f"{p},{q}": g for (p, q), g in sorted(gaps.items())}
    if args.p == "all":
        table = genus.HodgeTable.from_dims(model.n, dims, provenance=provenance)
        poly = genus.chi(table)
        sv = genus.special_values(table)
        report.results["h"] = table.h
        report.results["chi_y"] = list(poly.coeffs)
        report.results["chi_y_text"] = str(poly)
        report.results["special_values"] = {
            "y=0": sv.arithmetic_genus,
            "y=-1": sv.euler_number,
            "y=1": sv.y_one,
            "y=1_is_signature": sv.y_one_is_signature,
        }
    report.header = ["p", "q", "dim"]
    report.rows = [[p, q, d] for (p, q), d in sorted(dims.items())]
    return report


# --- verify -----------------------------------------------------------------------


def _torus(args):
    n = args.torus_n or 1
    spec = fourier.TorusSpec(n, args.cutoff)
    theta = fourier.parse_theta(args.theta or "2+cos(2*pi*x_1)", n, args.theta_component)
    if spec.cutoff < theta.band:
        raise UsageError(f"cutoff {spec.cutoff} below the band {theta.band} of theta")
    return spec, theta


def _v_vanishing(args, report):
    model = _load(args)
    _require_valid(model)
    label, theta = resolve_theta(model, args.theta)
    if theta.is_zero():
        raise UsageError("the vanishing check needs a nonzero theta")
    table = twisted.twisted_table(model, theta, None, label)
    nonzero = {f"{p},{q}": d for (p, q), d in table.dims.items() if d}
    report.results["twisted_dims"] = table.grid()
    report.checks.append(Check("twisted cohomology vanishes", "fail" if nonzero else "pass", json.dumps(nonzero)))


def _v_index(args, report):
    model = _load(args)
    _require_valid(model)
    label, theta = resolve_theta(model, args.theta)
    ts = _floats(args.t) if args.t else [0.0, 1.0, 5.0]
    base = twisted.hodge_table(model)
    try:
        tw = twisted.twisted_table(model, theta, None, label)
    except twisted.NotDbarClosed:
        tw = None
    out = {}
    for p in range(model.n + 1):
        chi_p = twisted.twisted_euler(base, p)
        idx = [twisted.dirac_index(twisted.dirac_assemble(model, theta, p, t if not model.exact else _rational(t))) for t in ts]
        row = {"chi_p": chi_p, "index": idx}
        ok = all(i == chi_p for i in idx)
        if tw is not None:
            row["twisted_chi_p"] = twisted.twisted_euler(tw, p)
            ok &= row["twisted_chi_p"] == chi_p
        out[str(p)] = row
        report.checks.append(Check(f"index equals chi_{p}", "pass" if ok else "fail", json.dumps(row)))
    report.results["per_p"] = out


def _rational(t: float):
    from fractions import Fraction

    return Fraction(str(t))


def _samples(args, spec, theta, pair: bool):
    rng = np.random.default_rng(args.seed)
    band = max(spec.cutoff - theta.band, 0)
    n = spec.n
    out = []
    for i in range(args.samples):
        p = int(rng.integers(0, n + 1))
        q = int(rng.integers(0, n + 1))
        u = fourier.random_banded(rng, n, p, q, band)
        v = fourier.random_banded(rng, n, p, q, band) if pair else None
        out.append((u, v))
    return out


def _v_lie_identity(args, report):
    spec, theta = _torus(args)
    worst = 0.0
    for u, v in _samples(args, spec, theta, True):
        worst = max(worst, fourier.verify_lie_identity(theta, u, v).residual)
    report.results["max_residual"] = worst
    st = "pass" if worst <= args.tol else "fail"
    report.checks.append(Check("Lie derivative identity", st, f"max residual {worst:.3e} over {args.samples} pairs"))


def _v_lie_symmetrized(args, report):
    spec, theta = _torus(args)
    worst, complex_worst = 0.0, 0.0
    for u, _ in _samples(args, spec, theta, False):
        worst = max(worst, fourier.verify_lie_symmetrized(theta, u).residual)
        complex_worst = max(complex_worst, fourier.verify_lie_symmetrized(theta, u, real_field=False).residual)
    report.results["max_residual"] = worst
    report.results["max_residual_complex_field"] = complex_worst
    st = "pass" if worst <= args.tol else "fail"
    report.checks.append(
        Check("symmetrized Lie identity, real field", st, f"max residual {worst:.3e} over {args.samples} forms")
    )


def _v_kernel_identity(args, report):
    spec, theta = _torus(args)
    for parity in (0, 1):
        try:
            res = fourier.verify_kernel_identity(spec, theta, args.p_int, parity=parity, tol=args.tol)
        except fourier.Vacuous as exc:
            report.checks.append(Check(f"kernel identity parity {parity}", "vacuous", str(exc)))
            continue
        status = "pass" if res.status == "pass" else "indeterminate"
        report.checks.append(
            Check(
                f"kernel identity parity {parity}",
                status,
                f"lhs {res.lhs:.6g} rhs {res.rhs:.6g} residual {res.residual:.3e} |D a|/|a| {res.dirac_residual:.3e}",
            )
        )


def _v_h0(args, report):
    model = _load(args)
    _require_valid(model)
    label, theta = resolve_theta(model, args.theta)
    try:
        dim = twisted.h0_twisted(model, theta)
    except twisted.PreconditionExact as exc:
        report.results["h00"] = exc.value
        report.checks.append(Check("H^0 vanishes", "precondition", f"theta is dbar-exact; dim {exc.value}"))
        return
    report.results["h00"] = dim
    report.checks.append(Check("H^0 vanishes", "pass" if dim == 0 else "fail", f"dim {dim}"))


def _v_commutators(args, report):
    model = _load(args)
    _require_valid(model)
    _, theta = resolve_theta(model, args.theta)
    norms = twisted.commutator_check(model, theta)
    report.results["commutator_max_abs"] = norms
    bad = {k: v for k, v in norms.items() if v != 0}
    report.checks.append(Check("Laplacian commutators vanish", "fail" if bad else "pass", json.dumps(bad)))


def _v_decomposition(args, report):
    model = _load(args)
    _require_valid(model)
    _, theta = resolve_theta(model, args.theta)
    reps = genus.parallel_decomposition_chi(model, theta)
    report.results["chi_p"] = [r.chi_p for r in reps]
    report.results["h"] = [r.h_row for r in reps]
    ok = all(r.reconstruction_ok and r.chi_p == 0 for r in reps)
    detail = json.dumps({str(r.p): {"chi_p": r.chi_p, "reconstruction": r.reconstruction_ok} for r in reps})
    report.checks.append(Check("four-term decomposition and chi_p = 0", "pass" if ok else "fail", detail))


def _v_vaisman(args, report):
    if args.stable:
        with open(args.stable) as fh:
            doc = json.load(fh)
        st = genus.STable(int(doc["n"]), doc["s"])
    else:
        st = genus.STable(2, [[1, 0], [0, 0]])
    table = genus.vaisman_hodge(st)
    report.results["h"] = table.h
    report.results["chi_y"] = list(genus.chi(table).coeffs)
    ok = table.serre_symmetric() and genus.chi(table).is_zero()
    report.checks.append(Check("Serre symmetry and chi_y = 0", "pass" if ok else "fail", json.dumps(table.h)))
    if args.model:
        model = _load(args)
        _require_valid(model)
        inv = twisted.hodge_table(model).grid()
        same = inv == table.h
        report.checks.append(Check("matches invariant-complex table", "pass" if same else "fail", json.dumps(inv)))
    if args.random:
        rng = np.random.default_rng(args.seed)
        bad = 0
        for _ in range(args.random):
            t = genus.vaisman_hodge(genus.random_stable(rng, int(rng.integers(2, 5))))
            bad += not (t.serre_symmetric() and genus.chi(t).is_zero())
        report.checks.append(
            Check("random symmetric S tables", "fail" if bad else "pass", f"{bad} of {args.random} failed")
        )


VERIFY: Dict[str, Callable] = {
    "vanishing": _v_vanishing,
    "lie-identity": _v_lie_identity,
    "lie-symmetrized": _v_lie_symmetrized,
    "kernel-identity": _v_kernel_identity,
    "h0": _v_h0,
    "commutators": _v_commutators,
    "decomposition": _v_decomposition,
    "vaisman": _v_vaisman,
    "index": _v_index,
}
ALIASES = {
    "1.1": "vanishing",
    "3.3": "lie-identity",
    "3.4": "lie-symmetrized",
    "3.5": "kernel-identity",
    "3.6": "h0",
    "A.1": "commutators",
    "A.2": "decomposition",
    "A.4": "vaisman",
}


def cmd_verify(args) -> RunReport:
    which = ALIASES.get(args.which, args.which)
    if which not in VERIFY:
        raise UsageError(f"unknown check {args.which!r}; choose from {sorted(VERIFY) + sorted(ALIASES)}")
    args.p_int = int(args.p) if args.p not in (None, "all") else 0
    params = {k: v for k, v in vars(args).items() if k not in ("command", "func", "out", "format", "timing", "p_int")}
    report = RunReport("verify", args.model, params)
    report.results["check"] = which
    try:
        VERIFY[which](args, report)
    except Indeterminate as exc:
        report.checks.append(Check(which, "indeterminate", str(exc)))
    return report


def cmd_scan(args) -> RunReport:
    spec, theta = _torus(args)
    ts = _floats(args.t_grid)
    p = 0 if args.p in (None, "all") else int(args.p)
    res = fourier.sigma_min_scan(spec, theta, p, ts)
    report = RunReport("scan", None, {"torus_n": spec.n, "cutoff": spec.cutoff, "theta": args.theta, "p": p, "t_grid": ts})
    report.results["certificate"] = {
        "C1": res.certificate.C1,
        "C2": res.certificate.C2,
        "C2_over_C1": res.certificate.threshold_shape,
    }
    report.results["points"] = [
        {"t": pt.t, "cutoff": pt.cutoff, "sigma_min_even": pt.sigma_even, "sigma_min_odd": pt.sigma_odd} for pt in res.points
    ]
    report.results["stable"] = {str(t): v for t, v in res.stable.items()}
    report.results["witness"] = res.witness
    report.results["cutoffs"] = list(res.cutoffs)
    report.checks.append(
        Check(
            "sigma_min witness",
            "pass" if res.witness is not None else "no-witness",
            f"t* = {res.witness} at cutoffs {res.cutoffs}",
        )
    )
    report.header = ["t", "cutoff", "sigma_min_even", "sigma_min_odd", "stable"]
    report.rows = [[pt.t, pt.cutoff, pt.sigma_even, pt.sigma_odd, res.stable[pt.t]] for pt in res.points]
    report.trailer = [["witness", "" if res.witness is None else res.witness]]
    return report


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twisted-hodge", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", default="-", help="output path (default stdout)")
    common.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check d^2 = 0 and unimodularity of a model")
    v.add_argument("--model", required=True)
    v.set_defaults(func=cmd_validate)

    h = sub.add_parser("hodge", parents=[common], help="twisted Dolbeault dimensions and chi_y")
    h.add_argument("--model", required=True)
    h.add_argument("--theta", default=None, help="label from the model file or inline, e.g. 'phibar1 + 2*phibar2'")
    h.add_argument("--p", default="all")
    h.add_argument("--mode", choices=["exact", "numeric"], default=None)
    h.set_defaults(func=cmd_hodge)

    torus = argparse.ArgumentParser(add_help=False)
    torus.add_argument("--torus-n", type=int, default=None)
    torus.add_argument("--cutoff", type=int, default=4)
    torus.add_argument("--theta-component", type=int, default=1)

    r = sub.add_parser("verify", parents=[common, torus], help="run one executable check")
    r.add_argument("--which", required=True)
    r.add_argument("--model", default=None)
    r.add_argument("--theta", default=None)
    r.add_argument("--t", default=None, help="comma-separated t values for the index check")
    r.add_argument("--p", default=None)
    r.add_argument("--mode", choices=["exact", "numeric"], default=None)
    r.add_argument("--samples", type=int, default=20)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--tol", type=float, default=1e-9)
    r.add_argument("--stable", default=None, help="JSON file with {n, s} for the Vaisman check")
    r.add_argument("--random", type=int, default=0, help="also test this many random symmetric S tables")
    r.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", parents=[common, torus], help="sigma_min of the truncated twisted Dirac operator")
    s.add_argument("--theta", default="2+cos(2*pi*x_1)")
    s.add_argument("--t-grid", default="0.5,1,2,4,8,16")
    s.add_argument("--p", default=None)
    s.set_defaults(func=cmd_scan)
    return parser


def _emit(report: RunReport, args):
    text = report.to_csv() if args.format == "csv" else report.to_json()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


INVALID_INPUT = (
    UsageError,
    ModelError,
    ValidationFailed,
    FileNotFoundError,
    twisted.NotDbarClosed,
    twisted.NotClosed,
    twisted.NotFlat,
    fourier.CertificateFailed,
    fourier.ExpressionError,
    fourier.BandOverflow,
    genus.InvalidTable,
    ValueError,
)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        max_workers()
        start = time.perf_counter()
        report = args.func(args)
        if args.timing:
            report.timing = time.perf_counter() - start
        _emit(report, args)
    except INVALID_INPUT as exc:
        print(f"twisted-hodge: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report and map to the internal-error code
        print(f"twisted-hodge: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_INVALID if report.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
