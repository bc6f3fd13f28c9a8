"""Command-line driver: ``heateta {coeffs,verify-bf,model,eta-poles,selftest}``.

Exit status: 0 success, 1 usage error, 2 invalid input, 3 truncation
budget exceeded, 4 a check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .geometry import GeometryError, GeometryJet, build_connection, build_dirac, complete_symmetries, validate
from .getzler import getzler_decompose, model_operator
from .heat_eta import MAX_LMAX, bismut_freed_check, eta_singularities, jet_heat_coefficients, trace_expansion
from .scalar import GaussianRational, format_scalar, parse_scalar
from .symbols import BudgetError, format_symbol, parametrix

__all__ = ["IngestError", "RunConfig", "ingest", "parse_jet", "run", "main"]

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BUDGET, EXIT_CHECK = 0, 1, 2, 3, 4

COMMANDS = ("coeffs", "verify-bf", "model", "eta-poles", "selftest")


class IngestError(ValueError):
    """Unreadable or invalid geometry input."""


@dataclass
class RunConfig:
    command: str
    input_path: Path | None = None
    l_max: int = 1
    fmt: str = "table"
    depth: int | None = None
    op: str = "dirac"
    strict: bool = False


# ---------------------------------------------------------------------------
# input


_TOP_KEYS = {"dimension", "aux_rank", "riemann", "twisting_curvature", "jets"}


def _exact(value, where: str) -> GaussianRational:
    if isinstance(value, bool) or isinstance(value, float):
        raise IngestError(f"{where}: exact values must be strings or integers, got {value!r}")
    if isinstance(value, int):
        return GaussianRational(value)
    if not isinstance(value, str):
        raise IngestError(f"{where}: expected a rational string, got {type(value).__name__}")
    try:
        return parse_scalar(value)
    except ValueError as exc:
        raise IngestError(f"{where}: {exc}") from None


def _index_list(value, length: int, where: str) -> tuple[int, ...]:
    if not isinstance(value, list) or len(value) != length or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        raise IngestError(f"{where}: expected a list of {length} integers")
    return tuple(value)


def _matrix(value, p: int, where: str):
    if not isinstance(value, list) or len(value) != p or any(not isinstance(r, list) or len(r) != p for r in value):
        raise IngestError(f"{where}: expected a {p}x{p} matrix")
    return [[_exact(v, f"{where}[{r}][{c}]") for c, v in enumerate(row)] for r, row in enumerate(value)]


def _check_keys(obj, allowed: set, where: str):
    if not isinstance(obj, dict):
        raise IngestError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise IngestError(f"{where}: unknown key(s) {unknown}")
    return obj


def parse_jet(data) -> GeometryJet:
    """Build a validated :class:`GeometryJet` from decoded JSON."""
    _check_keys(data, _TOP_KEYS, "input")
    for key in ("dimension", "aux_rank"):
        if key not in data:
            raise IngestError(f"input: missing key {key!r}")
        if not isinstance(data[key], int) or isinstance(data[key], bool) or data[key] < 1:
            raise IngestError(f"{key}: expected a positive integer")
    n, p = data["dimension"], data["aux_rank"]
    if n % 2 == 0:
        raise IngestError(f"dimension: even dimension {n} unsupported (odd dimension required)")
    riemann_entries = []
    for k, entry in enumerate(data.get("riemann", [])):
        where = f"riemann[{k}]"
        _check_keys(entry, {"ijkl", "value"}, where)
        idx = _index_list(entry.get("ijkl"), 4, f"{where}.ijkl")
        riemann_entries.append((idx, _exact(entry.get("value"), f"{where}.value")))
    twisting_entries = []
    for k, entry in enumerate(data.get("twisting_curvature", [])):
        where = f"twisting_curvature[{k}]"
        _check_keys(entry, {"ij", "matrix"}, where)
        idx = _index_list(entry.get("ij"), 2, f"{where}.ij")
        twisting_entries.append((idx, _matrix(entry.get("matrix"), p, f"{where}.matrix")))
    try:
        riemann, twisting = complete_symmetries(n, p, riemann_entries, twisting_entries)
    except GeometryError as exc:
        raise IngestError("; ".join(exc.violations)) from None
    metric_jets, connection_jets = {}, {}
    jets = _check_keys(data.get("jets", {}), {"metric", "connection"}, "jets")
    for k, entry in enumerate(jets.get("metric", [])):
        where = f"jets.metric[{k}]"
        _check_keys(entry, {"ij", "monomial", "value"}, where)
        i, j = _index_list(entry.get("ij"), 2, f"{where}.ij")
        mono = _index_list(entry.get("monomial"), n, f"{where}.monomial")
        v = _exact(entry.get("value"), f"{where}.value")
        for key in ((i, j, mono), (j, i, mono)):
            if metric_jets.get(key, v) != v:
                raise IngestError(f"{where}: contradicts an earlier entry")
            metric_jets[key] = v
    for k, entry in enumerate(jets.get("connection", [])):
        where = f"jets.connection[{k}]"
        _check_keys(entry, {"i", "monomial", "matrix"}, where)
        i = entry.get("i")
        if not isinstance(i, int) or not 1 <= i <= n:
            raise IngestError(f"{where}.i: expected an index in 1..{n}")
        mono = _index_list(entry.get("monomial"), n, f"{where}.monomial")
        connection_jets[(i, mono)] = _matrix(entry.get("matrix"), p, f"{where}.matrix")
    jet = GeometryJet(n, p, riemann, twisting, metric_jets, connection_jets)
    problems = validate(jet)
    if problems:
        raise IngestError("; ".join(problems))
    return jet


def ingest(path) -> GeometryJet:
    """Read a geometry JSON file (UTF-8)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"{path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_jet(data)


# ---------------------------------------------------------------------------
# reports


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _norm(n: int) -> str:
    return f"(4π)^{{-{n}/2}}"


def _coeffs_report(cfg: RunConfig, jet: GeometryJet):
    d, spec = jet_heat_coefficients(jet, cfg.l_max, cfg.op, strict=cfg.strict, depth=cfg.depth)
    traces = dict(trace_expansion(d))
    rows = [
        {
            "l": l,
            "exponent": _frac(e),
            "coefficient": str(v),
            "trace": f"{format_scalar(traces[e])} × {_norm(jet.n)}",
        }
        for l, (e, v) in enumerate(d)
    ]
    report = {
        "command": "coeffs",
        "dimension": jet.n,
        "aux_rank": jet.p,
        "op": cfg.op,
        "l_max": cfg.l_max,
        "normalization": _norm(jet.n),
        "entries": rows,
        "warnings": spec.warnings,
    }
    return report, True


def _verify_report(cfg: RunConfig, jet: GeometryJet):
    r = bismut_freed_check(jet, cfg.l_max, strict=cfg.strict, depth=cfg.depth)
    rows = [
        {
            "l": t.l,
            "exponent": _frac(t.exponent),
            "trace": format_scalar(t.trace),
            "status": "PASS" if t.passed else "FAIL",
        }
        for t in r.traces
    ]
    report = {
        "command": "verify-bf",
        "dimension": jet.n,
        "aux_rank": jet.p,
        "l_max": cfg.l_max,
        "normalization": _norm(jet.n),
        "traces": rows,
        "evidence": {
            "parametrix_getzler_order": r.parametrix_order,
            "parametrix_model_matches": r.parametrix_model_matches,
            "dq_getzler_order": r.dq_order,
            "model_top_form_value": str(r.top_form.model_value),
            "model_parity_zero": r.top_form.parity_zero,
            "x_free_remainder_order": r.remainder_x_free_order,
            "remainder_top_form_zero": r.remainder_top_form_zero,
            "x_prefixed_terms": r.x_prefixed_terms,
        },
        "first_nonzero_exponent": _frac(r.first_nonzero_exponent),
        "coverage_complete": r.coverage_complete,
        "violations": r.violations,
        "warnings": r.warnings,
        "result": "PASS" if r.passed else "FAIL",
    }
    return report, r.passed


def _model_report(cfg: RunConfig, jet: GeometryJet):
    n = jet.n
    depth = max(n, cfg.depth or 0)
    # models depend on the curvature at the base point only
    spec = build_dirac(jet, 1 - depth, strict=cfg.strict, l_max=1)
    items = []
    for i in range(n):
        items.append((f"nabla_{i + 1}", build_connection(spec.jets, i, 1 - depth)))
    items.append(("D", spec.dirac))
    items.append(("D^2", spec.dirac_squared))
    items.append(("Q", parametrix(spec.heat_operator, depth)))
    rows = []
    for name, sym in items:
        g = getzler_decompose(sym)
        rows.append({"operator": name, "getzler_order": g.order, "model": format_symbol(model_operator(g))})
    report = {"command": "model", "dimension": n, "aux_rank": jet.p, "operators": rows, "warnings": spec.warnings}
    return report, True


def _eta_report(cfg: RunConfig, jet: GeometryJet):
    d, spec = jet_heat_coefficients(jet, cfg.l_max, "dirac", strict=cfg.strict, depth=cfg.depth)
    eta = eta_singularities(d)
    report = {
        "command": "eta-poles",
        "dimension": jet.n,
        "aux_rank": jet.p,
        "l_max": cfg.l_max,
        "poles": [
            {
                "pole": _frac(s.pole),
                "residue": f"{format_scalar(s.residue)} × {_norm(jet.n)}",
                "from_exponent": _frac(s.exponent),
            }
            for s in eta.singularities
        ],
        "cutoff_exponent": None if eta.cutoff_exponent is None else _frac(eta.cutoff_exponent),
        "holomorphic_for_re_s_above": None if eta.holomorphic_beyond is None else _frac(eta.holomorphic_beyond),
        "warnings": spec.warnings,
    }
    return report, True


def _selftest_report(cfg: RunConfig):
    from .selftest import run_selftest

    rows = [{"suite": name, "status": "PASS" if ok else "FAIL", "detail": desc} for name, ok, desc in run_selftest()]
    ok = all(r["status"] == "PASS" for r in rows)
    return {"command": "selftest", "suites": rows, "result": "PASS" if ok else "FAIL"}, ok


# ---------------------------------------------------------------------------
# output


def _table(report: dict) -> str:
    lines = []
    cmd = report["command"]
    if "dimension" in report:
        lines.append(f"# {cmd}  n={report['dimension']}  p={report['aux_rank']}")
    if cmd == "coeffs":
        lines.append(f"# op={report['op']}  l_max={report['l_max']}")
        lines.append(f"{'l':>2}  {'exponent':>8}  coefficient")
        for r in report["entries"]:
            lines.append(f"{r['l']:>2}  {r['exponent']:>8}  {r['coefficient']}")
        lines.append("")
        lines.append("traces:")
        for r in report["entries"]:
            lines.append(f"{r['l']:>2}  {r['exponent']:>8}  {r['trace']}")
    elif cmd == "verify-bf":
        for r in report["traces"]:
            lines.append(f"{r['status']}  tr b_{r['l']}  t^{r['exponent']}  trace = {r['trace']}")
        for k, v in report["evidence"].items():
            lines.append(f"  {k}: {v}")
        lines.append(f"first potentially nonzero exponent: {report['first_nonzero_exponent']}")
        if not report["coverage_complete"]:
            lines.append("note: l_max does not reach every exponent below 1/2")
        for v in report["violations"]:
            lines.append(f"violation: {v}")
        lines.append(report["result"])
    elif cmd == "model":
        for r in report["operators"]:
            lines.append(f"{r['operator']}: Getzler order {r['getzler_order']}")
            lines.append(f"  model: {r['model']}")
    elif cmd == "eta-poles":
        if not report["poles"]:
            lines.append("no poles in the computed range")
        for r in report["poles"]:
            lines.append(f"s = {r['pole']}  residue {r['residue']} / Γ((s+1)/2)  (from t^{r['from_exponent']})")
        lines.append(f"cutoff exponent: {report['cutoff_exponent']}")
        lines.append(f"holomorphic for Re s > {report['holomorphic_for_re_s_above']}")
    elif cmd == "selftest":
        for r in report["suites"]:
            lines.append(f"{r['status']}  {r['suite']}: {r['detail']}")
        lines.append(report["result"])
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def dump_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def run(cfg: RunConfig, out=None) -> int:
    """Execute one command, write the report to ``out``, return the exit status."""
    out = out or sys.stdout
    try:
        if cfg.command == "selftest":
            report, ok = _selftest_report(cfg)
        else:
            if cfg.input_path is None:
                raise IngestError("--input is required")
            jet = ingest(cfg.input_path)
            handler = {
                "coeffs": _coeffs_report,
                "verify-bf": _verify_report,
                "model": _model_report,
                "eta-poles": _eta_report,
            }[cfg.command]
            report, ok = handler(cfg, jet)
    except IngestError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetError as exc:
        print(f"error: truncation budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    out.write(dump_json(report) if cfg.fmt == "json" else _table(report))
    return EXIT_OK if ok else EXIT_CHECK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _lmax(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if not 0 <= v <= MAX_LMAX:
        raise argparse.ArgumentTypeError(f"l_max must lie in 0..{MAX_LMAX}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("depth must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heateta", description="Exact heat-kernel coefficients of Dirac operators from curvature data.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "coeffs": "diagonal heat-kernel coefficients",
        "verify-bf": "check that tr b_l vanishes below t^{1/2}",
        "model": "Getzler orders and model operators",
        "eta-poles": "poles of the local eta density",
        "selftest": "run the built-in invariant suites",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--format", dest="fmt", choices=("table", "json"), default="table")
        if name == "selftest":
            continue
        p.add_argument("--input", dest="input_path", type=Path, required=True, help="geometry JSON file")
        p.add_argument("--lmax", dest="l_max", type=_lmax, default=1, help=f"highest coefficient index (0..{MAX_LMAX})")
        p.add_argument("--depth", type=_nonneg, default=None, help="parametrix depth override")
        p.add_argument("--strict", action="store_true", help="fail instead of defaulting missing jets to zero")
        if name == "coeffs":
            p.add_argument("--op", choices=("identity", "dirac"), default="dirac")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(
        command=args.command,
        input_path=getattr(args, "input_path", None),
        l_max=getattr(args, "l_max", 1),
        fmt=args.fmt,
        depth=getattr(args, "depth", None),
        op=getattr(args, "op", "dirac"),
        strict=getattr(args, "strict", False),
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
