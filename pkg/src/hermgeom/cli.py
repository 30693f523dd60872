"""Command-line front end.

Exit codes: 0 when everything asserted passes, 1 when an identity fails,
2 for usage, parse and precondition errors, 3 for numerical breakdown
(singular or indefinite metric, non-finite integrands).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import quadrature as quad
from . import zoo
from .connections import christoffels, inverse, torsion
from .curvature import chern_ricci, lc_ricci1
from .dsl import eval_scalar_jet, load_metric, parse_expr
from .errors import (DimensionError, DomainError, HermGeomError, HypothesisError, IntegrationError,
                     MetricError, ParseError)
from .identities import (ANALYTIC_TOL, FD_TOL, adjoint_torsion_norm_sq, identity_suite,
                         lambda_ddbar_omega, q_tensor)
from .jets import eval_jet
from .tensors import IdentityReport

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
MC_REL_TOL = 0.02


@dataclass
class RunConfig:
    """Everything that determines a run; serialized into every report."""

    command: str
    manifold: Optional[str] = None
    params: dict = field(default_factory=dict)
    metric_file: Optional[str] = None
    dim: Optional[int] = None
    box_half_width: float = 0.5
    assume: list = field(default_factory=list)
    seed: int = 0
    samples: Optional[int] = None
    points: Optional[int] = None
    scheme: Optional[str] = None
    quantity: Optional[str] = None
    density: Optional[str] = None
    weights: Optional[list] = None
    tolerances: dict = field(default_factory=dict)
    format: str = "json"

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


# --------------------------------------------------------------------------
# helpers

def _parse_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"parameter {item!r} must look like name=value")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def parse_point(text: str, n: int) -> np.ndarray:
    """``"1,0"`` or ``"1+2i, 0.5-1j"`` -> complex coordinates."""
    parts = [p.strip().replace("i", "j") for p in text.split(",") if p.strip()]
    try:
        pt = np.array([complex(p.replace(" ", "")) for p in parts])
    except ValueError as exc:
        raise ValueError(f"cannot parse point {text!r}: {exc}") from None
    if pt.shape != (n,):
        raise DimensionError(f"point {text!r} has {pt.size} coordinates, manifold has dimension {n}")
    return pt


def _resolve(cfg: RunConfig) -> zoo.ZooEntry:
    """Build the zoo entry or DSL-file field named by the config."""
    if cfg.metric_file:
        if cfg.manifold:
            raise ValueError("give either --manifold or --metric-file, not both")
        if not cfg.dim:
            raise ValueError("--metric-file needs --dim")
        with open(cfg.metric_file, encoding="utf-8") as fh:
            source = fh.read()
        fld = load_metric(source, cfg.dim, name=cfg.metric_file)
        dom = quad.Box(cfg.dim, -cfg.box_half_width, cfg.box_half_width)
        return zoo.ZooEntry("dsl", cfg.dim, {"file": cfg.metric_file}, fld, dom, {}, frozenset(cfg.assume))
    if not cfg.manifold:
        raise ValueError("a manifold is required (--manifold NAME or --metric-file PATH)")
    entry = zoo.get_entry(cfg.manifold, **cfg.params)
    if cfg.dim is not None and cfg.dim != entry.n:
        raise DimensionError(f"{cfg.manifold} has dimension {entry.n}, not {cfg.dim}")
    if cfg.assume:
        entry = zoo.ZooEntry(entry.name, entry.n, entry.params, entry.field, entry.domain, entry.known_facts,
                             entry.properties | frozenset(cfg.assume))
    return entry


def _clean(x):
    """JSON-ready copy: complex arrays become ``{"re", "im"}``, NaN becomes null, -0.0 becomes 0.0."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": _clean(x.real.tolist()), "im": _clean(x.imag.tolist())}
        return _clean(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _clean(float(x.real)), "im": _clean(float(x.imag))}
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not math.isfinite(x) else x + 0.0
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, frozenset):
        return sorted(x)
    return x


def to_json(report) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _render(report: dict, fmt: str) -> str:
    data = _clean(report)
    if fmt == "json":
        return json.dumps(data, sort_keys=True, indent=2)
    table = data.get("reports") if isinstance(data, dict) else None
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if table is not None:
            cols = ["identity", "n", "points", "max_residual", "mean_residual", "tolerance", "verdict"]
            w.writerow(cols)
            for r in table:
                w.writerow([r.get(c) for c in cols])
        else:
            w.writerow(["key", "value"])
            for k, v in _flatten(data):
                w.writerow([k, v])
        return buf.getvalue().rstrip("\n")
    if fmt == "pretty":
        lines = []
        if table is not None:
            head = f"{'identity':<26} {'points':>6} {'max_residual':>13} {'tolerance':>10}  verdict"
            lines += [head, "-" * len(head)]
            for r in table:
                tol = "-" if r["tolerance"] is None else f"{r['tolerance']:.1e}"
                lines.append(f"{r['identity']:<26} {r['points']:>6} {r['max_residual']:>13.3e} {tol:>10}  "
                             f"{r['verdict']}")
            rest = {k: v for k, v in data.items() if k != "reports"}
        else:
            rest = data
        width = max((len(k) for k, _ in _flatten(rest)), default=0)
        lines += [f"{k:<{width}}  {v}" for k, v in _flatten(rest)]
        return "\n".join(lines)
    raise ValueError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------
# commands

def point_report(cfg: RunConfig, point) -> dict:
    entry = _resolve(cfg)
    p = parse_point(point, entry.n) if isinstance(point, str) else np.asarray(point, dtype=complex)
    jet = eval_jet(entry.field, p[None, :]).take(0)
    M = inverse(jet)
    cs = christoffels(jet, M)
    ts = torsion(jet, M)
    r1, r2, s = chern_ricci(jet, M)

    def summary(a):
        return {"max_abs": float(np.max(np.abs(a))), "frobenius": float(np.linalg.norm(a))}

    return {
        "config": cfg.to_dict(),
        "manifold": entry.field.name,
        "point": p,
        "h": jet.h,
        "christoffel": {"chern": summary(cs.chern), "lc_holo": summary(cs.lc_holo),
                        "lc_mixed": summary(cs.lc_mixed)},
        "ricci1": r1.coeff,
        "ricci2": r2.coeff,
        "lc_ricci1": lc_ricci1(jet, M).coeff,
        "chern_scalar": float(s),
        "torsion_trace": ts.trace,
        "adjoint_torsion_norm_sq": float(adjoint_torsion_norm_sq(jet, M)),
        "q": q_tensor(jet, M).coeff,
        "lambda_ddbar_omega": lambda_ddbar_omega(jet, M).coeff,
    }


def run_identity_suite(cfg: RunConfig) -> tuple[dict, int]:
    entry = _resolve(cfg)
    pts = entry.sample(cfg.points or 50, cfg.seed)
    tol = cfg.tolerances.get("analytic", ANALYTIC_TOL)
    per = {k: v for k, v in cfg.tolerances.items() if k != "analytic"}
    reports = identity_suite(entry.jet(pts), entry.properties, tol, per)
    ok = all(r.passed for r in reports)
    out = {"config": cfg.to_dict(), "manifold": entry.field.name, "properties": sorted(entry.properties),
           "reports": [r.to_dict() for r in reports], "all_passed": ok}
    return out, EXIT_OK if ok else EXIT_FAIL


def run_jet_check(cfg: RunConfig, step: float) -> tuple[dict, int]:
    entry = _resolve(cfg)
    pts = entry.sample(cfg.points or zoo.JET_CHECK_POINTS, cfg.seed)
    err = zoo.jet_check(entry.field, pts, step=step)
    tol = cfg.tolerances.get("jet", zoo.JET_CHECK_TOL)
    rep = IdentityReport.from_residuals("jet_vs_finite_difference", entry.n, err, tol, step=step)
    out = {"config": cfg.to_dict(), "manifold": entry.field.name, "reports": [rep.to_dict()],
           "step": step, "all_passed": rep.passed}
    return out, EXIT_OK if rep.passed else EXIT_FAIL


def integrate_cmd(cfg: RunConfig, threads: Optional[int] = None) -> tuple[dict, int]:
    entry = _resolve(cfg)
    density = cfg.density
    weights = tuple(cfg.weights or (0.5, 0.5))
    samples = cfg.samples or 100_000
    scheme = cfg.scheme or "mc"
    common = dict(samples=samples, seed=cfg.seed, scheme=scheme, threads=threads)
    q = cfg.quantity
    out = {"config": cfg.to_dict(), "manifold": entry.field.name, "quantity": q}
    code = EXIT_OK
    if q == "c1n":
        est = quad.intersection_number_c1(entry.field, entry.domain, **common)
        out.update(est.to_dict())
    elif q == "l2-lemma":
        rep = quad.l2_identity_check(entry.field, entry.domain,
                                     tolerance=cfg.tolerances.get("mc", MC_REL_TOL), **common)
        first = rep.details["estimates"]["dbar_dbarstar_sq"]
        out.update({k: first[k] for k in ("value", "stderr", "samples", "scheme", "convention")})
        out.update({"estimates": rep.details["estimates"], "pairwise_relative": rep.details["pairwise_relative"],
                    "hypotheses": rep.details["hypotheses"], "report": rep.to_dict()})
        code = EXIT_OK if rep.passed else EXIT_FAIL
    elif q == "chern-weil":
        rep = quad.chern_weil_check(entry.field, entry.domain, weights=weights, **common)
        w = rep.details["w_sq"]
        out.update({k: w[k] for k in ("value", "stderr", "samples", "scheme", "convention")})
        out.update({"theta1_sq": rep.details["theta1_sq"], "w_sq_terms": rep.details["w_sq_terms"],
                    "weights": rep.details["weights"], "report": rep.to_dict()})
        code = EXIT_OK if rep.passed else EXIT_FAIL
    elif q == "custom":
        if not density:
            raise ValueError("--quantity custom needs --density EXPR")
        expr = parse_expr(density, entry.n)

        def integrand(p, jet):
            return eval_scalar_jet(expr, p).val * quad.volume_density(jet)

        est = quad.integrate_top_form(entry.field, entry.domain, integrand, **common)
        est.convention = f"int f omega^n/n!, f = {density}; " + quad.VOLUME_CONVENTION
        out.update(est.to_dict())
    else:
        raise ValueError(f"unknown quantity {q!r}")
    return out, code


# --------------------------------------------------------------------------
# argument parsing

def _add_manifold(p):
    p.add_argument("--manifold", help="zoo entry name (see 'zoo list')")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                   help="zoo entry parameter, repeatable (values parsed as JSON when possible)")
    p.add_argument("--metric-file", help="metric DSL file instead of a zoo entry")
    p.add_argument("--dim", type=int, help="complex dimension (required with --metric-file)")
    p.add_argument("--box-half-width", type=float, default=0.5,
                   help="sampling box for --metric-file metrics (default 0.5)")
    p.add_argument("--assume", action="append", default=[],
                   choices=["kahler", "gauduchon", "whe", "skew_lee"],
                   help="declare a property so the matching conditional identities are asserted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv", "pretty"], default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hermgeom", description="Hermitian-geometry tensor calculator.")
    sub = ap.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zoo", help="example metrics")
    zsub = z.add_subparsers(dest="zoo_command", required=True)
    zl = zsub.add_parser("list", help="list zoo entries as JSON")
    zl.add_argument("--format", choices=["json", "csv", "pretty"], default="json")

    pr = sub.add_parser("point-report", help="all tensors at one point")
    _add_manifold(pr)
    pr.add_argument("--point", required=True, help="comma-separated complex coordinates, e.g. '1,0'")

    ids = sub.add_parser("identity-suite", help="every applicable pointwise identity")
    _add_manifold(ids)
    ids.add_argument("--points", type=int, default=50)
    ids.add_argument("--tol", type=float, default=ANALYTIC_TOL, help=f"default tolerance ({ANALYTIC_TOL:g})")
    ids.add_argument("--tol-for", action="append", default=[], metavar="IDENTITY=TOL",
                     help="per-identity tolerance override")

    it = sub.add_parser("integrate", help="integrals over the fundamental domain")
    _add_manifold(it)
    it.add_argument("--quantity", required=True, choices=["c1n", "l2-lemma", "chern-weil", "custom"])
    it.add_argument("--samples", type=int, default=100_000)
    it.add_argument("--scheme", choices=["mc", "grid"], default="mc")
    it.add_argument("--density", help="scalar DSL expression f for --quantity custom (integrates f omega^n/n!)")
    it.add_argument("--weights", default="0.5,0.5", help="Chern,LC weights for chern-weil (default 0.5,0.5)")
    it.add_argument("--mc-tol", type=float, default=MC_REL_TOL, help="relative tolerance for l2-lemma")
    it.add_argument("--threads", type=int, default=None,
                    help=f"worker threads (default from ${quad.THREADS_ENV}, else 1)")

    jc = sub.add_parser("jet-check", help="exact jets against finite differences")
    _add_manifold(jc)
    jc.add_argument("--points", type=int, default=zoo.JET_CHECK_POINTS)
    jc.add_argument("--step", type=float, default=zoo.JET_CHECK_STEP)
    jc.add_argument("--tol", type=float, default=zoo.JET_CHECK_TOL)
    return ap


def _config(args) -> RunConfig:
    cfg = RunConfig(command=args.command, format=args.format)
    if args.command == "zoo":
        return cfg
    cfg.manifold = args.manifold
    cfg.params = _parse_params(args.param)
    cfg.metric_file = args.metric_file
    cfg.dim = args.dim
    cfg.box_half_width = args.box_half_width
    cfg.assume = sorted(set(args.assume))
    cfg.seed = args.seed
    if args.command == "identity-suite":
        cfg.points = args.points
        cfg.tolerances = {"analytic": args.tol}
        for item in args.tol_for:
            k, v = item.split("=", 1)
            cfg.tolerances[k] = float(v)
    elif args.command == "integrate":
        cfg.samples, cfg.scheme, cfg.quantity = args.samples, args.scheme, args.quantity
        cfg.tolerances = {"mc": args.mc_tol}
        if args.quantity == "custom":
            cfg.density = args.density
        if args.quantity == "chern-weil":
            cfg.weights = [float(x) for x in args.weights.split(",")]
    elif args.command == "jet-check":
        cfg.points = args.points
        cfg.tolerances = {"jet": args.tol, "fd_identities": FD_TOL}
    return cfg


def run(argv=None) -> tuple[str, int]:
    """Parse ``argv`` and return ``(output text, exit code)`` without printing."""
    args = build_parser().parse_args(argv)
    cfg = _config(args)
    if args.command == "zoo":
        entries = zoo.list_entries()
        if cfg.format == "json":
            return to_json(entries), EXIT_OK
        return _render({"entries": entries}, cfg.format), EXIT_OK
    if args.command == "point-report":
        return _render(point_report(cfg, args.point), cfg.format), EXIT_OK
    if args.command == "identity-suite":
        out, code = run_identity_suite(cfg)
    elif args.command == "integrate":
        out, code = integrate_cmd(cfg, threads=args.threads)
    else:
        out, code = run_jet_check(cfg, args.step)
    return _render(out, cfg.format), code


def main(argv=None) -> int:
    try:
        text, code = run(argv)
    except (ParseError, DimensionError, DomainError, HypothesisError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MetricError, IntegrationError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HermGeomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
