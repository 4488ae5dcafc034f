"""Command-line front end.

Exit codes: 0 ok/holds, 1 violated or failed certification, 2 input error,
3 precondition not met (equality not detected).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import CLUSTER_TOL, EQUALITY_TOL, HERMITICITY_TOL
from .equality import (
    DEFAULT_T_CAP,
    SAMPLES_PER_SEGMENT,
    certify,
    equivalence_report,
    maximal_t1,
    search_r_greater_1,
    verify_certificate,
)
from .errors import CertificationFailure, EqualityNotDetected, InputError, WielandtError
from .inequalities import SCAN_CAP, VIOLATED, IndexSet, lidskii_check, wielandt_check, wielandt_scan
from .instances import equality_block, diagonal_example, random_pair
from .jsonio import (
    certificate_from_json,
    certificate_to_json,
    crossings_to_json,
    load_matrix,
    save_matrix,
    trace_to_csv,
)
from .pencil import DEFAULT_GRID, trace_pencil
from .perturbation import first_order_rates, rate_consistency_check

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    herm_tol: float = HERMITICITY_TOL
    cluster_tol: float = CLUSTER_TOL
    tol: float = EQUALITY_TOL
    grid: int = DEFAULT_GRID
    t_cap: float = DEFAULT_T_CAP
    scan_cap: int = SCAN_CAP
    format: str = "json"
    seed: int = 0

    def __post_init__(self):
        for name in ("herm_tol", "cluster_tol", "tol", "t_cap"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if self.grid < 2:
            raise InputError("grid must be at least 2")


def _seed(value) -> int:
    if value is not None:
        return value
    env = os.environ.get("WIELANDT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"WIELANDT_SEED must be an integer, got {env!r}") from exc


def _config(args) -> RunConfig:
    return RunConfig(
        herm_tol=args.herm_tol, cluster_tol=args.cluster_tol, tol=args.tol, grid=args.grid,
        t_cap=args.t_cap, scan_cap=args.scan_cap, format=args.format or "json",
        seed=_seed(args.seed),
    )


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _human(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            nested = isinstance(v, dict) or (
                isinstance(v, list) and not all(isinstance(e, (int, float, str)) for e in v))
            if v and nested:
                lines.append(f"{pad}{k}:")
                lines.extend(_human(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(obj, list):
        for item in obj:
            sub = _human(item, indent + 1)
            if sub:
                lines.append(f"{pad}-" + sub[0][len(pad) + 1:])
                lines.extend(sub[1:])
    else:
        lines.append(f"{pad}{obj}")
    return lines


def _emit(payload: dict, cfg: RunConfig, out: str | None = None, rows=None) -> None:
    payload = _jsonable(payload)
    if cfg.format == "human":
        text = "\n".join(_human(payload)) + "\n"
    elif cfg.format == "csv" and rows is not None:
        text = "\n".join(",".join(str(c) for c in r) for r in rows) + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "version": __version__, "config": asdict(cfg), "seed": cfg.seed}


def _load_pair(args, cfg):
    A = load_matrix(args.A, cfg.herm_tol)
    B = load_matrix(args.B, cfg.herm_tol)
    if A.n != B.n:
        raise InputError(f"A is {A.n}x{A.n} but B is {B.n}x{B.n}")
    return A, B


def _indices(args, n: int) -> IndexSet:
    if not args.indices:
        raise InputError("--indices is required")
    return IndexSet.parse(n, args.indices)


_REPORT_HEADER = ["indices", "lhs", "rhs", "slack", "verdict"]


def _report_row(rep) -> list:
    return [" ".join(map(str, rep.indices)), repr(rep.lhs), repr(rep.rhs), repr(rep.slack), rep.verdict]


def cmd_check(args, cfg) -> int:
    A, B = _load_pair(args, cfg)
    S = _indices(args, A.n)
    rep = wielandt_check(A, B, S, cfg.tol)
    _emit({**_meta(cfg, "check"), "report": rep.to_dict()}, cfg, args.out,
          rows=[_REPORT_HEADER, _report_row(rep)])
    return EXIT_FAIL if rep.verdict == VIOLATED else EXIT_OK


def cmd_scan(args, cfg) -> int:
    A, B = _load_pair(args, cfg)
    k_range = [int(k) for k in args.k.split(",")] if args.k else None
    reports = wielandt_scan(A, B, k_range, cfg.tol, cfg.scan_cap)
    lid = lidskii_check(A, B, cfg.tol)
    payload = {
        **_meta(cfg, "scan"),
        "reports": [rep.to_dict() for _, rep in reports],
        "lidskii": lid.to_dict(),
    }
    _emit(payload, cfg, args.out, rows=[_REPORT_HEADER] + [_report_row(r) for _, r in reports])
    violated = any(rep.verdict == VIOLATED for _, rep in reports) or not lid.holds
    return EXIT_FAIL if violated else EXIT_OK


def cmd_trace(args, cfg) -> int:
    A, B = _load_pair(args, cfg)
    tr = trace_pencil(A, B, args.t_lo, args.t_hi, cfg.grid, tol_cluster=cfg.cluster_tol)
    crossings = crossings_to_json(tr)
    diagnostics = {
        "min_gaps": tr.min_gaps.tolist(),
        "near_misses": [{"t": m.t, "curves": list(m.curves), "min_gap": m.min_gap} for m in tr.near_misses],
        "gap_tol": tr.gap_tol,
        "crossing_bound": tr.crossing_bound,
    }
    if cfg.format == "json":
        payload = {**_meta(cfg, "trace"), "crossings": crossings, "diagnostics": diagnostics,
                   "grid": tr.grid.tolist(), "curves": tr.curves.tolist()}
        _emit(payload, cfg, args.out)
        return EXIT_OK
    csv_text = trace_to_csv(tr)
    sidecar = json.dumps(_jsonable(crossings), indent=2) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        out.with_name(out.stem + ".crossings.json").write_text(sidecar)
        Path(out.with_name(out.stem + ".meta.json")).write_text(
            json.dumps(_jsonable({**_meta(cfg, "trace"), "diagnostics": diagnostics}), indent=2) + "\n")
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(sidecar)
    return EXIT_OK


def cmd_certify(args, cfg) -> int:
    A, B = _load_pair(args, cfg)
    S = _indices(args, A.n)
    meta = _meta(cfg, "certify")
    try:
        cert = certify(A, B, S, cfg.tol, args.samples, cfg.cluster_tol, grid_size=cfg.grid)
    except EqualityNotDetected as exc:
        _emit({**meta, "status": "equality-not-detected", "detail": str(exc),
               "report": wielandt_check(A, B, S, cfg.tol).to_dict()}, cfg, args.out)
        return EXIT_PRECONDITION
    except CertificationFailure as exc:
        _emit({**meta, "status": "certification-failed", "reason": exc.reason,
               "location": exc.location}, cfg, args.out)
        return EXIT_FAIL
    conditions = equivalence_report(A, B, S, cfg.tol, cfg.cluster_tol)
    payload = {**meta, "status": "certified", "certificate": certificate_to_json(cert),
               "conditions": conditions.to_dict(),
               "maximal_t1": maximal_t1(A, B, S, cfg.tol, cfg.t_cap, cfg.cluster_tol)}
    _emit(payload, cfg, args.out)
    return EXIT_OK


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def cmd_verify_cert(args, cfg) -> int:
    data = _read_json(args.certificate)
    if isinstance(data, dict) and "certificate" in data:
        data = data["certificate"]
    cert = certificate_from_json(data)
    tol = args.tol if args.tol_given else cert.tol
    res = verify_certificate(cert, tol, args.samples)
    _emit({**_meta(cfg, "verify-cert"), **res.to_dict()}, cfg, args.out)
    return EXIT_OK if res.valid else EXIT_FAIL


def cmd_rates(args, cfg) -> int:
    A, B = _load_pair(args, cfg)
    rates = first_order_rates(A, B, cfg.cluster_tol)
    payload = {
        **_meta(cfg, "rates"),
        "nu": rates.nu.tolist(),
        "eigenvalues_A": rates.eigen.values.tolist(),
        "cluster_boundaries": list(rates.clusters.boundaries),
        "multiplicities": list(rates.clusters.multiplicities),
        "finite_difference_deviation": rate_consistency_check(A, B, args.h, cfg.cluster_tol),
        "h": args.h,
    }
    rows = [["j", "lambda_j(A)", "nu_j"]] + [
        [j + 1, repr(float(l)), repr(float(v))] for j, (l, v) in enumerate(zip(rates.eigen.values, rates.nu))]
    _emit(payload, cfg, args.out, rows=rows)
    return EXIT_OK


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc


def cmd_gen(args, cfg) -> int:
    if args.kind == "random":
        inst = random_pair(args.n, cfg.seed)
    elif args.kind == "equality-block":
        inst = equality_block(args.n, args.k, cfg.seed)
    else:
        inst = diagonal_example(_floats(args.alpha), _floats(args.beta))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    save_matrix(inst.A, out / "A.json")
    save_matrix(inst.B, out / "B.json")
    manifest = {**_meta(cfg, "gen"), "kind": inst.kind, "params": inst.params}
    if inst.indices is not None:
        manifest["indices"] = list(inst.indices.indices)
    if inst.frame is not None:
        from .jsonio import frame_to_json

        manifest["planted_subspace"] = frame_to_json(inst.frame)
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2) + "\n")
    return EXIT_OK


def cmd_search_r(args, cfg) -> int:
    found = search_r_greater_1(cfg.seed, args.n, args.k, args.trials, cfg.tol)
    _emit({**_meta(cfg, "search-r"), "candidates": found,
           "note": "candidates are leads for inspection, not counterexamples"}, cfg, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=EQUALITY_TOL,
                        help="relative equality/residual tolerance (scaled by 1+|A|+|B|)")
    common.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL)
    common.add_argument("--herm-tol", type=float, default=HERMITICITY_TOL)
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="pencil grid points")
    common.add_argument("--t-cap", type=float, default=DEFAULT_T_CAP)
    common.add_argument("--scan-cap", type=int, default=SCAN_CAP)
    common.add_argument("--format", choices=["json", "csv", "human"], default=None)
    common.add_argument("--seed", type=int, default=None, help="falls back to $WIELANDT_SEED, then 0")
    common.add_argument("--out", default=None)

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("A", help="matrix JSON file")
    pair.add_argument("B", help="matrix JSON file")

    parser = argparse.ArgumentParser(prog="wielandt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common, pair], help="Wielandt inequality for one index set")
    p.add_argument("--indices", required=True, help="comma list, one-based")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("scan", parents=[common, pair], help="all index sets plus Lidskii")
    p.add_argument("--k", default=None, help="comma list of set sizes")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("trace", parents=[common, pair], help="ordered eigenvalue curves of A + tB")
    p.add_argument("--t-lo", type=float, default=0.0)
    p.add_argument("--t-hi", type=float, default=1.0)
    p.set_defaults(func=cmd_trace, default_format="csv")

    p = sub.add_parser("certify", parents=[common, pair], help="equality certificate")
    p.add_argument("--indices", required=True)
    p.add_argument("--samples", type=int, default=SAMPLES_PER_SEGMENT)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify-cert", parents=[common], help="re-verify a certificate JSON")
    p.add_argument("certificate")
    p.add_argument("--samples", type=int, default=SAMPLES_PER_SEGMENT)
    p.set_defaults(func=cmd_verify_cert)

    p = sub.add_parser("rates", parents=[common, pair], help="first-order rates nu(A, B)")
    p.add_argument("--h", type=float, default=1e-5)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("gen", parents=[common], help="write A.json, B.json and manifest.json")
    p.add_argument("kind", choices=["random", "equality-block", "example-s4"])
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", default="3,1,1")
    p.add_argument("--beta", default="2,1,0")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("search-r", parents=[common], help="look for certificates needing r >= 2")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_search_r)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "json")
    args.tol_given = "--tol" in (argv if argv is not None else sys.argv[1:])
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WielandtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
