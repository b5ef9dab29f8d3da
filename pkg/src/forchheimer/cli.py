"""Command-line entry point.

Exit codes: 0 success, 1 configuration or precondition error, 2 solver
failure, 3 a verification found a violation.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import shutil
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (BoundsConfig, check_gradient, check_lalpha, check_linf_global,
                     check_linf_interior)
from .config import load_config, parse_config
from .errors import ConfigurationError, ExponentConditionError, ForchheimerError, SolverFailure
from .exponents import (alpcond, build_schedule, build_table, derive_alpha, kappa, theta_tilde,
                        x_star)
from .inequalities import (UNIT_SQUARE_TRACE, calibration_corpus, check_parabolic_sobolev,
                           check_trace_general, check_trace_specialized, fit_c5, fit_c_star,
                           polynomial_corpus, space_time_corpus)
from .mesh import Grid, SpaceTimeTrace, read_snapshot, write_snapshot
from .moser import FAMILIES, classify, random_spec, verify_dominance
from .solver import RunRecord, run

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VIOLATION = 0, 1, 2, 3


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return "" if x is None else str(x)


def write_csv(path_or_fh, header, rows):
    close = False
    if isinstance(path_or_fh, (str, Path)):
        fh = open(path_or_fh, "w", newline="")
        close = True
    else:
        fh = path_or_fh
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    if close:
        fh.close()


def fresh_dir(base) -> Path:
    """``base`` if unused, else base-001, base-002, ...; never reuses a directory."""
    base = Path(base)
    cand, k = base, 0
    while cand.exists():
        k += 1
        cand = base.with_name(f"{base.name}-{k:03d}")
    cand.mkdir(parents=True)
    return cand


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def write_manifest(run_dir: Path, created: str):
    files = sorted(p.relative_to(run_dir).as_posix() for p in run_dir.rglob("*")
                   if p.is_file() and p.name != "manifest.json")
    man = {
        "tool_version": __version__,
        "config_sha256": sha256_file(run_dir / "config.toml"),
        "created": created,
        "finished": _now(),
        "files": {f: sha256_file(run_dir / f) for f in files},
    }
    (run_dir / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    return man


def validate_manifest(run_dir) -> list:
    """Problems found when re-checking a manifest (empty list means valid)."""
    run_dir = Path(run_dir)
    try:
        man = json.loads((run_dir / "manifest.json").read_text())
    except (OSError, ValueError) as exc:
        return [f"manifest unreadable: {exc}"]
    problems = []
    if not (run_dir / "config.toml").exists() or sha256_file(run_dir / "config.toml") != man.get("config_sha256"):
        problems.append("config hash mismatch")
    for f, h in man.get("files", {}).items():
        p = run_dir / f
        if not p.exists():
            problems.append(f"missing file {f}")
        elif sha256_file(p) != h:
            problems.append(f"hash mismatch {f}")
    return problems


def save_run(rec: RunRecord, run_dir: Path):
    snap = run_dir / "snapshots"
    snap.mkdir(exist_ok=True)
    for k, f in enumerate(rec.trace.fields()):
        write_snapshot(snap / f"snap_{k:04d}.csv", f)
    rows = [(d.step, d.t, d.dt, d.picard_iters, d.mass, d.flux) for d in rec.steps]
    write_csv(run_dir / "diagnostics.csv", ["step", "t", "dt", "picard_iters", "mass", "flux"], rows)


def load_run(run_dir) -> tuple:
    """(RunRecord without step diagnostics, RunConfig) from a run directory."""
    run_dir = Path(run_dir)
    rc = load_config(run_dir / "config.toml")
    fields = [read_snapshot(p) for p in sorted((run_dir / "snapshots").glob("snap_*.csv"))]
    if len(fields) < 2:
        raise ConfigurationError("a run directory needs at least two snapshots")
    tr = SpaceTimeTrace(fields[0].grid, [f.time for f in fields], np.array([f.values for f in fields]))
    return RunRecord(rc.setup, rc.solver, tr, []), rc


# ---------------------------------------------------------------------------

def cmd_simulate(config_path, out=None) -> int:
    created = _now()
    try:
        rc = load_config(config_path)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rec = run(rc.setup, rc.solver)
    except SolverFailure as exc:
        print(f"solver failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_SOLVER
    base = out or rc.output.get("directory") or Path("runs") / Path(config_path).stem
    run_dir = fresh_dir(base)
    shutil.copyfile(config_path, run_dir / "config.toml")
    save_run(rec, run_dir)
    write_manifest(run_dir, created)
    print(run_dir)
    return EXIT_OK


def exponent_rows(doc: dict):
    """Rows (name, value, precondition_status) for the exponents subcommand."""
    from .constitutive import ForchheimerLaw

    law_s = doc["law"]
    law = (ForchheimerLaw.from_terms(law_s["terms"]) if "terms" in law_s
           else ForchheimerLaw(tuple(law_s["exponents"]), tuple(law_s["coefficients"])))
    est = doc.get("estimates", {})
    lam = float(doc["problem"]["lambda"])
    lengths = doc.get("grid", {}).get("lengths", [1.0, 1.0])
    n = int(est.get("n", len(lengths)))
    U = float(np.prod(lengths))
    t = build_table(lam, law, n)
    rows = [("lambda", t.lam, "ok"), ("delta", t.delta, "ok"), ("a", t.a, "ok"), ("n", n, "ok"),
            ("alpha_star", t.alpha_star, "ok"), ("mu0", t.mu0, "ok"),
            ("supercritical", t.supercritical, "ok" if t.supercritical else "violated: a > delta")]
    if not t.supercritical:
        return rows
    for al in est.get("alpha", [4.0]):
        al = float(al)
        tag = f"[alpha={al:g}]"
        try:
            d = derive_alpha(t, al, c_star=float(est.get("c_star", 1.0)), U_measure=U)
        except ExponentConditionError as exc:
            rows.append(("alpha" + tag, al, f"violated: {exc.condition}"))
            if alpcond(t, al):
                rows += [("kappa" + tag, kappa(t, al), "ok"), ("theta_tilde" + tag, theta_tilde(t, al), "ok")]
            continue
        for name in ("theta", "mu1", "mu2", "mu3", "mu4", "kappa", "theta_tilde", "kappa_bar", "D3", "D4"):
            v = getattr(d, name)
            rows.append((name + tag, v, "ok" if v is not None else "absent: alpha <= lambda+1+mu0"))
    xs = x_star(t)
    thr = max(2.0 - t.delta, (1.0 + xs) * t.alpha_star)
    rows += [("x_star", xs, "ok"), ("alpha0_threshold", thr, "ok")]
    a0 = float(est.get("alpha0", 1.1 * thr))
    try:
        s = build_schedule(t, a0, j_max=est.get("j_max"), tail_tol=float(est.get("tail_tol", 1e-10)))
    except (ExponentConditionError, ForchheimerError) as exc:
        rows.append(("alpha0", a0, f"violated: {exc}"))
        return rows
    for name in ("alpha0", "beta0", "kappa_star", "kappa_bar_star", "kappa_hat_star", "mu_tilde",
                 "nu_tilde", "G", "omega", "omega1", "omega2", "omega3", "mu5", "mu6", "mu7", "tail"):
        rows.append((name, getattr(s, name), "ok"))
    rows.append(("j_max", s.meta["j_max"], "ok"))
    for name in ("mu", "nu", "G", "omega"):
        rows.append(("interior_" + name, getattr(s.interior, name), "ok"))
    return rows


def cmd_exponents(config_path, out=None) -> int:
    import tomli
    try:
        with open(config_path, "rb") as fh:
            doc = tomli.load(fh)
        rows = exponent_rows(doc)
    except (OSError, KeyError, tomli.TOMLDecodeError, ForchheimerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_csv(sys.stdout, ["name", "value", "precondition_status"], rows)
    if out:
        write_csv(out, ["name", "value", "precondition_status"], rows)
    return EXIT_OK


ALL_CHECKS = ("lalpha", "gradient", "linf_interior", "linf_global")


def bound_reports(rec: RunRecord, cfg: BoundsConfig, alphas, checks, alpha0=None,
                  radius=None, sigma=0.5, eps=None):
    """Run the requested checks; precondition errors become rows instead of crashes."""
    setup = rec.setup
    t = build_table(setup.lam, setup.law, setup.grid.dim)
    rows, reports = [], []

    def failed(bid, al, exc):
        rows.append({"bound_id": bid, "alpha": al, "measured": math.nan, "bound": math.nan,
                     "ratio": math.nan, "verdict": "precondition-failed",
                     "constants_json": json.dumps({"error": str(exc)})})

    for al in alphas:
        for bid, fn in (("lalpha", check_lalpha), ("gradient", check_gradient)):
            if bid not in checks:
                continue
            try:
                d = derive_alpha(t, al, U_measure=setup.grid.measure)
                res = fn(rec, d, cfg)
                reports += res if isinstance(res, list) else [res]
            except ExponentConditionError as exc:
                failed(bid, al, exc)
    if {"linf_interior", "linf_global"} & set(checks):
        thr = max(2.0 - t.delta, (1.0 + x_star(t)) * t.alpha_star)
        a0 = alpha0 or 1.1 * thr
        try:
            sch = build_schedule(t, a0, j_max=None)
        except ExponentConditionError as exc:
            failed("schedule", a0, exc)
            sch = None
        if sch is not None and "linf_interior" in checks:
            R = radius or 0.3 * min(setup.grid.lengths)
            reports.append(check_linf_interior(rec, sch, R, sigma, cfg))
        if sch is not None and "linf_global" in checks:
            reports += check_linf_global(rec, sch, eps or min(rec.horizon / 4, 0.5), cfg)
    rows = [r.row() for r in reports] + rows
    return reports, rows


def cmd_bounds(run_dir, alphas=None, checks=ALL_CHECKS, alpha0=None, radius=None,
               sigma=0.5, eps=None, out=None) -> int:
    try:
        rec, rc = load_run(run_dir)
        est = rc.raw.get("estimates", {})
        alphas = alphas or [float(a) for a in est.get("alpha", [6.0])]
        reports, rows = bound_reports(rec, rc.bounds, alphas, checks, alpha0, radius, sigma, eps)
    except ForchheimerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    header = ["bound_id", "alpha", "measured", "bound", "ratio", "verdict", "constants_json"]
    target = Path(out) if out else Path(run_dir) / "bounds_report.csv"
    write_csv(target, header, [[r[h] for h in header] for r in rows])
    write_csv(sys.stdout, header, [[r[h] for h in header] for r in rows])
    if not out and (Path(run_dir) / "manifest.json").exists():
        man = json.loads((Path(run_dir) / "manifest.json").read_text())
        write_manifest(Path(run_dir), man.get("created", _now()))
    return EXIT_VIOLATION if any(r.verdict == "fail" for r in reports) else EXIT_OK


def cmd_moser_check(count=1000, seed=0, family="mixed", length=24, out=None, threads=1) -> int:
    rng = np.random.default_rng(seed)
    fams = FAMILIES if family == "mixed" else (family,)
    specs = [random_spec(rng, fams[i % len(fams)], length) for i in range(count)]
    with ThreadPoolExecutor(max(1, threads)) as ex:
        reps = list(ex.map(verify_dominance, specs))
    rows = [(i, fams[i % len(fams)], classify(s), len(s.r) - 1, r.max_ratio, r.argmax_j, r.passed)
            for i, (s, r) in enumerate(zip(specs, reps))]
    header = ["spec_id", "family", "case", "j_max", "max_ratio", "argmax_j", "pass"]
    write_csv(out or sys.stdout, header, rows)
    bad = sum(not r.passed for r in reps)
    print(f"{count - bad}/{count} dominated", file=sys.stderr)
    return EXIT_OK if bad == 0 else EXIT_VIOLATION


GENERAL_EXPONENTS = ((2.0, 2.0, 1.5), (3.0, 2.0, 2.0), (4.0, 2.5, 1.5), (1.5, 1.5, 1.2), (2.0, 0.0, 2.0))
EPS_VALUES = (0.1, 1.0, 10.0)


def trace_check_rows(seed=0, corpus_size=200, lam=1.0, law=None, alpha=4.0, cells=48, threads=1):
    """Fit-then-verify rows for the three inequality checks on the unit square."""
    from .constitutive import ForchheimerLaw

    law = law or ForchheimerLaw((0.0, 1.0), (1.0, 1.0))
    grid = Grid((1.0, 1.0), (cells, cells))
    t = build_table(lam, law, 2)
    d = derive_alpha(t, alpha, U_measure=grid.measure)
    rows = []
    held = polynomial_corpus(seed + 1, corpus_size, grid, scaled=True)
    pool = ThreadPoolExecutor(max(1, threads))

    def gen(k_f):
        k, f = k_f
        out = []
        for (al, s, p) in GENERAL_EXPONENTS:
            for e in EPS_VALUES:
                r = check_trace_general(f, al, s, p, e, UNIT_SQUARE_TRACE)
                out.append(("trace_general", k, e, f"alpha={al:g};s={s:g};p={p:g}", r))
        return out

    for chunk in pool.map(gen, enumerate(held)):
        rows += chunk
    c_star = fit_c_star(calibration_corpus(seed, corpus_size, grid), d, EPS_VALUES)
    for k, f in enumerate(held):
        for e in EPS_VALUES:
            rows.append(("trace_specialized", k, e, f"c_star={c_star!r}",
                         check_trace_specialized(f, d, e, c_star)))
    sg = Grid((1.0, 1.0), (32, 32))
    times = np.linspace(0.0, 1.0, 11)
    c5 = fit_c5(space_time_corpus(seed + 2, corpus_size, sg, times), d)
    for k, tr in enumerate(space_time_corpus(seed + 3, corpus_size, sg, times)):
        rows.append(("parabolic_sobolev", k, math.nan, f"c5={c5!r}", check_parabolic_sobolev(tr, d, c5=c5)))
    pool.shutdown()
    return [(c, k, e, info, r.lhs, r.rhs, r.ratio, r.passed) for c, k, e, info, r in rows]


def cmd_trace_check(seed=0, corpus_size=200, lam=1.0, alpha=4.0, out=None, threads=1) -> int:
    try:
        rows = trace_check_rows(seed, corpus_size, lam, None, alpha, threads=threads)
    except ForchheimerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    header = ["check", "field_id", "eps", "constants", "lhs", "rhs", "ratio", "passed"]
    write_csv(out or sys.stdout, header, rows)
    bad = sum(not r[-1] for r in rows)
    print(f"{len(rows) - bad}/{len(rows)} inequalities hold", file=sys.stderr)
    return EXIT_OK if bad == 0 else EXIT_VIOLATION


def build_parser():
    p = argparse.ArgumentParser(prog="forchheimer", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory (simulate) or file")
    p.add_argument("--threads", type=int, default=1)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run the solver from a TOML config")
    s.add_argument("config")
    s = sub.add_parser("exponents", help="print the exponent table and schedule as CSV")
    s.add_argument("config")
    s = sub.add_parser("bounds", help="evaluate the a-priori bounds on a run directory")
    s.add_argument("run_dir")
    s.add_argument("--alpha", type=float, action="append")
    s.add_argument("--checks", default=",".join(ALL_CHECKS))
    s.add_argument("--alpha0", type=float)
    s.add_argument("--radius", type=float)
    s.add_argument("--sigma", type=float, default=0.5)
    s.add_argument("--eps", type=float)
    s = sub.add_parser("moser-check", help="verify the two-exponent iteration bound on random specs")
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--family", default="mixed", choices=("mixed",) + FAMILIES)
    s.add_argument("--length", type=int, default=24)
    s = sub.add_parser("trace-check", help="fit-then-verify the trace and Sobolev inequalities")
    s.add_argument("--corpus-size", type=int, default=200)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=4.0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("default")
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out)
    if args.command == "exponents":
        return cmd_exponents(args.config, args.out)
    if args.command == "bounds":
        checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
        unknown = set(checks) - set(ALL_CHECKS)
        if unknown:
            print(f"error: unknown checks {sorted(unknown)}", file=sys.stderr)
            return EXIT_CONFIG
        return cmd_bounds(args.run_dir, args.alpha, checks, args.alpha0, args.radius,
                          args.sigma, args.eps, args.out)
    if args.command == "moser-check":
        return cmd_moser_check(args.count, args.seed, args.family, args.length, args.out, args.threads)
    return cmd_trace_check(args.seed, args.corpus_size, args.lam, args.alpha, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
