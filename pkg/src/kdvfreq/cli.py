"""Command-line front end: batch pipelines with machine-readable output.

Output is deterministic: fixed field order, floats printed with 17
significant digits, so identical inputs give byte-identical files.
Exit codes: 0 success, 2 validation failure, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bnf, flow, invariants, pde, seqspace
from .errors import NumericalError, ValidationError
from .hill import periodic_spectrum
from .potentials import potential_from_json

__all__ = ["main"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _dump_json(obj) -> str:
    """Recursive serializer with fixed ordering and 17-digit floats."""
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_dump_json(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if v != v:
            return "null"
        return _fmt(v)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _write(out: str | None, text: str):
    if out is None or out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _csv(headers, rows) -> str:
    lines = [",".join(headers)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines)


def _load_potential(path: str):
    try:
        with open(path) as fh:
            return potential_from_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        raise ValidationError(f"cannot read potential file {path}: {exc}") from exc


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v]


def _parse_config(path: str) -> dict:
    """TOML-like key=value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"bad config line: {line!r}")
            key, val = (p.strip() for p in line.split("=", 1))
            out[key] = val
    return out


def _add_common(p):
    p.add_argument("--potential", help="potential JSON file")
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--nodes", type=int, default=96)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--longdouble", action="store_true",
                   help="extended-precision spectral solves")


def _dtype(args):
    return np.longdouble if args.longdouble else np.float64


def _cmd_spectrum(args):
    q = _load_potential(args.potential)
    spec = periodic_spectrum(q, args.N, tol=args.tol, dtype=_dtype(args))
    if args.format == "json":
        _write(args.out, spec.to_json())
    else:
        rows = [(n, float(spec.lambda_minus[n]), float(spec.lambda_plus[n]),
                 float(spec.mu[n]), float(spec.lambda_dot[n]),
                 float(spec.gamma[n]), float(spec.tau[n]))
                for n in range(1, args.N + 1)]
        _write(args.out, _csv(("n", "lambda_minus", "lambda_plus", "mu",
                               "lambda_dot", "gamma", "tau"), rows))
    return 0


def _cmd_actions(args):
    q = _load_potential(args.potential)
    spec = invariants.spectrum_for(q.drop_mean(), args.N, dtype=_dtype(args), tol=args.tol)
    acts = invariants.action_vector(q.drop_mean(), spec, N=args.N, nodes=args.nodes)
    rows = [(n, acts.I[n], acts.ratio[n], acts.err[n])
            for n in range(1, args.N + 1)]
    if args.format == "json":
        obj = {"N": args.N,
               "I": [r[1] for r in rows], "ratio": [r[2] for r in rows],
               "err": [r[3] for r in rows]}
        _write(args.out, _dump_json(obj))
    else:
        _write(args.out, _csv(("n", "I", "ratio_8npiI_gamma2", "err"), rows))
    return 0


def _freq_common(args, dump_moments=False):
    q = _load_potential(args.potential)
    ns = _parse_range(args.n) if args.n else list(range(1, args.N + 1))
    N = max(ns)
    rep = invariants.frequency_report(q, N, M=args.M, K=args.K, nodes=args.nodes,
                                      dtype=_dtype(args), tol=args.tol,
                                      jobs=args.jobs)
    rows = [(n, rep.actions.I[n], rep.omega1[n], rep.omega1_star[n],
             rep.omega2[n], rep.omega2_star[n],
             max(rep.tail1[n], rep.tail2[n])) for n in ns]
    if args.format == "csv":
        _write(args.out, _csv(("n", "I", "omega1", "omega1_star", "omega2",
                               "omega2_star", "tail"), rows))
    else:
        obj = {"N": N, "K": rep.K, "mean": rep.mean, "H0": rep.H0,
               "rows": [list(r) for r in rows]}
        if dump_moments:
            spec = invariants.spectrum_for(q.drop_mean(), N, dtype=_dtype(args),
                                           tol=args.tol)
            psis = {n: invariants.psi_for(spec, n, nodes=args.nodes)
                    for n in range(1, N + 1)}
            mom = invariants.moments(q.drop_mean(), spec, psis, N, K=args.K,
                                     nodes=args.nodes)
            obj["omega2_moments"] = [[float(v) for v in row] for row in mom.omega2]
            obj["omega4_moments"] = [[float(v) for v in row] for row in mom.omega4]
            obj["R"] = {f"{k},{m}": float(v) for (k, m), v in sorted(mom.R.items())}
        _write(args.out, _dump_json(obj))
    return 0


def _cmd_freq(args):
    return _freq_common(args, dump_moments=args.dump_moments)


def _cmd_hamiltonians(args):
    q = _load_potential(args.potential).drop_mean()
    spec = invariants.spectrum_for(q, args.N, dtype=_dtype(args), tol=args.tol)
    psis = {n: invariants.psi_for(spec, n, M=args.M, nodes=args.nodes)
            for n in range(1, args.N + 1)}
    mom = invariants.moments(q, spec, psis, args.N, K=args.K, nodes=args.nodes)
    acts = invariants.action_vector(q, spec, nodes=args.nodes)
    h = invariants.hamiltonians(q, spec, acts, mom)
    obj = {"H0": h.H0, "H1": h.H1, "H2": h.H2,
           "H1_star": h.H1_star, "H1_star_subtraction": h.H1_star_subtraction,
           "H2_star": h.H2_star, "H2_star_subtraction": h.H2_star_subtraction,
           "route_gap_H1": h.route_gap_H1, "route_gap_H2": h.route_gap_H2,
           "flagged": h.flagged}
    _write(args.out, _dump_json(obj))
    return 0


def _cmd_bnf(args):
    I = {}
    if args.I:
        for i, v in enumerate(args.I.split(",")):
            if float(v) != 0.0:
                I[i + 1] = float(v)
    H, om = bnf.bnf_predict(I, args.c, args.which, nmax=args.N)
    obj = {"which": args.which, "c": args.c, "H": H,
           "omega": [float(v) for v in om[1:]]}
    _write(args.out, _dump_json(obj))
    return 0


def _cmd_resonance(args):
    A = _parse_range(args.A)
    offenders = bnf.resonance_scan(A, args.c, args.Kmax, args.window)
    obj = {"A": A, "c": args.c, "Kmax": args.Kmax, "window": args.window,
           "offenders": [{"k_A": list(o.k_A), "k_Z": [list(p) for p in o.k_Z]}
                         for o in offenders]}
    _write(args.out, _dump_json(obj))
    return 0


def _cmd_seqtest(args):
    rng = np.random.default_rng(args.seed)
    worst_g = 0.0
    for _ in range(args.samples):
        x = rng.standard_normal(64)
        for p in (1.0, 2.0, np.inf):
            nx = seqspace.weighted_norm(x, 0.0, p)
            if nx > 0:
                worst_g = max(worst_g, seqspace.weighted_norm(seqspace.op_G(x), 0.0, p) / nx)
    violations = 0
    worst_margin = np.inf
    for _ in range(args.samples):
        a = rng.standard_normal(32) * 0.3 / 32
        val, bound = seqspace.inf_product(a, "bound")
        margin = bound - abs(val - 1.0)
        worst_margin = min(worst_margin, margin)
        if margin < 0:
            violations += 1
    sp = seqspace.sin_product(np.pi ** 2 / 4.0, 10_000)
    obj = {"samples": args.samples, "op_G_worst_ratio": worst_g,
           "inf_product_violations": violations,
           "inf_product_worst_margin": float(worst_margin),
           "sin_product_error": abs(sp - 2.0 / np.pi)}
    _write(args.out, _dump_json(obj))
    return 0


def _cmd_flow_exp(args):
    ms = _parse_range(args.m)
    if args.which == "kdv":
        rows, du = flow.kdv_continuity_experiment(args.sigma, args.t, args.delta, ms)
        thresh = du / 2.0
    elif args.which == "kdv2-hs":
        rows, du, thresh = flow.kdv2_continuity_experiment(
            args.sigma, args.t, "hs", args.delta, ms)
    else:
        rows, du, thresh = flow.kdv2_continuity_experiment(
            args.sigma, args.t, "level-set", args.delta, ms)
    table = [(r.m, r.input_gap, r.output_gap, r.verdict) for r in rows]
    _write(args.out, _csv(("m", "input_gap", "output_gap", "verdict"), table))
    return 0


def _cmd_evolve(args):
    q = _load_potential(args.potential)
    dt, M, stride = args.dt, args.Mgrid, args.stride
    if args.config:
        cfg = _parse_config(args.config)
        dt = float(cfg.get("dt", dt)) if cfg.get("dt") or dt is None else dt
        M = int(cfg["M"]) if "M" in cfg else M
        stride = int(cfg["stride"]) if "stride" in cfg else stride
    traj = pde.evolve(q, args.T, args.eq, dt=dt, M=M, stride=stride)
    lines = []
    for i, t in enumerate(traj.times):
        uh = traj.states[i]
        lines.append(_dump_json({"t": float(t),
                                 "modes": [[float(v.real), float(v.imag)] for v in uh]}))
    _write(args.out, "\n".join(lines))
    return 0 if not traj.aborted else 3


def _cmd_crosscheck(args):
    q = _load_potential(args.potential)
    n = int(args.n)
    rep = invariants.frequency_report(q, max(n, 2), K=args.K, nodes=args.nodes,
                                      dtype=_dtype(args), tol=args.tol)
    om_formula = rep.omega1[n] if args.eq == "kdv" else rep.omega2[n]
    T = args.T if args.T else (0.05 if args.eq == "kdv" else 0.002)
    traj = pde.evolve(q, T, args.eq)
    om_pde, resid = pde.measure_mode_frequency(traj, n)
    rel = abs(om_pde - om_formula) / abs(om_formula)
    obj = {"eq": args.eq, "n": n, "omega_formula": float(om_formula),
           "omega_pde": float(om_pde), "fit_residual": float(resid),
           "rel_difference": float(rel)}
    _write(args.out, _dump_json(obj))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdvfreq",
                                 description="spectral frequencies of KdV / KdV2")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("spectrum", help="periodic/Dirichlet/critical spectra")
    _add_common(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("actions", help="action variables")
    _add_common(p)
    p.set_defaults(func=_cmd_actions)

    for name in ("freq", "freq2"):
        p = sub.add_parser(name, help="frequency tables (moment route)")
        _add_common(p)
        p.add_argument("--n", default=None, help="index range like 1..8")
        p.add_argument("--dump-moments", action="store_true")
        p.set_defaults(func=_cmd_freq)

    p = sub.add_parser("hamiltonians", help="direct and renormalized Hamiltonians")
    _add_common(p)
    p.set_defaults(func=_cmd_hamiltonians)

    p = sub.add_parser("bnf", help="normal-form prediction")
    _add_common(p)
    p.add_argument("--I", default="", help="comma list I_1,I_2,...")
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--which", choices=("kdv", "kdv2"), default="kdv")
    p.set_defaults(func=_cmd_bnf)

    p = sub.add_parser("resonance", help="nondegeneracy certificate")
    _add_common(p)
    p.add_argument("--A", default="1,2")
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--Kmax", type=int, default=6)
    p.add_argument("--window", type=int, default=40)
    p.set_defaults(func=_cmd_resonance)

    p = sub.add_parser("seqtest", help="sequence-space operator checks")
    _add_common(p)
    p.add_argument("--samples", type=int, default=500)
    p.set_defaults(func=_cmd_seqtest)

    p = sub.add_parser("flow-exp", help="non-uniform-continuity experiment")
    _add_common(p)
    p.add_argument("--which", choices=("kdv", "kdv2-hs", "kdv2-level"), default="kdv")
    p.add_argument("--sigma", type=float, default=0.125)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--m", default="1..40")
    p.set_defaults(func=_cmd_flow_exp)

    p = sub.add_parser("evolve", help="pseudo-spectral time integration")
    _add_common(p)
    p.add_argument("--eq", choices=("airy", "kdv", "kdv2"), default="kdv")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--Mgrid", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--config", default=None, help="key=value file for dt/M/stride")
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("crosscheck", help="moment-route vs PDE-route frequency")
    _add_common(p)
    p.add_argument("--eq", choices=("kdv", "kdv2"), default="kdv")
    p.add_argument("--n", required=True)
    p.add_argument("--T", type=float, default=None)
    p.set_defaults(func=_cmd_crosscheck)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
