"""Command-line front end: cocycle I/O, experiment orchestration, reporting.

Every output file is accompanied by a manifest sidecar; reruns with the same
manifest digest produce byte-identical data sections.  All floating-point
output uses 17 significant digits and -inf is written as the literal token
"-inf".  Commands that draw random numbers require an explicit --seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .errors import CocycleError, InvalidCocycle, NullWord, ZeroVariance
from .families import (
    irrat_rotation_family,
    schrodinger_cocycle,
    schrodinger_family,
    schrodinger_rescaled_cocycle,
    spectrum_intervals,
    sublevel_decay,
    sweep_l1,
    fit_stretched_exponential,
)
from .hyperbolicity import certify
from .limits import SimConfig, clt_test, gordin_livsic_sigma, ldt_tail, simulate_lognorm
from .shift import load_cocycle
from .stationary import furstenberg_l1, induced_l1, l1_branch_series

EXIT_OK = 0
EXIT_NOT_PUH = 1
EXIT_BAD_INPUT = 2
EXIT_NULL_WORD = 3
EXIT_UNKNOWN = 4
EXIT_ZERO_VARIANCE = 5


def fmt(x: float) -> str:
    """17-significant-digit float formatting; infinities as inf/-inf."""
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def make_manifest(command: str, params: dict, input_digest: str = "",
                  seed: int | None = None) -> dict:
    body = {
        "command": command,
        "input_digest": input_digest,
        "params": params,
        "seed": seed,
        "version": __version__,
    }
    digest = hashlib.sha256(
        json.dumps(body, sort_keys=True, default=str).encode()).hexdigest()
    return {**body, "digest": digest}


def write_manifest(manifest: dict, out_path: str, wall_time: float) -> None:
    doc = {**manifest, "wall_time_s": wall_time}
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, default=str)
        fh.write("\n")


def digest_file(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load(path: str):
    try:
        return load_cocycle(path)
    except (OSError, json.JSONDecodeError, InvalidCocycle) as exc:
        print(f"error: invalid cocycle input: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_lyapunov(args) -> int:
    c = _load(args.input)
    manifest = make_manifest("lyapunov",
                             {"tail_eps": args.tail_eps, "engine": args.engine,
                              "format": "csv" if args.csv else "json"},
                             digest_file(args.input), args.seed)
    t0 = time.perf_counter()
    try:
        from .core import ProjPoint
        from .stationary import expected_log_det

        if not c.singular:
            # invertible cocycles have no branch series; L1 comes from Monte
            # Carlo and L2 from the determinant identity
            if args.seed is None:
                print("error: --seed is required for invertible cocycles "
                      "(Monte Carlo engine)", file=sys.stderr)
                return EXIT_BAD_INPUT
            cfg = SimConfig(seed=args.seed, n=args.mc_n, trials=args.mc_trials,
                            start=ProjPoint(0.9))
            samples = simulate_lognorm(c, cfg)
            l1 = float(np.mean(samples))
            stderr = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
            report = {"l1": l1, "l2": expected_log_det(c) - l1,
                      "method": "monte-carlo", "stderr": stderr,
                      "series_depth": 0, "tail_bound": 3 * stderr}
        elif args.engine == "monte-carlo":
            if args.seed is None:
                print("error: --seed is required for the monte-carlo engine",
                      file=sys.stderr)
                return EXIT_BAD_INPUT
            cfg = SimConfig(seed=args.seed, n=args.mc_n, trials=args.mc_trials)
            samples = simulate_lognorm(c, cfg)
            l1 = float(np.mean(samples))
            stderr = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
            report = {"l1": l1, "l2": -math.inf, "method": "monte-carlo",
                      "stderr": stderr, "series_depth": 0, "tail_bound": 3 * stderr}
        else:
            rep = (l1_branch_series(c, args.tail_eps) if args.engine == "series"
                   else furstenberg_l1(c, args.tail_eps))
            report = {"l1": rep.l1, "l2": rep.l2, "method": rep.method,
                      "series_depth": rep.series_depth, "tail_bound": rep.tail_bound}
        if c.singular:
            report["induced_l1"] = induced_l1(c, report["l1"])
            report["singular_mass"] = c.singular_mass
    except NullWord as exc:
        print(f"error: null word {exc.word}", file=sys.stderr)
        return EXIT_NULL_WORD
    except CocycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    wall = time.perf_counter() - t0
    if args.csv:
        lines = [f"# manifest-digest: {manifest['digest']}",
                 "key,value"]
        for key in sorted(report):
            val = report[key]
            lines.append(f"{key},{fmt(val) if isinstance(val, float) else val}")
        _write_text(args.out, "\n".join(lines) + "\n")
    else:
        doc = {"manifest_digest": manifest["digest"], **{
            k: (fmt(v) if isinstance(v, float) else v) for k, v in report.items()}}
        _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    if args.out:
        write_manifest(manifest, args.out, wall)
    return EXIT_OK


def cmd_certify(args) -> int:
    c = _load(args.input)
    manifest = make_manifest("certify", {"depth": args.depth, "eps": args.eps},
                             digest_file(args.input))
    t0 = time.perf_counter()
    cert = certify(c, depth=args.depth, eps=args.eps)
    wall = time.perf_counter() - t0
    doc = {"manifest_digest": manifest["digest"], **cert.to_jsonable()}
    _write_text(args.out, json.dumps(doc, indent=2, default=float) + "\n")
    if args.out:
        write_manifest(manifest, args.out, wall)
    return {"PUH": EXIT_OK, "NotPUH": EXIT_NOT_PUH}.get(cert.verdict, EXIT_UNKNOWN)


def _build_family(args):
    if args.family == "irratrot":
        return irrat_rotation_family(), {"family": "irratrot"}
    if args.family == "schrodinger":
        return (schrodinger_family(args.a),
                {"family": "schrodinger", "a": args.a, "lam": args.lam})
    raise SystemExit(EXIT_BAD_INPUT)


def cmd_sweep(args) -> int:
    if args.grid < 1:
        print("error: empty grid", file=sys.stderr)
        return EXIT_BAD_INPUT
    family, params = _build_family(args)
    lo = args.t_min if args.t_min is not None else family.domain[0]
    hi = args.t_max if args.t_max is not None else family.domain[1]
    if not (hi > lo):
        print("error: empty grid", file=sys.stderr)
        return EXIT_BAD_INPUT
    params.update({"grid": args.grid, "t_min": lo, "t_max": hi,
                   "engine": args.engine, "null_depth": args.null_depth,
                   "sublevels": list(args.sublevels)})
    manifest = make_manifest("sweep", params, "", args.seed)
    grid = np.linspace(lo, hi, args.grid)
    t0 = time.perf_counter()
    mc_kwargs = {}
    if args.engine == "monte-carlo":
        if args.seed is None:
            print("error: --seed is required for the monte-carlo engine",
                  file=sys.stderr)
            return EXIT_BAD_INPUT
        mc_kwargs = {"mc_seed": args.seed}
    result = sweep_l1(family, grid, engine=args.engine,
                      null_depth=args.null_depth, threads=args.threads,
                      **mc_kwargs)
    lines = [f"# manifest-digest: {manifest['digest']}",
             "t,l1,induced_l1,puh_verdict,nearest_null_word_sigma1,null_word"]
    for pt in result.points:
        word = "" if pt.null_word is None else " ".join(map(str, pt.null_word))
        lines.append(",".join([fmt(pt.t), fmt(pt.l1), fmt(pt.induced),
                               pt.verdict, fmt(pt.nearest_sigma1), word]))
    if args.family == "schrodinger":
        # asymptotic comparison column block: L1(lambda, t) - p log(lambda)
        lines.append("# rescaled-vs-limit: t,l1_rescaled_minus_plog,l1_limit")
        if args.seed is None:
            print("error: --seed is required for the schrodinger comparison",
                  file=sys.stderr)
            return EXIT_BAD_INPUT
        p = 0.5
        for pt in result.points:
            resc = schrodinger_rescaled_cocycle(args.a, args.lam, pt.t, p)
            cfg = SimConfig(seed=args.seed, n=args.mc_n, trials=args.mc_trials,
                            start=_generic_start())
            samples = simulate_lognorm(resc, cfg)
            lines.append("# " + ",".join([fmt(pt.t), fmt(float(np.mean(samples))),
                                          fmt(pt.l1)]))
    sub = sublevel_decay(result, args.sublevels)
    fit = fit_stretched_exponential(sub)
    lines.append(f"# sublevels N:fraction "
                 + " ".join(f"{fmt(N)}:{fmt(fr)}" for N, fr in sub))
    lines.append(f"# sublevel-fit gamma={fmt(fit['gamma'])} C={fmt(fit['C'])} "
                 f"r2={fmt(fit['r2'])}")
    wall = time.perf_counter() - t0
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.out:
        write_manifest(manifest, args.out, wall)
    return EXIT_OK


def _generic_start():
    from .core import ProjPoint

    return ProjPoint(0.9)


def cmd_ldt(args) -> int:
    c = _load(args.input)
    if args.seed is None:
        print("error: --seed is required", file=sys.stderr)
        return EXIT_BAD_INPUT
    manifest = make_manifest("ldt", {"n": args.n, "trials": args.trials,
                                     "eps": args.eps},
                             digest_file(args.input), args.seed)
    t0 = time.perf_counter()
    try:
        l1 = furstenberg_l1(c).l1
        report = ldt_tail(c, l1, args.eps, args.n, args.trials, args.seed)
    except NullWord as exc:
        print(f"error: null word {exc.word}", file=sys.stderr)
        return EXIT_NULL_WORD
    except CocycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    wall = time.perf_counter() - t0
    lines = [f"# manifest-digest: {manifest['digest']}",
             f"# l1_ref: {fmt(l1)} epsilon: {fmt(args.eps)} trials: {args.trials}",
             "n,tail,wilson_lo,wilson_hi"]
    for n, tail, (lo, hi) in zip(report.ns, report.tails, report.wilson):
        lines.append(f"{n},{fmt(tail)},{fmt(lo)},{fmt(hi)}")
    lines.append(f"# fit: log-tail-vs-n {fmt(report.fit_exponential)} "
                 f"log-tail-vs-cbrt(n) {fmt(report.fit_cbrt)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.out:
        write_manifest(manifest, args.out, wall)
    return EXIT_OK


def cmd_clt(args) -> int:
    c = _load(args.input)
    if args.seed is None:
        print("error: --seed is required", file=sys.stderr)
        return EXIT_BAD_INPUT
    manifest = make_manifest("clt", {"n": args.n, "trials": args.trials},
                             digest_file(args.input), args.seed)
    t0 = time.perf_counter()
    try:
        l1 = furstenberg_l1(c).l1
        sigma, info = gordin_livsic_sigma(c)
        if sigma <= 0.0:
            raise ZeroVariance("variance is zero")
        report = clt_test(c, l1, sigma, args.n, args.trials, args.seed)
    except ZeroVariance as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ZERO_VARIANCE
    except NullWord as exc:
        print(f"error: null word {exc.word}", file=sys.stderr)
        return EXIT_NULL_WORD
    except CocycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    wall = time.perf_counter() - t0
    doc = {"manifest_digest": manifest["digest"],
           "l1": fmt(l1),
           "sigma_gl": fmt(report.sigma_gl),
           "sigma_gl_uncertainty": fmt(info["uncertainty"]),
           "sigma_mc": fmt(report.sigma_mc),
           "ks_distance": fmt(report.ks_distance),
           "n": report.n, "trials": report.trials,
           "sample_mean": fmt(report.mean)}
    _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    if args.out:
        write_manifest(manifest, args.out, wall)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    lo, hi = spectrum_intervals(args.a, args.lam)
    doc = {"interval_finite": [fmt(lo[0]), fmt(lo[1])],
           "interval_barrier": [fmt(hi[0]), fmt(hi[1])]}
    _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cocyclekit",
        description="Lyapunov exponents, stationary measures and "
                    "hyperbolicity certificates for random 2x2 cocycles")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lyapunov", help="first Lyapunov exponent of a cocycle file")
    p.add_argument("input")
    p.add_argument("--tail-eps", type=float, default=1e-12)
    p.add_argument("--engine", choices=("series", "furstenberg", "monte-carlo"),
                   default="furstenberg")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mc-n", type=int, default=10_000)
    p.add_argument("--mc-trials", type=int, default=1000)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_lyapunov)

    p = sub.add_parser("certify", help="projective uniform hyperbolicity certificate")
    p.add_argument("input")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("sweep", help="exponent along a one-parameter family")
    p.add_argument("family", choices=("irratrot", "schrodinger"))
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--engine", choices=("series", "monte-carlo"), default="series")
    p.add_argument("--null-depth", type=int, default=20)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=1000.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mc-n", type=int, default=10_000)
    p.add_argument("--mc-trials", type=int, default=200)
    p.add_argument("--sublevels", type=float, nargs="+", default=[1, 2, 4, 8])
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap; the output is identical for every cap")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("ldt", help="large-deviation tail table")
    p.add_argument("input")
    p.add_argument("--n", type=int, nargs="+", default=[200, 800, 3200])
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_ldt)

    p = sub.add_parser("clt", help="central-limit check with the summed-iterate variance")
    p.add_argument("input")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_clt)

    p = sub.add_parser("spectrum", help="two-valued potential spectrum intervals")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=1000.0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_spectrum)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:  # input loading failures carry the exit code
        return int(exc.code)


if __name__ == "__main__":
    sys.exit(main())
