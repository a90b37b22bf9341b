"""Command-line front end.

Reads cocycles from JSON files ({"name": ..., "matrices": [[[a,b],[c,d]], ...]}),
runs the analysis modules, and writes machine-readable reports: JSON on
stdout (or --out) plus CSV side files for tables.  Reports are
deterministic for fixed inputs and flags; wall time goes to stderr.

Exit codes: 0 success, 2 input error, 3 budget or convergence error,
4 internal assertion.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import barabanov, corpus, entropy_pos, mather, spectral, splitting
from .errors import BudgetError, ConvergenceError, DomainError, PrecisionError, SchemeError
from .geom2 import Cocycle, det2

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4

FLOAT_FMT = "%.17g"


def load_cocycle_file(path: str) -> tuple[str, Cocycle]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "matrices" not in data:
        raise DomainError(f"{path}: expected an object with a 'matrices' field")
    mats = data["matrices"]
    if not isinstance(mats, list) or not mats:
        raise DomainError(f"{path}: 'matrices' must be a nonempty list")
    arrs = []
    for i, m in enumerate(mats):
        a = np.asarray(m, dtype=float)
        if a.shape != (2, 2):
            raise DomainError(f"{path}: matrix {i} is not 2x2")
        if abs(det2(a)) <= 1e-12:
            raise DomainError(f"{path}: matrix {i} is singular")
        arrs.append(a)
    return str(data.get("name", os.path.basename(path))), Cocycle(arrs)


def write_cocycle_file(path, name: str, c: Cocycle) -> None:
    payload = {"name": name, "matrices": [np.asarray(g).tolist() for g in c.generators]}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def write_csv(path: str, header, rows, preamble: str | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        if preamble:
            fh.write(preamble + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, allow_nan=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _multicone_json(mc) -> list:
    return [[iv.start, iv.length] for iv in mc.intervals]


def _report_skeleton(command: str, args: argparse.Namespace, params: dict) -> dict:
    return {
        "command": command,
        "parameters": {"file": getattr(args, "file", None), "threads": args.threads, **params},
        "results": {},
        "warnings": [],
    }


def cmd_certify(args) -> int:
    name, c = load_cocycle_file(args.file)
    report = _report_skeleton("certify", args, {"budget": args.budget, "samples": args.samples, "seed": args.seed})
    report["parameters"]["cocycle"] = name
    cert = splitting.certify_domination(c, budget=args.budget, samples=args.samples, seed=args.seed)
    if cert is None:
        depths = [n for n in (2, 4, 6, 8) if c.k**n <= 2**20]
        report["results"]["dominated"] = False
        report["results"]["diagnostic"] = {
            "note": "no forward-invariant multicone found (inconclusive)",
            "nonconformality_min": {str(n): splitting.nonconformality_min(c, n) for n in depths},
        }
        report["warnings"].append("absence of a certificate does not prove non-domination")
    else:
        report["results"]["dominated"] = True
        report["results"]["certificate"] = {
            "multicone": _multicone_json(cert.multicone),
            "complementary": _multicone_json(cert.complementary),
            "tau": cert.tau,
            "c1": cert.c1,
            "noc_forward": cert.noc_forward,
            "noc_backward": cert.noc_backward,
        }
        report["warnings"].append("tau and c1 are sampled, not certified by interval arithmetic")
    _emit(report, args.out)
    return EXIT_OK


def cmd_exponents(args) -> int:
    name, c = load_cocycle_file(args.file)
    report = _report_skeleton("exponents", args, {"mode": args.mode, "depth": args.depth})
    report["parameters"]["cocycle"] = name
    work = spectral.inverse_cocycle(c) if args.mode == "lambda2" else c
    rows = []
    for n in range(1, args.depth + 1):
        br = spectral.jsr_bracket(work, n)
        ju = spectral.jssr_upper(work, n)
        if args.mode == "lambda2":
            # lambda2 exponents are negated, swapped bounds of the inverse tuple
            rows.append((n, -br.upper, -br.lower, -ju))
        else:
            rows.append((n, br.lower, br.upper, ju))
    last = rows[-1]
    if args.mode == "lambda2":
        report["results"]["lambda2_top_upper_is"] = "negated inverse-cocycle jssr upper"
        report["results"]["bracket"] = {"depth": last[0], "lower": last[1], "upper": last[2], "top_bound": last[3]}
    else:
        report["results"]["bracket"] = {"depth": last[0], "lower": last[1], "upper": last[2], "jssr_upper": last[3]}
    cert = splitting.certify_domination(c)
    if cert is not None and args.beta:
        for mode in ("top", "bottom"):
            table = barabanov.solve_barabanov(cert, work, mode=mode, grid_size=args.grid)
            report["results"][f"beta_{mode}"] = table.beta if args.mode != "lambda2" else -table.beta
    if args.csv:
        hdr = ["depth", "lower", "upper", "jssr_upper"]
        write_csv(args.csv, hdr, [(n, float(a), float(b), float(u)) for n, a, b, u in rows])
        report["results"]["csv"] = args.csv
    report["warnings"].append("jssr values are one-sided upper bounds")
    _emit(report, args.out)
    return EXIT_OK


def _certified(c: Cocycle, args):
    cert = splitting.certify_domination(c, budget=args.budget)
    if cert is None:
        raise DomainError("cocycle could not be certified as dominated; run 'certify' for diagnostics")
    return cert


def cmd_barabanov(args) -> int:
    name, c = load_cocycle_file(args.file)
    report = _report_skeleton(
        "barabanov", args, {"mode": args.mode, "grid": args.grid, "tol": args.tol, "max_iter": args.max_iter}
    )
    report["parameters"]["cocycle"] = name
    cert = _certified(c, args)
    table = barabanov.solve_barabanov(cert, c, mode=args.mode, grid_size=args.grid, tol=args.tol, max_iter=args.max_iter)
    report["results"]["beta"] = table.beta
    report["results"]["residual"] = table.residual
    report["results"]["lipschitz_bound"] = table.lipschitz_bound
    report["results"]["grid_points"] = int(len(table.angles))
    if args.csv:
        preamble = f"# mode={table.mode} beta={_fmt(table.beta)} residual={_fmt(table.residual)}"
        write_csv(
            args.csv,
            ["angle", "value"],
            [(float(a), float(v)) for a, v in zip(table.angles, table.values)],
            preamble=preamble,
        )
        report["results"]["csv"] = args.csv
    _emit(report, args.out)
    return EXIT_OK


def cmd_mather(args) -> int:
    name, c = load_cocycle_file(args.file)
    report = _report_skeleton(
        "mather", args, {"mode": args.mode, "ell_max": args.ell_max, "pad": args.pad, "tol": args.tol}
    )
    report["parameters"]["cocycle"] = name
    cert = _certified(c, args)
    table = barabanov.solve_barabanov(cert, c, mode=args.mode, grid_size=args.grid)
    rep = mather.complexity_report(table, cert, c, args.ell_max, m=args.pad, tol=args.tol)
    report["parameters"]["tol_used"] = rep.tol
    report["results"]["lengths"] = list(rep.lengths)
    report["results"]["counts"] = list(rep.counts)
    report["results"]["entropy_estimates"] = list(rep.entropy_estimates)
    report["warnings"].append(rep.caveat)
    if args.csv:
        write_csv(args.csv, ["ell", "count", "entropy_estimate"], rep.rows())
        report["results"]["csv"] = args.csv
    _emit(report, args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    name, c = load_cocycle_file(args.file)
    report = _report_skeleton(
        "audit", args,
        {"mode": args.mode, "ell": args.ell, "pad": args.pad, "pairs": args.pairs, "tol": args.tol, "seed": args.seed},
    )
    report["parameters"]["cocycle"] = name
    cert = _certified(c, args)
    table = barabanov.solve_barabanov(cert, c, mode=args.mode, grid_size=args.grid)
    words = mather.admissible_words(table, cert, c, args.ell, m=args.pad)
    cr = mather.cross_ratio_audit(cert, c, args.mode, words, n_pairs=args.pairs, tol=args.tol, seed=args.seed)
    geo = mather.geometry_audit(cert, c, args.mode, words)
    report["results"]["n_admissible_words"] = len(words)
    report["results"]["cross_ratio_audit"] = cr.to_dict()
    report["results"]["geometry_audit"] = geo.to_dict()
    report["warnings"].append(cr.caveat)
    _emit(report, args.out)
    return EXIT_OK


def cmd_posent(args) -> int:
    name, c = load_cocycle_file(args.file)
    report = _report_skeleton(
        "posent", args,
        {"grid": args.grid, "kappa": args.kappa, "blocks": args.blocks, "trials": args.trials, "max_len": args.max_len},
    )
    report["parameters"]["cocycle"] = name
    scheme = entropy_pos.class_c_scheme(c, grid_size=args.grid, max_len=args.max_len, kappa_target=args.kappa)
    if scheme is None:
        report["results"]["scheme"] = None
        report["warnings"].append("no contraction scheme found (inconclusive)")
        _emit(report, args.out)
        return EXIT_OK
    report["results"]["scheme"] = scheme.summary()
    report["results"]["entropy_lower_bound"] = entropy_pos.entropy_lower_bound(scheme, c.k)
    if args.trials > 0:
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(args.trials):
            free = tuple(int(s) for s in rng.integers(1, c.k + 1, size=args.blocks))
            word = entropy_pos.build_bounded_word(scheme, c, free, args.blocks)
            p = np.eye(2)
            for j, s in enumerate(word, 1):
                p = c.generator(s) @ p
                if j % scheme.ell == 0:
                    from .geom2 import op_norm

                    worst = max(worst, op_norm(p))
        report["results"]["trials"] = {
            "count": args.trials,
            "blocks": args.blocks,
            "max_checkpoint_norm": worst,
            "C1": scheme.C1,
            "all_within_C1": bool(worst <= scheme.C1 + 1e-9),
        }
    _emit(report, args.out)
    return EXIT_OK


def cmd_corpus(args) -> int:
    if args.action == "list":
        print(json.dumps({"examples": corpus.list_examples()}, indent=2, sort_keys=True))
        return EXIT_OK
    ex = corpus.build_example(args.name)
    out = args.out or f"{ex.name}.json"
    write_cocycle_file(out, ex.name, ex.cocycle)
    print(json.dumps({"written": out, "expected": _jsonable(ex.expected)}, indent=2, sort_keys=True))
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cocycle-optim", description=__doc__)
    p.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("COCYCLE_OPTIM_THREADS", os.cpu_count() or 1)),
        help="inner parallelism hint (reductions are deterministic regardless)",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid_default=4096):
        sp.add_argument("file", help="cocycle JSON file")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--budget", type=int, default=200)
        sp.add_argument("--grid", type=int, default=grid_default)

    sp = sub.add_parser("certify", help="domination certificate or diagnostic")
    common(sp)
    sp.add_argument("--samples", type=int, default=2048)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("exponents", help="extremal exponent brackets")
    common(sp)
    sp.add_argument("--mode", choices=["lambda1", "lambda2"], default="lambda1")
    sp.add_argument("--depth", type=int, default=12)
    sp.add_argument("--csv", help="bracket table CSV path")
    sp.add_argument("--beta", action="store_true", help="also solve for the extremal shifts")
    sp.set_defaults(func=cmd_exponents)

    sp = sub.add_parser("barabanov", help="extremal function table")
    common(sp)
    sp.add_argument("--mode", choices=["top", "bottom"], default="top")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=100_000)
    sp.add_argument("--csv", help="table CSV path (angle,value)")
    sp.set_defaults(func=cmd_barabanov)

    sp = sub.add_parser("mather", help="admissible word counts and entropy estimates")
    common(sp)
    sp.add_argument("--mode", choices=["top", "bottom"], default="top")
    sp.add_argument("--ell-max", type=int, default=10)
    sp.add_argument("--pad", type=int, default=8)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--csv", help="word-count CSV path")
    sp.set_defaults(func=cmd_mather)

    sp = sub.add_parser("audit", help="cross-ratio and geometry obstruction audits")
    common(sp)
    sp.add_argument("--mode", choices=["top", "bottom"], default="top")
    sp.add_argument("--ell", type=int, default=6)
    sp.add_argument("--pad", type=int, default=8)
    sp.add_argument("--pairs", type=int, default=50)
    sp.add_argument("--tol", type=float, default=1e-2)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("posent", help="positive-entropy bounded-norm construction")
    common(sp, grid_default=720)
    sp.add_argument("--kappa", type=float, default=0.9)
    sp.add_argument("--blocks", type=int, default=50)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--max-len", type=int, default=24)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_posent)

    sp = sub.add_parser("corpus", help="list or emit the named examples")
    sp.add_argument("action", choices=["list", "emit"])
    sp.add_argument("name", nargs="?", help="example name for 'emit'")
    sp.add_argument("--out", help="output path for 'emit'")
    sp.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "corpus" and args.action == "emit" and not args.name:
        parser.error("corpus emit requires a name")
    t0 = time.time()
    try:
        code = args.func(args)
    except (DomainError, PrecisionError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BudgetError, ConvergenceError, SchemeError) as exc:
        print(f"budget/convergence error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(f"wall time: {time.time() - t0:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
