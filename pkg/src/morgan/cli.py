"""Command-line interface.

Commands: analyze, solve, verify, fixed-poles.  All comparisons are exact;
exit codes: 0 success/PASS, 2 certified no-solution, 1 error or FAIL.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .admissible import enumerate_row_configs, enumerate_tuples
from .canonical import to_pencil_form
from .decouple import (
    DEFAULT_SEED,
    NoSolution,
    SolveOptions,
    solve as run_solve,
)
from .errors import MorganError
from .exactalg import format_poly, parse_poly, transfer_function
from .fileio import (
    dump_json,
    load_solution,
    load_system,
    matrix_from_json,
    no_solution_to_dict,
    poly_from_json,
    solution_to_dict,
)
from .zeros import (
    routh_hurwitz_stable,
    uncontrollable_polynomial,
    unobservable_polynomial,
)

log = logging.getLogger("morgan")


def _poly_str(coeffs_json) -> str:
    return format_poly(poly_from_json(coeffs_json))


def cmd_analyze(args) -> int:
    sys_ = load_system(args.system)
    pencil = to_pencil_form(sys_)
    m = sys_.m
    tuples = enumerate_tuples(pencil.sigma, m)
    configs = enumerate_row_configs(pencil.sigma, m)
    bound = len(tuples) * len(configs)
    if args.json:
        out = {
            "sigma": list(pencil.sigma),
            "admissible_tuples": [list(t) for t in tuples],
            "row_configs": [list(c.positions) for c in configs],
            "search_bound": bound,
            "n": sys_.n,
            "inputs": sys_.l,
            "outputs": m,
        }
        print(dump_json(out), end="")
    else:
        print(f"n = {sys_.n}, inputs = {sys_.l}, outputs = {m}")
        print(f"controllability indices sigma = {tuple(pencil.sigma)}")
        print(f"admissible closed-loop index tuples ({len(tuples)}):")
        for t in tuples:
            print(f"  {t}")
        print(f"feedback-row configurations ({len(configs)}), s-positions:")
        print("  " + ", ".join(str(c) for c in configs))
        print(f"search bound |I| * C(l, l-m) = {bound}")
    return 0


def cmd_solve(args) -> int:
    sys_ = load_system(args.system)
    diag_polys = None
    if args.diag_polys:
        diag_polys = tuple(parse_poly(p) for p in args.diag_polys.split(","))
    dz_target = parse_poly(args.dz_target) if args.dz_target else None
    options = SolveOptions(
        seed=args.seed,
        return_all=args.all,
        diag_polys=diag_polys,
        dz_target=dz_target,
        jobs=args.jobs,
    )
    result = run_solve(sys_, options)
    if isinstance(result, NoSolution):
        payload = no_solution_to_dict(result)
        text = dump_json(payload)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        if args.json:
            print(text, end="")
        else:
            print("NO SOLUTION: every configuration of the finite search was rejected")
            print(f"  sigma = {tuple(result.sigma)}, configurations examined = {result.searched}")
        return 2

    payload = solution_to_dict(result)
    text = dump_json(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.json:
        print(text, end="")
    else:
        print(f"SOLVED with closed-loop indices {tuple(result.ci_tuple)} "
              f"at feedback rows {result.config}")
        print("diagonal closed loop:")
        for i, (num, den) in enumerate(result.diag):
            print(f"  H_{i + 1}{i + 1}(s) = ({format_poly(num)})/({format_poly(den)})")
        fp = result.fixed_poles
        print(f"input decoupling zeros: {format_poly(fp.input_dz_poly)}"
              f" ({'stable' if fp.input_dz_stable else 'not stable'})")
        print(f"fixed decoupling poles: {format_poly(fp.fixed_dec_poly)}"
              f" ({'stable' if fp.fixed_dec_stable else 'not stable'})")
        if args.out:
            print(f"solution written to {args.out}")
    return 0


def cmd_verify(args) -> int:
    sys_ = load_system(args.system)
    data = load_solution(args.solution)
    if data.get("no_solution"):
        print("FAIL: solution file records no solution")
        return 1
    f = matrix_from_json(data["F"], "F")
    g = matrix_from_json(data["G"], "G")
    if f.rows != sys_.l or f.cols != sys_.n or g.rows != sys_.l or g.cols != sys_.m:
        print("FAIL: F/G dimensions do not match the system")
        return 1
    h = transfer_function(sys_.A, sys_.B, sys_.C, f, g)
    failures = []
    for i in range(sys_.m):
        for j in range(sys_.m):
            num, den = h[i][j]
            if i != j and not num.is_zero():
                failures.append(
                    f"off-diagonal entry ({i + 1},{j + 1}) = "
                    f"({format_poly(num)})/({format_poly(den)}) != 0"
                )
    for i in range(sys_.m):
        num, den = h[i][i]
        if num.is_zero():
            failures.append(f"diagonal entry {i + 1} is zero")
            continue
        rec = data["diagonal"][i]
        if poly_from_json(rec["num"]) != num or poly_from_json(rec["den"]) != den:
            failures.append(
                f"diagonal entry {i + 1} is ({format_poly(num)})/({format_poly(den)}), "
                f"file records ({_poly_str(rec['num'])})/({_poly_str(rec['den'])})"
            )
    # fixed-pole cross-check
    acl = sys_.A + sys_.B * f
    dz = uncontrollable_polynomial(acl, sys_.B * g)
    dz_rec = poly_from_json(data["fixed_poles"]["input_decoupling_zeros"])
    if dz != dz_rec:
        failures.append(
            f"uncontrollable polynomial of the closed loop is {format_poly(dz)}, "
            f"file records {format_poly(dz_rec)}"
        )
    fixed_rec = poly_from_json(data["fixed_poles"]["wolovich_falb"])
    unobs = unobservable_polynomial(acl, sys_.C)
    if not unobs.divmod(fixed_rec)[1].is_zero():
        failures.append(
            "recorded fixed decoupling poles do not divide the closed-loop "
            f"unobservable polynomial {format_poly(unobs)}"
        )
    if not (fixed_rec * dz).divmod(unobs)[1].is_zero():
        failures.append(
            f"closed-loop unobservable polynomial {format_poly(unobs)} does not "
            "divide (fixed poles) * (input decoupling zeros)"
        )
    if args.json:
        print(
            dump_json(
                {
                    "pass": not failures,
                    "failures": failures,
                    "diagonal": [
                        {"num": [str(c) for c in h[i][i][0].coeffs],
                         "den": [str(c) for c in h[i][i][1].coeffs]}
                        for i in range(sys_.m)
                    ],
                    "input_decoupling_zeros": [str(c) for c in dz.coeffs],
                    "unobservable_polynomial": [str(c) for c in unobs.coeffs],
                }
            ),
            end="",
        )
    else:
        if failures:
            print("FAIL")
            for msg in failures:
                print(f"  {msg}")
        else:
            print("PASS: closed loop is exactly diagonal and matches the file")
            for i in range(sys_.m):
                num, den = h[i][i]
                print(f"  H_{i + 1}{i + 1}(s) = ({format_poly(num)})/({format_poly(den)})")
            print(f"  input decoupling zeros: {format_poly(dz)} (cross-checked)")
            print(f"  closed-loop unobservable polynomial: {format_poly(unobs)}")
    return 1 if failures else 0


def cmd_fixed_poles(args) -> int:
    sys_ = load_system(args.system)
    data = load_solution(args.solution)
    if data.get("no_solution"):
        print("FAIL: solution file records no solution")
        return 1
    f = matrix_from_json(data["F"], "F")
    g = matrix_from_json(data["G"], "G")
    acl = sys_.A + sys_.B * f
    dz = uncontrollable_polynomial(acl, sys_.B * g)
    unobs = unobservable_polynomial(acl, sys_.C)
    fp = data["fixed_poles"]
    dz_rec = poly_from_json(fp["input_decoupling_zeros"])
    fixed_rec = poly_from_json(fp["wolovich_falb"])
    consistent = (
        dz == dz_rec
        and unobs.divmod(fixed_rec)[1].is_zero()
        and (fixed_rec * dz).divmod(unobs)[1].is_zero()
    )
    if args.json:
        print(
            dump_json(
                {
                    "input_decoupling_zeros": [str(c) for c in dz.coeffs],
                    "input_decoupling_stable": routh_hurwitz_stable(dz),
                    "wolovich_falb_recorded": fp["wolovich_falb"],
                    "wolovich_falb_stable": routh_hurwitz_stable(fixed_rec),
                    "unobservable_polynomial": [str(c) for c in unobs.coeffs],
                    "consistent": consistent,
                }
            ),
            end="",
        )
    else:
        print(f"input decoupling zeros (recomputed): {format_poly(dz)} "
              f"({'stable' if routh_hurwitz_stable(dz) else 'not stable'})")
        print(f"fixed decoupling poles (recorded):   {format_poly(fixed_rec)} "
              f"({'stable' if routh_hurwitz_stable(fixed_rec) else 'not stable'})")
        print(f"closed-loop unobservable polynomial: {format_poly(unobs)}")
        print("consistent" if consistent else "INCONSISTENT with the solution file")
    return 0 if consistent else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="morgan",
        description="Exact solver for Morgan's problem "
        "(diagonal decoupling by state feedback with singular input transformation)",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print sigma, the admissible tuples and row configurations")
    p.add_argument("system", help="system JSON file (A, B, C)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("solve", help="search for a decoupling pair")
    p.add_argument("system")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--all", action="store_true",
                   help="audit every configuration instead of stopping at the first solution")
    p.add_argument("--diag-polys",
                   help="comma-separated monic denominators for the diagonal, e.g. 's^2+2s+1,s+3'")
    p.add_argument("--dz-target",
                   help="monic polynomial the input decoupling zeros must realize")
    p.add_argument("--out", help="write the solution JSON here")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="recompute the exact closed loop and check a solution file")
    p.add_argument("system")
    p.add_argument("solution")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fixed-poles", help="report and cross-check the fixed poles of a solution")
    p.add_argument("system")
    p.add_argument("solution")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fixed_poles)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("MORGAN_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except MorganError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (KeyError, IndexError, TypeError, ValueError) as e:
        print(f"error: malformed input ({type(e).__name__}: {e})", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
