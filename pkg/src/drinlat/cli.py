"""Batch command-line surface.

One command per invocation, deterministic output for a given
(args, config, seed).  Reports are JSON on stdout with the config echoed
verbatim; refusals and budget failures are machine-readable JSON on
stderr with exit codes 2 (refusal / not found), 3 (budget exceeded) and
4 (malformed input).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Tuple

from . import errors
from .acceptance import run_all
from .bounds import cebotarev_check, induction_threshold, separable_N
from .extension import Extension, class_number, splitting, zeta_numerator
from .ffpoly import (field_from_str, poly_factor, poly_from_str,
                     poly_to_str, prime_from_str, enumerate_primes,
                     primes_of_degree)
from .goodprime import (LevelMap, SubvarietyDatum, count_components,
                        find_good_prime, local_matrix_from_json,
                        shrink_level)
from .hecke import (companion_matrix, hecke_degree, newton_polygon,
                    projectively_bounded, standard_hecke_matrix)
from .localfield import LocalElement

SCHEMA = 1

CONFIG_DEFAULTS = {
    "precision": 12,
    "orbit_budget": 2 ** 16,
    "scan_max_degree": 6,
    "seed": 0,
    "output": "json",
}

MALFORMED = (errors.MalformedInput, errors.ZeroPolynomial,
             errors.ReducibleDefiningPolynomial,
             errors.MultipleInfinitePlaces, errors.UnsupportedShape,
             json.JSONDecodeError, KeyError, ValueError)
REFUSALS = (errors.UnsupportedRamifiedPrime, errors.NotMaximalAtPrime,
            errors.Inconclusive, errors.NotNormal, errors.InapplicableDegree,
            errors.GenusZero, errors.QuotientInsufficient,
            errors.TowerNotSupported, errors.Singular, errors.NotContained,
            errors.NotSaturated, errors.PrecisionExhausted)


def _load_config(args) -> dict:
    cfg = dict(CONFIG_DEFAULTS)
    path = os.environ.get("DRINLAT_CONFIG")
    if getattr(args, "config", None):
        path = args.config
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        for key in CONFIG_DEFAULTS:
            if key in data:
                cfg[key] = data[key]
    for key in CONFIG_DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["output"] not in ("json", "tsv"):
        raise errors.MalformedInput("output must be json or tsv")
    for key in ("precision", "orbit_budget", "scan_max_degree"):
        if int(cfg[key]) < 1:
            raise errors.MalformedInput(f"config {key} must be positive")
        cfg[key] = int(cfg[key])
    cfg["seed"] = int(cfg["seed"])
    return cfg


def _inline_or_file(text: str):
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(text)


def _emit(payload: dict, cfg: dict) -> None:
    payload = {"schema": SCHEMA, "config": cfg, **payload}
    print(json.dumps(payload, sort_keys=True))


def _emit_tsv(lines) -> None:
    for line in lines:
        print(line)


# ---------------------------------------------------------------------------
# Command handlers


def cmd_primes(args, cfg) -> int:
    field = field_from_str(args.q)
    if args.degree is not None:
        primes = primes_of_degree(field, args.degree)
    else:
        primes = enumerate_primes(field, args.max_degree)
    names = [poly_to_str(p.poly) for p in primes]
    if cfg["output"] == "tsv":
        _emit_tsv(names)
    else:
        _emit({"primes": names, "count": len(names)}, cfg)
    return 0


def cmd_factor(args, cfg) -> int:
    field = field_from_str(args.q)
    f = poly_from_str(args.poly, field)
    factors = poly_factor(f)
    payload = {"unit": f.lead(),
               "factors": [[poly_to_str(p), m] for p, m in factors]}
    if cfg["output"] == "tsv":
        _emit_tsv(f"{poly_to_str(p)}\t{m}" for p, m in factors)
    else:
        _emit(payload, cfg)
    return 0


def _extension_from_arg(arg: str) -> Extension:
    return Extension.from_json(_inline_or_file(arg))


def cmd_splitting(args, cfg) -> int:
    ext = _extension_from_arg(args.ext)
    prime = prime_from_str(args.prime, ext.base)
    sp = splitting(ext, prime)
    if cfg["output"] == "tsv":
        _emit_tsv(f"{pl.e}\t{pl.f}" for pl in sp.places)
    else:
        _emit({"places": [{"e": pl.e, "f": pl.f} for pl in sp.places],
               "unramified": sp.unramified}, cfg)
    return 0


def cmd_class_number(args, cfg) -> int:
    ext = _extension_from_arg(args.ext)
    z = zeta_numerator(ext)
    _emit({"class_number": z.h, "genus": ext.genus,
           "zeta_numerator": z.coefficients,
           "point_counts": z.point_counts}, cfg)
    return 0


def cmd_predegree(args, cfg) -> int:
    ext = _extension_from_arg(args.ext)
    h = class_number(ext)
    _emit({"predegree": h * args.i, "class_number": h, "index": args.i}, cfg)
    return 0


def cmd_hecke_degree(args, cfg) -> int:
    field = field_from_str(args.q)
    prime = prime_from_str(args.prime, field)
    if args.matrix:
        g = local_matrix_from_json(prime, _inline_or_file(args.matrix),
                                   cfg["precision"])
    else:
        g = standard_hecke_matrix(prime, args.r, cfg["precision"])
    degree = hecke_degree(g, depth=args.depth, budget=cfg["orbit_budget"])
    _emit({"degree": degree}, cfg)
    return 0


def _parse_x_polynomial(text: str, prime, precision):
    """Polynomial in x with rational-function coefficients, e.g.
    'x^2-(1/t)' or 'x^3+t*x+(t+1)/(t^2)'."""
    field = prime.field
    s = text.replace(" ", "")
    terms = []
    depth = 0
    cur = ""
    sign = 1
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur:
            terms.append((sign, cur))
            sign = 1 if ch == "+" else -1
            cur = ""
        elif ch in "+-" and depth == 0 and not cur:
            sign = sign if ch == "+" else -sign
        else:
            cur += ch
    if cur:
        terms.append((sign, cur))
    if not terms:
        raise errors.MalformedInput(f"empty polynomial {text!r}")
    coeffs = {}
    for sign, term in terms:
        coef_text, k = _split_x_term(term)
        val = _parse_coefficient(coef_text, prime, precision)
        if sign < 0:
            val = val.neg()
        coeffs[k] = coeffs.get(k, LocalElement.zero(prime)).add(val)
    degree = max(coeffs)
    out = [coeffs.get(k, LocalElement.zero(prime)) for k in range(degree + 1)]
    return out


def _split_x_term(term: str) -> Tuple[str, int]:
    idx = _toplevel_x(term)
    if idx is None:
        return term, 0
    coef = term[:idx].rstrip("*")
    rest = term[idx + 1:]
    if rest.startswith("^"):
        return coef or "1", int(rest[1:])
    if rest:
        raise errors.MalformedInput(f"bad term {term!r}")
    return coef or "1", 1


def _toplevel_x(term: str) -> Optional[int]:
    depth = 0
    for i, ch in enumerate(term):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "x" and depth == 0:
            return i
    return None


def _strip_wrapping_parens(s: str) -> str:
    while s.startswith("(") and s.endswith(")"):
        depth = 0
        wrapped = True
        for i, ch in enumerate(s):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0 and i != len(s) - 1:
                    wrapped = False
                    break
        if not wrapped:
            return s
        s = s[1:-1]
    return s


def _parse_coefficient(text: str, prime, precision) -> LocalElement:
    field = prime.field
    text = _strip_wrapping_parens(text or "1")
    depth = 0
    split = None
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0:
            split = i
            break
    if split is None:
        return LocalElement.from_poly(prime, poly_from_str(text, field),
                                      precision)
    num = poly_from_str(_strip_wrapping_parens(text[:split]), field)
    den = poly_from_str(_strip_wrapping_parens(text[split + 1:]), field)
    return LocalElement.from_ratio(prime, num, den, precision)


def cmd_newton_polygon(args, cfg, default_tsv: bool = True) -> int:
    field = field_from_str(args.q)
    prime = prime_from_str(args.prime, field)
    coeffs = _parse_x_polynomial(args.poly, prime, cfg["precision"])
    np_ = newton_polygon(coeffs)
    out = cfg["output"]
    if getattr(args, "output", None) is None and default_tsv:
        out = "tsv"
    if out == "tsv":
        lines = [f"{s}\t{l}" for s, l in np_.segments]
        lines.append(f"segments={np_.segment_count}")
        _emit_tsv(lines)
    else:
        _emit({"segments": [{"slope": str(s), "length": l}
                            for s, l in np_.segments],
               "count": np_.segment_count}, cfg)
    return 0


def cmd_bounded(args, cfg) -> int:
    field = field_from_str(args.q)
    prime = prime_from_str(args.prime, field)
    if args.matrix:
        g = local_matrix_from_json(prime, _inline_or_file(args.matrix),
                                   cfg["precision"])
    elif args.companion:
        coeffs = _parse_x_polynomial(args.companion, prime, cfg["precision"])
        if not (coeffs[-1].kind == "n" and coeffs[-1].val == 0):
            raise errors.MalformedInput("companion polynomial must be monic")
        g = companion_matrix(prime, coeffs[:-1])
    else:
        raise errors.MalformedInput("need --matrix or --companion")
    _emit({"bounded": projectively_bounded(g)}, cfg)
    return 0


def cmd_good_prime(args, cfg) -> int:
    datum = SubvarietyDatum.from_json(_inline_or_file(args.datum),
                                      cfg["precision"])
    res = find_good_prime(datum, args.N,
                          max_degree=args.max_degree or cfg["scan_max_degree"],
                          budget=cfg["orbit_budget"], i_of_x=args.i_of_x,
                          precision=cfg["precision"])
    if res.found:
        _emit({"found": True, "certificate": res.certificate.to_json(),
               "shrink_index": res.shrink_index,
               "level": res.level.to_json(),
               "report": res.report.to_json()}, cfg)
        return 0
    _emit({"found": False, "report": res.report.to_json()}, cfg)
    return 2


def cmd_shrink_level(args, cfg) -> int:
    field = field_from_str(args.q)
    prime = prime_from_str(args.prime, field)
    if args.level:
        level = LevelMap.from_json(_inline_or_file(args.level), field, args.r,
                                   cfg["precision"])
    else:
        level = LevelMap(args.r)
    shrunk, index = shrink_level(level, prime)
    _emit({"index": index, "level": shrunk.to_json()}, cfg)
    return 0


def cmd_components(args, cfg) -> int:
    field = field_from_str(args.base)
    data = _inline_or_file(args.level) if args.level else []
    level = LevelMap.from_json(data, field, args.r, cfg["precision"])
    _emit({"components": count_components(field, level)}, cfg)
    return 0


def cmd_cebotarev(args, cfg) -> int:
    ext = _extension_from_arg(args.ext)
    rep = cebotarev_check(ext, args.i)
    _emit(rep.to_json(), cfg)
    return 0


def cmd_thresholds(args, cfg) -> int:
    # the induction threshold is stated for s >= 1; N makes sense from s = 0
    thr = induction_threshold(args.kp, args.r, args.s, args.degZ) \
        if args.s >= 1 else None
    _emit({"induction_threshold": thr,
           "separable_N": separable_N(args.r, args.s)}, cfg)
    return 0


def cmd_verify_suite(args, cfg) -> int:
    results = run_all(cfg)
    if cfg["output"] == "json":
        _emit({"results": [r.to_json() for r in results],
               "all_pass": all(r.passed for r in results)}, cfg)
    for r in results:
        print(r.line(), file=sys.stderr if cfg["output"] == "json" else sys.stdout)
    if any(r.budget_exceeded for r in results):
        return 3
    if not all(r.passed for r in results):
        return 2
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--precision", type=int)
    p.add_argument("--orbit-budget", dest="orbit_budget", type=int)
    p.add_argument("--scan-max-degree", dest="scan_max_degree", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", choices=["json", "tsv"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drinlat",
        description="Exact arithmetic for function-field lattice, Hecke, "
                    "and good-prime computations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("primes", help="enumerate monic irreducibles")
    p.add_argument("--q", required=True)
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--degree", type=int)
    p.set_defaults(fn=cmd_primes)

    p = sub.add_parser("factor", help="factor a polynomial over F_q")
    p.add_argument("--q", required=True)
    p.add_argument("--poly", required=True)
    p.set_defaults(fn=cmd_factor)

    p = sub.add_parser("splitting", help="splitting type of a prime")
    p.add_argument("--ext", required=True, help="extension JSON or @file")
    p.add_argument("--prime", required=True)
    p.set_defaults(fn=cmd_splitting)

    p = sub.add_parser("class-number", help="zeta numerator and class number")
    p.add_argument("--ext", required=True)
    p.set_defaults(fn=cmd_class_number)

    p = sub.add_parser("predegree", help="class number times index")
    p.add_argument("--ext", required=True)
    p.add_argument("--i", type=int, required=True)
    p.set_defaults(fn=cmd_predegree)

    p = sub.add_parser("hecke-degree", help="degree of the correspondence")
    p.add_argument("--q", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--prime", required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--matrix", help="matrix JSON or @file (default diagonal)")
    p.set_defaults(fn=cmd_hecke_degree)

    p = sub.add_parser("newton-polygon", help="Newton polygon of a polynomial")
    p.add_argument("--q", required=True)
    p.add_argument("--prime", required=True)
    p.add_argument("--poly", required=True,
                   help="monic polynomial in x, e.g. 'x^2-(1/t)'")
    p.set_defaults(fn=cmd_newton_polygon)

    p = sub.add_parser("bounded", help="projective boundedness predicate")
    p.add_argument("--q", required=True)
    p.add_argument("--prime", required=True)
    p.add_argument("--matrix")
    p.add_argument("--companion", help="monic polynomial in x")
    p.set_defaults(fn=cmd_bounded)

    p = sub.add_parser("good-prime", help="search for a good prime")
    p.add_argument("--datum", required=True, help="datum JSON or @file")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--i-of-x", dest="i_of_x", type=int,
                   help="override the datum index i(X)")
    p.set_defaults(fn=cmd_good_prime)

    p = sub.add_parser("shrink-level", help="maximal to depth-1 congruence")
    p.add_argument("--q", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--prime", required=True)
    p.add_argument("--level", help="level JSON or @file")
    p.set_defaults(fn=cmd_shrink_level)

    p = sub.add_parser("components", help="irreducible component count")
    p.add_argument("--base", required=True)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--level", help="level JSON or @file, [] for maximal")
    p.set_defaults(fn=cmd_components)

    p = sub.add_parser("cebotarev", help="split-prime count vs the bound")
    p.add_argument("--ext", required=True)
    p.add_argument("--i", type=int, required=True)
    p.set_defaults(fn=cmd_cebotarev)

    p = sub.add_parser("thresholds", help="induction threshold and N")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--kp", type=int, required=True)
    p.add_argument("--degZ", type=int, required=True)
    p.set_defaults(fn=cmd_thresholds)

    p = sub.add_parser("verify-suite", help="run all acceptance criteria")
    p.set_defaults(fn=cmd_verify_suite)

    for p in sub.choices.values():
        _add_config_flags(p)
    return parser


def _error_payload(kind: str, exc: Exception) -> str:
    return json.dumps({"schema": SCHEMA, "error": {
        "type": type(exc).__name__, "kind": kind, "message": str(exc)}},
        sort_keys=True)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.fn(args, cfg)
    except errors.BudgetExceeded as exc:
        print(_error_payload("budget", exc), file=sys.stderr)
        return 3
    except MALFORMED as exc:
        print(_error_payload("malformed", exc), file=sys.stderr)
        return 4
    except REFUSALS as exc:
        print(_error_payload("refusal", exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
