"""Command-line front end: one run of the elliptic unit pipeline."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import conjugates as cj
from .errors import (
    EllUnitError,
    ExcludedField,
    NoAdmissibleLift,
    NoClassFound,
    NotFundamental,
    RecognitionFailure,
    SearchExhausted,
)
from .polyrecon import (
    AlgebraicPoly,
    height_report,
    max_abs_coeff,
    min_poly_over_K,
    min_poly_over_Q,
)
from .quadfield import (
    QuadForm,
    class_group,
    ideal_from_hnf,
    make_field,
    make_ideal,
    reduce_form,
)
from .rayclass import (
    Modulus,
    e_value,
    galois_elements,
    ideal_lattice,
    ray_data,
    select_class,
)
from .reciprocity import WClassMatrix, gee_uQ, lift_with_det
from .siegel import DEFAULT_DIGITS, digits_to_bits

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEGENERATE = 2
EXIT_EXCLUDED = 3
EXIT_RECOGNITION = 4
EXIT_NO_LIFT = 5
MAX_RETRIES = 3
SAFE_INT = 2 ** 53


@dataclass
class RunConfig:
    d: int
    modulus: int | None = None
    ideal: tuple | None = None
    gens: tuple | None = None
    digits: int = DEFAULT_DIGITS
    mode: str = "epsilon"
    twist: tuple | None = None
    exhaustive: bool = False
    emit: str = "text"
    include_conjugates: bool = False
    threads: int = 1
    cls: tuple | None = None
    class_form: tuple | None = None
    basis: str = "tau"

    def __post_init__(self):
        if self.digits < 64:
            raise ValueError("digits must be at least 64")
        given = [x is not None for x in (self.modulus, self.ideal, self.gens)]
        if sum(given) != 1:
            raise ValueError("give exactly one of --modulus, --ideal, --gens")
        if self.mode not in ("epsilon", "classical", "compare"):
            raise ValueError(f"unknown mode {self.mode}")


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _frac(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _int(x: int):
    return x if abs(x) < SAFE_INT else str(x)


def _poly_K_json(p: AlgebraicPoly, basis: str) -> list:
    coeffs = p.omega_coeffs() if basis == "omega" else p.coeffs
    return [[_int(a), _int(b)] for a, b in coeffs]


def _build_modulus(cfg: RunConfig, K):
    if cfg.modulus is not None:
        return make_ideal(K, cfg.modulus)
    if cfg.ideal is not None:
        try:
            return ideal_from_hnf(K, *cfg.ideal)
        except ValueError as exc:
            raise _Exit(EXIT_USAGE, str(exc))
    return make_ideal(K, [K.elt(a, b) for a, b in cfg.gens])


def _recognize(K, compute_grid, bits: int):
    """Grid and polynomial, doubling the precision after a recognition failure."""
    last = None
    for attempt in range(MAX_RETRIES + 1):
        prec = bits * 2 ** attempt
        grid = compute_grid(prec)
        try:
            return grid, min_poly_over_K(K, grid.values, prec), prec
        except RecognitionFailure as exc:
            last = exc
    raise _Exit(EXIT_RECOGNITION, f"recognition failed after {MAX_RETRIES} retries: {last}")


def _epsilon_run(cfg, K, f, ray, elements, x_st, bits):
    M = Modulus(f).M
    s, t = x_st
    Qc = reduce_form(QuadForm(*cfg.class_form)) if cfg.class_form else K.principal_form
    if Qc.disc != K.disc:
        raise _Exit(EXIT_USAGE, f"form {Qc} does not have discriminant {K.disc}")
    u = gee_uQ(Qc, M)
    try:
        alpha = lift_with_det(WClassMatrix(s, t, K.principal_form, f.m), M, u, ray.ell,
                              ideal_lattice(f))
    except NoAdmissibleLift as exc:
        raise _Exit(EXIT_NO_LIFT, str(exc))
    gamma = alpha.residue(M) @ u
    d_c = gamma.det % ray.W
    e_c = e_value(ray.W, d_c)
    start = cj.initial_args(f)
    uc = cj.conjugate_args(start, alpha)

    def grid_at(prec):
        if e_c == 1 and Qc == K.principal_form:
            g = cj.epsilon_grid(start, uc, elements, prec, cfg.threads, ray.W)
        else:
            g = cj.general_epsilon_grid(start, alpha.residue(M), Qc, elements, e_c, prec,
                                        cfg.threads, ray.W)
        if cfg.twist:
            g = cj.rou_twist(g, *cfg.twist)
        return g

    grid, poly, prec = _recognize(K, grid_at, bits)
    return {
        "class": {"s": s, "t": t, "form": list(Qc), "alpha": list(alpha.entries),
                  "d_c": d_c, "e_c": e_c},
        "args": {"u1": _frac(start.u1), "v1": _frac(start.v1),
                 "uc": _frac(uc[0]), "vc": _frac(uc[1])},
        "grid": grid, "poly": poly, "poly_Q": min_poly_over_Q(poly), "prec": prec,
    }


def _classical_run(cfg, K, f, elements, bits):
    if not Modulus(f).is_rational():
        raise _Exit(EXIT_USAGE, "classical mode needs a modulus (N)")
    N = f.m
    grid, poly, prec = _recognize(
        K, lambda p: cj.classical_conjugates(elements, N, p, cfg.threads), bits)
    return {"grid": grid, "poly": poly, "poly_Q": min_poly_over_Q(poly), "prec": prec,
            "exponent": cj.classical_exponent(N)}


def _conjugates_json(grid, digits: int) -> list:
    return [[mpmath.nstr(mpmath.re(v), digits), mpmath.nstr(mpmath.im(v), digits)]
            for v in grid.values]


def _pipeline(cfg: RunConfig, report: dict) -> None:
    try:
        K = make_field(cfg.d)
    except ExcludedField as exc:
        raise _Exit(EXIT_EXCLUDED, str(exc))
    except NotFundamental as exc:
        raise _Exit(EXIT_USAGE, str(exc))
    report["field"] = {"d_K": K.disc, "h_K": len(class_group(K))}
    f = _build_modulus(cfg, K)
    if f.is_unit():
        raise _Exit(EXIT_USAGE, "modulus must not be the unit ideal")
    report["modulus"] = {"hnf": list(f.hnf), "f": f.m, "norm": f.norm}
    ray = ray_data(f)
    report["ray"] = {"W": ray.W, "ell": ray.ell, "h_f": ray.h_f, "degenerate": ray.degenerate}
    bits = digits_to_bits(cfg.digits)
    if ray.degenerate and cfg.mode != "classical":
        raise _Exit(EXIT_DEGENERATE,
                    f"K_f = H(zeta_{ray.W}): use class invariants together with roots of unity")
    elements = galois_elements(f)

    eps = None
    if cfg.mode in ("epsilon", "compare"):
        if cfg.cls is not None:
            candidates = [cfg.cls]
        else:
            try:
                xs = select_class(f, ray.W, exhaustive=cfg.exhaustive)
            except NoClassFound as exc:
                raise _Exit(EXIT_NO_LIFT, str(exc))
            xs = xs if cfg.exhaustive else [xs]
            candidates = [(int(x.b), int(x.a)) for x in xs]
        runs = []
        for st in candidates:
            try:
                runs.append(_epsilon_run(cfg, K, f, ray, elements, st, bits))
            except _Exit as exc:
                if not cfg.exhaustive or exc.code != EXIT_NO_LIFT:
                    raise
        if not runs:
            raise _Exit(EXIT_NO_LIFT, "no candidate class admits a lift")
        eps = min(runs, key=lambda r: max_abs_coeff(r["poly_Q"]))
        report["class"] = eps["class"]
        report["args"] = eps["args"]
        if cfg.exhaustive:
            report["candidates"] = [
                {"s": r["class"]["s"], "t": r["class"]["t"],
                 "max_abs_coeff": str(max_abs_coeff(r["poly_Q"]))} for r in runs]
        if cfg.twist:
            report["twist"] = {"n": cfg.twist[0], "k": cfg.twist[1]}

    cls = None
    if cfg.mode in ("classical", "compare"):
        cls_bits = eps["prec"] if eps else bits
        cls = _classical_run(cfg, K, f, elements, cls_bits)

    main = eps or cls
    report["precision"] = {"digits": cfg.digits, "bits": main["prec"]}
    report["poly_K"] = _poly_K_json(main["poly"], cfg.basis)
    report["poly_Q"] = [str(c) for c in main["poly_Q"]]
    report["multiplicity"] = main["poly"].multiplicity
    h = height_report(main["poly_Q"])
    report["heights"] = {"max_abs_coeff": str(h.max_abs_coeff), "log_height": h.log_height}
    if cfg.mode == "classical":
        report["heights"]["exponent"] = cls["exponent"]
    if cfg.mode == "compare":
        hc = height_report(eps["poly_Q"], cls["poly_Q"])
        report["classical"] = {
            "exponent": cls["exponent"],
            "poly_K": _poly_K_json(cls["poly"], cfg.basis),
            "poly_Q": [str(c) for c in cls["poly_Q"]],
            "max_abs_coeff": str(hc.classical_max),
        }
        report["heights"]["reduction_factor"] = hc.reduction_factor
    report["generator"] = {"distinct_conjugates": main["poly"].degree,
                           "is_generator": main["poly"].multiplicity == 1}
    if cfg.include_conjugates:
        report["conjugates"] = _conjugates_json(main["grid"], min(cfg.digits, 50))


def run(cfg: RunConfig) -> tuple[int, dict]:
    report: dict = {}
    try:
        _pipeline(cfg, report)
    except _Exit as exc:
        report["error"] = {"code": exc.code, "message": str(exc)}
        return exc.code, report
    except SearchExhausted as exc:
        report["error"] = {"code": EXIT_NO_LIFT, "message": str(exc)}
        return EXIT_NO_LIFT, report
    except EllUnitError as exc:
        report["error"] = {"code": EXIT_USAGE, "message": str(exc)}
        return EXIT_USAGE, report
    return EXIT_OK, report


def emit_json(report: dict) -> bytes:
    return (json.dumps(report, indent=2) + "\n").encode()


def _fmt_poly_K(coeffs) -> str:
    terms = []
    for deg in range(len(coeffs) - 1, -1, -1):
        a, b = (int(c) for c in coeffs[deg])
        if a == 0 and b == 0:
            continue
        if b == 0:
            c = str(a)
        elif a == 0:
            c = f"{b}*tau1"
        else:
            c = f"({b}*tau1 {'+' if a > 0 else '-'} {abs(a)})"
        mono = "" if deg == 0 else ("x" if deg == 1 else f"x^{deg}")
        if mono and c == "1":
            terms.append(mono)
        elif mono:
            terms.append(f"{c}*{mono}")
        else:
            terms.append(c)
    return " + ".join(terms).replace("+ -", "- ")


def emit_text(report: dict, elapsed: float) -> str:
    out = []
    fld = report.get("field", {})
    if fld:
        out.append(f"field          d_K = {fld['d_K']}, h_K = {fld['h_K']}")
    if "modulus" in report:
        m = report["modulus"]
        out.append(f"modulus        HNF {m['hnf']}, f = {m['f']}, norm = {m['norm']}")
    if "ray" in report:
        r = report["ray"]
        out.append(f"ray class      W = {r['W']}, ell = {r['ell']}, h_f = {r['h_f']}, "
                   f"degenerate = {r['degenerate']}")
    if "class" in report:
        c = report["class"]
        out.append(f"class          (s,t) = ({c['s']},{c['t']}), form {c['form']}, "
                   f"alpha = {c['alpha']}, d_c = {c['d_c']}, e_c = {c['e_c']}")
        a = report["args"]
        out.append(f"arguments      [u1,v1] = [{a['u1']},{a['v1']}], "
                   f"[uc,vc] = [{a['uc']},{a['vc']}]")
    if "twist" in report:
        out.append(f"twist          zeta_{report['twist']['n']}^{report['twist']['k']}")
    if "candidates" in report:
        for c in report["candidates"]:
            out.append(f"candidate      ({c['s']},{c['t']}) max |coeff| {c['max_abs_coeff']}")
    if "poly_K" in report:
        out.append(f"precision      {report['precision']['bits']} bits")
        out.append(f"poly over K    {_fmt_poly_K(report['poly_K'])}")
        out.append(f"degree over Q  {len(report['poly_Q']) - 1}")
        h = report["heights"]
        out.append(f"max |coeff|    {h['max_abs_coeff']}")
        if "classical" in report:
            cl = report["classical"]
            out.append(f"classical      {_fmt_poly_K(cl['poly_K'])}")
            out.append(f"classical max  {cl['max_abs_coeff']}")
            out.append(f"reduction      {h['reduction_factor']:.5f}")
        if not report["generator"]["is_generator"]:
            out.append(f"warning        conjugates repeat with multiplicity "
                       f"{report['multiplicity']}; not a generator")
    if "conjugates" in report:
        for re_, im_ in report["conjugates"]:
            out.append(f"conjugate      {re_} + {im_}*i")
    if "error" in report:
        out.append(f"error {report['error']['code']}: {report['error']['message']}")
    out.append(f"wall time      {elapsed:.2f} s")
    return "\n".join(out) + "\n"


def _pair(text: str, sep: str, n: int = 2) -> tuple:
    parts = text.split(sep)
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"expected {n} integers separated by '{sep}'")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not integers: {text}")


def _gens(text: str) -> tuple:
    """Generators 'a:b,...' meaning a + b*tau1; a bare integer means b = 0."""
    out = []
    for item in text.split(","):
        a, _, b = item.partition(":")
        try:
            out.append((int(a), int(b or 0)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad generator {item}")
    return tuple(out)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is reserved for degenerate moduli
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    env = os.environ.get("RAYCLASS_DIGITS")
    p = _Parser(
        prog="ellunits",
        description="Elliptic units of ray class fields of imaginary quadratic fields.")
    p.add_argument("--d", type=int, required=True, help="discriminant or squarefree d < 0")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--modulus", type=int, help="modulus (N) for a rational integer N")
    g.add_argument("--ideal", type=lambda s: _pair(s, ",", 3),
                   help="modulus as HNF m,n,k meaning [m, n + k*omega]")
    g.add_argument("--gens", type=_gens, help="modulus generators a:b,... (a + b*tau1)")
    p.add_argument("--digits", type=int, default=env or DEFAULT_DIGITS,
                   help="working precision in decimal digits (env RAYCLASS_DIGITS)")
    p.add_argument("--mode", choices=["epsilon", "classical", "compare"], default="epsilon")
    p.add_argument("--twist", type=lambda s: _pair(s, ":"), help="n:k, multiply by zeta_n^k")
    p.add_argument("--exhaustive", action="store_true",
                   help="try every admissible class, keep the smallest polynomial")
    p.add_argument("--emit", choices=["text", "json"], default="text")
    p.add_argument("--conjugates", action="store_true", help="include conjugate values")
    p.add_argument("--threads", type=int, default=1, help="worker processes for the grid")
    p.add_argument("--class", dest="cls", type=lambda s: _pair(s, ","),
                   help="class x = s*tau1 + t given as s,t")
    p.add_argument("--class-form", type=lambda s: _pair(s, ",", 3),
                   help="ideal class of c as a form a,b,c")
    p.add_argument("--basis", choices=["tau", "omega"], default="tau",
                   help="basis for coefficients over K")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(d=args.d, modulus=args.modulus, ideal=args.ideal, gens=args.gens,
                        digits=args.digits, mode=args.mode, twist=args.twist,
                        exhaustive=args.exhaustive, emit=args.emit,
                        include_conjugates=args.conjugates, threads=args.threads,
                        cls=args.cls, class_form=args.class_form, basis=args.basis)
    except ValueError as exc:
        print(f"ellunits: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    code, report = run(cfg)
    elapsed = time.perf_counter() - t0
    if cfg.emit == "json":
        sys.stdout.buffer.write(emit_json(report))
    else:
        sys.stdout.write(emit_text(report, elapsed))
    if code != EXIT_OK and cfg.emit == "json":
        print(report["error"]["message"], file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
