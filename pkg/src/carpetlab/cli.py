"""Command-line front-end: julia / param-plane / verify / verify-plm / solve / repro.

Exit codes: 0 all requested checks passed, 1 a verification failed, 2 usage
error.  Every run emits a self-contained JSON report echoing its full
configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from . import __version__
from .bundles import bundle_to_jsonable, parabolic_bundle, period2_bundle
from .criterion import evaluate_criterion
from .families import (ExcludedParameter, family_ex_a, family_ex_b, family_ex_c,
                       family_ex_d, family_F, family_G, family_mcmullen,
                       family_morosawa_pilgrim, family_parabolic, family_period2)
from .render import render_family_julia, render_param_plane, worker_count, write_image
from .solve import constants_table, lambda4, verify_constant

_COMPLEX_RE = re.compile(
    r"^\s*([+-]?\d*\.?\d+(?:[eE][+-]?\d+)?)"
    r"(?:([+-]\d*\.?\d+(?:[eE][+-]?\d+)?)i)?\s*$"
)


def parse_complex(text: str) -> complex:
    """Accepts 're', 're+imi' and 're-imi' with explicit sign on the imaginary part."""
    m = _COMPLEX_RE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(
            f"cannot parse complex number {text!r}; use the form re+imi")
    re_part = float(m.group(1))
    im_part = float(m.group(2)) if m.group(2) else 0.0
    return complex(re_part, im_part)


def _family_from_args(args) -> object:
    name = args.family
    if name == "G":
        if args.c is None:
            raise SystemExit2("--c required for family G")
        return family_G(args.c)
    if name == "F":
        if args.lam is None:
            raise SystemExit2("--lam required for family F")
        return family_F(args.lam, args.d0 or 1, args.dinf or 2)
    if name == "mcmullen":
        if args.mu is None:
            raise SystemExit2("--mu required for family mcmullen")
        return family_mcmullen(args.mu, args.d0 or 3, args.dinf or 3)
    if name == "morosawa-pilgrim":
        if args.nu is None:
            raise SystemExit2("--nu required for family morosawa-pilgrim")
        return family_morosawa_pilgrim(args.nu)
    if name == "parabolic":
        return family_parabolic(args.rho if args.rho is not None else 18.0)
    if name == "period2":
        from .solve import alpha0
        return family_period2(args.alpha if args.alpha is not None else alpha0())
    if name == "ex-a":
        return family_ex_a()
    if name == "ex-b":
        return family_ex_b()
    if name == "ex-c":
        return family_ex_c()
    if name == "ex-d":
        return family_ex_d(args.lam if args.lam is not None else lambda4())
    raise SystemExit2(f"unknown family {name!r}")


class SystemExit2(Exception):
    """Usage error; mapped to exit code 2."""


def _add_family_flags(sub):
    sub.add_argument("--family", required=True,
                     help="G | F | mcmullen | morosawa-pilgrim | parabolic | period2 | ex-a..ex-d")
    sub.add_argument("--c", type=parse_complex, default=None)
    sub.add_argument("--lam", type=parse_complex, default=None)
    sub.add_argument("--mu", type=parse_complex, default=None)
    sub.add_argument("--nu", type=parse_complex, default=None)
    sub.add_argument("--rho", type=parse_complex, default=None)
    sub.add_argument("--alpha", type=parse_complex, default=None)
    sub.add_argument("--d0", type=int, default=None)
    sub.add_argument("--dinf", type=int, default=None)


def _parse_window(text):
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("window must be x0,x1,y0,y1")
    return ((parts[0], parts[1]), (parts[2], parts[3]))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carpetlab", description=__doc__)
    ap.add_argument("--version", action="version", version=f"carpetlab {__version__}")
    sp = ap.add_subparsers(dest="cmd", required=True)

    j = sp.add_parser("julia", help="render a Julia set")
    _add_family_flags(j)
    j.add_argument("--res", type=int, default=512)
    j.add_argument("--window", type=_parse_window, default=None)
    j.add_argument("--out", default="out")
    j.add_argument("--format", choices=("ppm", "png"), default="ppm")
    j.add_argument("--workers", type=int, default=None)

    p = sp.add_parser("param-plane", help="render the degree-6 family parameter plane")
    p.add_argument("--res", type=int, default=512)
    p.add_argument("--window", type=_parse_window, default=((-6.0, 6.0), (-6.0, 6.0)))
    p.add_argument("--out", default="out")
    p.add_argument("--format", choices=("ppm", "png"), default="ppm")
    p.add_argument("--workers", type=int, default=None)

    v = sp.add_parser("verify", help="criterion report for a family instance")
    _add_family_flags(v)
    v.add_argument("--mask-res", type=int, default=384)
    v.add_argument("--out", default=None, help="write the JSON report here")

    vp = sp.add_parser("verify-plm", help="polynomial-like certification bundle")
    vp.add_argument("--family", required=True, choices=("parabolic", "period2"))
    vp.add_argument("--rho", type=parse_complex, default=None)
    vp.add_argument("--alpha", type=parse_complex, default=None)
    vp.add_argument("--grid-res", type=int, default=768)
    vp.add_argument("--out", default=None)

    s = sp.add_parser("solve", help="recompute a named constant")
    s.add_argument("--constant", required=True,
                   choices=("lambda4", "c0", "alpha0", "rho0", "all"))
    s.add_argument("--out", default=None)

    r = sp.add_parser("repro", help="reproduce a named figure or constants bundle")
    r.add_argument("target", choices=("fig1", "fig2", "fig3", "constants"))
    r.add_argument("--res", type=int, default=512)
    r.add_argument("--out", default="out")
    r.add_argument("--format", choices=("ppm", "png"), default="ppm")
    r.add_argument("--workers", type=int, default=None)
    return ap


def emit_report(payload: dict, path=None) -> str:
    doc = {"tool": {"name": "carpetlab", "version": __version__}}
    doc.update(payload)
    text = json.dumps(doc, indent=2, default=str)
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def _cmd_julia(args) -> int:
    spec = _family_from_args(args)
    img = render_family_julia(spec, res=(args.res, args.res), window=args.window,
                              workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.join(args.out, f"julia-{spec.name}.{args.format}")
    write_image(img, stem, args.format)
    print(emit_report({"command": "julia", "family": spec.name,
                       "config": img.meta, "manifest": [stem, stem + ".json"]}))
    return 0


def _cmd_param_plane(args) -> int:
    img = render_param_plane(window=args.window, res=(args.res, args.res),
                             workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.join(args.out, f"param-plane.{args.format}")
    write_image(img, stem, args.format)
    print(emit_report({"command": "param-plane", "config": img.meta,
                       "manifest": [stem, stem + ".json"]}))
    return 0


def _cmd_verify(args) -> int:
    spec = _family_from_args(args)
    report = evaluate_criterion(spec, mask_res=(args.mask_res, args.mask_res))
    text = emit_report({"command": "verify", "report": report.to_dict()}, args.out)
    print(text)
    has_fails = any(c.status == "FAILS" for c in
                    (report.cond_a, report.cond_b, report.cond_c, report.cond_d))
    return 1 if has_fails else 0


def _cmd_verify_plm(args) -> int:
    if args.family == "parabolic":
        rho = args.rho if args.rho is not None else 18.0
        bundle = parabolic_bundle(rho=rho, grid_res=args.grid_res)
    else:
        alpha = args.alpha
        bundle = period2_bundle(alpha=alpha, grid_res=args.grid_res)
    text = emit_report({"command": "verify-plm", "bundle": bundle_to_jsonable(bundle)},
                       args.out)
    print(text)
    return 0 if bundle["ok"] else 1


def _cmd_solve(args) -> int:
    if args.constant == "all":
        text = constants_table()
        if args.out:
            emit_report({"command": "solve", "constants": json.loads(text)}, args.out)
        print(text)
        return 0 if all(item["ok"] for item in json.loads(text)) else 1
    rep = verify_constant(args.constant)
    text = emit_report({"command": "solve", "constant": rep.to_dict()}, args.out)
    print(text)
    return 0 if rep.ok else 1


def _cmd_repro(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    manifest = []
    res = (args.res, args.res)
    if args.target == "fig1":
        img = render_param_plane(res=res, workers=args.workers)
        stem = os.path.join(args.out, f"fig1-param-plane.{args.format}")
        write_image(img, stem, args.format)
        manifest += [stem, stem + ".json"]
    elif args.target == "fig2":
        specs = [family_ex_a(), family_ex_b(), family_ex_c(), family_ex_d(lambda4())]
        for spec in specs:
            img = render_family_julia(spec, res=res, workers=args.workers)
            stem = os.path.join(args.out, f"fig2-{spec.name}.{args.format}")
            write_image(img, stem, args.format)
            manifest += [stem, stem + ".json"]
    elif args.target == "fig3":
        from .solve import alpha0
        for spec in (family_parabolic(18.0), family_period2(alpha0())):
            img = render_family_julia(spec, res=res, workers=args.workers)
            stem = os.path.join(args.out, f"fig3-{spec.name}.{args.format}")
            write_image(img, stem, args.format)
            manifest += [stem, stem + ".json"]
    else:
        path = os.path.join(args.out, "constants.json")
        with open(path, "w") as fh:
            fh.write(constants_table() + "\n")
        manifest.append(path)
    print(emit_report({"command": "repro", "target": args.target, "manifest": manifest}))
    return 0


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0
    try:
        if args.cmd == "julia":
            return _cmd_julia(args)
        if args.cmd == "param-plane":
            return _cmd_param_plane(args)
        if args.cmd == "verify":
            return _cmd_verify(args)
        if args.cmd == "verify-plm":
            return _cmd_verify_plm(args)
        if args.cmd == "solve":
            return _cmd_solve(args)
        if args.cmd == "repro":
            return _cmd_repro(args)
        return 2
    except (SystemExit2, ExcludedParameter, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # verification machinery failure: report, exit 1
        print(f"verification error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
