"""Command line interface: ``cmc <generate|verify|decouple|charge|export-mesh>``.

Exit codes: 0 success or pass, 1 verification failure, 2 input error.
Reports go to stdout as one JSON object; a readable table goes to stderr.

Rational expressions use ``z`` as the variable and the suffix ``i`` for
imaginary literals, e.g. ``"(z^2 - 1)/(z^2 + 1)"`` or ``"(1+2i)*z^3 - 0.5i"``.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .cgrid import GridChart, Vec3Field
from .decouple import decouple as run_decouple
from .decouple import shgordon_residual
from .errors import CMCError, InputError, MissingField, NotCMC1
from .families import cylinder
from .io import dataset_from_spinors, read_dataset, spinors_from_dataset, write_dataset, write_obj
from .parser import parse_rational
from .sigma import charge_identity_residual, disk_mask, from_rational, instanton, topological_charge
from .verify import PROFILES, verify_spinors
from .weierstrass import derive_geometry, integrate_surface

DEFAULT_DOMAINS = {"instanton": (-2.0, 2.0, -2.0, 2.0), "from_rho": (-2.0, 2.0, -2.0, 2.0),
                   "cylinder": (0.0, 3.0, 0.0, 3.0)}
CMC1_TOL = 1e-8


def _chart(args, kind: str) -> GridChart:
    x0, x1, y0, y1 = args.domain if args.domain is not None else DEFAULT_DOMAINS[kind]
    return GridChart(x0, x1, y0, y1, args.n, args.n)


def _emit(obj: dict, out_path: Optional[str] = None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, default=_json_default)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _base(args):
    return None if args.base is None else tuple(args.base)


# -- commands ---------------------------------------------------------------

def cmd_generate(args) -> int:
    kind = args.kind
    chart = _chart(args, kind)
    params = {"n": args.n, "domain": [chart.x_min, chart.x_max, chart.y_min, chart.y_max]}
    if kind in ("instanton", "from_rho"):
        if not args.rho:
            raise InputError(f"generate {kind} needs --rho")
        rmap = parse_rational(args.rho)
        params["rho"] = args.rho
        if kind == "instanton":
            s = instanton(rmap, chart)
        else:
            params["H"] = args.H
            s = from_rational(rmap, chart, args.H)
    else:
        params["r"] = args.r
        s = cylinder(args.r, chart)
    ds = dataset_from_spinors(s, {"parameters": params})
    write_dataset(ds, args.out)
    _emit({"wrote": args.out, "generator": kind, "shape": list(chart.shape),
           "unmasked": int(s.mask.sum())})
    return 0


def cmd_verify(args) -> int:
    s = spinors_from_dataset(read_dataset(args.input))
    report = verify_spinors(s, args.tolerance, _base(args))
    payload = report.to_dict()
    payload["input"] = args.input
    _emit(payload, args.out)
    print(report.table(), file=sys.stderr)
    return 0 if report.passed else 1


def cmd_decouple(args) -> int:
    ds = read_dataset(args.input)
    s = spinors_from_dataset(ds)
    g = derive_geometry(s)
    dev = (g.H - 1.0).max_abs()
    if dev > CMC1_TOL:
        raise NotCMC1(f"decoupling needs CMC-1 data; max |H - 1| = {dev:.3e}")
    C = PROFILES[args.tolerance]
    tol = C * s.chart.h ** 2
    d = run_decouple(g, base=_base(args), tol_holo=tol, atol=tol)
    shg = shgordon_residual(g, d)
    ds.add("eta", d.eta)
    ds.add("R", d.R)
    summary = {
        "base": list(d.base),
        "branch_rule": d.meta["branch_rule"],
        "loop_defect": d.loop_defect,
        "umbilic_samples": int(np.sum(d.umbilic & s.mask)),
        "sinh_gordon": shg.to_dict(),
        "sinh_gordon_tolerance": tol,
    }
    ds.provenance["decouple"] = summary
    write_dataset(ds, args.out)
    _emit({"wrote": args.out, **summary})
    return 0


def cmd_charge(args) -> int:
    ds = read_dataset(args.input)
    s = spinors_from_dataset(ds)
    if args.radius is not None:
        s = s.with_mask(disk_mask(s.chart, args.radius))
    g = derive_geometry(s)
    charge = topological_charge(g.n)
    ident = charge_identity_residual(g.n, g.q)
    tol = PROFILES[args.tolerance] * s.chart.h
    dens = ident["charge_density"]
    _emit({
        "charge": charge,
        "charge_from_log_q": ident.notes["charge_curvature"],
        "radius": args.radius,
        "identity": {**dens.to_dict(), "tolerance": tol, "status": "pass" if dens.max <= tol else "fail"},
        "conventions": ds.provenance.get("conventions", {}),
    })
    return 0


def cmd_export_mesh(args) -> int:
    ds = read_dataset(args.input)
    if ds.has("r"):
        r = ds.get("r")
        r = Vec3Field(ds.chart, r.values.real, r.mask)
        n = ds.get("n") if ds.has("n") else None
        if n is not None:
            n = Vec3Field(ds.chart, n.values.real, n.mask)
    else:
        if not ds.has("psi1"):
            raise MissingField("dataset has neither a surface 'r' nor spinor fields")
        s = spinors_from_dataset(ds)
        g = derive_geometry(s)
        r, _ = integrate_surface(s, _base(args))
        r, n = r.restrict(g.q.mask), g.n
    nv, nf = write_obj(args.out, r, n)
    _emit({"wrote": args.out, "vertices": nv, "faces": nf})
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmc", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tolerance=False, base=False):
        if tolerance:
            sp.add_argument("--tolerance", choices=sorted(PROFILES), default="strict",
                            help="residual bound C*h^k with C = 50 (strict) or 500 (loose)")
        if base:
            sp.add_argument("--base", type=int, nargs=2, metavar=("IX", "IY"),
                            help="base grid index for path integration (default: grid center)")

    g = sub.add_parser("generate", help="write Weierstrass data for an exact family")
    g.add_argument("kind", choices=["instanton", "cylinder", "from_rho"])
    g.add_argument("--rho", help="rational expression in z, e.g. \"z^2\" or \"(z-1)/(z+2i)\"")
    g.add_argument("--H", type=float, default=1.0, help="constant mean curvature for from_rho (default 1)")
    g.add_argument("--r", type=float, default=1.0, help="cylinder parameter r > 0 (default 1)")
    g.add_argument("--domain", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    g.add_argument("--n", type=int, default=129, help="samples per axis (default 129)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check every applicable identity; exit 1 on failure")
    v.add_argument("input")
    v.add_argument("--out", help="write the JSON report here instead of stdout")
    common(v, tolerance=True, base=True)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("decouple", help="add eta and R fields for CMC-1 data")
    d.add_argument("input")
    d.add_argument("--out", required=True)
    common(d, tolerance=True, base=True)
    d.set_defaults(func=cmd_decouple)

    c = sub.add_parser("charge", help="topological charge of the Gauss map")
    c.add_argument("input")
    c.add_argument("--radius", type=float, help="integrate over the disk |z| <= radius")
    common(c, tolerance=True)
    c.set_defaults(func=cmd_charge)

    m = sub.add_parser("export-mesh", help="write the reconstructed surface as OBJ")
    m.add_argument("input")
    m.add_argument("--out", required=True)
    common(m, base=True)
    m.set_defaults(func=cmd_export_mesh)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "n", None) is not None and args.n < 3:
        print("error: --n must be at least 3", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CMCError, OSError) as exc:
        kind = type(exc).__name__
        print(f"error: {kind}: {exc}", file=sys.stderr)
        _emit({"error": kind, "message": str(exc)})
        return 2


if __name__ == "__main__":
    sys.exit(main())
