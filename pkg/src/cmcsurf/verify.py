"""Run every applicable identity check on a set of spinor data.

Each check is compared with ``C * h**order`` where ``C`` comes from the
tolerance profile and ``h`` is the coarsest grid spacing.  Checks that do not
apply to the data (for example the sinh-Gordon equation on an umbilic
surface) are reported as skipped with a reason and do not affect the verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cgrid import Field, ResidualStat
from .decouple import cmc1_system_residual, decouple, decoupling_consistency, shgordon_residual, umbilic_mask
from .errors import BranchAmbiguity, CMCError, ImaginaryResidueTooLarge
from .lax import (build_connection, gauge_check, linear_problem_residual, mu_lax_residual,
                  zero_curvature_residual)
from .sigma import (charge_identity_residual, cp1_residual, gauss_map, general_H_residual, qr_from_rho,
                    sigma_residual, so3_residual, spinors_from_rho)
from .weierstrass import (SpinorData, derive_geometry, dirac_residual, frame_residual, gauss_codazzi_residual,
                          hopf_from_spinors, normal_equation_residual, scalar_product_residuals,
                          with_integrated_surface)

PROFILES = {"strict": 50.0, "loose": 500.0}
LAMBDAS = (1.0 + 0j, 1j, complex(np.exp(1j * np.pi / 4)))
MUS = (2.0 + 0j, 3j)
CMC1_TOL = 1e-8
CONST_H_TOL = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    identity: str
    max: float
    mean: float
    h: float
    order: int
    tolerance: float
    passed: bool
    count: int = 0
    skipped: Optional[str] = None

    def to_dict(self) -> dict:
        d = {"name": self.name, "identity": self.identity, "h": self.h, "order": self.order}
        if self.skipped is not None:
            d.update(status="skipped", reason=self.skipped)
        else:
            d.update(status="pass" if self.passed else "fail", max=self.max, mean=self.mean,
                     tolerance=self.tolerance, count=self.count)
        return d


@dataclass
class VerificationReport:
    profile: str
    C: float
    h: float
    checks: list[CheckResult] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.skipped is None)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.skipped is None and not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]

    def to_dict(self) -> dict:
        return {
            "verdict": "pass" if self.passed else "fail",
            "profile": self.profile,
            "C": self.C,
            "h": self.h,
            "checks": [c.to_dict() for c in self.checks],
            "notes": self.notes,
        }

    def table(self) -> str:
        lines = [f"profile={self.profile}  C={self.C:g}  h={self.h:.6g}",
                 f"{'check':<34} {'max':>11} {'tolerance':>11}  status"]
        for c in self.checks:
            if c.skipped is not None:
                lines.append(f"{c.name:<34} {'-':>11} {'-':>11}  skipped ({c.skipped})")
            else:
                status = "pass" if c.passed else "FAIL"
                lines.append(f"{c.name:<34} {c.max:>11.3e} {c.tolerance:>11.3e}  {status}")
        lines.append(f"verdict: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines)


class _Collector:
    def __init__(self, report: VerificationReport):
        self.report = report

    def tol(self, order: int) -> float:
        return self.report.C * self.report.h ** order

    def add(self, stat: ResidualStat, identity: str, order: int = 2, name: Optional[str] = None) -> None:
        tol = self.tol(order)
        ok = math.isfinite(stat.max) and math.isfinite(stat.mean) and stat.max <= tol
        self.report.checks.append(CheckResult(name or stat.name, identity, stat.max, stat.mean, stat.h,
                                              order, tol, ok, stat.count))

    def add_all(self, report, identity: str, order: int = 2, prefix: str = "") -> None:
        for stat in report:
            self.add(stat, identity, order, prefix + stat.name)

    def skip(self, name: str, identity: str, reason: str, order: int = 2) -> None:
        self.report.checks.append(CheckResult(name, identity, math.nan, math.nan, self.report.h,
                                              order, self.tol(order), True, 0, reason))

    def fail(self, name: str, identity: str, reason: str, order: int = 2) -> None:
        self.report.checks.append(CheckResult(name, identity, math.inf, math.inf, self.report.h,
                                              order, self.tol(order), False, 0))
        self.report.notes.setdefault("errors", {})[name] = reason


def _diff_stat(name: str, a: Field, b: Field) -> ResidualStat:
    return ResidualStat.of(name, a - b)


def verify_spinors(s: SpinorData, profile: str = "strict", base=None) -> VerificationReport:
    """Full identity audit of ``s``; see the module docstring for the tolerance rule."""
    if profile not in PROFILES:
        raise ValueError(f"unknown tolerance profile {profile!r}")
    chart = s.chart
    report = VerificationReport(profile, PROFILES[profile], chart.h)
    out = _Collector(report)
    tol2 = out.tol(2)

    for st in dirac_residual(s):
        out.add(st, "Dirac system")
    g = derive_geometry(s)
    report.notes["hopf_source"] = g.hopf_source
    if g.hopf_source == "given":
        out.add(_diff_stat("hopf_consistency", g.Q, hopf_from_spinors(s).restrict(g.q.mask)),
                "closed-form Hopf field vs stencil")
    out.add_all(gauss_codazzi_residual(g), "Gauss-Codazzi equations")

    try:
        g = with_integrated_surface(g, s, base)
        report.notes["loop_defect"] = g.loop_defect
        out.add(ResidualStat("surface_loop_defect", g.loop_defect, g.loop_defect, chart.h, 1),
                "closedness of (dr, dbar r)")
    except ImaginaryResidueTooLarge as exc:
        out.fail("surface_integration", "surface reconstruction", str(exc))
    out.add_all(scalar_product_residuals(g, s), "frame scalar products")
    if g.r is not None:
        frame = frame_residual(g)
        report.notes["orientation"] = frame.notes["orientation"]
        out.add_all(frame, "moving-frame equations", order=1)
        out.add(normal_equation_residual(g), "normal equation", order=1)

    dev_h = (g.H - 1.0).max_abs()
    cmc1 = dev_h <= CMC1_TOL
    hvals = g.H.valid_values().real
    h_const = hvals.size > 0 and float(np.ptp(hvals)) <= CONST_H_TOL * max(1.0, float(np.abs(hvals).max()))
    report.notes["max_abs_H_minus_1"] = dev_h
    not_cmc = f"not CMC-1: max |H - 1| = {dev_h:.3e}"

    if cmc1:
        out.add_all(cmc1_system_residual(g, CMC1_TOL), "CMC-1 system in (q, Q)")
    else:
        out.skip("cmc1_system", "CMC-1 system in (q, Q)", not_cmc)

    umb = umbilic_mask(g.Q, atol=tol2)
    all_umbilic = bool(np.all(umb | ~g.q.mask))
    if not cmc1:
        out.skip("sinh_gordon", "sinh-Gordon equation", not_cmc)
    elif all_umbilic:
        out.skip("sinh_gordon", "sinh-Gordon equation", "umbilic: Q = 0")
    else:
        try:
            d = decouple(g, atol=tol2)
            out.add(shgordon_residual(g, d), "sinh-Gordon equation")
            out.add(decoupling_consistency(g, d), "sinh-Gordon vs CMC-1 system")
        except BranchAmbiguity as exc:
            out.skip("sinh_gordon", "sinh-Gordon equation", f"branch: {exc}")

    _gauss_map_checks(s, g, out, h_const, umb)

    try:
        out.add_all(so3_residual(g.n), "SO(3) sigma model", order=1)
    except CMCError as exc:
        out.fail("so3_sigma_model", "SO(3) sigma model", str(exc), order=1)
    out.add_all(cp1_residual(s), "CP1 sigma model with multiplier", order=1)

    out.add(zero_curvature_residual(build_connection(g, "closed")), "zero curvature, closed system")
    out.add(linear_problem_residual(s, build_connection(g, "closed")), "spinors solve closed system")
    if cmc1:
        for lam in LAMBDAS:
            tag = _fmt_param(lam)
            out.add(zero_curvature_residual(build_connection(g, "spectral", lam)),
                    "zero curvature, spectral system", name=f"zero_curvature_spectral({tag})")
            c = build_connection(g, "sl2", lam)
            out.add(zero_curvature_residual(c), "zero curvature, SL(2) system", name=f"zero_curvature_sl2({tag})")
            tr = c.trace()
            out.add(ResidualStat.of(f"sl2_trace({tag})", tr[0].abs() + tr[1].abs()), "SL(2) connection is trace-free")
        out.add(linear_problem_residual(s, build_connection(g, "spectral", 1.0)), "spinors solve spectral system")
        for mu in MUS:
            out.add(mu_lax_residual(s, mu, g), "zero curvature, mu Lax pair", name=f"mu_lax({_fmt_param(mu)})")
        out.add(gauge_check(s, g), "gauge-transformed spinors")
    else:
        for name in ("spectral_systems", "mu_lax", "gauge"):
            out.skip(name, "CMC-1 linear problems", not_cmc)

    try:
        ci = charge_identity_residual(g.n, g.q)
        out.add(ci["charge_density"], "charge density identity", order=1)
        report.notes["charge"] = {k: v for k, v in ci.notes.items()}
    except CMCError as exc:
        out.fail("charge_density", "charge density identity", str(exc), order=1)
    return report


def _gauss_map_checks(s: SpinorData, g, out: _Collector, h_const: bool, umb: np.ndarray) -> None:
    """Gauss-map identities on the chart ``|rho| <= 1`` and, for the sigma model, on ``|rho| > 1`` via ``1/conj(rho)``."""
    report = out.report
    gm = gauss_map(s)
    out.add(gm.stereo_residual, "Gauss map vs stereographic normal")
    rho = gm.rho
    near_mask = rho.mask & (np.abs(rho.values) <= 1.0)
    far_mask = rho.mask & ~near_mask
    near = rho.restrict(near_mask)
    far = (1.0 / rho.conj()).restrict(far_mask)
    report.notes["gauss_map_charts"] = {"near": int(near_mask.sum()), "far": int(far_mask.sum()),
                                        "rule": "|rho| <= 1 uses rho, |rho| > 1 uses 1/conj(rho)"}
    if near_mask.sum() == 0:
        out.skip("gauss_map_near_chart", "Gauss map identities", "no samples with |rho| <= 1")
        return
    out.add(general_H_residual(near, g.H), "Gauss map with variable H")
    if not h_const:
        out.skip("sigma_model", "CP1 sigma model", "mean curvature is not constant")
        return
    out.add(sigma_residual(near), "CP1 sigma model", name="sigma_model_near")
    if far_mask.any():
        out.add(sigma_residual(far), "CP1 sigma model", name="sigma_model_far")
    H = float(np.mean(g.H.valid_values().real))
    Q18, R18 = qr_from_rho(near, H)
    out.add(_diff_stat("hopf_from_gauss_map", Q18, g.Q), "Hopf field from the Gauss map")
    live = ~umb
    R_g = (2.0 * g.q * g.q / g.Q.abs()).restrict(live)
    if R18.restrict(live).mask.any() and R_g.mask.any():
        out.add(_diff_stat("R_from_gauss_map", R18.restrict(live), R_g), "R from the Gauss map")
    else:
        out.skip("R_from_gauss_map", "R from the Gauss map", "umbilic: Q = 0")
    try:
        s2 = spinors_from_rho(near, H, strict=False)
        g2 = derive_geometry(s2, hopf="stencil")
    except CMCError as exc:
        out.fail("round_trip", "spinors from the Gauss map", str(exc))
        return
    out.add(_diff_stat("round_trip_q", g2.q, g.q), "spinors from the Gauss map")
    out.add(_diff_stat("round_trip_abs_Q", g2.Q.abs(), g.Q.abs()), "spinors from the Gauss map")
    R2 = (2.0 * g2.q * g2.q / g2.Q.abs()).restrict(live)
    if R2.mask.any() and R_g.mask.any():
        out.add(_diff_stat("round_trip_R", R2, R_g), "spinors from the Gauss map")


def _fmt_param(v: complex) -> str:
    v = complex(v)
    return f"{v.real:.6g}{v.imag:+.6g}i"
