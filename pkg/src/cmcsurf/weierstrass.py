"""Spinor Weierstrass data, derived surface geometry and its identity checks.

Given spinors ``psi1, psi2`` and a real potential ``p`` with

    d psi1 = p psi2,    dbar psi2 = -p psi1,

the surface has metric ``4 q**2 |dz|**2`` with ``q = |psi1|**2 + |psi2|**2``,
mean curvature ``H = p/q`` and Hopf differential
``Q = 2 (psi2 d conj(psi1) - conj(psi1) d psi2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .cgrid import (
    Field,
    GridChart,
    ResidualReport,
    ResidualStat,
    Vec3Field,
    d_dbar,
    sweep_antiderivative,
    wirtinger_d,
    wirtinger_dbar,
)
from .errors import EmptyGeometry, GridMismatch, ImaginaryResidueTooLarge, InputError

Q_FLOOR_REL = 1e-12
IMAG_RESIDUE_FACTOR = 100.0


@dataclass(frozen=True)
class SpinorData:
    """Generalized Weierstrass data on one chart.

    ``hopf`` optionally carries a Hopf field known in closed form by the
    generator; :func:`derive_geometry` prefers it over the stencil estimate
    unless told otherwise.
    """

    psi1: Field
    psi2: Field
    p: Field
    hopf: Optional[Field] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        chart = self.psi1.chart
        for f in (self.psi2, self.p) + ((self.hopf,) if self.hopf is not None else ()):
            if f.chart != chart:
                raise GridMismatch("spinor fields live on different charts")
        if np.iscomplexobj(self.p.values):
            if np.max(np.abs(self.p.values.imag), initial=0.0) > 1e-12 * max(1.0, self.p.max_abs()):
                raise InputError("potential p must be real")
        mask = self.psi1.mask & self.psi2.mask & self.p.mask
        object.__setattr__(self, "psi1", self.psi1.restrict(mask))
        object.__setattr__(self, "psi2", self.psi2.restrict(mask))
        object.__setattr__(self, "p", Field(chart, self.p.values.real, mask))
        if self.hopf is not None:
            object.__setattr__(self, "hopf", Field(chart, self.hopf.values.astype(complex), self.hopf.mask & mask))

    @property
    def chart(self) -> GridChart:
        return self.psi1.chart

    @property
    def mask(self) -> np.ndarray:
        return self.psi1.mask

    def q(self) -> Field:
        return (self.psi1.abs() ** 2 + self.psi2.abs() ** 2).real

    def is_cmc1(self, rtol: float = 1e-9) -> bool:
        """True when ``p == q`` at every unmasked sample (the H = 1 case)."""
        q = self.q()
        diff = (self.p - q).abs().max_abs()
        return diff <= rtol * max(1.0, q.max_abs())

    def with_mask(self, mask) -> "SpinorData":
        hopf = self.hopf.restrict(mask) if self.hopf is not None else None
        return replace(self, psi1=self.psi1.restrict(mask), psi2=self.psi2.restrict(mask),
                       p=self.p.restrict(mask), hopf=hopf)

    def scaled(self, c1: complex = 1.0, c2: complex = 1.0) -> "SpinorData":
        """Copy with the spinors multiplied by constants (used for negative controls)."""
        return replace(self, psi1=self.psi1 * c1, psi2=self.psi2 * c2)

    @classmethod
    def zeros(cls, chart: GridChart) -> "SpinorData":
        z = Field.constant(chart, 0j)
        return cls(z, z, Field.constant(chart, 0.0))


@dataclass(frozen=True)
class GeometryBundle:
    q: Field
    H: Field
    Q: Field
    n: Vec3Field
    K: Field
    I_coeff: Field
    II_dz2: Field
    II_mixed: Field
    dr: Vec3Field
    dbar_r: Vec3Field
    r: Optional[Vec3Field] = None
    hopf_source: str = "stencil"
    loop_defect: Optional[float] = None

    @property
    def chart(self) -> GridChart:
        return self.q.chart

    def with_surface(self, r: Vec3Field, loop_defect: Optional[float] = None) -> "GeometryBundle":
        return replace(self, r=r, loop_defect=loop_defect)


def dirac_residual(s: SpinorData):
    """Residuals of ``d psi1 - p psi2`` and ``dbar psi2 + p psi1``."""
    r1 = wirtinger_d(s.psi1) - s.p * s.psi2
    r2 = wirtinger_dbar(s.psi2) + s.p * s.psi1
    return ResidualStat.of("dirac_1", r1), ResidualStat.of("dirac_2", r2)


def closed_form_dr(s: SpinorData) -> tuple[Vec3Field, Vec3Field]:
    """The integrable pair ``(d r, dbar r)`` written in the spinors."""
    a, b = s.psi1, s.psi2
    ac, bc = a.conj(), b.conj()
    dr = Vec3Field.from_components([1j * (b * b + ac * ac), ac * ac - b * b, -2.0 * b * ac])
    dbr = Vec3Field.from_components([-1j * (bc * bc + a * a), a * a - bc * bc, -2.0 * a * bc])
    return dr, dbr


def normal_from_spinors(s: SpinorData, q: Optional[Field] = None) -> Vec3Field:
    a, b = s.psi1, s.psi2
    q = s.q() if q is None else q
    ab = a * b
    abc = ab.conj()
    comps = [(1j * (abc - ab)).real / q, (abc + ab).real / q, (a.abs() ** 2 - b.abs() ** 2) / q]
    return Vec3Field.from_components(comps)


def hopf_from_spinors(s: SpinorData) -> Field:
    """Stencil estimate of ``Q = 2 (psi2 d conj(psi1) - conj(psi1) d psi2)``."""
    return 2.0 * (s.psi2 * wirtinger_d(s.psi1.conj()) - s.psi1.conj() * wirtinger_d(s.psi2))


def derive_geometry(s: SpinorData, hopf: str = "auto", q_floor_rel: float = Q_FLOOR_REL) -> GeometryBundle:
    """Pointwise geometry of the surface carried by ``s``.

    ``hopf`` picks the Hopf field: ``"stencil"`` differentiates the spinors,
    ``"given"`` uses ``s.hopf`` and ``"auto"`` uses ``s.hopf`` when present.
    Samples with ``q < q_floor_rel * max(q)`` are masked as degenerate.
    """
    q = s.q()
    qmax = q.max_abs()
    if qmax == 0:
        raise EmptyGeometry("q vanishes identically")
    q = q.restrict(q.values >= q_floor_rel * qmax)
    if not q.mask.any():
        raise EmptyGeometry("every sample is below the q floor")

    if hopf == "given" or (hopf == "auto" and s.hopf is not None):
        if s.hopf is None:
            raise InputError("no closed-form Hopf field attached to the spinor data")
        Q, source = s.hopf.restrict(q.mask), "given"
    elif hopf in ("auto", "stencil"):
        Q, source = hopf_from_spinors(s).restrict(q.mask), "stencil"
    else:
        raise ValueError(f"unknown hopf mode {hopf!r}")

    H = s.p / q
    n = normal_from_spinors(s, q)
    K = -1.0 * d_dbar(q.log()) / (q * q)
    dr, dbr = closed_form_dr(s)
    q2 = q * q
    return GeometryBundle(
        q=q, H=H, Q=Q, n=n, K=K.real,
        I_coeff=4.0 * q2, II_dz2=Q, II_mixed=4.0 * H * q2,
        dr=dr.restrict(q.mask), dbar_r=dbr.restrict(q.mask),
        hopf_source=source,
    )


def integrate_surface(s: SpinorData, base: Optional[Sequence[int]] = None, order: str = "row"):
    """Radius vector from sweeping the closed-form ``(dr, dbar r)`` pair.

    Returns ``(r, loop_defect)`` with ``r(base) = 0``.  The sweep result is
    complex in floating point; the imaginary part is dropped only after
    checking it stays below ``100 h**2``.
    """
    chart = s.chart
    base = chart.center if base is None else tuple(base)
    dr, dbr = closed_form_dr(s)
    comps, defects, imag = [], [], 0.0
    for k in range(3):
        F, defect = sweep_antiderivative(dr.component(k), dbr.component(k), base, order=order)
        comps.append(F)
        defects.append(defect)
        imag = max(imag, F.imag.max_abs())
    limit = IMAG_RESIDUE_FACTOR * chart.h ** 2
    if imag > limit:
        raise ImaginaryResidueTooLarge(f"imaginary residue {imag:.3e} exceeds {limit:.3e}")
    r = Vec3Field.from_components([c.real for c in comps])
    return r, max(defects)


def with_integrated_surface(g: GeometryBundle, s: SpinorData, base=None) -> GeometryBundle:
    r, defect = integrate_surface(s, base)
    return g.with_surface(r.restrict(g.q.mask), defect)


def _need_surface(g: GeometryBundle) -> Vec3Field:
    if g.r is None:
        raise InputError("geometry has no integrated surface; call with_integrated_surface first")
    return g.r


def scalar_product_residuals(g: GeometryBundle, s: Optional[SpinorData] = None) -> ResidualReport:
    """Orthonormality relations of the frame ``(dr, dbar r, n)``.

    ``algebraic_*`` entries use the closed-form spinor expressions and hold
    to rounding; ``stencil_*`` entries differentiate the integrated surface.
    """
    report = ResidualReport()
    n, q = g.n, g.q
    dr, dbr = (closed_form_dr(s) if s is not None else (g.dr, g.dbar_r))

    def add(prefix, dr, dbr):
        report.add(ResidualStat.of(f"{prefix}_nn", n.dot(n) - 1.0))
        report.add(ResidualStat.of(f"{prefix}_n_dr", n.dot(dr)))
        report.add(ResidualStat.of(f"{prefix}_n_dbar_r", n.dot(dbr)))
        report.add(ResidualStat.of(f"{prefix}_dr_dr", dr.dot(dr)))
        report.add(ResidualStat.of(f"{prefix}_dbar_r_dbar_r", dbr.dot(dbr)))
        report.add(ResidualStat.of(f"{prefix}_dr_dbar_r", dr.dot(dbr) - 2.0 * q * q))

    add("algebraic", dr.restrict(q.mask), dbr.restrict(q.mask))
    if g.r is not None:
        add("stencil", wirtinger_d(g.r), wirtinger_dbar(g.r))
    return report


def gauss_codazzi_residual(g: GeometryBundle) -> ResidualReport:
    q, H, Q = g.q, g.H, g.Q
    q2 = q * q
    gauss = d_dbar((q2).log()) - 0.5 * Q * Q.conj() / q2 + 2.0 * H * H * q2
    codazzi = wirtinger_dbar(Q) - 2.0 * q2 * wirtinger_d(H)
    codazzi_bar = wirtinger_d(Q.conj()) - 2.0 * q2 * wirtinger_dbar(H)
    report = ResidualReport()
    report.add(ResidualStat.of("gauss", gauss))
    report.add(ResidualStat.of("codazzi", codazzi))
    report.add(ResidualStat.of("codazzi_bar", codazzi_bar))
    return report


def frame_from_surface(r: Vec3Field):
    """``(dr, dbar r, n)`` recomputed from the radius vector by stencils."""
    dr, dbr = wirtinger_d(r), wirtinger_dbar(r)
    c = dr.cross(dbr)
    n = (c * (1.0 / c.norm()) * (-1j)).real
    return dr, dbr, n


def frame_residual(g: GeometryBundle) -> ResidualReport:
    """Residuals of the six rows of the moving-frame equations.

    The normal is recomputed from the surface; both orientations are tried and
    ``notes["orientation"]`` records the one that fits (``+1`` means the
    normal ``-i dr x dbar r / |dr x dbar r|``).
    """
    r = _need_surface(g)
    dr, dbr, n0 = frame_from_surface(r)
    q, H, Q = g.q, g.H, g.Q
    Qc = Q.conj()
    q2 = q * q
    dq_q = wirtinger_d(q) / q
    dbq_q = wirtinger_dbar(q) / q

    def rows(n):
        return [
            wirtinger_d(dr) - (2.0 * dq_q * dr + Q * n),
            wirtinger_d(dbr) - 2.0 * H * q2 * n,
            wirtinger_d(n) - (-1.0 * H * dr - (Q / (2.0 * q2)) * dbr),
            wirtinger_dbar(dr) - 2.0 * H * q2 * n,
            wirtinger_dbar(dbr) - (2.0 * dbq_q * dbr + Qc * n),
            wirtinger_dbar(n) - (-1.0 * (Qc / (2.0 * q2)) * dr - H * dbr),
        ]

    best = None
    for sign in (+1, -1):
        stats = [ResidualStat.of(f"frame_row{k + 1}", v) for k, v in enumerate(rows(sign * n0))]
        worst = max(s.max for s in stats)
        if best is None or worst < best[0]:
            best = (worst, sign, stats)
    report = ResidualReport()
    for st in best[2]:
        report.add(st)
    report.notes["orientation"] = best[1]
    return report


def normal_equation_residual(g: GeometryBundle) -> ResidualStat:
    r = _need_surface(g)
    n = g.n
    dr, dbr = wirtinger_d(r), wirtinger_dbar(r)
    dn, dbn = wirtinger_d(n), wirtinger_dbar(n)
    res = d_dbar(n) + dn.dot(dbn) * n + wirtinger_dbar(g.H) * dr + wirtinger_d(g.H) * dbr
    return ResidualStat.of("normal_equation", res)


def fundamental_forms(g: GeometryBundle) -> dict[str, Field]:
    """Coefficients of ``I = 4q^2 dz dzbar`` and ``II = Q dz^2 + 4Hq^2 dz dzbar + conj(Q) dzbar^2``."""
    return {"I": g.I_coeff, "II_dz2": g.II_dz2, "II_mixed": g.II_mixed}
