"""Gauss map, sigma-model residuals, instantons and topological quadratures.

Area-form convention: ``dz ^ dzbar = -2i dx ^ dy``.  Under it the charge
density ``(1/4pi) (n, dn x dbar n) dz^dzbar`` equals ``(1/4pi) n . (n_x x n_y)
dx dy``, so the instanton built from ``rho(z) = z`` has charge ``+1`` with
the normal of :func:`cmcsurf.weierstrass.normal_from_spinors`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .cgrid import Field, GridChart, ResidualReport, ResidualStat, Vec3Field, d_dbar, wirtinger_d, wirtinger_dbar
from .decouple import continued_sqrt
from .errors import BadParameter, NotUnit, PoleOnGrid
from .rational import RationalMap
from .weierstrass import Q_FLOOR_REL, SpinorData, normal_from_spinors

POLE_FLOOR_REL = 1e-8
UNIT_TOL = 1e-3
AREA_FORM = -2j  # dz ^ dzbar in units of dx ^ dy


@dataclass(frozen=True)
class GaussMapField:
    rho: Field
    pole_mask: np.ndarray
    stereo_residual: Optional[ResidualStat] = None

    @property
    def chart(self) -> GridChart:
        return self.rho.chart

    @classmethod
    def from_field(cls, rho: Field) -> "GaussMapField":
        return cls(rho, ~rho.mask)


@dataclass(frozen=True)
class CPOneField:
    N1: Field
    N2: Field
    k: Field


def gauss_map(s: SpinorData, pole_floor_rel: float = POLE_FLOOR_REL) -> GaussMapField:
    """``rho = i conj(psi1) / psi2``, masked where ``|psi2|`` is below the pole floor.

    The stereographic image ``(n1 + i n2) / (1 - n3)`` of the normal is
    evaluated alongside and their difference stored as ``stereo_residual``.
    """
    floor = pole_floor_rel * s.psi2.max_abs()
    poles = np.abs(s.psi2.values) < floor
    rho = (1j * s.psi1.conj() / s.psi2).restrict(~poles)
    n = normal_from_spinors(s)
    n1, n2, n3 = n.components
    stereo = ((n1 + 1j * n2) / (1.0 - n3)).restrict(~poles)
    stat = ResidualStat.of("gauss_map_stereographic", rho - stereo)
    return GaussMapField(rho, poles | ~rho.mask, stat)


def _as_rho(rho) -> Field:
    return rho.rho if isinstance(rho, GaussMapField) else rho


def sigma_field(rho) -> Field:
    rho = _as_rho(rho)
    d, db = wirtinger_d(rho), wirtinger_dbar(rho)
    return d_dbar(rho) - 2.0 * rho.conj() * d * db / (1.0 + rho.abs() ** 2)


def sigma_residual(rho) -> ResidualStat:
    """Residual of the CP1 sigma model ``d dbar rho - 2 conj(rho) d rho dbar rho / (1 + |rho|^2)``."""
    return ResidualStat.of("sigma_model", sigma_field(rho))


def general_H_residual(rho, H: Union[Field, float]) -> ResidualStat:
    """Residual of the Gauss-map equation for variable mean curvature."""
    rho = _as_rho(rho)
    if not isinstance(H, Field):
        H = Field.constant(rho.chart, float(H))
    res = sigma_field(rho) * H - wirtinger_d(H) * wirtinger_dbar(rho)
    return ResidualStat.of("gauss_map_general_H", res)


def _unit_deviation(n: Vec3Field) -> float:
    return (n.norm() - 1.0).max_abs()


def so3_residual(n: Vec3Field) -> ResidualReport:
    dev = _unit_deviation(n)
    if dev > UNIT_TOL:
        raise NotUnit(f"max ||n| - 1| = {dev:.3e} exceeds {UNIT_TOL}")
    res = d_dbar(n) + wirtinger_d(n).dot(wirtinger_dbar(n)) * n
    report = ResidualReport()
    report.add(ResidualStat.of("so3_sigma_model", res))
    report.add(ResidualStat.of("so3_unit", n.norm() - 1.0))
    return report


def qr_from_rho(rho, H: float = 1.0):
    """``Q = (2/H) d rho d conj(rho) / (1 + |rho|^2)^2`` and ``R = |d conj(rho) / d rho|``.

    ``R`` is masked where ``d rho`` vanishes.
    """
    rho = _as_rho(rho)
    d = wirtinger_d(rho)
    dc = wirtinger_d(rho.conj())
    Q = (2.0 / H) * d * dc / (1.0 + rho.abs() ** 2) ** 2
    scale = max(d.max_abs(), dc.max_abs())
    small = np.abs(d.values) <= POLE_FLOOR_REL * scale if scale > 0 else np.ones(rho.chart.shape, bool)
    R = (dc / d).abs().restrict(~small)
    return Q, R


def spinors_from_rho(rho, H: Union[Field, float] = 1.0, strict: bool = True,
                     d_conj: Optional[Field] = None) -> SpinorData:
    """Weierstrass data with prescribed Gauss map and mean curvature.

    The root ``sqrt(i d conj(rho))`` is branch-continued; the companion root
    ``sqrt(i dbar rho)`` is taken as ``i * conj`` of it, the choice that makes
    ``gauss_map`` return ``rho`` itself.  ``d_conj`` may supply ``d conj(rho)``
    exactly; otherwise it is differenced on the grid.
    """
    rho = _as_rho(rho)
    chart = rho.chart
    if not isinstance(H, Field):
        H = Field.constant(chart, float(H))
    dc = wirtinger_d(rho.conj()) if d_conj is None else d_conj
    s2, jumps = continued_sqrt(1j * dc, strict=strict)
    s1 = 1j * s2.conj()
    denom = (1.0 + rho.abs() ** 2) * H.sqrt()
    psi1 = rho.conj() * s1 / denom
    psi2 = s2 / denom
    p = (dc.abs() / (1.0 + rho.abs() ** 2)).real
    return SpinorData(psi1, psi2, p, meta={"generator": "from_rho", "branch_jumps": jumps})


def instanton(rmap: RationalMap, chart: GridChart, domain_mask=None, strict_branch: bool = False) -> SpinorData:
    """Instanton data for a rational ``rho(z)``; the surface is a round unit sphere.

    ``psi1 = rho sqrt(dbar conj(rho)) / (1+|rho|^2)``, ``psi2 = sqrt(d rho) / (1+|rho|^2)``,
    ``p = |d rho| / (1+|rho|^2)``, with ``d rho`` from the exact derivative of
    the map.  Samples within one cell of a pole are masked; a pole sitting
    exactly on an unmasked sample raises :class:`PoleOnGrid`.
    """
    z = chart.z
    mask = _pole_free_mask(rmap, chart, domain_mask)
    rho0 = Field(chart, rmap(z), mask)
    drho = Field(chart, rmap.derivative()(z), mask)
    w, jumps = continued_sqrt(drho, strict=strict_branch)
    denom = 1.0 + rho0.abs() ** 2
    psi1 = rho0 * w.conj() / denom
    psi2 = w / denom
    p = (drho.abs() / denom).real
    hopf = Field(chart, np.zeros(chart.shape, complex), mask)
    meta = {"generator": "instanton", "rho": rmap.to_text(), "branch_jumps": jumps}
    return SpinorData(psi1, psi2, p, hopf=hopf, meta=meta)


def from_rational(rmap: RationalMap, chart: GridChart, H: float = 1.0, domain_mask=None) -> SpinorData:
    """Spinors for the Gauss map ``rho = conj(f(z))`` of a rational ``f``.

    The conjugate is what makes the conversion formulas non-degenerate: they
    need ``d conj(rho) = f'(z)`` to be nonzero.  ``f = z`` gives the same
    surface as the instanton built from ``rho0 = z``.
    """
    H = float(H)
    if not np.isfinite(H) or H <= 0:
        raise BadParameter(f"H must be positive, got {H!r}")
    z = chart.z
    mask = _pole_free_mask(rmap, chart, domain_mask)
    rho = Field(chart, np.conj(rmap(z)), mask)
    dc = Field(chart, rmap.derivative()(z), mask)
    s = spinors_from_rho(rho, H, strict=False, d_conj=dc)
    meta = dict(s.meta, generator="from_rho", rho=f"conj({rmap.to_text()})", H=H)
    return replace(s, meta=meta)


def _pole_free_mask(rmap: RationalMap, chart: GridChart, domain_mask=None) -> np.ndarray:
    """Samples at least one cell away from every pole of ``rmap``."""
    z = chart.z
    mask = np.ones(chart.shape, bool) if domain_mask is None else np.asarray(domain_mask, bool).copy()
    for pole in rmap.poles():
        dist = np.abs(z - pole)
        if np.any(mask & (dist <= 1e-9 * chart.h)):
            raise PoleOnGrid(f"pole {pole:.6g} coincides with a grid sample")
        mask &= dist >= chart.h
    return mask


def disk_mask(chart: GridChart, radius: float, center: complex = 0j) -> np.ndarray:
    return np.abs(chart.z - center) <= radius


def _trapezoid(f: Field) -> float:
    chart = f.chart
    wx = np.full(chart.nx, chart.hx)
    wx[[0, -1]] *= 0.5
    wy = np.full(chart.ny, chart.hy)
    wy[[0, -1]] *= 0.5
    w = np.outer(wx, wy)
    return float(np.sum(np.where(f.mask, f.values.real * w, 0.0)))


def _complex_trapezoid(f: Field) -> complex:
    return complex(_trapezoid(f.real), _trapezoid(f.imag))


def charge_density(n: Vec3Field) -> Field:
    """``(1/4pi) (n, dn x dbar n)`` times the area-form factor, as a real density in ``dx dy``."""
    trip = n.dot(wirtinger_d(n).cross(wirtinger_dbar(n)))
    return (trip * (AREA_FORM / (4 * np.pi))).real


def curvature_density(q: Field) -> Field:
    """``(1/2pi i) d dbar ln q`` times the area-form factor, in ``dx dy``."""
    return (d_dbar(q.log()) * (AREA_FORM / (2j * np.pi))).real


def topological_charge(n: Vec3Field) -> float:
    dev = _unit_deviation(n)
    if dev > UNIT_TOL:
        raise NotUnit(f"max ||n| - 1| = {dev:.3e} exceeds {UNIT_TOL}")
    return _trapezoid(charge_density(n))


def charge_identity_residual(n: Vec3Field, q: Field) -> ResidualReport:
    """Compare the two charge densities pointwise and as integrals over a common mask."""
    a = charge_density(n)
    b = curvature_density(q)
    common = a.mask & b.mask
    a, b = a.restrict(common), b.restrict(common)
    report = ResidualReport()
    report.add(ResidualStat.of("charge_density", a - b))
    ia, ib = _trapezoid(a), _trapezoid(b)
    report.add(ResidualStat("charge_integral", abs(ia - ib), abs(ia - ib), n.chart.h, 1))
    report.notes.update({"charge_normal": ia, "charge_curvature": ib,
                         "area_form": "dz^dzbar = -2i dx^dy"})
    return report


@dataclass(frozen=True)
class EnergyReport:
    """Energy quadratures of a Gauss map.

    ``printed`` integrates ``d rho dbar rho / (1 + |rho|^2)`` against
    ``dz ^ dzbar`` exactly as written; it vanishes for (anti)holomorphic maps.
    ``squared`` uses the same numerator over ``(1 + |rho|^2)**2``.
    ``dirichlet`` is ``int 4 (|d rho|^2 + |dbar rho|^2) / (1 + |rho|^2)^2 dx dy``,
    which equals ``4 pi |degree|`` for (anti)instantons on the whole plane.
    """

    printed: complex
    squared: complex
    dirichlet: float
    notes: dict = field(default_factory=dict)


def energy(rho) -> EnergyReport:
    rho = _as_rho(rho)
    d, db = wirtinger_d(rho), wirtinger_dbar(rho)
    w = 1.0 + rho.abs() ** 2
    printed = _complex_trapezoid(d * db / w * AREA_FORM)
    squared = _complex_trapezoid(d * db / (w * w) * AREA_FORM)
    dirichlet = _trapezoid((4.0 * (d.abs() ** 2 + db.abs() ** 2) / (w * w)).real)
    notes = {"area_form": "dz^dzbar = -2i dx^dy",
             "printed_density": "d rho dbar rho / (1 + |rho|^2)"}
    return EnergyReport(printed, squared, dirichlet, notes)


def cp1_field(s: SpinorData, q_floor_rel: float = Q_FLOOR_REL) -> CPOneField:
    q = s.q()
    q = q.restrict(q.values >= q_floor_rel * max(q.max_abs(), 1e-300))
    sq = q.sqrt()
    N1, N2 = s.psi1 / sq, s.psi2.conj() / sq
    dN = (wirtinger_d(N1), wirtinger_d(N2))
    dbN = (wirtinger_dbar(N1), wirtinger_dbar(N2))
    Nb = (N1.conj(), N2.conj())
    dNb = (wirtinger_d(Nb[0]), wirtinger_d(Nb[1]))
    dbNb = (wirtinger_dbar(Nb[0]), wirtinger_dbar(Nb[1]))
    N = (N1, N2)

    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1]

    k = -2.0 * dot(Nb, dN) * dot(N, dbNb) + 0.5 * dot(dN, dbNb) + 0.5 * dot(dbN, dNb)
    return CPOneField(N1, N2, k)


def cp1_residual(s: SpinorData) -> ResidualReport:
    """Residuals of the CP1 model for ``N = (psi1, conj(psi2)) / sqrt(q)``."""
    f = cp1_field(s)
    N = (f.N1, f.N2)
    Nb = (f.N1.conj(), f.N2.conj())
    dN = (wirtinger_d(f.N1), wirtinger_d(f.N2))
    dbN = (wirtinger_dbar(f.N1), wirtinger_dbar(f.N2))
    a = Nb[0] * dbN[0] + Nb[1] * dbN[1]
    b = Nb[0] * dN[0] + Nb[1] * dN[1]
    comps = [d_dbar(N[i]) - a * dN[i] - b * dbN[i] + f.k * N[i] for i in range(2)]
    mag = (comps[0].abs() ** 2 + comps[1].abs() ** 2).sqrt()
    report = ResidualReport()
    report.add(ResidualStat.of("cp1_norm", f.N1.abs() ** 2 + f.N2.abs() ** 2 - 1.0))
    report.add(ResidualStat.of("cp1_equation", mag))
    report.notes["multiplier_sign"] = "d dbar N = (Nbar, dbar N) d N + (Nbar, d N) dbar N - k N"
    return report
