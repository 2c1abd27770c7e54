"""Reciprocal change of variables ``d eta = sqrt(Q) dz`` and the decoupled system.

With ``R = 2 q**2 / |Q|`` the CMC-1 equations turn into the elliptic
sinh-Gordon equation ``(ln R)_{eta etabar} = 1/R - R`` plus holomorphy of
``Q``.  The sinh-Gordon residual is evaluated in z-coordinates: because
``dbar Q = 0``, ``d_eta d_etabar = |Q|**-1 d dbar`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .cgrid import Field, ResidualReport, ResidualStat, d_dbar, holomorphy_residual, sweep_antiderivative, wirtinger_d, wirtinger_dbar
from .errors import BranchAmbiguity, NotCMC1, NotHolomorphic, Umbilic
from .weierstrass import GeometryBundle

Q_UMB_REL = 1e-6
_NEIGHBOURS = ((0, -1), (-1, 0), (0, 1), (1, 0))


def continued_sqrt(f: Field, strict: bool = True):
    """Square root chosen by continuation along a row-major sweep.

    Each connected component of the mask is seeded with the principal root at
    its first sample; every later sample takes the root closer to an already
    assigned neighbour (left, then up, then right, then down).  A step is
    continuous when ``|s_new - s_ref| < |s_ref|``.

    Returns ``(root, jumps)`` where ``jumps`` counts neighbour pairs violating
    the continuity criterion; with ``strict=True`` any violation raises
    :class:`BranchAmbiguity`.
    """
    vals = f.values.astype(complex)
    mask = f.mask
    nx, ny = vals.shape
    principal = np.sqrt(vals)
    out = np.zeros_like(vals)
    assigned = np.zeros_like(mask)
    scale = np.max(np.abs(principal[mask]), initial=0.0)
    tiny = 1e-300 if scale == 0 else 1e-12 * scale

    labels, ncomp = ndimage.label(mask)
    seeded = np.zeros(ncomp + 1, dtype=bool)

    def pick(i, j):
        s = principal[i, j]
        for di, dj in _NEIGHBOURS:
            a, b = i + di, j + dj
            if 0 <= a < nx and 0 <= b < ny and assigned[a, b] and abs(out[a, b]) > tiny:
                ref = out[a, b]
                d_plus, d_minus = abs(s - ref), abs(s + ref)
                if min(d_plus, d_minus) >= abs(ref) and strict and abs(s) > tiny:
                    raise BranchAmbiguity(
                        f"no continuous square root at index {(i, j)}: both roots are at least |ref| away")
                return s if d_plus <= d_minus else -s
        return None

    pending = True
    while pending:
        pending = False
        progress = False
        for i in range(nx):
            for j in range(ny):
                if not mask[i, j] or assigned[i, j]:
                    continue
                choice = pick(i, j)
                if choice is None:
                    lab = labels[i, j]
                    if seeded[lab] and abs(principal[i, j]) > tiny:
                        pending = True
                        continue
                    seeded[lab] = True
                    choice = principal[i, j]
                out[i, j] = choice
                assigned[i, j] = True
                progress = True
        if pending and not progress:
            break

    jumps = _count_jumps(out, assigned, tiny)
    if strict and jumps:
        raise BranchAmbiguity(f"{jumps} neighbour pairs change branch; the root winds around zero in the domain")
    return Field(f.chart, out, assigned), jumps


def _count_jumps(s: np.ndarray, ok: np.ndarray, tiny: float) -> int:
    count = 0
    for axis in (0, 1):
        a = np.take(s, range(s.shape[axis] - 1), axis=axis)
        b = np.take(s, range(1, s.shape[axis]), axis=axis)
        oa = np.take(ok, range(s.shape[axis] - 1), axis=axis)
        ob = np.take(ok, range(1, s.shape[axis]), axis=axis)
        live = oa & ob & (np.abs(a) > tiny) & (np.abs(b) > tiny)
        count += int(np.sum(live & (np.abs(a - b) >= np.abs(a))))
    return count


def umbilic_mask(Q: Field, rel: float = Q_UMB_REL, atol: float = 0.0) -> np.ndarray:
    """True where ``|Q|`` is below ``max(rel * max|Q|, atol)`` (or Q is masked)."""
    mag = np.abs(Q.values)
    thresh = max(rel * Q.max_abs(), atol)
    return ~Q.mask | (mag <= thresh)


def branch_sqrt(Q: Field, rel: float = Q_UMB_REL, atol: float = 0.0) -> Field:
    umb = umbilic_mask(Q, rel, atol)
    if np.all(umb):
        raise Umbilic("the Hopf differential vanishes on the whole domain (Q = 0)")
    root, _ = continued_sqrt(Q.restrict(~umb), strict=True)
    return root


@dataclass(frozen=True)
class DecoupledData:
    eta: Field
    R: Field
    sqrtQ: Field
    umbilic: np.ndarray
    base: tuple[int, int]
    loop_defect: float
    meta: dict = field(default_factory=dict)


def build_eta(Q: Field, base: Optional[Sequence[int]] = None, tol_holo: Optional[float] = None,
              atol: float = 0.0):
    """Coordinate map ``eta`` with ``d eta = sqrt(Q) dz`` and ``eta(base) = 0``.

    Returns ``(eta, sqrtQ, loop_defect)``.
    """
    if tol_holo is not None:
        stat = holomorphy_residual(Q)
        if stat.max > tol_holo:
            raise NotHolomorphic(f"max |dbar Q| = {stat.max:.3e} exceeds {tol_holo:.3e}")
    sq = branch_sqrt(Q, atol=atol)
    base = _pick_base(sq, base)
    eta, defect = sweep_antiderivative(sq, Field(Q.chart, np.zeros(Q.chart.shape, complex), sq.mask), base)
    return eta, sq, defect


def _pick_base(f: Field, base):
    if base is not None:
        return (int(base[0]), int(base[1]))
    c = f.chart.center
    if f.mask[c]:
        return c
    idx = np.argwhere(f.mask)
    d = np.sum((idx - np.array(c)) ** 2, axis=1)
    return tuple(int(v) for v in idx[np.argmin(d)])


def build_R(g: GeometryBundle, rel: float = Q_UMB_REL, atol: float = 0.0) -> Field:
    """``R = 2 q**2 / |Q|`` with umbilic samples masked."""
    umb = umbilic_mask(g.Q, rel, atol)
    return (2.0 * g.q * g.q / g.Q.abs()).restrict(~umb)


def decouple(g: GeometryBundle, base=None, tol_holo: Optional[float] = None, atol: float = 0.0) -> DecoupledData:
    eta, sq, defect = build_eta(g.Q, base, tol_holo, atol)
    R = build_R(g, atol=atol)
    umb = umbilic_mask(g.Q, atol=atol)
    used_base = _pick_base(sq, base)
    meta = {"branch_rule": "row-major continuation, principal root at each component seed",
            "base": list(used_base)}
    return DecoupledData(eta=eta, R=R, sqrtQ=sq, umbilic=umb, base=used_base, loop_defect=defect, meta=meta)


def shgordon_field(g: GeometryBundle, d: DecoupledData) -> Field:
    absQ = g.Q.abs().restrict(~d.umbilic)
    return d_dbar(d.R.log()) / absQ - 1.0 / d.R + d.R


def shgordon_residual(g: GeometryBundle, d: DecoupledData) -> ResidualStat:
    """Max of ``|Q|**-1 d dbar ln R - 1/R + R``."""
    return ResidualStat.of("sinh_gordon", shgordon_field(g, d))


def _require_cmc1(g: GeometryBundle, tol: float) -> None:
    dev = (g.H - 1.0).max_abs()
    if dev > tol:
        raise NotCMC1(f"max |H - 1| = {dev:.3e} exceeds {tol:.1e}")


def liouville_field(g: GeometryBundle) -> Field:
    q2 = g.q * g.q
    return d_dbar(q2.log()) - 0.5 * g.Q * g.Q.conj() / q2 + 2.0 * q2


def cmc1_system_residual(g: GeometryBundle, tol_H: float = 1e-8) -> ResidualReport:
    """Residuals of the CMC-1 system in ``(q, Q)``: Liouville-type equation and holomorphy."""
    _require_cmc1(g, tol_H)
    report = ResidualReport()
    report.add(ResidualStat.of("liouville", liouville_field(g)))
    report.add(ResidualStat.of("dbar_Q", wirtinger_dbar(g.Q)))
    report.add(ResidualStat.of("d_Qbar", wirtinger_d(g.Q.conj())))
    return report


def decoupling_consistency(g: GeometryBundle, d: DecoupledData) -> ResidualStat:
    """Difference between the sinh-Gordon residual and ``liouville / |Q|``.

    The two agree up to ``|Q|**-1 d dbar ln|Q|``, which vanishes for a
    holomorphic nonvanishing ``Q``.
    """
    absQ = g.Q.abs().restrict(~d.umbilic)
    return ResidualStat.of("decoupling_consistency", shgordon_field(g, d) - liouville_field(g) / absQ)
