"""SU(2) symmetry, 2x2 linear problems and their zero-curvature residuals.

A connection pair ``(A, B)`` stands for the overdetermined system
``d Psi = A Psi``, ``dbar Psi = B Psi``; it is compatible when
``dbar A - d B + [A, B] = 0``.  Matrix fields are kept as 2x2 nested tuples
of scalar fields so the ordinary grid stencils apply entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .cgrid import Field, ResidualStat, wirtinger_d, wirtinger_dbar
from .errors import BadParameter, LabelMismatch, NotCMC1, NotUnitary, SingularParameter
from .weierstrass import GeometryBundle, SpinorData, derive_geometry

SYSTEMS = ("closed", "spectral", "sl2", "mu")
UNIT_TOL = 1e-12
CMC1_TOL = 1e-8


@dataclass(frozen=True)
class SU2Element:
    alpha: complex
    beta: complex

    def __post_init__(self):
        dev = abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0)
        if dev > 10 * UNIT_TOL:
            raise NotUnitary(f"|alpha|^2 + |beta|^2 deviates from 1 by {dev:.2e}")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SU2Element":
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        return cls(complex(v[0], v[1]), complex(v[2], v[3]))

    @classmethod
    def identity(cls) -> "SU2Element":
        return cls(1.0 + 0j, 0j)


def su2_transform(s: SpinorData, g: SU2Element) -> SpinorData:
    """``zeta1 = a psi1 + b conj(psi2)``, ``zeta2 = -b conj(psi1) + a psi2``; ``p`` unchanged."""
    a, b = g.alpha, g.beta
    z1 = a * s.psi1 + b * s.psi2.conj()
    z2 = -b * s.psi1.conj() + a * s.psi2
    return replace(s, psi1=z1, psi2=z2)


Matrix = tuple[tuple[Field, Field], tuple[Field, Field]]


@dataclass(frozen=True)
class ConnectionPair:
    A: Matrix
    B: Matrix
    label: str
    parameter: complex = 1.0

    def trace(self) -> tuple[Field, Field]:
        return self.A[0][0] + self.A[1][1], self.B[0][0] + self.B[1][1]


def _check_cmc1(g: GeometryBundle) -> None:
    dev = (g.H - 1.0).max_abs()
    if dev > CMC1_TOL:
        raise NotCMC1(f"max |H - 1| = {dev:.3e}")


def _check_unit(lam: complex) -> None:
    if abs(abs(lam) - 1.0) > UNIT_TOL:
        raise BadParameter(f"spectral parameter must have modulus 1, got |lambda| = {abs(lam)!r}")


def build_connection(g: GeometryBundle, system: str, parameter: complex = 1.0) -> ConnectionPair:
    """Coefficient matrices of the closed 2x2 system and its spectral deformations."""
    q, Q, H = g.q, g.Q, g.H
    Qc = Q.conj()
    zero = Field.constant(q.chart, 0j, q.mask)
    dq_q = wirtinger_d(q) / q
    dbq_q = wirtinger_dbar(q) / q
    lam = complex(parameter)
    if system == "closed":
        A = ((zero, q * H), (-1.0 * Q / (2.0 * q), dq_q))
        B = ((dbq_q, Qc / (2.0 * q)), (-1.0 * q * H, zero))
    elif system == "spectral":
        _check_unit(lam)
        _check_cmc1(g)
        A = ((zero, q + zero), (-lam * Q / (2.0 * q), dq_q))
        B = ((dbq_q, (1.0 / lam) * Qc / (2.0 * q)), (-1.0 * q + zero, zero))
    elif system == "sl2":
        _check_unit(lam)
        _check_cmc1(g)
        q2 = q * q
        A = ((zero, q2 + zero), (-lam * Q / (2.0 * q2), zero))
        B = ((dbq_q, Qc / (2.0 * lam)), (zero - 1.0, -1.0 * dbq_q))
    else:
        raise BadParameter(f"unknown system {system!r}; expected one of closed, spectral, sl2")
    return ConnectionPair(A, B, system, lam)


def mu_connection(s: SpinorData, mu: complex, g: Optional[GeometryBundle] = None) -> ConnectionPair:
    """Lax pair in the spinors with spectral parameter ``mu`` (singular at ``mu = +-1``)."""
    mu = complex(mu)
    if abs(mu - 1) < 1e-12 or abs(mu + 1) < 1e-12:
        raise SingularParameter("mu = +1 and mu = -1 are poles of the Lax pair")
    g = derive_geometry(s) if g is None else g
    p1, p2 = s.psi1, s.psi2
    p1c, p2c = p1.conj(), p2.conj()
    q2 = g.q * g.q
    a = g.Q / (2.0 * q2)
    ac = g.Q.conj() / (2.0 * q2)
    ca, cb = 2.0 / (mu + 1.0), 2.0 / (mu - 1.0)
    A = ((ca * (-1.0 * p1c * p2 + a * p1 * p2c), ca * (-1.0 * p1c * p1c - a * p2c * p2c)),
         (ca * (p2 * p2 + a * p1 * p1), ca * (p1c * p2 - a * p1 * p2c)))
    B = ((cb * (-1.0 * p1 * p2c + ac * p1c * p2), cb * (p2c * p2c + ac * p1c * p1c)),
         (cb * (-1.0 * p1 * p1 - ac * p2 * p2), cb * (p1 * p2c - ac * p1c * p2)))
    return ConnectionPair(A, B, "mu", mu)


def curvature(c: ConnectionPair) -> Matrix:
    A, B = c.A, c.B
    out = []
    for i in range(2):
        row = []
        for j in range(2):
            comm = sum((A[i][k] * B[k][j] - B[i][k] * A[k][j] for k in range(2)), start=0.0)
            row.append(wirtinger_dbar(A[i][j]) - wirtinger_d(B[i][j]) + comm)
        out.append(tuple(row))
    return tuple(out)


def _frobenius(m) -> Field:
    total = sum((e.abs() ** 2 for row in m for e in row), start=0.0)
    return total.sqrt()


def zero_curvature_residual(c: ConnectionPair) -> ResidualStat:
    """Max Frobenius norm of ``dbar A - d B + [A, B]``."""
    name = f"zero_curvature_{c.label}"
    return ResidualStat.of(name, _frobenius(curvature(c)))


def _linear_field(psi: tuple[Field, Field], c: ConnectionPair) -> Field:
    """Pointwise norm of ``(d psi - A psi, dbar psi - B psi)``."""
    A, B = c.A, c.B
    parts = []
    for i in range(2):
        parts.append(wirtinger_d(psi[i]) - (A[i][0] * psi[0] + A[i][1] * psi[1]))
        parts.append(wirtinger_dbar(psi[i]) - (B[i][0] * psi[0] + B[i][1] * psi[1]))
    return sum((p.abs() ** 2 for p in parts), start=0.0).sqrt()


def linear_problem_residual(s: SpinorData, c: ConnectionPair) -> ResidualStat:
    """How well the spinors themselves solve the closed linear system.

    Only meaningful for the closed system and for the spectral one at ``lambda = 1``.
    """
    if c.label == "spectral" and abs(c.parameter - 1.0) > UNIT_TOL:
        raise LabelMismatch("the spinors solve the spectral system only at lambda = 1")
    if c.label not in ("closed", "spectral"):
        raise LabelMismatch(f"linear residual is defined for closed/spectral, not {c.label!r}")
    return ResidualStat.of(f"linear_problem_{c.label}", _linear_field((s.psi1, s.psi2), c))


def gauge_check(s: SpinorData, g: Optional[GeometryBundle] = None, psi2_scale: float = 1.0) -> ResidualStat:
    """Gauge-transformed spinors ``(psi1, psi2 / q)`` against the SL(2) system at ``lambda = 1``.

    The residual also carries ``d ln q - d ln(|psi1|^2 + |psi2|^2)``, which
    pins the constant in ``q = c (|psi1|^2 + |psi2|^2)`` to ``c = 1``.
    ``psi2_scale`` rescales the second gauged component (negative controls).
    """
    g = derive_geometry(s) if g is None else g
    _check_cmc1(g)
    c = build_connection(g, "sl2", 1.0)
    gauged = (s.psi1.restrict(g.q.mask), psi2_scale * s.psi2 / g.q)
    direct = (s.psi1.abs() ** 2 + s.psi2.abs() ** 2).log()
    dlog = wirtinger_d(g.q.log()) - wirtinger_d(direct)
    return ResidualStat.of("gauge", _linear_field(gauged, c) + dlog.abs())


def mu_lax_residual(s: SpinorData, mu: complex, g: Optional[GeometryBundle] = None) -> ResidualStat:
    c = mu_connection(s, mu, g)
    stat = zero_curvature_residual(c)
    return replace(stat, name=f"mu_lax({mu})")
