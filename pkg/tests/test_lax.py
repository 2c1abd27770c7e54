from dataclasses import replace

import numpy as np
import pytest

from cmcsurf.errors import BadParameter, LabelMismatch, NotCMC1, NotUnitary, SingularParameter
from cmcsurf.lax import (
    SU2Element,
    build_connection,
    gauge_check,
    linear_problem_residual,
    mu_connection,
    mu_lax_residual,
    su2_transform,
    zero_curvature_residual,
)
from cmcsurf.weierstrass import derive_geometry

C = 50.0
LAMBDAS = (1.0, 1j, np.exp(1j * np.pi / 4))


def test_su2_element_validation(rng):
    with pytest.raises(NotUnitary):
        SU2Element(1.0, 0.5)
    g = SU2Element.random(rng)
    assert abs(abs(g.alpha) ** 2 + abs(g.beta) ** 2 - 1) < 1e-14


def test_identity_transform_is_noop(cyl):
    t = su2_transform(cyl, SU2Element.identity())
    assert (t.psi1 - cyl.psi1).max_abs() == 0 and (t.psi2 - cyl.psi2).max_abs() == 0


def test_cylinder_matrices_are_constant(cyl):
    c = build_connection(derive_geometry(cyl), "closed")
    for M in (c.A, c.B):
        for row in M:
            for e in row:
                v = e.valid_values()
                assert np.ptp(v.real) < 1e-12 and np.ptp(v.imag) < 1e-12
    assert complex(c.A[0][1].values[3, 3]) == pytest.approx(1.0)
    assert complex(c.A[1][0].values[3, 3]) == pytest.approx(-1.0)


def test_sl2_is_traceless_exactly(cyl, inst):
    for s in (cyl, inst):
        g = derive_geometry(s, hopf="stencil")
        for lam in LAMBDAS:
            ta, tb = build_connection(g, "sl2", lam).trace()
            assert ta.max_abs() == 0.0 and tb.max_abs() == 0.0


def test_spectral_at_one_equals_closed(inst):
    g = derive_geometry(inst, hopf="stencil")
    a, b = build_connection(g, "spectral", 1.0), build_connection(g, "closed")
    for Ma, Mb in ((a.A, b.A), (a.B, b.B)):
        for i in range(2):
            for j in range(2):
                assert (Ma[i][j] - Mb[i][j]).max_abs() < 1e-14


@pytest.mark.parametrize("system", ["spectral", "sl2"])
def test_zero_curvature_on_unit_circle(cyl, inst, system):
    for s in (cyl, inst):
        g = derive_geometry(s, hopf="stencil")
        for lam in LAMBDAS:
            assert zero_curvature_residual(build_connection(g, system, lam)).max <= C * s.chart.h ** 2


def test_closed_system_and_linear_problem(cyl, inst):
    for s in (cyl, inst):
        g = derive_geometry(s, hopf="stencil")
        c = build_connection(g, "closed")
        assert zero_curvature_residual(c).max <= C * s.chart.h ** 2
        assert linear_problem_residual(s, c).max <= C * s.chart.h ** 2


def test_mu_lax_and_gauge(cyl, inst):
    for s in (cyl, inst):
        g = derive_geometry(s, hopf="stencil")
        for mu in (2.0, 3j):
            assert mu_lax_residual(s, mu, g).max <= C * s.chart.h ** 2
        assert gauge_check(s, g).max <= C * s.chart.h ** 2


def test_perturbed_q_breaks_zero_curvature(cyl):
    g = derive_geometry(cyl, hopf="stencil")
    x = cyl.chart.z.real
    bad = replace(g, q=g.q * (1.0 + 0.1 * np.sin(x)))
    for system in ("closed", "spectral", "sl2"):
        assert zero_curvature_residual(build_connection(bad, system)).max > 1e-2


def test_negative_controls_for_mu_and_gauge(cyl):
    bad = replace(cyl, psi1=1.1 * cyl.psi1)
    assert mu_lax_residual(bad, 2.0).max > 1e-2
    assert gauge_check(cyl, psi2_scale=2.0).max > 1e-2


def test_parameter_errors(cyl):
    g = derive_geometry(cyl)
    with pytest.raises(BadParameter):
        build_connection(g, "spectral", 1.5)
    with pytest.raises(BadParameter):
        build_connection(g, "nonsense")
    with pytest.raises(SingularParameter):
        mu_connection(cyl, 1.0)
    with pytest.raises(SingularParameter):
        mu_connection(cyl, -1.0)
    with pytest.raises(LabelMismatch):
        linear_problem_residual(cyl, build_connection(g, "spectral", 1j))
    with pytest.raises(LabelMismatch):
        linear_problem_residual(cyl, build_connection(g, "sl2", 1.0))


def test_deformations_need_cmc1(cyl):
    bad = cyl.scaled(1.0, 1.2)
    g = derive_geometry(bad)
    with pytest.raises(NotCMC1):
        build_connection(g, "sl2", 1.0)
    with pytest.raises(NotCMC1):
        gauge_check(bad)


def test_zero_curvature_invariant_under_su2(cyl, rng):
    for _ in range(3):
        t = su2_transform(cyl, SU2Element.random(rng))
        g = derive_geometry(t, hopf="stencil")
        assert zero_curvature_residual(build_connection(g, "sl2", 1j)).max <= C * cyl.chart.h ** 2
