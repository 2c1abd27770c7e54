import numpy as np
import pytest

from cmcsurf import GridChart, cylinder, instanton, parse_rational
from cmcsurf.cgrid import Field, wirtinger_d, wirtinger_dbar
from cmcsurf.errors import EmptyGeometry, GridMismatch, InputError
from cmcsurf.lax import SU2Element, su2_transform
from cmcsurf.weierstrass import (
    SpinorData,
    derive_geometry,
    dirac_residual,
    frame_residual,
    fundamental_forms,
    gauss_codazzi_residual,
    hopf_from_spinors,
    integrate_surface,
    normal_equation_residual,
    scalar_product_residuals,
    with_integrated_surface,
)

from oracles import cylinder_hopf, cylinder_normal, cylinder_q, fit_cylinder, fit_sphere, instanton_z_normal, instanton_z_q

C = 50.0


def test_cylinder_closed_forms(cyl, cyl_chart):
    g = derive_geometry(cyl)
    np.testing.assert_allclose(g.q.values, cylinder_q(1.0), atol=1e-14)
    np.testing.assert_allclose(g.H.values, 1.0, atol=1e-14)
    np.testing.assert_allclose(g.Q.values, cylinder_hopf(1.0), atol=1e-14)
    np.testing.assert_allclose(g.n.values, cylinder_normal(1.0, cyl_chart.z.real), atol=1e-14)
    assert g.hopf_source == "given"
    assert g.K.max_abs() < 1e-10


@pytest.mark.parametrize("r", [0.5, 1.3])
def test_cylinder_parameter_family(r):
    chart = GridChart(0.0, 1.0, 0.0, 1.0, 65, 65)
    s = cylinder(r, chart)
    g = derive_geometry(s, hopf="stencil")
    assert s.is_cmc1()
    np.testing.assert_allclose(g.q.values, r * r)
    assert (g.Q - cylinder_hopf(r)).max_abs() < C * chart.h ** 2
    for st in dirac_residual(s):
        assert st.max <= C * chart.h ** 2


def test_dirac_residual_small_on_exact_families(cyl, inst):
    for s in (cyl, inst):
        for st in dirac_residual(s):
            assert st.max <= C * s.chart.h ** 2
            assert st.count > 0


def test_dirac_residual_detects_scaling(cyl):
    bad = cyl.scaled(1.1, 1.0)
    assert max(st.max for st in dirac_residual(bad)) > 1e-2


def test_instanton_closed_forms(inst, inst_chart):
    g = derive_geometry(inst, hopf="stencil")
    np.testing.assert_allclose(g.q.values, instanton_z_q(inst_chart.z), atol=1e-14)
    np.testing.assert_allclose(g.n.values, instanton_z_normal(inst_chart.z), atol=1e-14)
    np.testing.assert_allclose(g.H.values, 1.0, atol=1e-12)
    # vanishing Hopf differential of instantons
    assert g.Q.max_abs() <= 10 * inst_chart.h ** 2
    assert (g.K - 1.0).max_abs() < 1e-2


def test_instanton_forms_proportional(inst):
    g = derive_geometry(inst)
    ff = fundamental_forms(g)
    # II = H I when Q = 0
    assert (ff["II_mixed"] - g.H * ff["I"]).max_abs() < 1e-12
    assert ff["II_dz2"].max_abs() == 0.0


def test_algebraic_scalar_products_to_rounding(cyl, inst):
    for s in (cyl, inst):
        rep = scalar_product_residuals(derive_geometry(s), s)
        for st in rep:
            assert st.max < 1e-12, st.name


def test_stencil_scalar_products(inst):
    g = with_integrated_surface(derive_geometry(inst), inst)
    rep = scalar_product_residuals(g, inst)
    for st in rep:
        if st.name.startswith("stencil"):
            assert st.max <= C * inst.chart.h ** 2, st.name


def test_gauss_codazzi(cyl, inst):
    for s in (cyl, inst):
        rep = gauss_codazzi_residual(derive_geometry(s, hopf="stencil"))
        assert set(rep.stats) == {"gauss", "codazzi", "codazzi_bar"}
        assert rep.max <= C * s.chart.h ** 2


def test_surface_reconstruction_sphere_and_cylinder(inst, cyl):
    r, defect = integrate_surface(inst)
    _, R, dev = fit_sphere(r.values[:, r.mask].T)
    assert R == pytest.approx(1.0, abs=5e-3) and dev < 5e-3
    assert defect < 1e-4
    r, _ = integrate_surface(cyl)
    axis, R, dev = fit_cylinder(r.values[:, r.mask].T)
    assert abs(abs(axis[0]) - 1) < 1e-6
    assert R == pytest.approx(0.5, abs=5e-3) and dev < 5e-3


def test_surface_base_point_is_origin(cyl):
    r, _ = integrate_surface(cyl, base=(3, 7))
    assert np.all(r.values[:, 3, 7] == 0)


def test_frame_and_normal_equations(cyl, inst):
    for s in (cyl, inst):
        g = with_integrated_surface(derive_geometry(s), s)
        rep = frame_residual(g)
        assert rep.notes["orientation"] == 1
        assert len(rep.stats) == 6
        assert rep.max <= C * s.chart.h
        assert normal_equation_residual(g).max <= C * s.chart.h


def test_frame_residual_needs_surface(cyl):
    with pytest.raises(InputError):
        frame_residual(derive_geometry(cyl))


def test_su2_invariance_pointwise(cyl, inst, rng):
    for s in (cyl, inst):
        g0 = derive_geometry(s, hopf="stencil")
        for _ in range(3):
            t = su2_transform(s, SU2Element.random(rng))
            g1 = derive_geometry(t, hopf="stencil")
            for a, b in [(g0.q, g1.q), (g0.H, g1.H), (g0.Q.abs(), g1.Q.abs())]:
                assert (a - b).max_abs() <= 1e-12 * max(1.0, a.max_abs())
            # the residual pair transforms unitarily, so its pointwise norm is invariant
            n0, n1 = _dirac_norm(s), _dirac_norm(t)
            assert np.max(np.abs(n0 - n1)) <= 1e-12


def _dirac_norm(s):
    r1 = wirtinger_d(s.psi1) - s.p * s.psi2
    r2 = wirtinger_dbar(s.psi2) + s.p * s.psi1
    return np.sqrt(np.abs(r1.values) ** 2 + np.abs(r2.values) ** 2)


def test_zero_spinors_raise_empty_geometry():
    s = SpinorData.zeros(GridChart.square(0, 1, 9))
    with pytest.raises(EmptyGeometry):
        derive_geometry(s)


def test_fully_masked_raises_empty_geometry(cyl):
    with pytest.raises(EmptyGeometry):
        derive_geometry(cyl.with_mask(np.zeros(cyl.chart.shape, bool)))


def test_spinor_validation():
    c = GridChart.square(0, 1, 9)
    one = Field.constant(c, 1 + 0j)
    with pytest.raises(InputError):
        SpinorData(one, one, Field.constant(c, 1j))
    with pytest.raises(GridMismatch):
        SpinorData(one, Field.constant(GridChart.square(0, 1, 11), 0j), Field.constant(c, 1.0))


def test_hopf_mode_selection(cyl):
    assert derive_geometry(cyl, hopf="stencil").hopf_source == "stencil"
    assert derive_geometry(cyl, hopf="given").hopf_source == "given"
    no_hopf = SpinorData(cyl.psi1, cyl.psi2, cyl.p)
    with pytest.raises(InputError):
        derive_geometry(no_hopf, hopf="given")
    assert (hopf_from_spinors(cyl) - 2.0).max_abs() < C * cyl.chart.h ** 2


def test_instanton_degree_two_is_sphere():
    chart = GridChart.square(-1.5, 1.5, 65)
    s = instanton(parse_rational("z^2 + 0.1"), chart)
    g = derive_geometry(s)
    assert (g.H - 1).max_abs() < 1e-12
    r, _ = integrate_surface(s)
    _, R, dev = fit_sphere(r.values[:, r.mask].T)
    assert R == pytest.approx(1.0, abs=1e-2)
