import numpy as np
import pytest

from cmcsurf import GridChart, Vec3Field, instanton, parse_rational
from cmcsurf.cgrid import Field
from cmcsurf.errors import BadParameter, NotUnit, PoleOnGrid
from cmcsurf.sigma import (
    charge_identity_residual,
    cp1_residual,
    disk_mask,
    energy,
    from_rational,
    gauss_map,
    general_H_residual,
    qr_from_rho,
    sigma_residual,
    so3_residual,
    spinors_from_rho,
    topological_charge,
)
from cmcsurf.weierstrass import derive_geometry

from oracles import convergence_ratios, cylinder_gauss_map, instanton_z_q

C = 50.0


def test_instanton_gauss_map_is_conjugate(inst, inst_chart):
    gm = gauss_map(inst)
    np.testing.assert_allclose(gm.rho.values, 1j * np.conj(inst_chart.z), atol=1e-13)
    assert gm.stereo_residual.max < 1e-12


def test_cylinder_gauss_map_closed_form(cyl, cyl_chart):
    gm = gauss_map(cyl)
    # psi2 = sin(-2x) vanishes at x = 0, which is masked as a pole
    assert gm.pole_mask[0].all() and not gm.rho.mask[0].any()
    ok = gm.rho.mask
    expect = cylinder_gauss_map(1.0, cyl_chart.z.real)
    assert np.max(np.abs(gm.rho.values[ok] - expect[ok])) < 1e-10
    assert gm.stereo_residual.max < 1e-9


def test_sigma_model_on_instanton_and_cylinder_window():
    c = GridChart.square(-1, 1, 65)
    rho = Field(c, 1j * np.conj(c.z))
    assert sigma_residual(rho).max < 1e-12
    w = GridChart(np.pi / 8, 3 * np.pi / 8, 0.0, 1.0, 65, 65)
    rho = Field(w, -1j / np.tan(2 * w.z.real))
    assert sigma_residual(rho).max <= C * w.h ** 2
    assert general_H_residual(rho, 1.0).max <= C * w.h ** 2


def test_sigma_model_invariant_under_inversion():
    # 0.27 < |rho| < 0.58 here, so 1 / conj(rho) stays finite; the residual
    # of the inverted map must vanish at second order like that of rho itself
    errs = []
    for n in (33, 65, 129):
        w = GridChart(np.pi / 6, 5 * np.pi / 24, 0.0, 1.0, n, n)
        rho = Field(w, -1j / np.tan(2 * w.z.real))
        errs.append(sigma_residual(1.0 / rho.conj()).max)
    # a non-solution leaves an O(1) residual with ratio near 1
    for r in convergence_ratios(errs):
        assert r > 3.5


def test_sigma_model_rejects_generic_map():
    c = GridChart.square(-1, 1, 33)
    rho = Field(c, c.z.real ** 2 + 1j * c.z.imag)
    assert sigma_residual(rho).max > 1e-2


def test_qr_from_rho_cylinder():
    w = GridChart(np.pi / 8, 3 * np.pi / 8, 0.0, 1.0, 65, 65)
    rho = Field(w, -1j / np.tan(2 * w.z.real))
    Q, R = qr_from_rho(rho)
    assert (Q.abs() - 2.0).max_abs() <= C * w.h ** 2
    assert (R - 1.0).max_abs() <= C * w.h ** 2


def test_round_trip_rho_to_spinors():
    c = GridChart.square(-1, 1, 65)
    rho = Field(c, np.conj(c.z))
    s = spinors_from_rho(rho, 1.0, d_conj=Field.constant(c, 1 + 0j))
    g = derive_geometry(s, hopf="stencil")
    np.testing.assert_allclose(g.q.values, instanton_z_q(c.z), atol=1e-13)
    assert (g.H - 1.0).max_abs() < 1e-12
    assert g.Q.max_abs() <= C * c.h ** 2
    assert (gauss_map(s).rho - rho).max_abs() < 1e-12


def test_round_trip_with_other_mean_curvature():
    w = GridChart(np.pi / 8, 3 * np.pi / 8, 0.0, 1.0, 33, 33)
    x = w.z.real
    rho = Field(w, -1j / np.tan(2 * x))
    s = spinors_from_rho(rho, 2.5, d_conj=Field(w, -1j / np.sin(2 * x) ** 2))
    g = derive_geometry(s)
    assert (g.H - 2.5).max_abs() < 1e-12
    assert (gauss_map(s).rho - rho).max_abs() < 1e-12


def test_from_rational_matches_instanton(inst, inst_chart):
    s = from_rational(parse_rational("z"), inst_chart)
    a, b = derive_geometry(s), derive_geometry(inst)
    assert (a.q - b.q).max_abs() < 1e-13
    # same sphere; the Gauss maps conj(z) and i conj(z) differ by a quarter turn about e3
    assert (a.H - b.H).max_abs() < 1e-12
    assert (a.n.components[2] - b.n.components[2]).max_abs() < 1e-12
    assert (gauss_map(s).rho - Field(inst_chart, np.conj(inst_chart.z))).max_abs() < 1e-12
    assert s.meta["rho"].startswith("conj(")


def test_from_rational_parameters():
    c = GridChart.square(-1, 1, 17)
    with pytest.raises(BadParameter):
        from_rational(parse_rational("z"), c, H=0.0)
    s = from_rational(parse_rational("z^2 + 1"), c, H=3.0)
    assert (derive_geometry(s).H - 3.0).max_abs() < 1e-10


def test_energy_of_instantons():
    c = GridChart.square(-20, 20, 513)
    m = disk_mask(c, 20.0)
    rho = Field(c, 1j * np.conj(c.z), m)
    e = energy(rho)
    # antiholomorphic map: the printed density vanishes identically
    assert abs(e.printed) < 1e-10
    assert e.dirichlet == pytest.approx(4 * np.pi, rel=2e-2)


def test_constant_normal_has_zero_charge():
    c = GridChart.square(0, 1, 17)
    n = Vec3Field(c, np.stack([np.zeros(c.shape), np.zeros(c.shape), np.ones(c.shape)]))
    assert topological_charge(n) == 0.0
    with pytest.raises(NotUnit):
        topological_charge(2.0 * n)
    with pytest.raises(NotUnit):
        so3_residual(2.0 * n)


def test_instanton_charge_on_disk():
    c = GridChart.square(-8, 8, 257)
    s = instanton(parse_rational("z"), c, domain_mask=disk_mask(c, 8.0))
    g = derive_geometry(s)
    # the disk misses the cap |z| > 8 of area 4pi / (1 + 64)
    expect = 64.0 / 65.0
    assert topological_charge(g.n) == pytest.approx(expect, abs=5e-3)
    rep = charge_identity_residual(g.n, g.q)
    assert rep.notes["charge_curvature"] == pytest.approx(expect, abs=5e-3)


def test_so3_and_cp1_models(inst, cyl):
    for s in (inst, cyl):
        g = derive_geometry(s)
        assert so3_residual(g.n).max <= C * s.chart.h
        rep = cp1_residual(s)
        assert rep["cp1_norm"].max < 1e-12
        assert rep.max <= C * s.chart.h


def test_pole_on_grid():
    c = GridChart.square(-1, 1, 21)
    with pytest.raises(PoleOnGrid):
        instanton(parse_rational("1/z"), c)
    s = instanton(parse_rational("1/(z - 0.05 - 0.05i)"), c)
    assert not s.mask.all()
