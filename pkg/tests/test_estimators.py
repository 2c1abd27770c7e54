from dataclasses import replace

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cmcsurf import GridChart, cylinder
from cmcsurf.errors import BadParameter, InputError
from cmcsurf.estimators import IdentityVerifier, ReciprocalTransform, WeierstrassSurface


def test_params_and_clone():
    est = WeierstrassSurface(kind="instanton", rho="z^2", n=33)
    p = est.get_params()
    assert p["kind"] == "instanton" and p["n"] == 33
    c = clone(est)
    assert c.get_params() == p and c is not est
    c.set_params(n=65)
    assert c.n == 65 and est.n == 33


def test_surface_points_lie_on_sphere():
    est = WeierstrassSurface(kind="instanton", n=65)
    pts = np.array([[0.0, 0.0], [0.3, -0.7], [1.1, 0.4]])
    r = est.fit().transform(pts)
    assert r.shape == (3, 3)
    n = est.set_params(output="normal").transform(pts)
    # unit sphere with H = 1: the normal points at the center r + n
    centers = r + n
    assert np.max(np.abs(centers - centers[0])) < 1e-2


def test_not_fitted_and_bad_input():
    with pytest.raises(NotFittedError):
        WeierstrassSurface().transform(np.zeros((1, 2)))
    with pytest.raises(NotFittedError):
        ReciprocalTransform().transform(np.zeros((1, 2)))
    with pytest.raises(NotFittedError):
        IdentityVerifier().score()
    with pytest.raises(BadParameter):
        WeierstrassSurface(kind="torus").fit()
    est = WeierstrassSurface(n=17).fit()
    with pytest.raises(InputError):
        est.transform(np.zeros((2, 3)))
    with pytest.raises(InputError):
        ReciprocalTransform().fit(np.zeros((3, 2)))


def test_reciprocal_transform_on_cylinder(cyl):
    rt = ReciprocalTransform().fit(cyl)
    base = cyl.chart.point(rt.decoupled_.base)
    pts = np.array([[base.real, base.imag], [1.0, 2.0], [2.5, 0.5]])
    out = rt.transform(pts)
    eta = np.sqrt(2.0) * (pts[:, 0] + 1j * pts[:, 1] - base)
    np.testing.assert_allclose(out[:, 0] + 1j * out[:, 1], eta, atol=1e-10)
    np.testing.assert_allclose(out[:, 2], 1.0, atol=1e-12)
    assert rt.sinh_gordon_.max < 1e-12


def test_identity_verifier(cyl):
    iv = IdentityVerifier().fit(cyl)
    assert iv.passed_ and iv.score() == 1.0
    s = cylinder(1.0, GridChart.square(0.0, 3.0, 129))
    bad = replace(s, psi1=1.1 * s.psi1)
    assert iv.score(bad) < 1.0
