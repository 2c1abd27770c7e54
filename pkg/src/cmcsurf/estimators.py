"""Thin scikit-learn style wrappers around the grid pipeline.

The fitted "data" here is a whole set of spinor fields rather than a sample
matrix, so only the parameter handling and fit/transform protocol follow the
usual estimator conventions.  ``transform`` takes an ``(m, 2)`` array of
parameter points ``(x, y)`` and interpolates the fitted grid fields there.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cgrid import GridChart
from .decouple import decouple, shgordon_residual
from .errors import BadParameter, InputError
from .families import cylinder
from .parser import parse_rational
from .sigma import from_rational, instanton
from .verify import PROFILES, verify_spinors
from .weierstrass import SpinorData, derive_geometry, integrate_surface

KINDS = ("cylinder", "instanton", "from_rho")


def _interpolator(chart: GridChart, values: np.ndarray, mask: np.ndarray):
    xs = np.linspace(chart.x_min, chart.x_max, chart.nx)
    ys = np.linspace(chart.y_min, chart.y_max, chart.ny)
    v = np.where(mask, values, np.nan)
    return RegularGridInterpolator((xs, ys), v, bounds_error=False, fill_value=np.nan)


def _points(X) -> np.ndarray:
    X = check_array(X, dtype=float)
    if X.shape[1] != 2:
        raise InputError(f"expected (m, 2) parameter points, got shape {X.shape}")
    return X


def _spinors(X) -> SpinorData:
    if not isinstance(X, SpinorData):
        raise InputError(f"expected SpinorData, got {type(X).__name__}")
    return X


class WeierstrassSurface(TransformerMixin, BaseEstimator):
    """Generate an exact family and reconstruct its surface.

    ``fit`` ignores ``X``; ``transform(X)`` returns surface points, or unit
    normals with ``output="normal"``, at the parameter points in ``X``.
    """

    def __init__(self, kind: str = "cylinder", rho: str = "z", r: float = 1.0, H: float = 1.0,
                 n: int = 129, domain: Optional[tuple] = None, output: str = "position"):
        self.kind = kind
        self.rho = rho
        self.r = r
        self.H = H
        self.n = n
        self.domain = domain
        self.output = output

    def _chart(self) -> GridChart:
        if self.domain is not None:
            x0, x1, y0, y1 = self.domain
        elif self.kind == "cylinder":
            x0, x1, y0, y1 = 0.0, 3.0, 0.0, 3.0
        else:
            x0, x1, y0, y1 = -2.0, 2.0, -2.0, 2.0
        return GridChart(x0, x1, y0, y1, self.n, self.n)

    def fit(self, X=None, y=None):
        if self.kind not in KINDS:
            raise BadParameter(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.output not in ("position", "normal"):
            raise BadParameter(f"output must be 'position' or 'normal', got {self.output!r}")
        chart = self._chart()
        if self.kind == "cylinder":
            s = cylinder(self.r, chart)
        elif self.kind == "instanton":
            s = instanton(parse_rational(self.rho), chart)
        else:
            s = from_rational(parse_rational(self.rho), chart, self.H)
        self.spinors_ = s
        self.geometry_ = derive_geometry(s)
        self.surface_, self.loop_defect_ = integrate_surface(s)
        return self

    def transform(self, X):
        check_is_fitted(self, "surface_")
        P = _points(X)
        field = self.surface_ if self.output == "position" else self.geometry_.n
        chart = self.spinors_.chart
        cols = [_interpolator(chart, field.values[k].real, field.mask)(P) for k in range(3)]
        return np.stack(cols, axis=1)


class ReciprocalTransform(TransformerMixin, BaseEstimator):
    """Decouple CMC-1 spinor data by ``d eta = sqrt(Q) dz``.

    ``fit`` takes a :class:`SpinorData`; ``transform(X)`` returns the columns
    ``(Re eta, Im eta, R)`` at the parameter points in ``X``.
    """

    def __init__(self, tolerance: str = "strict", base: Optional[tuple] = None):
        self.tolerance = tolerance
        self.base = base

    def fit(self, X, y=None):
        if self.tolerance not in PROFILES:
            raise BadParameter(f"tolerance must be one of {sorted(PROFILES)}")
        s = _spinors(X)
        g = derive_geometry(s)
        tol = PROFILES[self.tolerance] * s.chart.h ** 2
        self.decoupled_ = decouple(g, base=self.base, tol_holo=tol, atol=tol)
        self.sinh_gordon_ = shgordon_residual(g, self.decoupled_)
        self.chart_ = s.chart
        return self

    def transform(self, X):
        check_is_fitted(self, "decoupled_")
        P = _points(X)
        d = self.decoupled_
        eta = d.eta
        cols = [_interpolator(self.chart_, eta.values.real, eta.mask)(P),
                _interpolator(self.chart_, eta.values.imag, eta.mask)(P),
                _interpolator(self.chart_, d.R.values.real, d.R.mask)(P)]
        return np.stack(cols, axis=1)


class IdentityVerifier(BaseEstimator):
    """Run the full identity suite; ``score`` is the fraction of applicable checks that pass."""

    def __init__(self, tolerance: str = "strict", base: Optional[tuple] = None):
        self.tolerance = tolerance
        self.base = base

    def fit(self, X, y=None):
        if self.tolerance not in PROFILES:
            raise BadParameter(f"tolerance must be one of {sorted(PROFILES)}")
        self.report_ = verify_spinors(_spinors(X), self.tolerance, self.base)
        self.passed_ = self.report_.passed
        return self

    def score(self, X=None, y=None) -> float:
        if X is None:
            check_is_fitted(self, "report_")
            report = self.report_
        else:
            report = verify_spinors(_spinors(X), self.tolerance, self.base)
        applied = [c for c in report.checks if c.skipped is None]
        return sum(c.passed for c in applied) / len(applied) if applied else 1.0
