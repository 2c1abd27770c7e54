"""Closed-form Weierstrass data used as exact test surfaces."""

from __future__ import annotations

import numpy as np

from .cgrid import Field, GridChart
from .errors import BadParameter
from .weierstrass import SpinorData


def cylinder(r: float, chart: GridChart) -> SpinorData:
    """CMC-1 round cylinder of radius 1/2 with axis along e1.

    ``psi1 = r cos(kx)``, ``psi2 = r sin(kx)`` with ``k = -2 r**2`` and
    ``p = r**2``.  Then ``q = r**2``, ``H = 1`` and the Hopf field is the
    constant ``2 r**4``, attached in closed form.  The parameter ``r`` only
    rescales the coordinate.
    """
    r = float(r)
    if not np.isfinite(r) or r <= 0:
        raise BadParameter(f"cylinder parameter r must be positive, got {r!r}")
    k = -2.0 * r * r
    x = chart.z.real
    psi1 = Field(chart, (r * np.cos(k * x)).astype(complex))
    psi2 = Field(chart, (r * np.sin(k * x)).astype(complex))
    p = Field(chart, np.full(chart.shape, r * r))
    hopf = Field.constant(chart, complex(2.0 * r ** 4))
    meta = {"generator": "cylinder", "r": r}
    return SpinorData(psi1, psi2, p, hopf=hopf, meta=meta)
