"""Rational maps in one complex variable, stored as coefficient lists.

Coefficients are ordered by increasing degree: ``[c0, c1, c2]`` is
``c0 + c1*z + c2*z**2``.  Denominators are kept monic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadParameter, NonRational

ROOT_MATCH_TOL = 1e-9


def trim(coeffs: Sequence[complex]) -> list[complex]:
    out = [complex(c) for c in coeffs]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out or [0j]


def poly_add(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0j] * (n - len(a))
    b = list(b) + [0j] * (n - len(b))
    return trim([x + y for x, y in zip(a, b)])


def poly_mul(a, b):
    out = [0j] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return trim(out)


def poly_scale(a, c):
    return trim([c * x for x in a])


def poly_deriv(a):
    if len(a) == 1:
        return [0j]
    return trim([k * a[k] for k in range(1, len(a))])


def is_zero(a) -> bool:
    return all(c == 0 for c in a)


def degree(a) -> int:
    a = trim(a)
    return -1 if is_zero(a) else len(a) - 1


def poly_eval(a, z):
    z = np.asarray(z)
    out = np.zeros(z.shape, dtype=complex)
    for c in reversed(a):
        out = out * z + c
    return out


def _common_root(num, den):
    """A root shared by both polynomials (within tolerance), or None."""
    if degree(num) < 1 or degree(den) < 1:
        return None
    with np.errstate(all="ignore"):
        rn = np.roots(list(reversed(num)))
        rd = np.roots(list(reversed(den)))
    # a tiny leading coefficient sends a root to infinity; it cannot be shared
    rn, rd = rn[np.isfinite(rn)], rd[np.isfinite(rd)]
    if rn.size == 0 or rd.size == 0:
        return None
    scale = max(1.0, float(np.max(np.abs(np.concatenate([rn, rd])))))
    for r in rd:
        if np.min(np.abs(rn - r)) <= ROOT_MATCH_TOL * scale:
            return complex(r)
    return None


def _deflate(a, r):
    """Synthetic division of ``a`` by ``(z - r)``; remainder dropped."""
    n = len(a) - 1
    out = [0j] * n
    acc = a[n]
    for k in range(n - 1, -1, -1):
        out[k] = acc
        acc = a[k] + acc * r
    return trim(out)


@dataclass(frozen=True)
class RationalMap:
    numerator: tuple[complex, ...]
    denominator: tuple[complex, ...]

    def __init__(self, numerator, denominator=(1,), reduce: bool = True):
        num, den = trim(numerator), trim(denominator)
        if not all(np.isfinite(c) for c in num + den):
            raise BadParameter("coefficients must be finite")
        if is_zero(den):
            raise NonRational("denominator is identically zero")
        if reduce:
            num, den = _reduce(num, den)
        object.__setattr__(self, "numerator", tuple(num))
        object.__setattr__(self, "denominator", tuple(den))

    @classmethod
    def identity(cls) -> "RationalMap":
        return cls([0, 1], [1])

    @property
    def degree(self) -> int:
        return max(degree(self.numerator), degree(self.denominator))

    def __call__(self, z):
        with np.errstate(all="ignore"):
            return poly_eval(self.numerator, z) / poly_eval(self.denominator, z)

    def derivative(self) -> "RationalMap":
        n, d = list(self.numerator), list(self.denominator)
        top = poly_add(poly_mul(poly_deriv(n), d), poly_scale(poly_mul(n, poly_deriv(d)), -1))
        return RationalMap(top, poly_mul(d, d), reduce=False)

    def poles(self) -> np.ndarray:
        if degree(self.denominator) < 1:
            return np.zeros(0, dtype=complex)
        return np.roots(list(reversed(self.denominator))).astype(complex)

    def to_text(self) -> str:
        """Canonical text form; ``parse_rational(m.to_text())`` returns ``m``."""
        return f"({format_poly(self.numerator)})/({format_poly(self.denominator)})"

    def to_dict(self) -> dict:
        return {
            "numerator": [[c.real, c.imag] for c in self.numerator],
            "denominator": [[c.real, c.imag] for c in self.denominator],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RationalMap":
        return cls([complex(a, b) for a, b in d["numerator"]],
                   [complex(a, b) for a, b in d["denominator"]], reduce=False)


def _monic(num, den):
    lead = den[-1]
    if lead != 1:
        with np.errstate(all="ignore"):
            num, den = poly_scale(num, 1 / lead), poly_scale(den, 1 / lead)
        den[-1] = 1 + 0j  # complex division need not return exactly one
    if not all(np.isfinite(c) for c in num + den):
        raise BadParameter("coefficients leave the floating-point range when the denominator is made monic")
    return num, den


def _reduce(num, den):
    num, den = _monic(num, den)
    while True:
        r = _common_root(num, den)
        if r is None:
            break
        num, den = _deflate(num, r), _deflate(den, r)
    if is_zero(num):
        return [0j], [1 + 0j]
    return _monic(num, den)


def format_complex(c: complex) -> str:
    re = repr(float(c.real) + 0.0)
    im = float(c.imag) + 0.0
    if im == 0:
        return f"({re})"
    sign = "-" if np.signbit(im) else "+"
    return f"({re}{sign}{repr(abs(im))}i)"


def format_poly(coeffs) -> str:
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0 and len(coeffs) > 1:
            continue
        lit = format_complex(c)
        terms.append(lit if k == 0 else f"{lit}*z^{k}")
    return " + ".join(terms) if terms else "(0.0)"
