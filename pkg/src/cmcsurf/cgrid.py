"""Complex-grid calculus on a rectangular chart of the z-plane.

Fields are sampled on an ``nx x ny`` grid with axis 0 running along x and
axis 1 along y, so ``values[i, j]`` lives at ``z = x_min + i*hx + 1j*(y_min + j*hy)``.
Every field carries a boolean mask (True = valid sample).  Masked samples
are stored as exact zeros, so no NaN or Inf ever reaches a caller.

Wirtinger derivatives use second-order central differences in the interior
and a four-point one-sided closure on the boundary whose leading error term
matches the central one (``h**2/6 * f'''``).  That keeps compositions such as
``d(dbar f)`` or ``dbar`` of a stencil-derived field second order right up
to the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BadParameter, EmptyField, GridMismatch, PathThroughMask


@dataclass(frozen=True)
class GridChart:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if int(self.nx) < 3 or int(self.ny) < 3:
            raise BadParameter(f"need at least 3 samples per axis, got {self.nx}x{self.ny}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise BadParameter("chart rectangle must have positive extent")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        for name in ("x_min", "x_max", "y_min", "y_max"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def square(cls, lo: float, hi: float, n: int) -> "GridChart":
        return cls(lo, hi, lo, hi, n, n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def h(self) -> float:
        """Coarsest spacing; used for all ``C*h**k`` tolerances."""
        return max(self.hx, self.hy)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def z(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return X + 1j * Y

    @property
    def center(self) -> tuple[int, int]:
        return (self.nx // 2, self.ny // 2)

    def point(self, index: Sequence[int]) -> complex:
        i, j = index
        return complex(self.x_min + i * self.hx, self.y_min + j * self.hy)

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min, "x_max": self.x_max,
            "y_min": self.y_min, "y_max": self.y_max,
            "nx": self.nx, "ny": self.ny,
        }


def _full_mask(chart: GridChart) -> np.ndarray:
    return np.ones(chart.shape, dtype=bool)


class Field:
    """A scalar field (real or complex) with a validity mask.

    Arithmetic between fields requires identical charts; the result mask is
    the AND of the operand masks.  Division additionally masks zero divisors.
    """

    __array_priority__ = 1000  # numpy scalars defer to our operators

    def __init__(self, chart: GridChart, values, mask=None):
        values = np.asarray(values)
        if values.ndim == 0:
            values = np.full(chart.shape, values)
        if values.shape != chart.shape:
            raise GridMismatch(f"values shape {values.shape} does not match chart {chart.shape}")
        if mask is None:
            mask = _full_mask(chart)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != chart.shape:
            raise GridMismatch(f"mask shape {mask.shape} does not match chart {chart.shape}")
        mask = mask & np.isfinite(values)
        if not np.iscomplexobj(values):
            values = values.astype(float)
        self.chart = chart
        self.mask = mask
        self.values = np.where(mask, values, 0)

    @classmethod
    def from_function(cls, chart: GridChart, fn, mask=None) -> "Field":
        with np.errstate(all="ignore"):
            return cls(chart, fn(chart.z), mask)

    @classmethod
    def constant(cls, chart: GridChart, value, mask=None) -> "Field":
        return cls(chart, np.full(chart.shape, value), mask)

    # -- plumbing ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Field):
            if other.chart != self.chart:
                raise GridMismatch("fields live on different charts")
            return other.values, other.mask
        return other, self.mask

    def _binary(self, other, op):
        if isinstance(other, Vec3Field):
            return NotImplemented
        vals, omask = self._coerce(other)
        with np.errstate(all="ignore"):
            out = op(self.values, vals)
        return Field(self.chart, out, self.mask & omask)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Vec3Field):
            return NotImplemented
        vals, omask = self._coerce(other)
        nonzero = np.asarray(vals) != 0
        with np.errstate(all="ignore"):
            out = np.where(nonzero, self.values / np.where(nonzero, vals, 1), 0)
        return Field(self.chart, out, self.mask & omask & nonzero)

    def __rtruediv__(self, other):
        nonzero = self.values != 0
        with np.errstate(all="ignore"):
            out = np.where(nonzero, other / np.where(nonzero, self.values, 1), 0)
        return Field(self.chart, out, self.mask & nonzero)

    def __neg__(self):
        return Field(self.chart, -self.values, self.mask)

    def __pow__(self, k):
        if isinstance(k, int) and k < 0:
            return 1.0 / (self ** (-k))
        return Field(self.chart, self.values ** k, self.mask)

    def conj(self) -> "Field":
        return Field(self.chart, np.conj(self.values), self.mask)

    @property
    def real(self) -> "Field":
        return Field(self.chart, self.values.real, self.mask)

    @property
    def imag(self) -> "Field":
        return Field(self.chart, self.values.imag, self.mask)

    def abs(self) -> "Field":
        return Field(self.chart, np.abs(self.values), self.mask)

    def apply(self, fn) -> "Field":
        """Pointwise map; samples where ``fn`` is not finite get masked."""
        with np.errstate(all="ignore"):
            out = fn(np.where(self.mask, self.values, 1))
        return Field(self.chart, out, self.mask)

    def log(self) -> "Field":
        positive = self.mask & (np.abs(self.values) > 0)
        with np.errstate(all="ignore"):
            out = np.log(np.where(positive, self.values, 1))
        return Field(self.chart, out, positive)

    def sqrt(self) -> "Field":
        return self.apply(np.sqrt)

    def restrict(self, mask) -> "Field":
        return Field(self.chart, self.values, self.mask & np.asarray(mask, dtype=bool))

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def valid_values(self) -> np.ndarray:
        return self.values[self.mask]

    def max_abs(self) -> float:
        v = self.valid_values()
        return float(np.max(np.abs(v))) if v.size else 0.0

    def __repr__(self):
        kind = "complex" if self.is_complex else "real"
        return f"Field({kind}, {self.chart.nx}x{self.chart.ny}, valid={int(self.mask.sum())})"


ComplexField = Field


class Vec3Field:
    """Three-component field (real for r and n, complex for dr and dbar r)."""

    __array_priority__ = 1000

    def __init__(self, chart: GridChart, values, mask=None):
        values = np.asarray(values)
        if values.shape != (3,) + chart.shape:
            raise GridMismatch(f"vector values must have shape (3, {chart.nx}, {chart.ny})")
        if mask is None:
            mask = _full_mask(chart)
        mask = np.asarray(mask, dtype=bool) & np.all(np.isfinite(values), axis=0)
        if not np.iscomplexobj(values):
            values = values.astype(float)
        self.chart = chart
        self.mask = mask
        self.values = np.where(mask, values, 0)

    @classmethod
    def from_components(cls, comps: Sequence[Field]) -> "Vec3Field":
        chart = comps[0].chart
        mask = comps[0].mask & comps[1].mask & comps[2].mask
        for c in comps:
            if c.chart != chart:
                raise GridMismatch("components live on different charts")
        return cls(chart, np.stack([c.values for c in comps]), mask)

    def component(self, k: int) -> Field:
        return Field(self.chart, self.values[k], self.mask)

    @property
    def components(self) -> list[Field]:
        return [self.component(k) for k in range(3)]

    def _coerce(self, other):
        if isinstance(other, (Vec3Field, Field)):
            if other.chart != self.chart:
                raise GridMismatch("fields live on different charts")
            vals = other.values if isinstance(other, Vec3Field) else other.values[None]
            return vals, other.mask
        return other, self.mask

    def __add__(self, other):
        vals, m = self._coerce(other)
        return Vec3Field(self.chart, self.values + vals, self.mask & m)

    __radd__ = __add__

    def __sub__(self, other):
        vals, m = self._coerce(other)
        return Vec3Field(self.chart, self.values - vals, self.mask & m)

    def __mul__(self, other):
        vals, m = self._coerce(other)
        return Vec3Field(self.chart, self.values * vals, self.mask & m)

    __rmul__ = __mul__

    def __neg__(self):
        return Vec3Field(self.chart, -self.values, self.mask)

    def conj(self) -> "Vec3Field":
        return Vec3Field(self.chart, np.conj(self.values), self.mask)

    @property
    def real(self) -> "Vec3Field":
        return Vec3Field(self.chart, self.values.real, self.mask)

    def dot(self, other: "Vec3Field") -> Field:
        """Bilinear Euclidean product (no complex conjugation)."""
        if other.chart != self.chart:
            raise GridMismatch("fields live on different charts")
        return Field(self.chart, np.sum(self.values * other.values, axis=0), self.mask & other.mask)

    def cross(self, other: "Vec3Field") -> "Vec3Field":
        if other.chart != self.chart:
            raise GridMismatch("fields live on different charts")
        out = np.cross(self.values, other.values, axis=0)
        return Vec3Field(self.chart, out, self.mask & other.mask)

    def norm(self) -> Field:
        return Field(self.chart, np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0)), self.mask)

    def restrict(self, mask) -> "Vec3Field":
        return Vec3Field(self.chart, self.values, self.mask & np.asarray(mask, dtype=bool))

    def max_norm(self) -> float:
        return self.norm().max_abs()

    def __repr__(self):
        return f"Vec3Field({self.chart.nx}x{self.chart.ny}, valid={int(self.mask.sum())})"


# -- residual bookkeeping --------------------------------------------------

@dataclass(frozen=True)
class ResidualStat:
    """Max and mean absolute residual over unmasked samples, plus spacing."""

    name: str
    max: float
    mean: float
    h: float
    count: int = 0

    @classmethod
    def of(cls, name: str, residual) -> "ResidualStat":
        if isinstance(residual, Vec3Field):
            mag = residual.norm()
        else:
            mag = residual.abs()
        vals = mag.valid_values()
        if vals.size == 0:
            return cls(name, 0.0, 0.0, residual.chart.h, 0)
        return cls(name, float(vals.max()), float(vals.mean()), residual.chart.h, int(vals.size))

    def to_dict(self) -> dict:
        return {"name": self.name, "max": self.max, "mean": self.mean, "h": self.h, "count": self.count}


@dataclass
class ResidualReport:
    """Named collection of residual statistics plus free-form notes."""

    stats: dict[str, ResidualStat] = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def add(self, stat: ResidualStat) -> None:
        self.stats[stat.name] = stat

    def __getitem__(self, name: str) -> ResidualStat:
        return self.stats[name]

    def __iter__(self):
        return iter(self.stats.values())

    @property
    def max(self) -> float:
        return max((s.max for s in self.stats.values()), default=0.0)

    def to_dict(self) -> dict:
        return {"stats": [s.to_dict() for s in self.stats.values()], "notes": self.notes}


# -- stencils --------------------------------------------------------------

def _diff_axis(values: np.ndarray, mask: np.ndarray, h: float, axis: int):
    """First derivative along ``axis`` and the mask of trustworthy outputs."""
    v = np.moveaxis(values, axis, 0)
    m = np.moveaxis(mask, axis, 0)
    n = v.shape[0]
    out = np.zeros_like(v, dtype=np.result_type(v, float))
    ok = np.zeros_like(m)

    out[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    ok[1:-1] = m[2:] & m[1:-1] & m[:-2]
    if n >= 4:
        out[0] = (-4 * v[0] + 7 * v[1] - 4 * v[2] + v[3]) / (2 * h)
        out[-1] = (4 * v[-1] - 7 * v[-2] + 4 * v[-3] - v[-4]) / (2 * h)
        ok[0] = m[0] & m[1] & m[2] & m[3]
        ok[-1] = m[-1] & m[-2] & m[-3] & m[-4]
    else:
        out[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        out[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
        ok[0] = m[0] & m[1] & m[2]
        ok[-1] = m[-1] & m[-2] & m[-3]
    return np.moveaxis(out, 0, axis), np.moveaxis(ok, 0, axis)


def partial_x(f: Field) -> Field:
    d, ok = _diff_axis(f.values, f.mask, f.chart.hx, 0)
    return Field(f.chart, d, ok)


def partial_y(f: Field) -> Field:
    d, ok = _diff_axis(f.values, f.mask, f.chart.hy, 1)
    return Field(f.chart, d, ok)


def _wirtinger(f, sign: int):
    if isinstance(f, Vec3Field):
        comps = [_wirtinger(c, sign) for c in f.components]
        return Vec3Field.from_components(comps)
    if not isinstance(f, Field):
        raise TypeError("expected a Field or Vec3Field")
    dx, okx = _diff_axis(f.values, f.mask, f.chart.hx, 0)
    dy, oky = _diff_axis(f.values, f.mask, f.chart.hy, 1)
    out = 0.5 * (dx + sign * 1j * dy)
    return Field(f.chart, out, okx & oky)


def wirtinger_d(f):
    """``(d/dx - i d/dy) / 2`` of a scalar or vector field."""
    return _wirtinger(f, -1)


def wirtinger_dbar(f):
    """``(d/dx + i d/dy) / 2`` of a scalar or vector field."""
    return _wirtinger(f, +1)


def _diff2_axis(values: np.ndarray, mask: np.ndarray, h: float, axis: int):
    """Second derivative along ``axis``.

    Interior rows are central; the end rows use five-point one-sided stencils
    (third order) when the axis is long enough, otherwise four-point ones.
    """
    v = np.moveaxis(values, axis, 0)
    m = np.moveaxis(mask, axis, 0)
    n = v.shape[0]
    out = np.zeros_like(v, dtype=np.result_type(v, float))
    ok = np.zeros_like(m)

    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    ok[1:-1] = m[2:] & m[1:-1] & m[:-2]
    if n >= 5:
        out[0] = (3 * v[0] - 9 * v[1] + 10 * v[2] - 5 * v[3] + v[4]) / h**2
        out[-1] = (3 * v[-1] - 9 * v[-2] + 10 * v[-3] - 5 * v[-4] + v[-5]) / h**2
        ok[0] = m[0] & m[1] & m[2] & m[3] & m[4]
        ok[-1] = m[-1] & m[-2] & m[-3] & m[-4] & m[-5]
    elif n == 4:
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
        out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h**2
        ok[0] = m[0] & m[1] & m[2] & m[3]
        ok[-1] = m[-1] & m[-2] & m[-3] & m[-4]
    else:
        out[0], out[-1] = out[1], out[1]
        ok[0], ok[-1] = ok[1], ok[1]
    return np.moveaxis(out, 0, axis), np.moveaxis(ok, 0, axis)


def laplacian(f):
    """Five-point Laplacian ``f_xx + f_yy`` (componentwise on vectors)."""
    if isinstance(f, Vec3Field):
        return Vec3Field.from_components([laplacian(c) for c in f.components])
    if not isinstance(f, Field):
        raise TypeError("expected a Field or Vec3Field")
    dxx, okx = _diff2_axis(f.values, f.mask, f.chart.hx, 0)
    dyy, oky = _diff2_axis(f.values, f.mask, f.chart.hy, 1)
    return Field(f.chart, dxx + dyy, okx & oky)


def d_dbar(f):
    """Mixed Wirtinger derivative ``d dbar f = laplacian(f) / 4``.

    A direct second-difference stencil keeps boundary errors far smaller
    than composing two one-sided first derivatives.
    """
    return 0.25 * laplacian(f)


def holomorphy_residual(f: Field, name: str = "holomorphy") -> ResidualStat:
    return ResidualStat.of(name, wirtinger_dbar(f))


# -- integration -----------------------------------------------------------

@dataclass(frozen=True)
class GridPath:
    """A 4-connected polyline of grid indices."""

    points: tuple[tuple[int, int], ...]

    def __init__(self, points: Iterable[Sequence[int]]):
        pts = tuple((int(i), int(j)) for i, j in points)
        for a, b in zip(pts, pts[1:]):
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise BadParameter(f"path step {a} -> {b} is not a unit grid step")
        object.__setattr__(self, "points", pts)

    @classmethod
    def straight(cls, start: Sequence[int], stop: Sequence[int]) -> "GridPath":
        """L-shaped path: first along x, then along y."""
        (i0, j0), (i1, j1) = start, stop
        pts = [(i, j0) for i in _span(i0, i1)]
        pts += [(i1, j) for j in _span(j0, j1)][1:]
        return cls(pts)

    @classmethod
    def rectangle(cls, lo: Sequence[int], hi: Sequence[int]) -> "GridPath":
        """Counter-clockwise closed loop around the index box ``lo..hi``."""
        (i0, j0), (i1, j1) = lo, hi
        pts = [(i, j0) for i in range(i0, i1 + 1)]
        pts += [(i1, j) for j in range(j0 + 1, j1 + 1)]
        pts += [(i, j1) for i in range(i1 - 1, i0 - 1, -1)]
        pts += [(i0, j) for j in range(j1 - 1, j0 - 1, -1)]
        return cls(pts)


def _span(a: int, b: int) -> list[int]:
    step = 1 if b >= a else -1
    return list(range(a, b + step, step))


def path_integrate(fz: Field, fzbar: Field, path: GridPath) -> complex:
    """Trapezoidal value of ``integral fz dz + fzbar dzbar`` along ``path``."""
    chart = fz.chart
    if fzbar.chart != chart:
        raise GridMismatch("fields live on different charts")
    for p in path.points:
        if not (fz.mask[p] and fzbar.mask[p]):
            raise PathThroughMask(f"path visits masked sample {p}")
    total = 0j
    for a, b in zip(path.points, path.points[1:]):
        if a[0] != b[0]:
            dz = (b[0] - a[0]) * chart.hx
            dzb = dz
        else:
            dz = 1j * (b[1] - a[1]) * chart.hy
            dzb = -dz
        total += 0.5 * (fz.values[a] + fz.values[b]) * dz
        total += 0.5 * (fzbar.values[a] + fzbar.values[b]) * dzb
    return complex(total)


def _steps(fz: Field, fzbar: Field):
    """Trapezoid increments for every horizontal and vertical grid edge."""
    a, b = fz.values.astype(complex), fzbar.values.astype(complex)
    hx, hy = fz.chart.hx, fz.chart.hy
    ex = 0.5 * (a[1:] + a[:-1]) * hx + 0.5 * (b[1:] + b[:-1]) * hx
    ey = 0.5 * (a[:, 1:] + a[:, :-1]) * (1j * hy) + 0.5 * (b[:, 1:] + b[:, :-1]) * (-1j * hy)
    m = fz.mask & fzbar.mask
    okx = m[1:] & m[:-1]
    oky = m[:, 1:] & m[:, :-1]
    return ex, ey, okx, oky


def loop_defect(fz: Field, fzbar: Field) -> float:
    """Largest closed-loop integral around a single unmasked grid cell."""
    ex, ey, okx, oky = _steps(fz, fzbar)
    # counter-clockwise: bottom edge, right edge, minus top edge, minus left edge
    loops = ex[:, :-1] + ey[1:, :] - ex[:, 1:] - ey[:-1, :]
    ok = okx[:, :-1] & okx[:, 1:] & oky[1:, :] & oky[:-1, :]
    return float(np.max(np.abs(loops[ok]))) if ok.any() else 0.0


def sweep_antiderivative(fz: Field, fzbar: Field, base: Sequence[int], order: str = "row"):
    """Build F with ``dF = fz dz + fzbar dzbar`` and ``F(base) = 0``.

    ``order="row"`` integrates along the x-line through ``base`` first, then
    along y from every point of that line; ``order="column"`` swaps the roles.
    Samples unreachable from the spine without crossing a masked sample are
    masked in the result.  Returns ``(F, loop_defect)``.
    """
    if fzbar.chart != fz.chart:
        raise GridMismatch("fields live on different charts")
    chart = fz.chart
    i0, j0 = int(base[0]), int(base[1])
    m = fz.mask & fzbar.mask
    if not m[i0, j0]:
        raise PathThroughMask(f"base sample {(i0, j0)} is masked")
    ex, ey, okx, oky = _steps(fz, fzbar)
    if order == "column":
        F, reach = _sweep(ey.T, ex.T, oky.T, okx.T, j0, i0)
        F, reach = F.T, reach.T
    elif order == "row":
        F, reach = _sweep(ex, ey, okx, oky, i0, j0)
    else:
        raise ValueError("order must be 'row' or 'column'")
    return Field(chart, F, reach), loop_defect(fz, fzbar)


def _sweep(ex, ey, okx, oky, i0, j0):
    nx = ex.shape[0] + 1
    ny = ey.shape[1] + 1
    F = np.zeros((nx, ny), dtype=complex)
    reach = np.zeros((nx, ny), dtype=bool)
    reach[i0, j0] = True
    for i in range(i0 + 1, nx):
        if not (reach[i - 1, j0] and okx[i - 1, j0]):
            break
        F[i, j0] = F[i - 1, j0] + ex[i - 1, j0]
        reach[i, j0] = True
    for i in range(i0 - 1, -1, -1):
        if not (reach[i + 1, j0] and okx[i, j0]):
            break
        F[i, j0] = F[i + 1, j0] - ex[i, j0]
        reach[i, j0] = True
    for j in range(j0 + 1, ny):
        live = reach[:, j - 1] & oky[:, j - 1]
        F[:, j] = np.where(live, F[:, j - 1] + ey[:, j - 1], 0)
        reach[:, j] = live
    for j in range(j0 - 1, -1, -1):
        live = reach[:, j + 1] & oky[:, j]
        F[:, j] = np.where(live, F[:, j + 1] - ey[:, j], 0)
        reach[:, j] = live
    return F, reach


def require_nonempty(f, what: str = "field") -> None:
    if not np.any(f.mask):
        raise EmptyField(f"{what} is fully masked")
