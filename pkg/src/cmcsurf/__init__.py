"""Constant mean curvature surfaces from generalized Weierstrass data on a grid.

The package builds spinor data ``(psi1, psi2, p)`` for exact families,
derives the surface geometry with second-order stencils and checks the
identities that tie the Dirac system to the Gauss-Codazzi equations, the
sinh-Gordon equation, sigma models and zero-curvature Lax pairs.
"""

from .cgrid import ComplexField, Field, GridChart, ResidualReport, ResidualStat, Vec3Field
from .decouple import DecoupledData, decouple
from .errors import CMCError, InputError
from .families import cylinder
from .io import DatasetFile, read_dataset, write_dataset
from .lax import SU2Element, build_connection, su2_transform, zero_curvature_residual
from .parser import parse_rational
from .rational import RationalMap
from .sigma import from_rational, gauss_map, instanton, topological_charge
from .verify import VerificationReport, verify_spinors
from .weierstrass import GeometryBundle, SpinorData, derive_geometry

__version__ = "0.1.0"

__all__ = [
    "CMCError", "ComplexField", "DatasetFile", "DecoupledData", "Field", "GeometryBundle", "GridChart",
    "InputError", "RationalMap", "ResidualReport", "ResidualStat", "SU2Element", "SpinorData",
    "Vec3Field", "VerificationReport", "build_connection", "cylinder", "decouple", "derive_geometry",
    "from_rational", "gauss_map", "instanton", "parse_rational", "read_dataset", "su2_transform",
    "topological_charge", "verify_spinors", "write_dataset", "zero_curvature_residual",
]
