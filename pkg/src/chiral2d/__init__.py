"""Chiral free boson on two-dimensional Minkowski space and the Einstein cylinder."""

from .exact import Exact
from .functions import Fn, bump, expr_function
from .geometry import CYLINDER, MINKOWSKI, CauchySurface, Point, standard_surface
from .kernels import KernelExpr, boundary_value, delta, pair, principal_value
from .functional import Functional
from .fields import PSI, STRESS, LocalField, chiral_derivative, solve_from_chiral_data
from .chiral_algebra import (ChiralCommutator, GaussianState, HadamardChiralKernel, HbarSeries,
                             commutator, ope_extract, poisson_bracket, scaling_constraint_fit,
                             star_product)

__version__ = "0.1.0"
