"""Saito-Kurokawa coefficients of weight-2 newforms from modular symbols."""

from .arith import ConstraintError, HalfIntegralMatrix, MissingDataError, fundamental_decompose, kronecker, moebius
from .modsym import ModularSymbolSpace, NewformSlot, newform_slot, period_integral, twisted_L_value
from .padic import PadicElement, WeightSeries
from .quadform import BinaryQuadraticForm
from .shintani import ShintaniTable, classify_discriminant

__version__ = "0.1.0"
