"""Chemical-potential formulation of flow in swelling porous media."""

from .constants import FARADAY, GAS_CONSTANT, STANDARD_PRESSURE
from .models import (CompressibleLiquid, ConstitutiveModel, ExponentialSwelling,
                     IdealIncompressibleSolution, SyntheticPolynomial, make_preset)
from .state import MixtureState, SpeciesSpec

__all__ = [
    "FARADAY", "GAS_CONSTANT", "STANDARD_PRESSURE",
    "CompressibleLiquid", "ConstitutiveModel", "ExponentialSwelling",
    "IdealIncompressibleSolution", "SyntheticPolynomial", "make_preset",
    "MixtureState", "SpeciesSpec",
]
__version__ = "0.1.0"
