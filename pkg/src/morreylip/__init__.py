"""Discrete maximal operators, commutators and weighted Morrey / Lipschitz functionals on grids."""

from .functionals import (
    ExponentConfig,
    NormValue,
    char_functional_M,
    char_functional_sharp,
    lebesgue_norm,
    lemma22_constant,
    lip1_proof_functional,
    lipschitz_norm,
    morrey_norm,
)
from .grid import Cube, CubeFamily, Grid, GridFunction, Policy, enumerate_cubes
from .operators import (
    commutator_M,
    commutator_sharp,
    fractional_maximal,
    hl_maximal,
    local_maximal,
    maximal_commutator,
    sharp_maximal,
)
from .verify import TestSuiteConfig, VerifyReport, run_suite
from .weights import Weight, a1_constant, ap_constant, constant_weight, power_weight

__all__ = [
    "Cube", "CubeFamily", "ExponentConfig", "Grid", "GridFunction", "NormValue", "Policy",
    "TestSuiteConfig", "VerifyReport", "Weight",
    "a1_constant", "ap_constant", "char_functional_M", "char_functional_sharp",
    "commutator_M", "commutator_sharp", "constant_weight", "enumerate_cubes",
    "fractional_maximal", "hl_maximal", "lebesgue_norm", "lemma22_constant",
    "lip1_proof_functional", "lipschitz_norm", "local_maximal", "maximal_commutator",
    "morrey_norm", "power_weight", "run_suite", "sharp_maximal",
]
