"""SAR ADC simulator with pluggable comparison trees and entropy-balanced tree builders."""

from .errors import MerAdcError
from .pmf import Interval, Pmf, branch_probabilities, conditional_entropy, entropy, mass
from .sarsim import AdcConfig, ConversionResult, convert_batch, convert_online, convert_tree, quantize
from .treebuild import (
    DecisionTree,
    build_binary_tree,
    build_mer_tree,
    build_optimal_tree,
    expected_length,
    tree_depths,
    validate_tree,
)

__version__ = "0.1.0"
