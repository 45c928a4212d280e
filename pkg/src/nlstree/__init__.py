"""Power-series solution of the gauged cubic mode system, with oracles.

Library layout:

  modes      sparse sequences, norms, data generation
  trees      ternary interaction trees and their enumeration
  indexsets  admissible assignments, resonance phases, frozen nodes
  exppoly    exact exponential-polynomial algebra in time
  coeffs     oscillatory tree integrals, Monte-Carlo oracle, bounds
  treeops    multilinear tree operators on sparse sequences
  series     homogeneous components, tree assembly, solution diagnostics
  refsolve   independent Galerkin Runge-Kutta oracle
  cli        configuration, subcommands, CSV artifacts
"""

from .errors import BudgetExceededError, TreeParseError, ValidationError
from .exppoly import ExpPoly
from .modes import ModeSequence, SpaceParams, norm_lsp, random_datum, truncate
from .trees import OrnamentedTree, Tree, enumerate_ornamented, enumerate_shapes

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ExpPoly",
    "ModeSequence",
    "OrnamentedTree",
    "SpaceParams",
    "Tree",
    "TreeParseError",
    "ValidationError",
    "__version__",
    "enumerate_ornamented",
    "enumerate_shapes",
    "norm_lsp",
    "random_datum",
    "truncate",
]
