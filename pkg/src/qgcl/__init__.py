"""qgcl: interpreter and semantic-analysis workbench for the quantum
guarded-command language with quantum alternation and quantum choice.

The package parses programs, computes their semi-classical tables and
quantum channels on finite-dimensional spaces, derives weakest
preconditions, decides (coin-free) program equivalence, validates the
algebraic laws of alternation and choice numerically, and ships a catalog
of coined-walk examples on cyclic position spaces.
"""

from .ast import (
    Abort, Block, Guard, Measure, ProbChoice, Program, QChoice, QIf, Seq,
    Skip, SubQIf, Unitary, check, cvar_of, desugar_qchoice, qvar_of, seq,
    to_source, var_of,
)
from .cstate import EPS, ClassicalState, assign, concat, dom, eval_at, label, superpose
from .errors import (
    AlphaNormalizationError, DimensionError, DomainClashError, GuardBasisError,
    ParseError, ProbabilityError, QgclError, SemanticsError, ShapeError,
    StateError, UnknownVariableError, VariableScopeError,
)
from .gates import GateLib, MeasLib, Measurement, permutation_gate, translation
from .linalg import (
    TAU_EQ, TAU_EXACT, choi_of, dagger, format_matrix, is_psd, loewner_leq,
    parse_matrix, partial_trace, tensor,
)
from .ovf import (
    AlphaFamily, OpValuedFn, SuperOp, alpha_guarded_compose, apply,
    branch_weights, guarded_compose, lambda_coeff, to_super_op,
)
from .parser import Module, module_to_source, parse, parse_file
from .registry import Registry
from .semantics import (
    SemResult, channel_of, eval_block, eval_prob_choice, semi_classical,
    subspace_qif,
)
from .walks import WalkSpec, build_walk_program, position_distribution, step_oracle
from .wp import (
    Observable, check_hoare, coin_free_equivalent, coin_free_residual,
    equivalence_residual, equivalent, refines, wp,
)

__version__ = "0.1.0"
