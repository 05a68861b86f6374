"""spintensor: symbolic tensor-spinor calculus with an exact numeric oracle,
and a verifier for the equivalence of the Belinfante and metric
energy-momentum tensors."""

from .canon import ZeroVerdict, canonicalize, is_zero
from .deriv import (
    KillingField, apply_nabla, commutator_expansion, commutator_reduce,
    delta_nabla, ibp_normal_form, lie_killing, lie_nabla_commutes_check,
)
from .evalnum import JetAssignment, eval_numeric, all_zero
from .expr import Expression, ExprError, Factor
from .frame import (
    convention_ledger, lower_index, lower_tensor, raise_index, raise_tensor,
    soldering_identity_residual, standard_frame,
)
from .indices import Index, Kind
from .ops import OpIndexQuad, acute, contract, grave, hat, symmetrize
from .parser import ParseError, load_expression_source, parse, pprint
from .rationals import QI, Dual
from .subst import substitute
from .symbols import RankSignature, SymbolDecl, SymbolTable

__version__ = "0.1.0"

__all__ = [
    "Dual", "Expression", "ExprError", "Factor", "Index", "JetAssignment",
    "KillingField", "Kind", "OpIndexQuad", "ParseError", "QI",
    "RankSignature", "SymbolDecl", "SymbolTable", "ZeroVerdict", "acute",
    "all_zero", "apply_nabla", "canonicalize", "commutator_expansion",
    "commutator_reduce", "contract", "convention_ledger", "delta_nabla",
    "eval_numeric", "grave", "hat", "ibp_normal_form", "is_zero",
    "lie_killing", "lie_nabla_commutes_check", "load_expression_source",
    "lower_index", "lower_tensor", "parse", "pprint", "raise_index",
    "raise_tensor", "soldering_identity_residual", "standard_frame",
    "substitute", "symmetrize",
]
