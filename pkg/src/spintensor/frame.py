"""Conventions and their concrete exact realization.

Signature (-,+,+,+).  The spinor metrics are normalized by eps_{01} = +1 and
epsBar_{0'1'} = -1; with the raising rules below, lowering then raising is
the identity and both eps eps-inverse traces equal 2.  The opposite signs
are what allow a Hermitian soldering form with components in the Gaussian
rationals to satisfy

    gInv^{ab} = sigma^a_{AA'} sigma^b_{BB'} epsInv^{AB} epsBarInv^{A'B'}

exactly with gInv = diag(-1,+1,+1,+1).  Raising contracts the second slot of
the inverse metric (kappa^A = epsInv^{AB} kappa_B) and lowering the first of
the metric (kappa_A = kappa^B eps_{BA}), identically for primed indices.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable

from .expr import Expression, ExprError, Factor
from .indices import Index, Kind, NameSupply
from .rationals import QI
from .symbols import (
    DELTA, DELTA_S, DELTA_S_BAR, EPS, EPS_BAR, EPS_BAR_INV, EPS_INV,
    METRIC, METRIC_INV, RIEMANN, SIGMA, DELTA_G, SymbolTable,
)

SIGNATURE = (-1, 1, 1, 1)
EPS_01 = QI(1)
EPS_BAR_01 = QI(-1)


def convention_ledger() -> dict[str, str]:
    """The conventions serialized into every verification report header."""
    return {
        "signature": "(-,+,+,+)",
        "eps-normalization": "eps_{01} = +1, epsInv^{01} = +1",
        "epsbar-normalization": "epsBar_{0'1'} = -1, epsBarInv^{0'1'} = -1",
        "raise-rule": "up^A = epsInv^{AB} low_B (second slot contracted)",
        "lower-rule": "low_A = up^B eps_{BA} (first slot contracted)",
        "soldering": "Hermitian Gaussian-rational realization; "
                     "gInv = sigma sigma epsInv epsBarInv holds exactly",
    }


def _qi(re, im=0) -> QI:
    return QI(Fraction(re), Fraction(im))


# Hermitian soldering components sigma^a as 2x2 matrices indexed [A][A'].
_HALF = Fraction(1, 2)
SIGMA_COMPONENTS = (
    ((_qi(1), _qi(0)), (_qi(0), _qi(_HALF))),            # sigma^0
    ((_qi(0), _qi(_HALF, _HALF)), (_qi(_HALF, -_HALF), _qi(0))),   # sigma^1
    ((_qi(0), _qi(-_HALF, _HALF)), (_qi(-_HALF, -_HALF), _qi(0))),  # sigma^2
    ((_qi(1), _qi(0)), (_qi(0), _qi(-_HALF))),           # sigma^3
)


def _antisym2(norm: QI) -> dict[tuple[int, ...], QI]:
    return {(0, 1): norm, (1, 0): -norm}


def background_tables() -> dict[str, dict[tuple[int, ...], QI]]:
    """Exact component tables for every built-in background symbol."""
    tables: dict[str, dict[tuple[int, ...], QI]] = {
        EPS: _antisym2(EPS_01),
        EPS_INV: _antisym2(EPS_01),
        EPS_BAR: _antisym2(EPS_BAR_01),
        EPS_BAR_INV: _antisym2(EPS_BAR_01),
        DELTA: {(i, i): QI(1) for i in range(4)},
        DELTA_S: {(i, i): QI(1) for i in range(2)},
        DELTA_S_BAR: {(i, i): QI(1) for i in range(2)},
        METRIC: {(i, i): QI(SIGNATURE[i]) for i in range(4)},
        METRIC_INV: {(i, i): QI(SIGNATURE[i]) for i in range(4)},
    }
    sig = {}
    for a in range(4):
        for A in range(2):
            for Ap in range(2):
                v = SIGMA_COMPONENTS[a][A][Ap]
                if not v.is_zero():
                    sig[(a, A, Ap)] = v
    tables[SIGMA] = sig
    return tables


def soldering_identity_residual() -> dict[tuple[int, int], QI]:
    """gInv^{ab} - sigma sigma epsInv epsBarInv, componentwise (all zero)."""
    tbl = background_tables()
    out = {}
    for a in range(4):
        for b in range(4):
            acc = QI(0)
            for A in range(2):
                for B in range(2):
                    for Ap in range(2):
                        for Bp in range(2):
                            sa = tbl[SIGMA].get((a, A, Ap))
                            sb = tbl[SIGMA].get((b, B, Bp))
                            e = tbl[EPS_INV].get((A, B))
                            eb = tbl[EPS_BAR_INV].get((Ap, Bp))
                            if sa and sb and e and eb:
                                acc = acc + sa * sb * e * eb
            out[(a, b)] = acc - tbl[METRIC_INV].get((a, b), QI(0))
    return out


# --------------------------------------------------------------------------
# symbolic index raising and lowering


_INV_FOR = {Kind.SPINOR: EPS_INV, Kind.PRIMED: EPS_BAR_INV}
_LOW_FOR = {Kind.SPINOR: EPS, Kind.PRIMED: EPS_BAR}


def raise_index(e: Expression, name: str, table: SymbolTable) -> Expression:
    """Contract a free lower spinor index with the appropriate inverse
    spinor metric: up^A = epsInv^{AB} low_B."""
    idx = e.free_index(name)
    if idx.up or idx.kind is Kind.TENSOR:
        raise ExprError(f"{name} is not a free lower spinor index")
    supply = NameSupply(e.all_names())
    d = supply.fresh("rz")
    eps_inv = table[_INV_FOR[idx.kind]]
    factor = Factor(eps_inv, (Index(name, idx.kind, True), Index(d, idx.kind, True)))
    return e.rename_free({name: d}) * Expression.from_factor(factor)


def lower_index(e: Expression, name: str, table: SymbolTable) -> Expression:
    """Contract a free upper spinor index with the spinor metric:
    low_A = up^B eps_{BA}."""
    idx = e.free_index(name)
    if not idx.up or idx.kind is Kind.TENSOR:
        raise ExprError(f"{name} is not a free upper spinor index")
    supply = NameSupply(e.all_names())
    d = supply.fresh("lz")
    eps = table[_LOW_FOR[idx.kind]]
    factor = Factor(eps, (Index(d, idx.kind, False), Index(name, idx.kind, False)))
    return e.rename_free({name: d}) * Expression.from_factor(factor)


def raise_tensor(e: Expression, name: str, table: SymbolTable) -> Expression:
    idx = e.free_index(name)
    if idx.up or idx.kind is not Kind.TENSOR:
        raise ExprError(f"{name} is not a free lower tensor index")
    supply = NameSupply(e.all_names())
    d = supply.fresh("rz")
    factor = Factor(table[METRIC_INV],
                    (Index(name, Kind.TENSOR, True), Index(d, Kind.TENSOR, True)))
    return e.rename_free({name: d}) * Expression.from_factor(factor)


def lower_tensor(e: Expression, name: str, table: SymbolTable) -> Expression:
    idx = e.free_index(name)
    if not idx.up or idx.kind is not Kind.TENSOR:
        raise ExprError(f"{name} is not a free upper tensor index")
    supply = NameSupply(e.all_names())
    d = supply.fresh("lz")
    factor = Factor(table[METRIC],
                    (Index(d, Kind.TENSOR, False), Index(name, Kind.TENSOR, False)))
    return e.rename_free({name: d}) * Expression.from_factor(factor)


def standard_frame(table: SymbolTable, seed: int, mode: str = "flat",
                   max_order: int = 3):
    """Build a JetAssignment over the standard exact frame: background
    components from the ledger realization, seeded random rational jets for
    every user-declared symbol, flat or formal-curved closure for second
    derivatives."""
    from .evalnum import JetAssignment
    return JetAssignment.build(table, seed=seed, mode=mode, max_order=max_order)
