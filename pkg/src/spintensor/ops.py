"""The three slot operations on mixed tensor-spinor expressions, plus the
generic index utilities (symmetrize, antisymmetrize, contract).

Each operation adds one index of every kind and variance — the replacement
quad (c, d) for tensor slots and (I, I'; J, J') for spinor slots — acting
factor by factor through the Leibniz rule.  The tensor-slot operation also
acts on derivative slots, which behave as lower tensor slots.  Mixed-variance
spinor metrics appearing in the replacement rules are realized as spinor
Kroneckers; the +1/4 and +1/8 weights are normalized so that contracting the
result against a generator reproduces the unit-weight infinitesimal slot
action (Kronecker pairs trace to 2 and 2, the tensor trace to 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import Expression, ExprError, Factor, Term
from .indices import Index, Kind, NameSupply
from .rationals import QI
from .canon import canonicalize
from .symbols import DELTA, DELTA_S, DELTA_S_BAR, SymbolTable

_QUARTER = QI(Fraction(1, 4))
_EIGHTH = QI(Fraction(1, 8))


@dataclass(frozen=True)
class OpIndexQuad:
    """The six fresh indices an operation introduces: an upper/lower tensor
    pair and upper/lower spinor pairs of both kinds."""

    c: str
    d: str
    i: str
    ip: str
    j: str
    jp: str

    @staticmethod
    def fresh(e: Expression, base: str = "q") -> "OpIndexQuad":
        supply = NameSupply(e.all_names())
        return OpIndexQuad(
            supply.fresh(base + "c"), supply.fresh(base + "d"),
            supply.fresh(base + "I"), supply.fresh(base + "Ip"),
            supply.fresh(base + "J"), supply.fresh(base + "Jp"))

    def names(self) -> tuple[str, ...]:
        return (self.c, self.d, self.i, self.ip, self.j, self.jp)

    def conjugated(self) -> "OpIndexQuad":
        return OpIndexQuad(self.c, self.d, self.ip, self.i, self.jp, self.j)


def _check_fresh(e: Expression, q: OpIndexQuad):
    clash = set(q.names()) & e.all_names()
    if clash:
        raise ExprError(f"operation indices not fresh: {sorted(clash)}")


def _kron(table: SymbolTable, name: str, up: str, dn: str, kind: Kind) -> Factor:
    return Factor(table[name], (Index(up, kind, True), Index(dn, kind, False)))


def _spinor_kron_pair(table, q: OpIndexQuad):
    return (_kron(table, DELTA_S, q.i, q.j, Kind.SPINOR),
            _kron(table, DELTA_S_BAR, q.ip, q.jp, Kind.PRIMED))


def acute(e: Expression, q: OpIndexQuad, table: SymbolTable) -> Expression:
    """Tensor-slot operation: each upper tensor slot a contributes
    +1/4 (slot renamed to c) delta^a_d, each lower slot b (derivative slots
    included) contributes -1/4 (slot renamed to d) delta^c_b, every term
    carrying the spinor Kronecker pair on (I,J) and (I',J')."""
    _check_fresh(e, q)
    out: list[Term] = []
    for coeff, factors in e.terms:
        for fi, f in enumerate(factors):
            others = factors[:fi] + factors[fi + 1:]
            kpair = None
            # upper tensor slots
            for si, idx in enumerate(f.slots):
                if idx.kind is not Kind.TENSOR:
                    continue
                if kpair is None:
                    kpair = _spinor_kron_pair(table, q)
                if idx.up:
                    slots = f.slots[:si] + (idx.with_name(q.c),) + f.slots[si + 1:]
                    kron = _kron(table, DELTA, idx.name, q.d, Kind.TENSOR)
                    out.append((coeff * _QUARTER,
                                others + (Factor(f.symbol, slots, f.derivs), kron)
                                + kpair))
                else:
                    slots = f.slots[:si] + (idx.with_name(q.d),) + f.slots[si + 1:]
                    kron = _kron(table, DELTA, q.c, idx.name, Kind.TENSOR)
                    out.append((coeff * (-_QUARTER),
                                others + (Factor(f.symbol, slots, f.derivs), kron)
                                + kpair))
            # derivative slots are lower tensor slots
            for di, idx in enumerate(f.derivs):
                if kpair is None:
                    kpair = _spinor_kron_pair(table, q)
                derivs = f.derivs[:di] + (idx.with_name(q.d),) + f.derivs[di + 1:]
                kron = _kron(table, DELTA, q.c, idx.name, Kind.TENSOR)
                out.append((coeff * (-_QUARTER),
                            others + (Factor(f.symbol, f.slots, derivs), kron)
                            + kpair))
    return Expression(out)


_GRAVE_RULES = {
    # (kind, up) -> (sign, which replacement name, kronecker builder)
    (Kind.SPINOR, True): "upper-unprimed",
    (Kind.SPINOR, False): "lower-unprimed",
    (Kind.PRIMED, True): "upper-primed",
    (Kind.PRIMED, False): "lower-primed",
}


def grave(e: Expression, q: OpIndexQuad, table: SymbolTable) -> Expression:
    """Spinor-slot operation: upper unprimed E -> I with +1/8 and Kronecker
    eps^E_J, upper primed F' -> I' with +1/8 and epsBar^F'_J', lower
    unprimed G -> J with -1/8 and eps^I_G, lower primed H' -> J' with -1/8
    and epsBar^I'_H'; every term carries the tensor Kronecker delta^c_d."""
    _check_fresh(e, q)
    out: list[Term] = []
    for coeff, factors in e.terms:
        for fi, f in enumerate(factors):
            others = factors[:fi] + factors[fi + 1:]
            for si, idx in enumerate(f.slots):
                rule = _GRAVE_RULES.get((idx.kind, idx.up))
                if rule is None:
                    continue
                tkron = _kron(table, DELTA, q.c, q.d, Kind.TENSOR)
                if rule == "upper-unprimed":
                    sign, new = _EIGHTH, q.i
                    s_kron = _kron(table, DELTA_S, idx.name, q.j, Kind.SPINOR)
                    p_kron = _kron(table, DELTA_S_BAR, q.ip, q.jp, Kind.PRIMED)
                elif rule == "upper-primed":
                    sign, new = _EIGHTH, q.ip
                    s_kron = _kron(table, DELTA_S, q.i, q.j, Kind.SPINOR)
                    p_kron = _kron(table, DELTA_S_BAR, idx.name, q.jp, Kind.PRIMED)
                elif rule == "lower-unprimed":
                    sign, new = -_EIGHTH, q.j
                    s_kron = _kron(table, DELTA_S, q.i, idx.name, Kind.SPINOR)
                    p_kron = _kron(table, DELTA_S_BAR, q.ip, q.jp, Kind.PRIMED)
                else:
                    sign, new = -_EIGHTH, q.jp
                    s_kron = _kron(table, DELTA_S, q.i, q.j, Kind.SPINOR)
                    p_kron = _kron(table, DELTA_S_BAR, q.ip, idx.name, Kind.PRIMED)
                slots = f.slots[:si] + (idx.with_name(new),) + f.slots[si + 1:]
                out.append((coeff * sign,
                            others + (Factor(f.symbol, slots, f.derivs),
                                      tkron, s_kron, p_kron)))
    return Expression(out)


def hat(e: Expression, q: OpIndexQuad, table: SymbolTable) -> Expression:
    """Sum of the tensor-slot and spinor-slot operations on one quad."""
    return acute(e, q, table) + grave(e, q, table)


# --------------------------------------------------------------------------


def symmetrize(e: Expression, n1: str, n2: str, anti: bool = False) -> Expression:
    """(1/2)(e +/- e with the two named free slots exchanged)."""
    if not e.terms:
        return e
    i1, i2 = e.free_index(n1), e.free_index(n2)
    if i1.kind is not i2.kind or i1.up != i2.up:
        raise ExprError(f"cannot symmetrize {n1} with {n2}: kind or variance differ")
    swapped = e.swap_free(n1, n2)
    half = QI(Fraction(1, 2))
    return (e - swapped).scale(half) if anti else (e + swapped).scale(half)


def contract(e: Expression, up: str, down: str) -> Expression:
    """Unify a free upper and a free lower index of equal kind into a fresh
    dummy and canonicalize."""
    if not e.terms:
        return e
    iu, id_ = e.free_index(up), e.free_index(down)
    if not iu.up or id_.up:
        raise ExprError(f"contract needs an upper and a lower index, got {up}, {down}")
    if iu.kind is not id_.kind:
        raise ExprError(f"cannot contract {up} with {down}: different kinds")
    supply = NameSupply(e.all_names())
    d = supply.fresh("ct")
    return canonicalize(e.rename_free({up: d, down: d}))
