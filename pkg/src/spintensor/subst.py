"""Symbol substitution: replace every occurrence of a declared symbol by an
expression with matching free indices, expanding derivatives over the
replacement by the Leibniz rule."""

from __future__ import annotations

from .deriv import KillingField, apply_nabla
from .expr import Expression, ExprError, Factor, Term
from .indices import DUMMY_PREFIX, NameSupply, is_dummy_name
from .rationals import QI
from .symbols import SymbolDecl


def _rename_dummies_apart(e: Expression, avoid: set[str]) -> Expression:
    out: list[Term] = []
    for coeff, factors in e.terms:
        names = {i.name for f in factors for i in f.indices}
        dummies = {n for n in names if is_dummy_name(n)} | \
            {n for n in names if _occurs_twice(factors, n)}
        clashing = dummies & avoid
        if clashing:
            supply = NameSupply(names | avoid)
            mapping = {n: supply.fresh(DUMMY_PREFIX + "s") for n in clashing}
            factors = tuple(f.rename(mapping) for f in factors)
        out.append((coeff, factors))
    return Expression(out, validate=False)


def _occurs_twice(factors, name) -> bool:
    return sum(1 for f in factors for i in f.indices if i.name == name) == 2


def substitute(e: Expression, target: SymbolDecl, replacement: Expression,
               slot_names: tuple[str, ...],
               killing: dict[str, KillingField] | None = None) -> Expression:
    """Replace every occurrence of target (including under derivatives) by
    the replacement expression, whose free indices named slot_names must
    match the target's slots in signature order."""
    shape = target.signature.slot_shape()
    if len(slot_names) != len(shape):
        raise ExprError("slot_names length does not match the target signature")
    free = {n: (k, u) for n, k, u in replacement.free_indices()}
    for name, (kind, up) in zip(slot_names, shape):
        if replacement.terms and free.get(name) != (kind, up):
            raise ExprError(
                f"replacement free index {name!r} does not match the "
                f"target slot of kind {kind.value}")
    out: list[Term] = []
    for coeff, factors in e.terms:
        static = [f for f in factors if f.symbol is not target]
        occurrences = [f for f in factors if f.symbol is target]
        if not occurrences:
            out.append((coeff, factors))
            continue
        pieces = Expression([(coeff, tuple(static))], validate=False)
        term_names = {i.name for f in factors for i in f.indices}
        for occ in occurrences:
            inst = _rename_dummies_apart(
                replacement, term_names | set(n for n, _, _ in
                                              replacement.free_indices()))
            mapping = {slot_names[k]: occ.slots[k].name
                       for k in range(len(slot_names))
                       if slot_names[k] != occ.slots[k].name}
            if replacement.terms:
                inst = inst.rename_free(mapping)
            for d in reversed(occ.derivs):
                inst = apply_nabla(inst, d.name, killing)
            pieces = pieces * inst
        out.extend(pieces.terms)
    return Expression(out)
