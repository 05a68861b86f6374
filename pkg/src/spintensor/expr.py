"""Expressions: sums of exact-rational multiples of indexed factor products.

A Factor is one occurrence of a declared symbol with its slot indices and an
ordered list of covariant-derivative indices (outermost first).  An
Expression is a sum of terms; within a term every index name occurs either
once (free) or exactly twice with opposite variance and equal kind (dummy),
and all terms share the same free indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .indices import DUMMY_PREFIX, Index, Kind, NameSupply, is_dummy_name
from .rationals import QI, QI_ZERO
from .symbols import SymbolDecl, SymbolTable


class ExprError(ValueError):
    pass


@dataclass(frozen=True)
class Factor:
    symbol: SymbolDecl
    slots: tuple[Index, ...]
    derivs: tuple[Index, ...] = ()

    def __post_init__(self):
        shape = self.symbol.signature.slot_shape()
        if len(self.slots) != len(shape):
            raise ExprError(
                f"{self.symbol.name}: expected {len(shape)} slots, got {len(self.slots)}")
        for idx, (kind, up) in zip(self.slots, shape):
            if idx.kind is not kind or idx.up is not up:
                raise ExprError(
                    f"{self.symbol.name}: slot {idx} does not match signature "
                    f"{self.symbol.signature}")
        for d in self.derivs:
            if d.kind is not Kind.TENSOR or d.up:
                raise ExprError("derivative slots must be lower tensor indices")
        if self.derivs and not self.symbol.carries_derivs:
            raise ExprError(
                f"{self.symbol.name} is annihilated by the covariant derivative")

    @property
    def indices(self) -> tuple[Index, ...]:
        return self.derivs + self.slots

    def rename(self, mapping: dict[str, str]) -> "Factor":
        return Factor(
            self.symbol,
            tuple(i.with_name(mapping.get(i.name, i.name)) for i in self.slots),
            tuple(i.with_name(mapping.get(i.name, i.name)) for i in self.derivs),
        )

    def __str__(self):
        body = f"{self.symbol.name}[{' '.join(map(str, self.slots))}]"
        for d in reversed(self.derivs):
            body = f"D[{d}]({body})"
        return body


Term = tuple[QI, tuple[Factor, ...]]


def _occurrences(factors: Sequence[Factor]):
    occ: dict[str, list[Index]] = {}
    for f in factors:
        for idx in f.indices:
            occ.setdefault(idx.name, []).append(idx)
    return occ


def _classify(factors: Sequence[Factor]):
    """Return (free_signature, dummy_names); raise on malformed terms."""
    free: set[tuple[str, Kind, bool]] = set()
    dummies: set[str] = set()
    for name, occs in _occurrences(factors).items():
        if len(occs) == 1:
            idx = occs[0]
            if is_dummy_name(name):
                raise ExprError(f"unpaired internal dummy index {name!r}")
            free.add((name, idx.kind, idx.up))
        elif len(occs) == 2:
            a, b = occs
            if a.kind is not b.kind or a.up == b.up:
                raise ExprError(
                    f"index {name!r} is repeated but does not form an "
                    f"upper/lower pair of one kind")
            dummies.add(name)
        else:
            raise ExprError(f"index {name!r} occurs {len(occs)} times in one term")
    return frozenset(free), dummies


class Expression:
    """Immutable sum of (coefficient, factor-product) terms."""

    __slots__ = ("terms", "_free")

    def __init__(self, terms: Iterable[Term] = (), validate: bool = True):
        tms = []
        for coeff, factors in terms:
            coeff = QI.coerce(coeff)
            if coeff.is_zero():
                continue
            tms.append((coeff, tuple(factors)))
        object.__setattr__(self, "terms", tuple(tms))
        free = None
        if validate:
            for coeff, factors in self.terms:
                sig, _ = _classify(factors)
                if free is None:
                    free = sig
                elif sig != free:
                    raise ExprError(
                        "terms have different free indices: "
                        f"{sorted(n for n, _, _ in sig)} vs {sorted(n for n, _, _ in free)}")
        object.__setattr__(self, "_free", free)

    def __setattr__(self, *a):
        raise AttributeError("Expression is immutable")

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero() -> "Expression":
        return Expression(())

    @staticmethod
    def scalar(value) -> "Expression":
        return Expression([(QI.coerce(value), ())])

    @staticmethod
    def from_factor(factor: Factor, coeff=1) -> "Expression":
        return Expression([(QI.coerce(coeff), (factor,))])

    # -- queries --------------------------------------------------------------

    def is_structurally_zero(self) -> bool:
        return not self.terms

    def free_indices(self) -> frozenset[tuple[str, Kind, bool]]:
        if self._free is not None:
            return self._free
        if not self.terms:
            return frozenset()
        sig, _ = _classify(self.terms[0][1])
        return sig

    def free_names(self) -> set[str]:
        return {name for name, _, _ in self.free_indices()}

    def all_names(self) -> set[str]:
        names = set()
        for _, factors in self.terms:
            for f in factors:
                names.update(i.name for i in f.indices)
        return names

    def free_index(self, name: str) -> Index:
        for n, kind, up in self.free_indices():
            if n == name:
                return Index(n, kind, up)
        raise ExprError(f"{name!r} is not a free index of this expression")

    def is_scalar(self) -> bool:
        return not self.free_indices()

    def max_deriv_order(self) -> int:
        return max((len(f.derivs) for _, fs in self.terms for f in fs), default=0)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: "Expression") -> "Expression":
        if not isinstance(other, Expression):
            return NotImplemented
        if self.terms and other.terms and self.free_indices() != other.free_indices():
            raise ExprError("free-index mismatch in sum")
        return Expression(self.terms + other.terms,
                          validate=not (self.terms and other.terms))

    def __sub__(self, other: "Expression") -> "Expression":
        return self + (-other)

    def __neg__(self) -> "Expression":
        return Expression([(-c, fs) for c, fs in self.terms], validate=False)

    def scale(self, value) -> "Expression":
        value = QI.coerce(value)
        return Expression([(c * value, fs) for c, fs in self.terms], validate=False)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            return self.scale(other)
        if not isinstance(other, Expression):
            return NotImplemented
        out: list[Term] = []
        for ca, fa in self.terms:
            _, dummies_a = _classify(fa)
            names_a = {i.name for f in fa for i in f.indices}
            for cb, fb in other.terms:
                _, dummies_b = _classify(fb)
                names_b = {i.name for f in fb for i in f.indices}
                # rename each side's dummies apart from the other side's names
                supply = None
                clash_a = dummies_a & names_b
                fa2 = fa
                if clash_a:
                    supply = NameSupply(names_a | names_b)
                    mapping = {n: supply.fresh(DUMMY_PREFIX + "m")
                               for n in clash_a}
                    fa2 = tuple(f.rename(mapping) for f in fa)
                clash_b = dummies_b & names_a
                fb2 = fb
                if clash_b:
                    if supply is None:
                        supply = NameSupply(names_a | names_b)
                    mapping = {n: supply.fresh(DUMMY_PREFIX + "m")
                               for n in clash_b}
                    fb2 = tuple(f.rename(mapping) for f in fb)
                out.append((ca * cb, fa2 + fb2))
        return Expression(out)

    __rmul__ = __mul__

    def rename_free(self, mapping: dict[str, str]) -> "Expression":
        """Simultaneously rename free indices.  Renaming onto an existing
        index name forms a contraction if the pair is a valid one (and is
        rejected by validation otherwise)."""
        if not self.terms:
            return self
        bad = set(mapping) - self.free_names()
        if bad:
            raise ExprError(f"not free indices: {sorted(bad)}")
        out = []
        for c, fs in self.terms:
            names = {i.name for f in fs for i in f.indices}
            supply = NameSupply(names | set(mapping) | set(mapping.values()))
            tmp = {k: supply.fresh(DUMMY_PREFIX + "r") for k in mapping}
            fs = tuple(f.rename(tmp) for f in fs)
            fs = tuple(f.rename({tmp[k]: v for k, v in mapping.items()}) for f in fs)
            out.append((c, fs))
        return Expression(out)

    def swap_free(self, a: str, b: str) -> "Expression":
        return self.rename_free({a: b, b: a})

    def conjugate(self, table: SymbolTable) -> "Expression":
        """Structural complex conjugation: coefficients conjugated, every
        symbol replaced by its declared conjugate, spinor kinds swapped."""
        out: list[Term] = []
        for c, fs in self.terms:
            new_factors = []
            for f in fs:
                partner = table.conjugate_decl(f.symbol)
                shape = partner.signature.slot_shape()
                conj_slots = [i.conjugated() for i in f.slots]
                # stable re-sort of the conjugated slots into signature order
                order = {(Kind.TENSOR, True): 0, (Kind.TENSOR, False): 1,
                         (Kind.SPINOR, True): 2, (Kind.SPINOR, False): 3,
                         (Kind.PRIMED, True): 4, (Kind.PRIMED, False): 5}
                conj_slots.sort(key=lambda i: order[(i.kind, i.up)])
                if tuple((i.kind, i.up) for i in conj_slots) != shape:
                    raise ExprError(
                        f"conjugate of {f.symbol.name} does not fit {partner.name}")
                new_factors.append(Factor(partner, tuple(conj_slots), f.derivs))
            out.append((c.conjugate(), tuple(new_factors)))
        return Expression(out)

    # -- presentation ---------------------------------------------------------

    def __str__(self):
        from .parser import pprint
        return pprint(self)

    def __repr__(self):
        return f"<Expression {self}>"
