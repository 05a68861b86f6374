"""Covariant-derivative algebra.

apply_nabla applies the derivative through the Leibniz rule, annihilating
the compatible backgrounds, appending derivative slots to field factors, and
rewriting Killing-field derivatives by their class rules (a translation has
vanishing derivative; otherwise the derivative is a bivector that is
constant in flat space and transports through the curvature in general).

commutator_reduce orders derivative slots, inserting the curvature
correction for each adjacent exchange: the correction contracts the
curvature (and its soldering conversion on the spinor side) against the
slot-operation sum of the inner factor.  lie_killing realizes the Lie
derivative along a Killing field as transport plus a generator contraction
of the same shape.  delta_nabla produces the first-order change of a first
derivative under a metric variation with the soldering gauge fixed to
follow the metric, and ibp_normal_form moves derivatives off the variation
symbol, returning the bulk and the total-divergence remainder.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .canon import canonicalize
from .expr import Expression, ExprError, Factor, Term
from .indices import Index, Kind, NameSupply
from .ops import OpIndexQuad, acute, grave, hat
from .rationals import QI
from .symbols import (
    DELTA, DELTA_S, DELTA_S_BAR, DELTA_G, EPS_BAR_INV, EPS_INV, METRIC,
    METRIC_INV, RIEMANN, SIGMA, RankSignature, SymbolDecl, SymbolTable,
)


@dataclass(frozen=True)
class KillingField:
    """A Killing vector symbol with its derivative bivector and class rules.

    classes: 'translation' (derivative vanishes), 'rotation-boost' (constant
    antisymmetric derivative, flat space), 'generic' (antisymmetric
    derivative transporting through the curvature)."""

    xi: SymbolDecl
    w: Optional[SymbolDecl]
    klass: str

    @staticmethod
    def declare(table: SymbolTable, klass: str, name: str = "xi",
                w_name: str = "Kw") -> "KillingField":
        if klass not in ("translation", "rotation-boost", "generic"):
            raise ExprError(f"unknown Killing class {klass!r}")
        xi = table.declare(SymbolDecl(
            name, RankSignature(tup=1),
            frozenset({((0,), 1)}), "killing", name))
        w = None
        if klass != "translation":
            perm = ((1, 0), -1)
            ident = ((0, 1), 1)
            w = table.declare(SymbolDecl(
                w_name, RankSignature(tdn=2),
                frozenset({ident, perm}), "killing", w_name))
        return KillingField(xi, w, klass)

    def vector(self, name: str) -> Expression:
        return Expression.from_factor(Factor(self.xi, (Index(name, Kind.TENSOR, True),)))


def _term_with_replacement(coeff, factors, i, replacement: Expression):
    """coefficient * (other factors) * replacement-for-factor-i."""
    others = factors[:i] + factors[i + 1:]
    rest = Expression([(coeff, others)], validate=False)
    return (rest * replacement).terms


def apply_nabla(e: Expression, name: str,
                killing: dict[str, KillingField] | None = None) -> Expression:
    """Leibniz application of the covariant derivative with the given fresh
    lower tensor index."""
    if name in e.all_names():
        raise ExprError(f"derivative index {name!r} is not fresh")
    idx = Index(name, Kind.TENSOR, False)
    out: list[Term] = []
    for coeff, factors in e.terms:
        for i, f in enumerate(factors):
            if f.symbol.nabla_kills:
                continue
            if f.symbol.category == "killing":
                repl = _killing_derivative(f, idx, killing or {})
                out.extend(_term_with_replacement(coeff, factors, i, repl))
                continue
            out.append((coeff,
                        factors[:i]
                        + (Factor(f.symbol, f.slots, (idx,) + f.derivs),)
                        + factors[i + 1:]))
    return Expression(out)


def _killing_derivative(f: Factor, a: Index, killing: dict[str, KillingField]):
    kf = killing.get(f.symbol.name)
    if kf is None:
        for cand in killing.values():
            if cand.w is not None and cand.w.name == f.symbol.name:
                kf = cand
                break
    if kf is None:
        raise ExprError(f"no Killing rules registered for {f.symbol.name!r}")
    if f.derivs:
        raise ExprError("Killing factors never carry stored derivatives")
    if f.symbol is kf.xi:
        if kf.klass == "translation":
            return Expression.zero()
        # nabla_a xi^b = gInv^{bn} W_{an}
        b = f.slots[0]
        supply = NameSupply({a.name, b.name})
        n = supply.fresh("kv")
        g_inv = _builtin(kf, METRIC_INV)
        return Expression([(QI(1), (
            Factor(g_inv, (b, Index(n, Kind.TENSOR, True))),
            Factor(kf.w, (a, Index(n, Kind.TENSOR, False))),
        ))])
    # derivative of the bivector
    if kf.klass == "rotation-boost":
        return Expression.zero()
    # generic: nabla_a W_{ef} = xi^d R_{daef}
    ei, fi = f.slots
    supply = NameSupply({a.name, ei.name, fi.name})
    d = supply.fresh("kt")
    riem = _builtin(kf, RIEMANN)
    return Expression([(QI(1), (
        Factor(kf.xi, (Index(d, Kind.TENSOR, True),)),
        Factor(riem, (Index(d, Kind.TENSOR, False), a, ei, fi)),
    ))])


_BUILTIN_TABLE = SymbolTable()


def _builtin(_ctx, name: str) -> SymbolDecl:
    return _BUILTIN_TABLE[name]


# --------------------------------------------------------------------------
# curvature commutator


def spinor_curvature_factors(table: SymbolTable, p: str, q: str,
                             quad: OpIndexQuad, supply: NameSupply):
    """Factors of R_{pq II'}^{JJ'}: the curvature soldering-converted on the
    trailing pair, with (I, I') lower and (J, J') upper on the quad names."""
    e = supply.fresh("ce")
    k = supply.fresh("ck")
    b = supply.fresh("cB")
    bp = supply.fresh("cBp")
    return (
        Factor(table[RIEMANN], (Index(p, Kind.TENSOR, False),
                                Index(q, Kind.TENSOR, False),
                                Index(e, Kind.TENSOR, False),
                                Index(k, Kind.TENSOR, False))),
        Factor(table[SIGMA], (Index(e, Kind.TENSOR, True),
                              Index(quad.i, Kind.SPINOR, False),
                              Index(quad.ip, Kind.PRIMED, False))),
        Factor(table[SIGMA], (Index(k, Kind.TENSOR, True),
                              Index(b, Kind.SPINOR, False),
                              Index(bp, Kind.PRIMED, False))),
        Factor(table[EPS_INV], (Index(quad.j, Kind.SPINOR, True),
                                Index(b, Kind.SPINOR, True))),
        Factor(table[EPS_BAR_INV], (Index(quad.jp, Kind.PRIMED, True),
                                    Index(bp, Kind.PRIMED, True))),
    )


def commutator_expansion(inner: Expression, p: str, q: str,
                         table: SymbolTable, split: bool = False,
                         avoid: frozenset[str] = frozenset()) -> Expression:
    """(nabla_p nabla_q - nabla_q nabla_p) applied to inner, expanded through
    the curvature: -(R_{pqc}^d on the tensor-slot part + its soldering
    conversion on the spinor-slot part).  With split=True the tensor and
    spinor prefactors multiply the separate slot operations instead of their
    sum (the two agree because the traced curvature pair vanishes)."""
    supply = NameSupply(inner.all_names() | set(avoid) | {p, q})
    quad = OpIndexQuad(
        supply.fresh("wc"), supply.fresh("wd"), supply.fresh("wI"),
        supply.fresh("wIp"), supply.fresh("wJ"), supply.fresh("wJp"))
    ei = supply.fresh("re")
    pre_tensor = Expression([(QI(1), (
        Factor(table[RIEMANN], (Index(p, Kind.TENSOR, False),
                                Index(q, Kind.TENSOR, False),
                                Index(quad.c, Kind.TENSOR, False),
                                Index(ei, Kind.TENSOR, False))),
        Factor(table[METRIC_INV], (Index(ei, Kind.TENSOR, True),
                                   Index(quad.d, Kind.TENSOR, True))),
        Factor(table[DELTA_S], (Index(quad.j, Kind.SPINOR, True),
                                Index(quad.i, Kind.SPINOR, False))),
        Factor(table[DELTA_S_BAR], (Index(quad.jp, Kind.PRIMED, True),
                                    Index(quad.ip, Kind.PRIMED, False))),
    ))])
    pre_spinor = Expression([(QI(1), (
        Factor(table[DELTA], (Index(quad.d, Kind.TENSOR, True),
                              Index(quad.c, Kind.TENSOR, False))),
    ) + spinor_curvature_factors(table, p, q, quad, supply))])
    if split:
        return -(pre_tensor * acute(inner, quad, table)
                 + pre_spinor * grave(inner, quad, table))
    return -((pre_tensor + pre_spinor) * hat(inner, quad, table))


def commutator_reduce(e: Expression, table: SymbolTable, flat: bool = False,
                      killing: dict[str, KillingField] | None = None) -> Expression:
    """Order every factor's derivative slots (sorted by index name, free
    names first), inserting curvature corrections for each exchange; in flat
    space exchanges are free."""
    free = {n for n, _, _ in e.free_indices()} if e.terms else set()

    def sort_key(idx: Index):
        return (idx.name not in free, idx.name)

    work = list(e.terms)
    out: list[Term] = []
    guard = 0
    while work:
        guard += 1
        if guard > 200000:
            raise ExprError("commutator reduction did not terminate")
        coeff, factors = work.pop()
        swapped = False
        for i, f in enumerate(factors):
            ds = f.derivs
            for k in range(len(ds) - 1):
                if sort_key(ds[k]) > sort_key(ds[k + 1]):
                    new_derivs = ds[:k] + (ds[k + 1], ds[k]) + ds[k + 2:]
                    fixed = Factor(f.symbol, f.slots, new_derivs)
                    work.append((coeff, factors[:i] + (fixed,) + factors[i + 1:]))
                    if not flat:
                        term_names = frozenset(
                            idx.name for g in factors for idx in g.indices)
                        inner = Expression.from_factor(
                            Factor(f.symbol, f.slots, ds[k + 2:]))
                        corr = commutator_expansion(
                            inner, ds[k].name, ds[k + 1].name, table,
                            avoid=term_names)
                        for nm in reversed([d.name for d in ds[:k]]):
                            corr = apply_nabla(corr, nm, killing)
                        work.extend(_term_with_replacement(
                            coeff, factors, i, corr))
                    swapped = True
                    break
            if swapped:
                break
        if not swapped:
            out.append((coeff, factors))
    return Expression(out)


# --------------------------------------------------------------------------
# Lie derivative along a Killing field


def killing_generator_prefactors(kf: KillingField, table: SymbolTable,
                                 quad: OpIndexQuad, avoid: set[str]) -> Expression:
    """nabla_c xi^d on the tensor Kroneckers plus delta_c^d times the
    soldering conversion of the bivector, slotted against an operation quad."""
    supply = NameSupply(avoid | set(quad.names()))
    n = supply.fresh("lv")
    pre_tensor = Expression([(QI(1), (
        Factor(kf.w, (Index(quad.c, Kind.TENSOR, False),
                      Index(n, Kind.TENSOR, False))),
        Factor(table[METRIC_INV], (Index(n, Kind.TENSOR, True),
                                   Index(quad.d, Kind.TENSOR, True))),
        Factor(table[DELTA_S], (Index(quad.j, Kind.SPINOR, True),
                                Index(quad.i, Kind.SPINOR, False))),
        Factor(table[DELTA_S_BAR], (Index(quad.jp, Kind.PRIMED, True),
                                    Index(quad.ip, Kind.PRIMED, False))),
    ))])
    e = supply.fresh("le")
    k = supply.fresh("lk")
    b = supply.fresh("lB")
    bp = supply.fresh("lBp")
    pre_spinor = Expression([(QI(1), (
        Factor(table[DELTA], (Index(quad.d, Kind.TENSOR, True),
                              Index(quad.c, Kind.TENSOR, False))),
        Factor(kf.w, (Index(e, Kind.TENSOR, False),
                      Index(k, Kind.TENSOR, False))),
        Factor(table[SIGMA], (Index(e, Kind.TENSOR, True),
                              Index(quad.i, Kind.SPINOR, False),
                              Index(quad.ip, Kind.PRIMED, False))),
        Factor(table[SIGMA], (Index(k, Kind.TENSOR, True),
                              Index(b, Kind.SPINOR, False),
                              Index(bp, Kind.PRIMED, False))),
        Factor(table[EPS_INV], (Index(quad.j, Kind.SPINOR, True),
                                Index(b, Kind.SPINOR, True))),
        Factor(table[EPS_BAR_INV], (Index(quad.jp, Kind.PRIMED, True),
                                    Index(bp, Kind.PRIMED, True))),
    ))])
    return pre_tensor + pre_spinor


def generator_term(e: Expression, kf: KillingField, table: SymbolTable) -> Expression:
    """D(xi) e: the non-transport part of the Lie derivative; zero for
    translations."""
    if kf.klass == "translation":
        return Expression.zero()
    quad = OpIndexQuad.fresh(e, base="l")
    pre = killing_generator_prefactors(kf, table, quad, e.all_names())
    return -(pre * hat(e, quad, table))


def lie_killing(e: Expression, kf: KillingField, table: SymbolTable,
                killing: dict[str, KillingField] | None = None) -> Expression:
    """Lie derivative along a Killing field: xi^a nabla_a e plus the
    generator contraction."""
    killing = dict(killing or {})
    killing.setdefault(kf.xi.name, kf)
    supply = NameSupply(e.all_names())
    a = supply.fresh("la")
    transport = kf.vector(a) * apply_nabla(e, a, killing)
    return transport + generator_term(e, kf, table)


def lie_nabla_commutes_check(psi: Expression, kf: KillingField,
                             table: SymbolTable, flat: bool = False) -> Expression:
    """Residual of (Lie_xi nabla_a - nabla_a Lie_xi) psi after commutator
    reduction and Killing transport; identically zero for Killing fields."""
    killing = {kf.xi.name: kf}
    supply = NameSupply(psi.all_names())
    a = supply.fresh("na")
    lhs = lie_killing(apply_nabla(psi, a, killing), kf, table, killing)
    rhs = apply_nabla(lie_killing(psi, kf, table, killing), a, killing)
    residual = commutator_reduce(lhs - rhs, table, flat=flat, killing=killing)
    return canonicalize(residual, flat=flat)


# --------------------------------------------------------------------------
# metric variation of the derivative


def _sigma_lowered(table, tname, sname, pname, supply):
    """sigma_{t SS'} = g_{tm} sigma^m_{SS'}; returns the factor tuple."""
    m = supply.fresh("gm")
    return (
        Factor(table[METRIC], (Index(tname, Kind.TENSOR, False),
                               Index(m, Kind.TENSOR, False))),
        Factor(table[SIGMA], (Index(m, Kind.TENSOR, True),
                              Index(sname, Kind.SPINOR, False),
                              Index(pname, Kind.PRIMED, False))),
    )


def _sigma_lowered_raised(table, tname, sname, pname, supply):
    """sigma_t^{SS'} = g_{tm} epsInv^{SB} epsBarInv^{S'B'} sigma^m_{BB'}."""
    m = supply.fresh("gm")
    b = supply.fresh("gB")
    bp = supply.fresh("gBp")
    return (
        Factor(table[METRIC], (Index(tname, Kind.TENSOR, False),
                               Index(m, Kind.TENSOR, False))),
        Factor(table[SIGMA], (Index(m, Kind.TENSOR, True),
                              Index(b, Kind.SPINOR, False),
                              Index(bp, Kind.PRIMED, False))),
        Factor(table[EPS_INV], (Index(sname, Kind.SPINOR, True),
                                Index(b, Kind.SPINOR, True))),
        Factor(table[EPS_BAR_INV], (Index(pname, Kind.PRIMED, True),
                                    Index(bp, Kind.PRIMED, True))),
    )


def _dg(table, up1, up2, derivs=()) -> Factor:
    return Factor(table[DELTA_G],
                  (Index(up1, Kind.TENSOR, True), Index(up2, Kind.TENSOR, True)),
                  tuple(Index(d, Kind.TENSOR, False) for d in derivs))


def connection_variation_of_factor(f: Factor, table: SymbolTable,
                                   include_spin_term: bool = True) -> Expression:
    """First-order change of a once-derived field factor under the metric
    variation, with the soldering variation gauge-fixed to half the lowered
    metric variation.  The tensor-slot part contracts the varied Christoffel
    form against the tensor-slot operation; the spinor-slot part contracts
    the antisymmetrized soldering bilinear against the spinor-slot
    operation."""
    if len(f.derivs) != 1:
        raise ExprError("connection variation acts on first derivatives")
    a = f.derivs[0]
    bare = Expression.from_factor(Factor(f.symbol, f.slots))
    quad = OpIndexQuad.fresh(bare, base="v")
    supply = NameSupply(bare.all_names() | set(quad.names()) | {a.name})
    half = QI(Fraction(1, 2))

    # tensor part: (1/2) g_{ec} (g_{af} grad^d dg^{ef} - grad_a dg^{de}
    #                            - g_{af} grad^e dg^{df})
    e, fN, h = (supply.fresh(x) for x in ("ve", "vf", "vh"))
    g_ec = Factor(table[METRIC], (Index(e, Kind.TENSOR, False),
                                  Index(quad.c, Kind.TENSOR, False)))
    piece1 = (half, (
        g_ec,
        Factor(table[METRIC], (a, Index(fN, Kind.TENSOR, False))),
        Factor(table[METRIC_INV], (Index(h, Kind.TENSOR, True),
                                   Index(quad.d, Kind.TENSOR, True))),
        _dg(table, e, fN, derivs=(h,)),
    ))
    piece2 = (-half, (
        g_ec,
        _dg(table, quad.d, e, derivs=(a.name,)),
    ))
    piece3 = (-half, (
        g_ec,
        Factor(table[METRIC], (a, Index(fN, Kind.TENSOR, False))),
        Factor(table[METRIC_INV], (Index(e, Kind.TENSOR, True),
                                   Index(h, Kind.TENSOR, True))),
        _dg(table, quad.d, fN, derivs=(h,)),
    ))
    trace_kron = Expression([(QI(1), (
        Factor(table[DELTA_S], (Index(quad.j, Kind.SPINOR, True),
                                Index(quad.i, Kind.SPINOR, False))),
        Factor(table[DELTA_S_BAR], (Index(quad.jp, Kind.PRIMED, True),
                                    Index(quad.ip, Kind.PRIMED, False))),
    ))])
    c_pre = Expression([piece1, piece2, piece3]) * trace_kron
    result = c_pre * acute(bare, quad, table)

    if include_spin_term:
        # spinor part: g_{ab} grad^e dg^{bf} sigma_{[f II'} sigma_{e]}^{JJ'}
        # against the spinor-slot operation with its tensor trace.
        gq = grave(bare, quad, table)
        if not gq.is_structurally_zero():
            b2, f2, e2, h2 = (supply.fresh(x) for x in ("vb", "vg", "vE", "vH"))
            lead = (
                Factor(table[METRIC], (a, Index(b2, Kind.TENSOR, False))),
                Factor(table[METRIC_INV], (Index(e2, Kind.TENSOR, True),
                                           Index(h2, Kind.TENSOR, True))),
                _dg(table, b2, f2, derivs=(h2,)),
            )
            s1 = _sigma_lowered(table, f2, quad.i, quad.ip, supply)
            s2 = _sigma_lowered_raised(table, e2, quad.j, quad.jp, supply)
            s3 = _sigma_lowered(table, e2, quad.i, quad.ip, supply)
            s4 = _sigma_lowered_raised(table, f2, quad.j, quad.jp, supply)
            g_pre = Expression([
                (half, lead + s1 + s2),
                (-half, lead + s3 + s4),
            ])
            trace_t = Expression([(QI(1), (
                Factor(table[DELTA], (Index(quad.d, Kind.TENSOR, True),
                                      Index(quad.c, Kind.TENSOR, False))),
            ))])
            result = result + g_pre * trace_t * gq
    return result


def delta_nabla(psi: Expression, table: SymbolTable,
                include_spin_term: bool = True) -> Expression:
    """Variation of nabla psi for a field expression consisting of
    once-derived factors (or apply to a bare field after taking its
    derivative)."""
    out = Expression.zero()
    for coeff, factors in psi.terms:
        if len(factors) != 1 or len(factors[0].derivs) != 1:
            raise ExprError("delta_nabla expects single once-derived factors")
        out = out + connection_variation_of_factor(
            factors[0], table, include_spin_term).scale(coeff)
    return out


# --------------------------------------------------------------------------
# integration by parts


def ibp_normal_form(integrand: Expression, table: SymbolTable,
                    div_name: str = "q0"):
    """Split a scalar integrand into (bulk, divergence) with no derivative
    acting on the variation symbol in the bulk and
    integrand = bulk + nabla_c divergence^c; the divergence carries the
    named free upper tensor slot."""
    if integrand.terms and integrand.free_indices():
        raise ExprError("integration by parts expects a scalar integrand")
    bulk_terms: list[Term] = []
    div_terms: list[Term] = []
    work = list(integrand.terms)
    guard = 0
    while work:
        guard += 1
        if guard > 200000:
            raise ExprError("integration by parts did not terminate")
        coeff, factors = work.pop()
        target = None
        for i, f in enumerate(factors):
            if f.symbol.name == DELTA_G and f.derivs:
                target = i
                break
        if target is None:
            bulk_terms.append((coeff, factors))
            continue
        f = factors[target]
        outer = f.derivs[0]
        peeled = Factor(f.symbol, f.slots, f.derivs[1:])
        if any(idx.name == outer.name for idx in peeled.indices):
            raise ExprError(
                "variation derivative contracted into its own factor is "
                "not supported")
        # divergence part: rename the contraction partner of the outer
        # derivative index to the divergence slot
        others = factors[:target] + factors[target + 1:]
        renamed = tuple(g.rename({outer.name: div_name}) for g in others)
        div_terms.append((coeff, renamed + (peeled,)))
        # bulk part: move the derivative onto the remaining factors
        rest = Expression([(QI(1), others)], validate=False)
        nab = _fresh_for(factors, "ib")
        moved = apply_nabla(rest, nab, None)
        if moved.is_structurally_zero():
            continue
        work.extend(
            (coeff * mc * QI(-1), mf + (peeled,))
            for mc, mf in moved.rename_free({nab: outer.name}).terms)
    bulk = Expression(bulk_terms)
    divergence = Expression(div_terms)
    return bulk, divergence


def _fresh_for(factors, base):
    names = {i.name for f in factors for i in f.indices}
    return NameSupply(names).fresh(base)
