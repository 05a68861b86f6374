"""Canonicalization of expressions and the zero decision procedure.

Per term, to a fixed point: Kronecker contractions are eliminated, inverse
spinor-metric pairs sharing a dummy collapse to Kroneckers, metric/inverse
pairs collapse to Kroneckers, slot arrangements are normalized over each
factor's symmetry group with sign bookkeeping, and dummy indices are
relabeled deterministically.  Like terms are then collected and sorted.

The dummy relabeling is traversal-ordered with per-factor symmetry-orbit
minimization and bounded tie exploration; it is sound (never merges unequal
terms) but not complete for arbitrary symmetry groups.  is_zero therefore
backs the canonical route with an exact numeric oracle on seeded jet
assignments and reports which of the two decided.
"""

from __future__ import annotations

import enum
import itertools
from typing import Optional

from .expr import Expression, ExprError, Factor, Term
from .indices import DUMMY_PREFIX, Index, Kind, is_dummy_name
from .rationals import QI, QI_ZERO
from .symbols import (
    DELTA, DELTA_S, DELTA_S_BAR, EPS, EPS_BAR, EPS_BAR_INV, EPS_INV,
    KRONECKERS, METRIC, METRIC_INV, RIEMANN, SIGMA, SymbolTable,
)

_TIE_CAP = 720  # bound on explored factor orderings per term


# --------------------------------------------------------------------------
# local eliminations


def _names_in(factors) -> dict[str, int]:
    counts: dict[str, int] = {}
    for f in factors:
        for idx in f.indices:
            counts[idx.name] = counts.get(idx.name, 0) + 1
    return counts


_EPS_PAIRS = {
    (EPS_INV, EPS): DELTA_S,
    (EPS_BAR_INV, EPS_BAR): DELTA_S_BAR,
}


def _eliminate(coeff: QI, factors: list[Factor]) -> tuple[QI, list[Factor]]:
    """Kronecker / inverse-pair elimination to a fixed point."""
    factors = list(factors)
    changed = True
    while changed:
        changed = False
        counts = _names_in(factors)

        # Kronecker contraction
        for i, f in enumerate(factors):
            kind = KRONECKERS.get(f.symbol.name)
            if kind is None:
                continue
            up, dn = f.slots
            if up.name == dn.name:
                coeff = coeff * kind.dim
                del factors[i]
                changed = True
                break
            if counts[up.name] == 2:
                rename = {up.name: dn.name}
            elif counts[dn.name] == 2:
                rename = {dn.name: up.name}
            else:
                continue  # both free: keep
            del factors[i]
            factors = [g.rename(rename) for g in factors]
            changed = True
            break
        if changed:
            continue

        # inverse-eps against eps, and metric inverse against metric
        for i, fi in enumerate(factors):
            pair_kron = None
            for (inv_name, low_name), kron in _EPS_PAIRS.items():
                if fi.symbol.name != inv_name:
                    continue
                for j, fj in enumerate(factors):
                    if fj.symbol.name != low_name:
                        continue
                    shared = ({fi.slots[0].name, fi.slots[1].name}
                              & {fj.slots[0].name, fj.slots[1].name})
                    shared = {n for n in shared if counts[n] == 2}
                    if not shared:
                        continue
                    n = sorted(shared)[0]
                    sign = 1
                    keep_up = fi.slots[0] if fi.slots[1].name == n else fi.slots[1]
                    if fi.slots[0].name == n:
                        sign = -sign
                    keep_dn = fj.slots[0] if fj.slots[1].name == n else fj.slots[1]
                    if fj.slots[0].name == n:
                        sign = -sign
                    kron_kind = keep_up.kind
                    new = Factor(_kron_decl(kron),
                                 (Index(keep_up.name, kron_kind, True),
                                  Index(keep_dn.name, kron_kind, False)))
                    pair_kron = (i, j, new, sign)
                    break
                if pair_kron:
                    break
            if pair_kron:
                i, j, new, sign = pair_kron
                factors = [f for k, f in enumerate(factors) if k not in (i, j)]
                factors.append(new)
                coeff = coeff * sign
                changed = True
                break
        if changed:
            continue

        # full soldering contraction -> inverse metric:
        # sigma^a_{AA'} sigma^b_{BB'} epsInv^{AB} epsBarInv^{A'B'} = gInv^{ab}
        collapse = _find_soldering_square(factors, counts)
        if collapse is not None:
            positions, a_idx, b_idx, sign, ginv_decl = collapse
            factors = [f for k, f in enumerate(factors) if k not in positions]
            factors.append(Factor(ginv_decl, (a_idx, b_idx)))
            coeff = coeff * sign
            changed = True
            continue

        # gInv against g -> tensor Kronecker
        for i, fi in enumerate(factors):
            if fi.symbol.name != METRIC_INV:
                continue
            done = False
            for j, fj in enumerate(factors):
                if fj.symbol.name != METRIC:
                    continue
                shared = ({fi.slots[0].name, fi.slots[1].name}
                          & {fj.slots[0].name, fj.slots[1].name})
                shared = {n for n in shared if counts[n] == 2}
                if not shared:
                    continue
                n = sorted(shared)[0]
                keep_up = fi.slots[0] if fi.slots[1].name == n else fi.slots[1]
                keep_dn = fj.slots[0] if fj.slots[1].name == n else fj.slots[1]
                new = Factor(_kron_decl(DELTA),
                             (Index(keep_up.name, Kind.TENSOR, True),
                              Index(keep_dn.name, Kind.TENSOR, False)))
                factors = [f for k, f in enumerate(factors) if k not in (i, j)]
                factors.append(new)
                done = True
                break
            if done:
                changed = True
                break
    return coeff, factors


_KRON_CACHE: dict[str, object] = {}


def _kron_decl(name: str):
    # Kronecker declarations are built-in and identical across tables.
    if not _KRON_CACHE:
        table = SymbolTable()
        for nm in (DELTA, DELTA_S, DELTA_S_BAR, METRIC_INV):
            _KRON_CACHE[nm] = table[nm]
    return _KRON_CACHE[name]


def _find_soldering_square(factors, counts):
    """Locate sigma sigma epsInv epsBarInv fully contracted on the spinor
    slots of the two solderings.  Returns the factor positions, the two
    tensor indices, the orientation sign, and the inverse-metric declaration."""
    sig_pos = [i for i, f in enumerate(factors) if f.symbol.name == SIGMA
               and not f.derivs]
    if len(sig_pos) < 2:
        return None
    for ei, fe in enumerate(factors):
        if fe.symbol.name != EPS_INV:
            continue
        x, y = fe.slots
        if counts[x.name] != 2 or counts[y.name] != 2:
            continue
        partners = []
        for i in sig_pos:
            sp = factors[i].slots[1]  # unprimed slot
            if sp.name == x.name:
                partners.insert(0, i)
            elif sp.name == y.name:
                partners.append(i)
        if len(partners) != 2 or partners[0] == partners[1]:
            continue
        s1, s2 = factors[partners[0]], factors[partners[1]]
        a1p, a2p = s1.slots[2], s2.slots[2]  # primed slots
        for bi, fb in enumerate(factors):
            if fb.symbol.name != EPS_BAR_INV:
                continue
            xp, yp = fb.slots
            if counts[xp.name] != 2 or counts[yp.name] != 2:
                continue
            if {xp.name, yp.name} != {a1p.name, a2p.name}:
                continue
            sign = 1 if xp.name == a1p.name else -1
            positions = {partners[0], partners[1], ei, bi}
            if len(positions) != 4:
                continue
            return (positions, s1.slots[0], s2.slots[0], sign,
                    _kron_decl(METRIC_INV))
    return None


# --------------------------------------------------------------------------
# canonical term keys


def _slot_arrangements(f: Factor, flat: bool):
    """All (slots, derivs, sign) arrangements allowed by the factor's
    symmetry group, plus free deriv reordering when derivatives commute."""
    slot_variants = []
    for perm, sign in f.symbol.symmetry_group:
        slots = tuple(f.slots[perm[i]] for i in range(len(perm)))
        slot_variants.append((slots, sign))
    if flat and len(f.derivs) > 1:
        deriv_variants = [tuple(p) for p in itertools.permutations(f.derivs)]
    else:
        deriv_variants = [f.derivs]
    return [(s, d, sg) for (s, sg) in slot_variants for d in deriv_variants]


def _skeleton(f: Factor, counts: dict[str, int], neighbor: dict[str, tuple],
              flat: bool):
    """Renaming- and symmetry-invariant factor signature used to order the
    factors of a term: the minimum over the factor's arrangement orbit of the
    per-position entries."""
    best = None
    for slots, derivs, _sign in _slot_arrangements(f, flat):
        entries = []
        internal: dict[str, int] = {}
        for pos, idx in enumerate(derivs + slots):
            if counts[idx.name] == 1:
                entries.append(("F", idx.name, idx.kind.value, idx.up))
            else:
                first = internal.setdefault(idx.name, pos)
                if first != pos:
                    entries.append(("I", str(first), idx.kind.value, idx.up))
                else:
                    entries.append(("D",) + neighbor.get(idx.name, ())
                                   + (idx.kind.value, idx.up))
        t = tuple(entries)
        if best is None or t < best:
            best = t
    return (f.symbol.name, len(f.derivs), best)


def _orbit_min_position(decl, pos: int, n_derivs: int, flat: bool) -> str:
    """Canonical representative of a slot position under the factor's
    symmetry group; derivative positions are indistinguishable when
    derivatives commute."""
    if pos < n_derivs:
        return "d" if flat else str(pos)
    j = pos - n_derivs
    best = j
    for perm, _sign in decl.symmetry_group:
        for i in range(len(perm)):
            if perm[i] == j and i < best:
                best = i
    return str(n_derivs + best)


def _neighbor_map(factors, flat: bool) -> dict[str, tuple]:
    """For each dummy, the sorted pair of (symbol, orbit position) endpoints —
    a cheap invariant refinement used when ordering factors."""
    ends: dict[str, list] = {}
    for f in factors:
        nd = len(f.derivs)
        for pos, idx in enumerate(f.indices):
            ends.setdefault(idx.name, []).append(
                (f.symbol.name, _orbit_min_position(f.symbol, pos, nd, flat)))
    out = {}
    for name, lst in ends.items():
        if len(lst) == 2:
            a, b = sorted(lst)
            out[name] = a + b
    return out


class _ZeroTerm(Exception):
    pass


_BRANCH_CAP = 64


def _label_term(ordered: list[Factor], counts, flat: bool):
    """Minimal labeling by branching search: at each factor keep every
    (arrangement, dummy-label map) achieving the lexicographically least
    labeled sequence.  Distinct label bindings that tie are kept as separate
    branches because they bind later factors differently.  Two surviving
    branches reaching the same complete key with opposite signs prove the
    term is a symmetry zero (raises _ZeroTerm).  Returns (key, sign)."""
    branches: list[tuple[dict[str, int], int]] = [({}, 1)]
    key_parts = []
    for f in ordered:
        arrangements = _slot_arrangements(f, flat)
        best_seq = None
        kept: dict[tuple, int] = {}  # frozen label-map -> sign
        for labels, sign in branches:
            for slots, derivs, asign in arrangements:
                trial = dict(labels)
                seq = []
                for idx in derivs + slots:
                    if counts[idx.name] == 1:
                        seq.append(("F", idx.name, idx.kind.value, idx.up))
                    else:
                        if idx.name not in trial:
                            trial[idx.name] = len(trial)
                        seq.append(
                            ("D", f"{trial[idx.name]:04d}", idx.kind.value, idx.up))
                seq_t = (len(derivs), tuple(seq))
                entry = (tuple(sorted(trial.items())), sign * asign)
                if best_seq is None or seq_t < best_seq:
                    best_seq = seq_t
                    kept = {entry[0]: entry[1]}
                elif seq_t == best_seq:
                    prev = kept.get(entry[0])
                    if prev is None:
                        if len(kept) < _BRANCH_CAP:
                            kept[entry[0]] = entry[1]
                    elif prev != entry[1]:
                        raise _ZeroTerm()
        key_parts.append((f.symbol.name, best_seq[0], best_seq[1]))
        branches = [(dict(items), sign) for items, sign in kept.items()]
    signs = {sign for _, sign in branches}
    if len(signs) > 1:
        raise _ZeroTerm()
    return tuple(key_parts), signs.pop()


def _canonical_key(factors: list[Factor], flat: bool):
    """Canonical (key, sign) for a factor product, or None for a detected
    symmetry zero."""
    counts = _names_in(factors)
    neighbor = _neighbor_map(factors, flat)
    skels = [_skeleton(f, counts, neighbor, flat) for f in factors]
    order = sorted(range(len(factors)), key=lambda i: skels[i])

    # group positions with identical skeletons; explore their permutations
    groups: list[list[int]] = []
    for i in order:
        if groups and skels[groups[-1][-1]] == skels[i]:
            groups[-1].append(i)
        else:
            groups.append([i])
    total = 1
    for grp in groups:
        for k in range(2, len(grp) + 1):
            total *= k
    variants: list[list[int]]
    if total == 1 or total > _TIE_CAP:
        variants = [order]
    else:
        pools = [list(itertools.permutations(g)) for g in groups]
        variants = [list(itertools.chain.from_iterable(combo))
                    for combo in itertools.product(*pools)]

    best = None
    for variant in variants:
        ordered = [factors[i] for i in variant]
        try:
            key, sign = _label_term(ordered, counts, flat)
        except _ZeroTerm:
            return None
        if best is None or key < best[0]:
            best = (key, sign)
        elif key == best[0] and sign != best[1]:
            return None
    return best


def _rebuild(key, decls: dict[str, object]) -> tuple[Factor, ...]:
    out = []
    for sym_name, n_derivs, entries in key:
        decl = decls[sym_name]
        idxs = []
        for tag, a, kindv, up in entries:
            kind = Kind(kindv)
            if tag == "F":
                idxs.append(Index(a, kind, up))
            else:
                idxs.append(Index(f"{DUMMY_PREFIX}{a}", kind, up))
        out.append(Factor(decl, tuple(idxs[n_derivs:]), tuple(idxs[:n_derivs])))
    return tuple(out)


# --------------------------------------------------------------------------
# public interface


def canonicalize(e: Expression, flat: bool = False) -> Expression:
    """Normal form: eliminations, symmetry normalization, deterministic dummy
    relabeling, like-term collection, deterministic term order.  With
    flat=True, curvature terms are dropped and derivative slots commute."""
    collected: dict[tuple, QI] = {}
    decls: dict[str, object] = {}
    for coeff, factors in e.terms:
        if flat and any(f.symbol.name == RIEMANN for f in factors):
            continue
        coeff, simplified = _eliminate(coeff, list(factors))
        if coeff.is_zero():
            continue
        for f in simplified:
            decls[f.symbol.name] = f.symbol
        got = _canonical_key(simplified, flat)
        if got is None:
            continue
        key, sign = got
        collected[key] = collected.get(key, QI_ZERO) + coeff * sign
    terms: list[Term] = []
    for key in sorted(collected):
        c = collected[key]
        if not c.is_zero():
            terms.append((c, _rebuild(key, decls)))
    return Expression(terms)


class ZeroVerdict(enum.Enum):
    CANONICAL = "canonical-zero"
    NUMERIC = "numeric-zero"
    NONZERO = "nonzero"

    def __bool__(self):
        return self is not ZeroVerdict.NONZERO


def is_zero(e: Expression, table: SymbolTable, mode: str = "flat",
            seeds=(1, 2, 3)) -> ZeroVerdict:
    """Decide whether e vanishes.  Canonical zero when the normal form is the
    empty sum; otherwise falls back to exact evaluation on independent seeded
    jet assignments and reports a numeric-only zero distinctly."""
    flat = mode == "flat"
    if canonicalize(e, flat=flat).is_structurally_zero():
        return ZeroVerdict.CANONICAL
    from .evalnum import eval_numeric
    from .frame import standard_frame
    for seed in seeds:
        env = standard_frame(table, seed=seed, mode=mode)
        values = eval_numeric(e, env)
        if any(v for v in values.values()):
            return ZeroVerdict.NONZERO
    return ZeroVerdict.NUMERIC
