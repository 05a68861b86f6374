"""Exact numeric evaluation of expressions over seeded jet assignments.

A JetAssignment binds every symbol (and each derivative order of the symbols
that carry derivatives) to a table of Gaussian-rational components: tensor
indices run over 0..3, spinor indices over 0..1.  Backgrounds take the
standard-frame components; user symbols take seeded random rationals
projected onto their declared slot symmetries.

In flat mode curvature components vanish and derivative jets are symmetric
in their derivative slots.  In formal-curved mode the antisymmetric part of
every second jet is fixed by the slot-wise curvature action, so the jet
tables model the derivative-commutator identity by construction; the slot
action used here is the independent textbook one (curvature matrix on
tensor slots, its half-traced soldering conversion on spinor slots).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable

from .expr import Expression, Factor
from .indices import Kind
from .rationals import QI, Dual
from .symbols import (
    METRIC_INV, RIEMANN, SIGMA, EPS_INV, EPS_BAR_INV, SymbolDecl, SymbolTable,
)
from .frame import SIGNATURE, background_tables

Table = dict[tuple[int, ...], object]


class EvalError(ValueError):
    pass


def _rand_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 4))


def _rand_value(rng: random.Random, complex_ok: bool) -> QI:
    if complex_ok:
        return QI(_rand_fraction(rng), _rand_fraction(rng))
    return QI(_rand_fraction(rng))


def _dims_for(decl: SymbolDecl, order: int) -> tuple[int, ...]:
    deriv_dims = (4,) * order
    slot_dims = tuple(k.dim for k, _ in decl.signature.slot_shape())
    return deriv_dims + slot_dims


def _project_symmetries(decl: SymbolDecl, order: int, raw: Table,
                        flat: bool) -> Table:
    """Group-average a raw table so declared slot symmetries hold exactly;
    with flat=True also symmetrize over the derivative axes."""
    dims = _dims_for(decl, order)
    perms: list[tuple[tuple[int, ...], int]] = []
    n = len(dims)
    slot_group = list(decl.symmetry_group)
    from itertools import permutations as _perms
    deriv_perms = list(_perms(range(order))) if (flat and order > 1) else \
        [tuple(range(order))]
    for dperm in deriv_perms:
        for sperm, sign in slot_group:
            full = tuple(dperm) + tuple(order + i for i in sperm)
            perms.append((full, sign))
    weight = Fraction(1, len(perms))
    out: Table = {}
    for key in product(*[range(d) for d in dims]):
        acc = QI(0)
        for perm, sign in perms:
            permuted = tuple(key[perm[i]] for i in range(n))
            v = raw.get(permuted)
            if v is not None:
                acc = acc + v * sign
        acc = acc * weight
        if not acc.is_zero():
            out[key] = acc
    return out


def _random_table(decl: SymbolDecl, order: int, rng: random.Random,
                  complex_ok: bool, flat: bool) -> Table:
    dims = _dims_for(decl, order)
    raw = {key: _rand_value(rng, complex_ok)
           for key in product(*[range(d) for d in dims])}
    return _project_symmetries(decl, order, raw, flat)


# --------------------------------------------------------------------------
# the independent slot-wise generator action


def half_traces(m_matrix, sigma_tbl, sigma_raised):
    """Unprimed and primed halves of the soldering conversion of a mixed
    matrix M_c^d: Lambda_I^J = (1/2) M_{II'}^{JI'} and its primed mirror."""
    lam = [[QI(0)] * 2 for _ in range(2)]
    lam_bar = [[QI(0)] * 2 for _ in range(2)]
    for c in range(4):
        for d in range(4):
            m = m_matrix[c][d]
            if not m:
                continue
            for i in range(2):
                for ip in range(2):
                    sa = sigma_tbl.get((c, i, ip))
                    if not sa:
                        continue
                    for j in range(2):
                        for jp in range(2):
                            sb = sigma_raised.get((d, j, jp))
                            if not sb:
                                continue
                            v = m * sa * sb
                            if ip == jp:
                                lam[i][j] = lam[i][j] + v
                            if i == j:
                                lam_bar[ip][jp] = lam_bar[ip][jp] + v
    half = Fraction(1, 2)
    return ([[x * half for x in row] for row in lam],
            [[x * half for x in row] for row in lam_bar])


def slot_action_converted(decl: SymbolDecl, jet0: Table, m_matrix, sigma_tbl,
                          sigma_raised) -> Table:
    lam, lam_bar = half_traces(m_matrix, sigma_tbl, sigma_raised)
    return slot_action(decl, jet0, m_matrix, lam, lam_bar)


def slot_action(decl: SymbolDecl, jet0: Table, m_matrix, lam, lam_bar) -> Table:
    """Standard infinitesimal slot action of a mixed generator M_c^d on a
    rank-0 jet: +M on upper slots, -M (transposed) on lower ones, the given
    spinor halves on spinor slots."""
    shape = decl.signature.slot_shape()
    dims = _dims_for(decl, 0)
    out: Table = {}
    for key in product(*[range(d) for d in dims]):
        acc = QI(0)
        for pos, (kind, up) in enumerate(shape):
            for other in range(kind.dim):
                src = key[:pos] + (other,) + key[pos + 1:]
                v = jet0.get(src)
                if not v:
                    continue
                if kind is Kind.TENSOR:
                    w = m_matrix[other][key[pos]] if up else -m_matrix[key[pos]][other]
                elif kind is Kind.SPINOR:
                    w = lam[other][key[pos]] if up else -lam[key[pos]][other]
                else:
                    w = lam_bar[other][key[pos]] if up else -lam_bar[key[pos]][other]
                if w:
                    acc = acc + w * v
        if not acc.is_zero():
            out[key] = acc
    return out


# --------------------------------------------------------------------------


@dataclass
class JetAssignment:
    seed: int
    mode: str
    tables: dict[tuple[str, int], Table]
    max_orders: dict[str, int]

    @property
    def flat(self) -> bool:
        return self.mode == "flat"

    def table_for(self, name: str, order: int) -> Table:
        key = (name, order)
        if key not in self.tables:
            raise EvalError(
                f"no component table for {name!r} at derivative order {order}")
        return self.tables[key]

    @staticmethod
    def build(table: SymbolTable, seed: int, mode: str = "flat",
              max_order: int = 3) -> "JetAssignment":
        if mode not in ("flat", "formal-curved"):
            raise EvalError(f"unknown mode {mode!r}")
        flat = mode == "flat"
        if not flat:
            max_order = min(max_order, 2)
        rng = random.Random(seed)
        tables: dict[tuple[str, int], Table] = {}
        orders: dict[str, int] = {}
        bg = background_tables()
        for name, tbl in bg.items():
            tables[(name, 0)] = dict(tbl)
            orders[name] = 0

        sigma_tbl = bg[SIGMA]
        sigma_raised = _raise_sigma(sigma_tbl, bg)

        # curvature first, other symbols in declaration-name order
        r_decl = table[RIEMANN]
        if flat:
            tables[(RIEMANN, 0)] = {}
            tables[(RIEMANN, 1)] = {}
        else:
            tables[(RIEMANN, 0)] = _random_table(r_decl, 0, rng, False, flat)
            tables[(RIEMANN, 1)] = _random_table(r_decl, 1, rng, False, flat)
        orders[RIEMANN] = 1

        def riemann_matrix(a: int, b: int):
            r0 = tables[(RIEMANN, 0)]
            return [[(r0.get((a, b, c, d)) or QI(0)) * SIGNATURE[d]
                     for d in range(4)] for c in range(4)]

        for name in table.names():
            decl = table[name]
            if name in orders:
                continue
            complex_ok = decl.category == "dynamical-field"
            if decl.category in ("background",):
                tbl0 = _random_table(decl, 0, rng, False, flat)
                if not decl.signature.n_slots and not tbl0.get((), QI(0)):
                    tbl0 = {(): QI(_rand_fraction(rng) + 1)}
                tables[(name, 0)] = tbl0
                orders[name] = 0
                continue
            if decl.category == "killing":
                tables[(name, 0)] = _random_table(decl, 0, rng, False, flat)
                orders[name] = 0
                continue
            top = max_order if decl.carries_derivs else 0
            for order in range(top + 1):
                if flat or order < 2:
                    tables[(name, order)] = _random_table(
                        decl, order, rng, complex_ok, flat)
                elif order == 2:
                    sym = _random_table(decl, 2, rng, complex_ok, True)
                    jet0 = tables[(name, 0)]
                    half = Fraction(1, 2)
                    full: Table = dict(sym)
                    for a in range(4):
                        for b in range(4):
                            if a == b:
                                continue
                            comm = slot_action_converted(
                                decl, jet0, riemann_matrix(a, b),
                                sigma_tbl, sigma_raised)
                            # commutator = -slot action of the curvature matrix
                            for skey, v in comm.items():
                                kk = (a, b) + skey
                                cur = full.get(kk, QI(0))
                                nv = cur + v * (-half)
                                if nv.is_zero():
                                    full.pop(kk, None)
                                else:
                                    full[kk] = nv
                    tables[(name, 2)] = full
            orders[name] = top
        return JetAssignment(seed, mode, tables, orders)


def _raise_sigma(sigma_tbl: Table, bg) -> Table:
    """sigma_d^{JJ'} = g_{dk} epsInv^{JB} epsBarInv^{J'B'} sigma^k_{BB'};
    with the diagonal metric this is a sign flip plus spinor raisings."""
    out: Table = {}
    eps_inv = bg[EPS_INV]
    eps_bar_inv = bg[EPS_BAR_INV]
    for (k, B, Bp), v in sigma_tbl.items():
        for J in range(2):
            e = eps_inv.get((J, B))
            if not e:
                continue
            for Jp in range(2):
                eb = eps_bar_inv.get((Jp, Bp))
                if not eb:
                    continue
                key = (k, J, Jp)
                cur = out.get(key, QI(0))
                nv = cur + v * e * eb * SIGNATURE[k]
                if nv.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = nv
    return out


# --------------------------------------------------------------------------
# evaluation


def _factor_array(env: JetAssignment, f: Factor):
    tbl = env.table_for(f.symbol.name, len(f.derivs))
    labels_full = [i.name for i in f.derivs] + [i.name for i in f.slots]
    distinct: list[str] = []
    for n in labels_full:
        if n not in distinct:
            distinct.append(n)
    if len(distinct) == len(labels_full):
        return distinct, dict(tbl)
    # fold internal contractions: sum entries whose repeated positions agree
    positions = {n: [i for i, m in enumerate(labels_full) if m == n]
                 for n in distinct}
    out: Table = {}
    for key, v in tbl.items():
        ok = True
        folded = []
        for n in distinct:
            ps = positions[n]
            if len(ps) > 1 and key[ps[0]] != key[ps[1]]:
                ok = False
                break
            folded.append(key[ps[0]])
        if ok:
            kk = tuple(folded)
            cur = out.get(kk)
            out[kk] = v if cur is None else cur + v
    return distinct, out


def _contract(a_labels, a_data, b_labels, b_data):
    shared = [n for n in a_labels if n in b_labels]
    a_keep = [i for i, n in enumerate(a_labels) if n not in shared]
    a_shared = [a_labels.index(n) for n in shared]
    b_keep = [i for i, n in enumerate(b_labels) if n not in shared]
    b_shared = [b_labels.index(n) for n in shared]
    buckets: dict[tuple, list] = {}
    for key, v in b_data.items():
        sk = tuple(key[i] for i in b_shared)
        buckets.setdefault(sk, []).append((tuple(key[i] for i in b_keep), v))
    out: Table = {}
    for key, v in a_data.items():
        sk = tuple(key[i] for i in a_shared)
        hits = buckets.get(sk)
        if not hits:
            continue
        base = tuple(key[i] for i in a_keep)
        for bkey, bv in hits:
            kk = base + bkey
            prod = v * bv
            cur = out.get(kk)
            nv = prod if cur is None else cur + prod
            out[kk] = nv
    labels = [a_labels[i] for i in a_keep] + [b_labels[i] for i in b_keep]
    return labels, out


def eval_numeric(e: Expression, env: JetAssignment) -> dict[tuple, object]:
    """Evaluate by explicit index summation.  Returns a map from value tuples
    of the free indices (sorted by name) to exact components; a scalar yields
    the single key ()."""
    free = sorted(e.free_names())
    result: Table = {}
    for coeff, factors in e.terms:
        labels: list[str] = []
        data: Table = {(): coeff}
        pending = [_factor_array(env, f) for f in factors]
        # contract greedily, preferring factors sharing labels with the pool
        while pending:
            pick = 0
            for i, (ls, _) in enumerate(pending):
                if any(n in labels for n in ls):
                    pick = i
                    break
            ls, dt = pending.pop(pick)
            labels, data = _contract(labels, data, ls, dt)
        order = [labels.index(n) for n in free]
        for key, v in data.items():
            kk = tuple(key[i] for i in order)
            cur = result.get(kk)
            nv = v if cur is None else cur + v
            result[kk] = nv
    return {k: v for k, v in result.items() if not _is_zero_val(v)} or \
        ({(): QI(0)} if not free else {})


def _is_zero_val(v) -> bool:
    if isinstance(v, (QI, Dual)):
        return v.is_zero()
    return not v


def all_zero(values: dict[tuple, object]) -> bool:
    return all(_is_zero_val(v) for v in values.values())


def dual_env(env: JetAssignment) -> JetAssignment:
    """Lift every component to a dual number with vanishing t-part."""
    tables = {
        key: {k: Dual(v) for k, v in tbl.items()}
        for key, tbl in env.tables.items()
    }
    return JetAssignment(env.seed, env.mode, tables, dict(env.max_orders))
