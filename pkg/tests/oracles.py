"""Independent numeric oracles used by the test suite.

The connection-variation oracle perturbs the soldering form by the gauge-
fixed variation inside dual-number arithmetic (t^2 = 0), evaluates the
connection-difference formulas for the Christoffel form and the spinor
connection verbatim, and applies them slot-wise.  It shares no code with the
symbolic variation machinery beyond the background component tables.
"""

from __future__ import annotations

from fractions import Fraction

from spintensor import QI, Dual, Kind
from spintensor.evalnum import JetAssignment, Table, slot_action
from spintensor.frame import SIGNATURE, background_tables
from spintensor.symbols import (
    DELTA_G, EPS_BAR_INV, EPS_INV, SIGMA, SymbolDecl,
)

HALF = Dual(QI(Fraction(1, 2)))


def _d(v) -> Dual:
    return Dual.coerce(v)


def _zero44():
    return [[Dual(QI(0)) for _ in range(4)] for _ in range(4)]


class ConnectionVariationOracle:
    """All first-order data of the varied soldering/connection over one jet
    assignment (flat mode)."""

    def __init__(self, env: JetAssignment):
        bg = background_tables()
        self.eps_inv = bg[EPS_INV]
        self.eps_bar_inv = bg[EPS_BAR_INV]
        sigma = bg[SIGMA]
        dg0 = env.table_for(DELTA_G, 0)
        dg1 = env.table_for(DELTA_G, 1)

        def sig(a, A, Ap):
            return sigma.get((a, A, Ap), QI(0))

        def dgv(tbl, *key):
            return tbl.get(tuple(key), QI(0))

        # varied soldering and its background derivative (pure t-parts)
        self.sigma_t = {}
        self.dsigma_t = {}
        for a in range(4):
            for A in range(2):
                for Ap in range(2):
                    delta = QI(0)
                    for b in range(4):
                        delta = delta + sig(b, A, Ap) * SIGNATURE[b] \
                            * dgv(dg0, a, b) * Fraction(1, 2)
                    self.sigma_t[(a, A, Ap)] = Dual(sig(a, A, Ap), delta)
                    for h in range(4):
                        dd = QI(0)
                        for b in range(4):
                            dd = dd + sig(b, A, Ap) * SIGNATURE[b] \
                                * dgv(dg1, h, a, b) * Fraction(1, 2)
                        self.dsigma_t[(h, a, A, Ap)] = Dual(QI(0), dd)

        # varied inverse metric from the soldering square (consistency check)
        self.ginv_t = _zero44()
        for a in range(4):
            for b in range(4):
                acc = Dual(QI(0))
                for A in range(2):
                    for B in range(2):
                        e = self.eps_inv.get((A, B))
                        if not e:
                            continue
                        for Ap in range(2):
                            for Bp in range(2):
                                eb = self.eps_bar_inv.get((Ap, Bp))
                                if not eb:
                                    continue
                                acc = acc + self.sigma_t[(a, A, Ap)] \
                                    * self.sigma_t[(b, B, Bp)] * e * eb
                self.ginv_t[a][b] = acc
        for a in range(4):
            for b in range(4):
                expect = Dual(QI(SIGNATURE[a] if a == b else 0),
                              dgv(dg0, a, b))
                assert self.ginv_t[a][b] == expect, "gauge breaks the square"

        # varied metric (first-order inverse) and its derivative
        self.g_t = _zero44()
        self.dgdn_t = {}
        for a in range(4):
            for b in range(4):
                self.g_t[a][b] = Dual(
                    QI(SIGNATURE[a] if a == b else 0),
                    -QI(SIGNATURE[a] * SIGNATURE[b]) * dgv(dg0, a, b))
                for h in range(4):
                    self.dgdn_t[(h, a, b)] = Dual(
                        QI(0),
                        -QI(SIGNATURE[a] * SIGNATURE[b]) * dgv(dg1, h, a, b))
        for a in range(4):
            for b in range(4):
                acc = Dual(QI(0))
                for c in range(4):
                    acc = acc + self.g_t[a][c] * self.ginv_t[c][b]
                assert acc == Dual(QI(1 if a == b else 0)), "inverse drifted"

        # Christoffel variation: C^d_{ac} = (1/2) g^{db} (grad_a g_{cb}
        #   + grad_c g_{ab} - grad_b g_{ac}) at the varied metric
        self.c_t = {}
        for d in range(4):
            for a in range(4):
                for c in range(4):
                    acc = Dual(QI(0))
                    for b in range(4):
                        acc = acc + self.ginv_t[d][b] * (
                            self.dgdn_t[(a, c, b)] + self.dgdn_t[(c, a, b)]
                            - self.dgdn_t[(b, a, c)]) * HALF
                    self.c_t[(d, a, c)] = acc

        # lowered-and-raised soldering sigma_b^{JB'} at the varied metric
        slr = {}
        for b in range(4):
            for J in range(2):
                for Jp in range(2):
                    acc = Dual(QI(0))
                    for c in range(4):
                        gt = self.g_t[b][c]
                        for B in range(2):
                            e = self.eps_inv.get((J, B))
                            if not e:
                                continue
                            for Bp in range(2):
                                eb = self.eps_bar_inv.get((Jp, Bp))
                                if not eb:
                                    continue
                                acc = acc + gt * self.sigma_t[(c, B, Bp)] * e * eb
                    slr[(b, J, Jp)] = acc
        self.slr = slr

        # spinor connection halves per the connection-difference formula
        self.lam = {}      # [a][I][J], unprimed half
        self.lam_bar = {}  # [a][Ip][Jp], primed half
        for a in range(4):
            for I in range(2):
                for J in range(2):
                    acc = Dual(QI(0))
                    for b in range(4):
                        for Ap in range(2):
                            paren = self.dsigma_t[(a, b, I, Ap)]
                            for c in range(4):
                                paren = paren + self.c_t[(b, a, c)] \
                                    * self.sigma_t[(c, I, Ap)]
                            acc = acc + paren * slr[(b, J, Ap)]
                    self.lam[(a, I, J)] = acc * HALF
            for Ip in range(2):
                for Jp in range(2):
                    acc = Dual(QI(0))
                    for b in range(4):
                        for A in range(2):
                            paren = self.dsigma_t[(a, b, A, Ip)]
                            for c in range(4):
                                paren = paren + self.c_t[(b, a, c)] \
                                    * self.sigma_t[(c, A, Ip)]
                            acc = acc + paren * slr[(b, A, Jp)]
                    self.lam_bar[(a, Ip, Jp)] = acc * HALF

        # effective spinor action matrices: the full bispinor contracted the
        # way the spinor-slot operation traces it picks up the other half's
        # trace
        self.eff_lam = {}
        self.eff_lam_bar = {}
        for a in range(4):
            tr_bar = self.lam_bar[(a, 0, 0)] + self.lam_bar[(a, 1, 1)]
            tr = self.lam[(a, 0, 0)] + self.lam[(a, 1, 1)]
            for I in range(2):
                for J in range(2):
                    extra = tr_bar * HALF if I == J else Dual(QI(0))
                    self.eff_lam[(a, I, J)] = self.lam[(a, I, J)] + extra
                    extra2 = tr * HALF if I == J else Dual(QI(0))
                    self.eff_lam_bar[(a, I, J)] = self.lam_bar[(a, I, J)] + extra2

    def delta_nabla_components(self, decl: SymbolDecl, jet0: Table):
        """t-parts of the first-order change of nabla_a psi, slot-wise, as a
        table with a leading derivative axis."""
        lifted = {k: Dual(v) for k, v in jet0.items()}
        out: Table = {}
        for a in range(4):
            m = [[self.c_t[(e, a, c)] for e in range(4)] for c in range(4)]
            lam = [[self.eff_lam[(a, i, j)] for j in range(2)] for i in range(2)]
            lam_bar = [[self.eff_lam_bar[(a, i, j)] for j in range(2)]
                       for i in range(2)]
            acted = slot_action(decl, lifted, m, lam, lam_bar)
            for key, v in acted.items():
                if isinstance(v, Dual) and not v.b.is_zero():
                    out[(a,) + key] = v.b
        return out
