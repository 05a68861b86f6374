"""Symbol declarations: rank signatures, slot symmetries, and the built-in
background objects (spinor metrics, Kroneckers, soldering form, metric,
curvature, metric variation)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .indices import Kind


class DeclarationError(ValueError):
    pass


@dataclass(frozen=True)
class RankSignature:
    """Slot counts (tensor up, tensor down | spinor up, spinor down ;
    primed up, primed down).  Canonical slot order groups the six blocks in
    that sequence."""

    tup: int = 0
    tdn: int = 0
    sup: int = 0
    sdn: int = 0
    pup: int = 0
    pdn: int = 0

    def __post_init__(self):
        if min(self.tup, self.tdn, self.sup, self.sdn, self.pup, self.pdn) < 0:
            raise DeclarationError("negative slot count")

    def slot_shape(self) -> tuple[tuple[Kind, bool], ...]:
        blocks = (
            (Kind.TENSOR, True, self.tup),
            (Kind.TENSOR, False, self.tdn),
            (Kind.SPINOR, True, self.sup),
            (Kind.SPINOR, False, self.sdn),
            (Kind.PRIMED, True, self.pup),
            (Kind.PRIMED, False, self.pdn),
        )
        return tuple((k, up) for k, up, n in blocks for _ in range(n))

    @property
    def n_slots(self) -> int:
        return self.tup + self.tdn + self.sup + self.sdn + self.pup + self.pdn

    def __add__(self, other: "RankSignature") -> "RankSignature":
        return RankSignature(
            self.tup + other.tup, self.tdn + other.tdn,
            self.sup + other.sup, self.sdn + other.sdn,
            self.pup + other.pup, self.pdn + other.pdn,
        )

    def conjugated(self) -> "RankSignature":
        return RankSignature(self.tup, self.tdn, self.pup, self.pdn, self.sup, self.sdn)

    def __str__(self):
        return (f"({self.tup},{self.tdn}|{self.sup},{self.sdn};"
                f"{self.pup},{self.pdn})")


# one index of each kind and variance: the rank every operation adds
OP_RANK_INCREMENT = RankSignature(1, 1, 1, 1, 1, 1)

Permutation = tuple[int, ...]
SignedPerm = tuple[Permutation, int]


def _compose(p: Permutation, q: Permutation) -> Permutation:
    # apply q first, then p
    return tuple(p[q[i]] for i in range(len(p)))


def close_group(n_slots: int, generators: list[SignedPerm]) -> frozenset[SignedPerm]:
    """Close a set of signed slot permutations under composition."""
    ident: SignedPerm = (tuple(range(n_slots)), 1)
    group = {ident}
    frontier = [ident]
    gens = list(generators)
    while frontier:
        perm, sign = frontier.pop()
        for gp, gs in gens:
            cand = (_compose(gp, perm), gs * sign)
            if cand not in group:
                opposite = (cand[0], -cand[1])
                if opposite in group:
                    raise DeclarationError(
                        "inconsistent symmetries: a slot permutation is both "
                        "symmetric and antisymmetric")
                group.add(cand)
                frontier.append(cand)
    return frozenset(group)


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    signature: RankSignature
    symmetry_group: frozenset[SignedPerm]
    category: str = "dynamical-field"  # or background / variation / killing / curvature
    conjugate_of: Optional[str] = None
    # backgrounds annihilated by the covariant derivative
    nabla_kills: bool = False

    CATEGORIES = ("dynamical-field", "background", "variation", "killing", "curvature")

    def __post_init__(self):
        if self.category not in self.CATEGORIES:
            raise DeclarationError(f"unknown category {self.category!r}")
        for perm, sign in self.symmetry_group:
            if len(perm) != self.signature.n_slots or sign not in (1, -1):
                raise DeclarationError(f"bad symmetry for {self.name}")
            shape = self.signature.slot_shape()
            for i, j in enumerate(perm):
                if shape[i] != shape[j]:
                    raise DeclarationError(
                        f"symmetry of {self.name} permutes incompatible slots")

    @property
    def carries_derivs(self) -> bool:
        return not self.nabla_kills

    def odd_elements(self) -> list[Permutation]:
        return [p for p, s in self.symmetry_group if s < 0]


def _decl(name, sig, gens=(), category="background", conj=None, kills=False):
    group = close_group(sig.n_slots, list(gens))
    return SymbolDecl(name, sig, group, category, conj, kills)


def _swap(n, i, j, sign) -> SignedPerm:
    perm = list(range(n))
    perm[i], perm[j] = perm[j], perm[i]
    return (tuple(perm), sign)


class SymbolTable:
    """Registry of declared symbols.  Always contains the built-ins."""

    def __init__(self):
        self._symbols: dict[str, SymbolDecl] = {}
        for decl in _builtin_decls():
            self._symbols[decl.name] = decl

    def __contains__(self, name: str) -> bool:
        return name in self._symbols

    def __getitem__(self, name: str) -> SymbolDecl:
        try:
            return self._symbols[name]
        except KeyError:
            raise DeclarationError(f"unknown symbol {name!r}") from None

    def declare(self, decl: SymbolDecl) -> SymbolDecl:
        if decl.name in self._symbols:
            raise DeclarationError(f"symbol {decl.name!r} already declared")
        self._symbols[decl.name] = decl
        return decl

    def declare_field(self, name, sig, gens=(), conj=None):
        return self.declare(_decl(name, sig, gens, "dynamical-field", conj))

    def declare_background(self, name, sig, gens=(), conj=None, kills=True):
        return self.declare(_decl(name, sig, gens, "background", conj, kills))

    def names(self):
        return sorted(self._symbols)

    def dynamical_fields(self) -> list[SymbolDecl]:
        return [d for d in self._symbols.values() if d.category == "dynamical-field"]

    def conjugate_decl(self, decl: SymbolDecl) -> SymbolDecl:
        if decl.conjugate_of is None:
            raise DeclarationError(f"{decl.name} has no declared conjugate")
        return self[decl.conjugate_of]

    # -- declaration file ----------------------------------------------------

    _RANK_RE = re.compile(
        r"rank\((\d+),(\d+)\|(\d+),(\d+);(\d+),(\d+)\)")
    _SYM_RE = re.compile(r"(antisym|sym)\((\d+),(\d+)\)")

    def load_declarations(self, text: str) -> list[SymbolDecl]:
        """Parse declaration lines of the form

            field|background NAME rank(i,j|k,l;m,n) [sym(p,q)|antisym(p,q)]* [conj NAME2]
        """
        declared = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if tokens[0] not in ("field", "background"):
                raise DeclarationError(
                    f"line {lineno}: expected 'field' or 'background', got {tokens[0]!r}")
            if len(tokens) < 3:
                raise DeclarationError(f"line {lineno}: incomplete declaration")
            name = tokens[1]
            m = self._RANK_RE.fullmatch(tokens[2])
            if not m:
                raise DeclarationError(f"line {lineno}: bad rank syntax {tokens[2]!r}")
            sig = RankSignature(*map(int, m.groups()))
            gens: list[SignedPerm] = []
            conj = None
            rest = tokens[3:]
            i = 0
            while i < len(rest):
                tok = rest[i]
                sm = self._SYM_RE.fullmatch(tok)
                if sm:
                    kind, p, q = sm.group(1), int(sm.group(2)), int(sm.group(3))
                    if not (0 <= p < sig.n_slots and 0 <= q < sig.n_slots and p != q):
                        raise DeclarationError(f"line {lineno}: bad slot pair in {tok}")
                    gens.append(_swap(sig.n_slots, p, q, -1 if kind == "antisym" else 1))
                    i += 1
                elif tok == "conj":
                    if i + 1 >= len(rest):
                        raise DeclarationError(f"line {lineno}: conj needs a name")
                    conj = rest[i + 1]
                    i += 2
                else:
                    raise DeclarationError(f"line {lineno}: unexpected token {tok!r}")
            category = "dynamical-field" if tokens[0] == "field" else "background"
            kills = tokens[0] == "background"
            declared.append(self.declare(_decl(name, sig, gens, category, conj, kills)))
        # validate conjugate wiring
        for decl in declared:
            if decl.conjugate_of is not None:
                partner = self[decl.conjugate_of]
                if partner.signature != decl.signature.conjugated():
                    raise DeclarationError(
                        f"conjugate signature mismatch: {decl.name} vs {partner.name}")
        return declared


# Built-in symbol names.
EPS = "eps"            # spinor metric, two lower unprimed, antisymmetric
EPS_BAR = "epsBar"     # primed spinor metric, two lower primed
EPS_INV = "epsInv"     # inverse spinor metric, two upper unprimed
EPS_BAR_INV = "epsBarInv"
DELTA = "delta"        # tensor Kronecker (up, down)
DELTA_S = "deltaS"     # unprimed spinor Kronecker
DELTA_S_BAR = "deltaSBar"
SIGMA = "sigma"        # soldering form: tensor up, spinor down, primed down
METRIC = "g"           # metric, two lower, symmetric
METRIC_INV = "gInv"    # inverse metric, two upper, symmetric
RIEMANN = "R"          # curvature, four lower, antisymmetric in both pairs
DELTA_G = "dg"         # metric variation, two upper, symmetric

KRONECKERS = {DELTA: Kind.TENSOR, DELTA_S: Kind.SPINOR, DELTA_S_BAR: Kind.PRIMED}
# backgrounds the covariant derivative annihilates
NABLA_KILLED = frozenset(
    {EPS, EPS_BAR, EPS_INV, EPS_BAR_INV, DELTA, DELTA_S, DELTA_S_BAR,
     SIGMA, METRIC, METRIC_INV})


def _builtin_decls() -> list[SymbolDecl]:
    two_lower_s = RankSignature(sdn=2)
    two_upper_s = RankSignature(sup=2)
    two_lower_p = RankSignature(pdn=2)
    two_upper_p = RankSignature(pup=2)
    anti = [_swap(2, 0, 1, -1)]
    sym = [_swap(2, 0, 1, 1)]
    return [
        _decl(EPS, two_lower_s, anti, "background", EPS_BAR, kills=True),
        _decl(EPS_BAR, two_lower_p, anti, "background", EPS, kills=True),
        _decl(EPS_INV, two_upper_s, anti, "background", EPS_BAR_INV, kills=True),
        _decl(EPS_BAR_INV, two_upper_p, anti, "background", EPS_INV, kills=True),
        _decl(DELTA, RankSignature(tup=1, tdn=1), [], "background", DELTA, kills=True),
        _decl(DELTA_S, RankSignature(sup=1, sdn=1), [], "background", DELTA_S_BAR, kills=True),
        _decl(DELTA_S_BAR, RankSignature(pup=1, pdn=1), [], "background", DELTA_S, kills=True),
        _decl(SIGMA, RankSignature(tup=1, sdn=1, pdn=1), [], "background", SIGMA, kills=True),
        _decl(METRIC, RankSignature(tdn=2), sym, "background", METRIC, kills=True),
        _decl(METRIC_INV, RankSignature(tup=2), sym, "background", METRIC_INV, kills=True),
        _decl(RIEMANN, RankSignature(tdn=4),
              [_swap(4, 0, 1, -1), _swap(4, 2, 3, -1)], "curvature", RIEMANN),
        _decl(DELTA_G, RankSignature(tup=2), sym, "variation", DELTA_G, kills=False),
    ]
