"""Abstract indices: three kinds (tensor, unprimed spinor, primed spinor),
two variances, and the reserved namespace for internal dummy names."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable


class Kind(enum.Enum):
    TENSOR = "tensor"
    SPINOR = "spinor"
    PRIMED = "primed"

    @property
    def dim(self) -> int:
        return 4 if self is Kind.TENSOR else 2


# Internal dummy names start with '!', which the DSL grammar cannot produce,
# so user-facing free names can never collide with them.
DUMMY_PREFIX = "!"


def is_dummy_name(name: str) -> bool:
    return name.startswith(DUMMY_PREFIX)


@dataclass(frozen=True)
class Index:
    name: str
    kind: Kind
    up: bool

    def with_name(self, name: str) -> "Index":
        return Index(name, self.kind, self.up)

    def dual(self) -> "Index":
        return Index(self.name, self.kind, not self.up)

    def conjugated(self) -> "Index":
        if self.kind is Kind.TENSOR:
            return self
        kind = Kind.PRIMED if self.kind is Kind.SPINOR else Kind.SPINOR
        return Index(self.name, kind, self.up)

    def __str__(self):
        mark = "^" if self.up else "_"
        prime = "'" if self.kind is Kind.PRIMED else ""
        return f"{mark}{self.name}{prime}"


class NameSupply:
    """Deterministic fresh-name generator avoiding a given set of names."""

    def __init__(self, avoid: Iterable[str] = ()):
        self._avoid = set(avoid)
        self._counter = 0

    def avoid(self, names: Iterable[str]) -> "NameSupply":
        self._avoid.update(names)
        return self

    def fresh(self, base: str) -> str:
        if base not in self._avoid and not is_dummy_name(base):
            self._avoid.add(base)
            return base
        while True:
            cand = f"{base}{self._counter}"
            self._counter += 1
            if cand not in self._avoid:
                self._avoid.add(cand)
                return cand
