"""Dirichlet characters modulo q.

The unit group (Z/q)^* is split into cyclic slots, one per odd prime power
(generated by its smallest primitive root) and up to two for the power of
two (-1 of order 2 and 5 of order 2^(v-2) when v >= 3).  A character is an
exponent tuple against those generators, so

    chi(n) = exp(2 pi i * sum_i e_i * dlog_i(n) / d_i)

and every value is recomputed from an exact rational k / D, where D is the
exponent of the group.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator

import numpy as np

from .arith import FactoredModulus, modulus
from .errors import DomainError, ResourceError

__all__ = [
    "Slot",
    "UnitGroupStructure",
    "DirichletCharacter",
    "DEFAULT_STRUCTURE_CAP",
    "build_structure",
    "enumerate_characters",
    "evaluate",
    "conductor",
    "induce",
    "principal",
    "character_from_label",
    "root_of_unity",
]

DEFAULT_STRUCTURE_CAP = 10**7


@dataclass(frozen=True)
class Slot:
    """One cyclic factor of the unit group.

    ``generator`` is the local generator modulo ``prime_power``;
    ``lifted`` is the residue mod q that reduces to ``generator`` modulo
    ``prime_power`` and to 1 modulo every other prime power.
    """

    prime: int
    prime_power: int
    generator: int
    order: int
    lifted: int


def root_of_unity(k: int, d: int) -> complex:
    """exp(2 pi i k / d), exact at multiples of a quarter turn."""
    k %= d
    if (4 * k) % d == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[4 * k // d]
    return cmath.exp(2j * math.pi * k / d)


@functools.lru_cache(maxsize=64)
def _root_table(d: int) -> np.ndarray:
    k = np.arange(d)
    roots = np.exp(2j * np.pi * k / d)
    quarter = (4 * k) % d == 0
    roots[quarter] = np.array([1, 1j, -1, -1j])[(4 * k[quarter]) // d]
    roots.flags.writeable = False
    return roots


def _prime_divisors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _smallest_primitive_root(p: int, v: int) -> int:
    rs = _prime_divisors(p - 1)
    for g in range(2, p * p + 1):
        if g % p == 0:
            continue
        if any(pow(g, (p - 1) // r, p) == 1 for r in rs):
            continue
        if v >= 2 and pow(g, p - 1, p * p) == 1:
            continue
        return g
    raise AssertionError(f"no primitive root found mod {p}^{v}")


def _cyclic_dlog(g: int, order: int, pk: int) -> np.ndarray:
    table = np.full(pk, -1, dtype=np.int64)
    x = 1
    for e in range(order):
        table[x] = e
        x = x * g % pk
    return table


@dataclass(frozen=True, eq=False)
class UnitGroupStructure:
    """Generators and discrete-log tables for (Z/q)^*."""

    modulus: FactoredModulus
    generators: tuple[Slot, ...]
    dlog_tables: tuple[np.ndarray, ...]

    @property
    def q(self) -> int:
        return self.modulus.q

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(s.order for s in self.generators)

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.generators else 1

    @cached_property
    def unit_mask(self) -> np.ndarray:
        n = np.arange(self.q)
        mask = np.ones(self.q, dtype=bool)
        for p in self.modulus.primes:
            mask &= n % p != 0
        mask.flags.writeable = False
        return mask

    @cached_property
    def units(self) -> np.ndarray:
        u = np.flatnonzero(self.unit_mask)
        if self.q == 1:
            u = np.array([0])
        u.flags.writeable = False
        return u

    @cached_property
    def slot_matrix(self) -> np.ndarray:
        """dlog_i(n) for every slot i and residue 0 <= n < q (-1 off units)."""
        n = np.arange(self.q)
        mat = np.empty((len(self.generators), self.q), dtype=np.int64)
        for i, (slot, table) in enumerate(zip(self.generators, self.dlog_tables)):
            mat[i] = table[n % slot.prime_power]
        mat[:, ~self.unit_mask] = -1
        mat.flags.writeable = False
        return mat

    def dlog(self, n: int) -> tuple[int, ...] | None:
        """Exponent tuple of the unit n mod q, or None when gcd(n, q) > 1."""
        n %= self.q
        if self.q > 1 and math.gcd(n, self.q) != 1:
            return None
        return tuple(
            int(table[n % s.prime_power]) for s, table in zip(self.generators, self.dlog_tables)
        )

    def characters(self) -> Iterator["DirichletCharacter"]:
        return enumerate_characters(self)

    def character(self, exponents) -> "DirichletCharacter":
        return DirichletCharacter(self, tuple(int(e) for e in exponents))


@functools.lru_cache(maxsize=256)
def _build_structure(m: FactoredModulus) -> UnitGroupStructure:
    q = m.q
    slots = []
    tables = []
    for p, v in m.factors:
        pk = p**v
        rest = q // pk
        # CRT lift: g mod pk, 1 mod rest
        lift_coef = rest * pow(rest, -1, pk) if rest > 1 else 1

        def lift(g: int) -> int:
            if rest == 1:
                return g % q
            return (1 + (g - 1) * lift_coef) % q

        if p == 2:
            if v == 1:
                continue
            minus = np.full(pk, -1, dtype=np.int64)
            odd = np.arange(1, pk, 2)
            minus[odd] = (odd % 4 == 3).astype(np.int64)
            slots.append(Slot(2, pk, pk - 1, 2, lift(pk - 1)))
            tables.append(minus)
            if v >= 3:
                order = pk // 4
                five = _cyclic_dlog(5, order, pk)
                three_mod_four = np.arange(3, pk, 4)
                five[three_mod_four] = five[pk - three_mod_four]
                slots.append(Slot(2, pk, 5, order, lift(5)))
                tables.append(five)
        else:
            g = _smallest_primitive_root(p, v)
            order = (p - 1) * p ** (v - 1)
            slots.append(Slot(p, pk, g, order, lift(g)))
            tables.append(_cyclic_dlog(g, order, pk))
    for t in tables:
        t.flags.writeable = False
    return UnitGroupStructure(m, tuple(slots), tuple(tables))


def build_structure(
    m: FactoredModulus | int, cap: int = DEFAULT_STRUCTURE_CAP
) -> UnitGroupStructure:
    """Generators and dlog tables for (Z/q)^*; tables cost O(q) memory."""
    m = modulus(m)
    if m.q > cap:
        raise ResourceError(f"modulus {m.q} exceeds structure cap {cap}")
    return _build_structure(m)


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    structure: UnitGroupStructure
    exponents: tuple[int, ...]
    conductor: int = field(init=False)
    is_primitive: bool = field(init=False)

    def __post_init__(self) -> None:
        orders = self.structure.orders
        if len(self.exponents) != len(orders):
            raise DomainError(
                f"expected {len(orders)} exponents for q={self.q}, got {len(self.exponents)}"
            )
        if any(not 0 <= e < d for e, d in zip(self.exponents, orders)):
            raise DomainError(f"exponents {self.exponents} out of range for orders {orders}")
        f = _conductor(self.structure, self.exponents)
        object.__setattr__(self, "conductor", f)
        object.__setattr__(self, "is_primitive", f == self.q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        return self.q == other.q and self.exponents == other.exponents

    def __hash__(self) -> int:
        return hash((self.q, self.exponents))

    def __repr__(self) -> str:
        return f"DirichletCharacter({self.label!r})"

    @property
    def q(self) -> int:
        return self.structure.q

    @property
    def label(self) -> str:
        return f"{self.q}:" + ",".join(map(str, self.exponents))

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @cached_property
    def order(self) -> int:
        orders = self.structure.orders
        return math.lcm(1, *(d // math.gcd(e, d) for e, d in zip(self.exponents, orders)))

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.structure,
            tuple((-e) % d for e, d in zip(self.exponents, self.structure.orders)),
        )

    @cached_property
    def _weights(self) -> tuple[int, ...]:
        D = self.structure.exponent
        return tuple(e * (D // d) for e, d in zip(self.exponents, self.structure.orders))

    def phase(self, n: int) -> Fraction | None:
        """chi(n) as an exact fraction of a turn, None off the units."""
        k = self._phase_numerator(n)
        if k is None:
            return None
        return Fraction(k, self.structure.exponent)

    def _phase_numerator(self, n: int) -> int | None:
        logs = self.structure.dlog(n)
        if logs is None:
            return None
        return sum(w * l for w, l in zip(self._weights, logs)) % self.structure.exponent

    @cached_property
    def phase_table(self) -> np.ndarray:
        """Numerator k of chi(n) = e(k / exponent) for 0 <= n < q; -1 off units."""
        s = self.structure
        if s.generators:
            w = np.array(self._weights, dtype=np.int64)
            k = (w @ np.maximum(s.slot_matrix, 0)) % s.exponent
        else:
            k = np.zeros(s.q, dtype=np.int64)
        k[~s.unit_mask] = -1
        k.flags.writeable = False
        return k

    @cached_property
    def value_table(self) -> np.ndarray:
        """chi(n) for 0 <= n < q as a complex array."""
        k = self.phase_table
        roots = _root_table(self.structure.exponent)
        vals = np.where(k >= 0, roots[np.maximum(k, 0)], 0)
        vals.flags.writeable = False
        return vals

    def values(self, n: np.ndarray) -> np.ndarray:
        return self.value_table[np.asarray(n) % self.q]

    def __call__(self, n: int) -> complex:
        return evaluate(self, n)


def _conductor(s: UnitGroupStructure, exponents: tuple[int, ...]) -> int:
    f = 1
    i = 0
    for p, v in s.modulus.factors:
        if p == 2:
            if v == 1:
                continue
            a = exponents[i]
            b = exponents[i + 1] if v >= 3 else 0
            i += 2 if v >= 3 else 1
            if b:
                # 5 generates 1 + 4Z; chi trivial on 1 + 2^j Z iff 2^(v-j) | b
                f *= 2 ** (v - _valuation(b, 2))
            elif a:
                f *= 4
        else:
            e = exponents[i]
            i += 1
            if e:
                f *= p ** (v - min(_valuation(e, p), v - 1))
    return f


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def enumerate_characters(s: UnitGroupStructure) -> Iterator[DirichletCharacter]:
    """All phi(q) characters, lexicographic in exponents (principal first)."""
    for exps in itertools.product(*(range(d) for d in s.orders)):
        yield DirichletCharacter(s, exps)


def evaluate(chi: DirichletCharacter, n: int) -> complex:
    k = chi._phase_numerator(int(n))
    if k is None:
        return 0j
    return root_of_unity(k, chi.structure.exponent)


def conductor(chi: DirichletCharacter) -> int:
    return chi.conductor


def principal(q: int | FactoredModulus) -> DirichletCharacter:
    s = build_structure(q)
    return DirichletCharacter(s, (0,) * len(s.generators))


def induce(chi0: DirichletCharacter, q: int | FactoredModulus) -> DirichletCharacter:
    """The character mod q induced by ``chi0`` (its modulus must divide q)."""
    m = modulus(q)
    if m.q % chi0.q:
        raise DomainError(f"{chi0.q} does not divide {m.q}")
    s = build_structure(m)
    exps = []
    for slot in s.generators:
        ph = chi0.phase(slot.lifted % chi0.q if chi0.q > 1 else 0)
        e = ph * slot.order
        if e.denominator != 1:
            raise AssertionError("induced exponent is not integral")
        exps.append(int(e) % slot.order)
    return DirichletCharacter(s, tuple(exps))


def character_from_label(label: str) -> DirichletCharacter:
    """Parse the "q:e1,e2,...,ek" label form."""
    try:
        q_text, _, exps_text = label.partition(":")
        q = int(q_text)
        exps = tuple(int(e) for e in exps_text.split(",")) if exps_text.strip() else ()
    except ValueError as exc:
        raise DomainError(f"bad character label {label!r}") from exc
    if q < 1:
        raise DomainError(f"bad character label {label!r}")
    return DirichletCharacter(build_structure(q), exps)
