"""Twisted sums of mu and Lambda.

Every character, additive and progression sum over n <= x is reduced to the
q residue-class sums D_q(x, b) = sum of f(n) over n <= x with n = b mod q.
For f = mu these are exact integers; for f = Lambda each class is summed
with math.fsum.  The twist is then applied to q numbers only, which is what
lets max_over_characters handle all phi(q) characters in one sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .arith import FactoredModulus, SieveTable, modulus
from .characters import (
    DirichletCharacter,
    _root_table,
    build_structure,
    enumerate_characters,
)
from .errors import DomainError, RangeError, ResourceError
from .point import ComplexPoint

__all__ = [
    "TwistedSumResult",
    "MaxOverCharacters",
    "class_sums",
    "mobius_sum",
    "psi_sum",
    "character_sums",
    "max_over_characters",
    "exp_sum",
    "progression_sum",
    "max_exp_sum",
    "max_progression_sum",
    "dirichlet_poly",
    "dyadic_block",
    "walsh_coefficient",
    "DEFAULT_POLY_CAP",
    "MAX_T_LOG_N",
    "WALSH_MAX_BITS",
]

Kind = Literal["mobius", "psi"]

DEFAULT_POLY_CAP = 10**8
MAX_T_LOG_N = 1e9
WALSH_MAX_BITS = 30
_CHUNK = 1 << 20
_MATRIX_BUDGET = 1 << 22


@dataclass(frozen=True)
class TwistedSumResult:
    value: complex
    x: float
    character_label: str

    @property
    def normalized(self) -> float:
        return abs(self.value) / self.x


@dataclass(frozen=True)
class MaxOverCharacters:
    """Maximum of |sum| over a family; ``argmax_label`` is the first
    member attaining it in enumeration order (a character label, or the
    residue a for additive and progression families)."""

    value: float
    argmax_label: str
    q: int
    x: float = 0.0
    kind: str = ""

    @property
    def normalized(self) -> float:
        return self.value / self.x if self.x else math.nan


def _weights(kind: str, t: SieveTable) -> np.ndarray:
    if kind == "mobius":
        return t.mu
    if kind == "psi":
        return t.lambda_log
    raise DomainError(f"unknown sum kind {kind!r}")


def class_sums(x: float, q: int, kind: Kind, t: SieveTable) -> np.ndarray:
    """D[b] = sum of f(n) for 1 <= n <= x, n = b mod q.

    Integer-valued for mobius (returned as int64), float for psi.
    """
    if q < 1:
        raise DomainError(f"modulus must be >= 1, got {q}")
    n = t.check(x)
    w = _weights(kind, t)[1 : n + 1]
    idx = np.flatnonzero(w)
    residues = (idx + 1) % q
    if kind == "mobius":
        pos = np.bincount(residues[w[idx] > 0], minlength=q)
        neg = np.bincount(residues[w[idx] < 0], minlength=q)
        return pos.astype(np.int64) - neg.astype(np.int64)
    vals = w[idx]
    order = np.argsort(residues, kind="stable")
    residues = residues[order]
    vals = vals[order]
    bounds = np.searchsorted(residues, np.arange(q + 1))
    out = np.zeros(q, dtype=np.float64)
    for b in np.flatnonzero(np.diff(bounds)):
        out[b] = math.fsum(vals[bounds[b] : bounds[b + 1]].tolist())
    return out


def _twist(weights: np.ndarray, classes: np.ndarray) -> complex:
    """sum_b weights[b] * classes[b] with exactly rounded real and imaginary parts."""
    nz = np.flatnonzero((weights != 0) & (classes != 0))
    w = weights[nz]
    c = classes[nz].astype(np.float64)
    re = math.fsum((w.real * c).tolist())
    im = math.fsum((w.imag * c).tolist())
    return complex(re, im)


def _character_sum(x: float, chi: DirichletCharacter, kind: Kind, t: SieveTable) -> TwistedSumResult:
    D = class_sums(x, chi.q, kind, t)
    return TwistedSumResult(_twist(chi.value_table, D), float(x), chi.label)


def mobius_sum(x: float, chi: DirichletCharacter, t: SieveTable) -> TwistedSumResult:
    """M(x, chi) = sum_{n <= x} mu(n) chi(n)."""
    return _character_sum(x, chi, "mobius", t)


def psi_sum(x: float, chi: DirichletCharacter, t: SieveTable) -> TwistedSumResult:
    """psi(x, chi) = sum_{n <= x} Lambda(n) chi(n)."""
    return _character_sum(x, chi, "psi", t)


def character_sums(
    x: float, q: int | FactoredModulus, kind: Kind, t: SieveTable
) -> tuple[list[DirichletCharacter], np.ndarray]:
    """The sums for every character mod q, in enumeration order."""
    s = build_structure(q)
    chars = list(enumerate_characters(s))
    D = class_sums(x, s.q, kind, t)
    units = s.units
    Du = D[units].astype(np.complex128)
    D_exp = s.exponent
    roots = _root_table(D_exp)
    if s.generators:
        W = np.array([c._weights for c in chars], dtype=np.int64)
        L = s.slot_matrix[:, units]
    out = np.empty(len(chars), dtype=np.complex128)
    rows = max(1, _MATRIX_BUDGET // max(1, len(units)))
    for lo in range(0, len(chars), rows):
        hi = min(lo + rows, len(chars))
        if s.generators:
            phases = (W[lo:hi] @ L) % D_exp
        else:
            phases = np.zeros((hi - lo, len(units)), dtype=np.int64)
        out[lo:hi] = roots[phases] @ Du
    return chars, out


def _first_max(values: np.ndarray) -> int:
    mags = np.abs(values)
    top = mags.max()
    return int(np.flatnonzero(mags >= top - 1e-9 * max(1.0, top))[0])


def max_over_characters(
    x: float, q: int | FactoredModulus, kind: Kind, t: SieveTable
) -> MaxOverCharacters:
    """max over characters chi mod q of |M(x, chi)| (or |psi(x, chi)|)."""
    chars, vals = character_sums(x, q, kind, t)
    i = _first_max(vals)
    # re-evaluate the winner with exactly rounded accumulation
    winner = _character_sum(x, chars[i], kind, t).value
    return MaxOverCharacters(abs(winner), chars[i].label, chars[i].q, float(x), kind)


def exp_sum(x: float, q: int, a: int, t: SieveTable) -> complex:
    """S_q(x, a) = sum_{n <= x} mu(n) exp(2 pi i a n / q)."""
    D = class_sums(x, q, "mobius", t)
    phases = (a * np.arange(q)) % q
    return _twist(_root_table(q)[phases], D)


def progression_sum(x: float, q: int, a: int, t: SieveTable) -> int:
    """D_q(x, a) = sum of mu(n) over n <= x with n = a mod q."""
    return int(class_sums(x, q, "mobius", t)[a % q])


def max_exp_sum(x: float, q: int, t: SieveTable) -> MaxOverCharacters:
    """max over a mod q of |S_q(x, a)|."""
    D = class_sums(x, q, "mobius", t)
    nz = np.flatnonzero(D)
    Dn = D[nz].astype(np.complex128)
    roots = _root_table(q)
    vals = np.empty(q, dtype=np.complex128)
    rows = max(1, _MATRIX_BUDGET // max(1, len(nz)))
    for lo in range(0, q, rows):
        a = np.arange(lo, min(lo + rows, q))
        vals[lo : lo + len(a)] = roots[np.outer(a, nz) % q] @ Dn
    i = _first_max(vals)
    return MaxOverCharacters(abs(exp_sum(x, q, i, t)), str(i), q, float(x), "exp")


def max_progression_sum(x: float, q: int, t: SieveTable) -> MaxOverCharacters:
    """max over a coprime to q of |D_q(x, a)|."""
    D = class_sums(x, q, "mobius", t)
    units = build_structure(q).units if q > 1 else np.array([0])
    mags = np.abs(D[units])
    i = int(np.argmax(mags))
    return MaxOverCharacters(float(mags[i]), str(int(units[i])), q, float(x), "progression")


def _power_sum(lo: int, hi: int, chi: DirichletCharacter, s: complex) -> complex:
    """sum_{lo < n <= hi} chi(n) n^(-s), per-term exp(-s log n)."""
    re_parts = []
    im_parts = []
    for a in range(lo + 1, hi + 1, _CHUNK):
        n = np.arange(a, min(a + _CHUNK, hi + 1), dtype=np.int64)
        c = chi.values(n)
        keep = c != 0
        n, c = n[keep], c[keep]
        logn = np.log(n.astype(np.float64))
        terms = c * np.exp(-s.real * logn) * np.exp(-1j * s.imag * logn)
        re_parts.append(float(terms.real.sum()))
        im_parts.append(float(terms.imag.sum()))
    return complex(math.fsum(re_parts), math.fsum(im_parts))


def dirichlet_poly(
    M: float, N: float, t: float, chi: DirichletCharacter, cap: int = DEFAULT_POLY_CAP
) -> complex:
    """T_chi(M, N; t) = sum_{M < n <= M + N} chi(n) n^(i t)."""
    if M < 0 or N < 1:
        raise DomainError(f"need M >= 0 and N >= 1, got M={M}, N={N}")
    hi = math.floor(M + N)
    if hi > cap:
        raise ResourceError(f"M + N = {hi} exceeds cap {cap}")
    if abs(t) * math.log(max(hi, 2)) > MAX_T_LOG_N:
        raise DomainError(f"|t| log(M + N) exceeds {MAX_T_LOG_N:g}")
    return _power_sum(math.floor(M), hi, chi, complex(0.0, -t))


def dyadic_block(
    M: float, s: ComplexPoint | complex, chi: DirichletCharacter, cap: int = DEFAULT_POLY_CAP
) -> complex:
    """U_chi(M) = sum_{M < n <= 2M} chi(n) n^(-s)."""
    p = ComplexPoint.of(s)
    if M < 0:
        raise DomainError(f"need M >= 0, got {M}")
    hi = math.floor(2 * M)
    if hi > cap:
        raise ResourceError(f"2M = {hi} exceeds cap {cap}")
    if abs(p.t) * math.log(max(hi, 2)) > MAX_T_LOG_N:
        raise DomainError(f"|t| log(2M) exceeds {MAX_T_LOG_N:g}")
    return _power_sum(math.floor(M), hi, chi, p.s)


def _mask(A: Iterable[int] | int, n: int) -> int:
    if isinstance(A, (int, np.integer)):
        mask = int(A)
        if mask < 0 or mask >> n:
            raise DomainError(f"mask {mask:#x} has bits outside 0..{n - 1}")
        return mask
    mask = 0
    for j in A:
        if not 0 <= j < n:
            raise DomainError(f"index {j} outside 0..{n - 1}")
        mask |= 1 << j
    return mask


def walsh_coefficient(
    n: int, A: Iterable[int] | int, t: SieveTable, mu_zero: int = 0
) -> int:
    """Fourier-Walsh coefficient of mu on n bits for the index set A.

    Equal to sum_{m < 2^n} mu(m) (-1)^popcount(m & mask(A)).  The term
    m = 0 uses ``mu_zero`` since mu(0) is undefined.
    ``A`` may be an iterable of bit indices or an integer mask.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n > WALSH_MAX_BITS:
        raise ResourceError(f"n = {n} exceeds the 2^{WALSH_MAX_BITS} enumeration cap")
    top = (1 << n) - 1
    if top > t.limit:
        raise RangeError(f"sieve limit {t.limit} < 2^{n} - 1")
    mask = _mask(A, n)
    m = np.arange(top + 1, dtype=np.int64)
    mu = t.mu[: top + 1].astype(np.int64)
    sign = 1 - 2 * (np.bitwise_count(m & mask) & 1).astype(np.int64)
    return int((mu[1:] * sign[1:]).sum()) + mu_zero * int(sign[0])
