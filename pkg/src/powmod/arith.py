"""Integer substrate: factorization, admissibility of powerful moduli, and
the Möbius / von Mangoldt sieve.

The sieve is built segment by segment using only the primes up to the
square root of the limit, so the full table is never held in more than
one temporary working buffer at a time.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, RangeError, ResourceError

__all__ = [
    "FactoredModulus",
    "SieveTable",
    "UNIT_MODULUS",
    "factor",
    "modulus",
    "is_admissible",
    "build_sieve",
    "mertens",
    "save_sieve",
    "load_sieve",
    "cached_sieve",
    "DEFAULT_SIEVE_CAP",
]

DEFAULT_SIEVE_CAP = 10**8
SEGMENT_LENGTH = 1 << 22

_CACHE_MAGIC = b"PMSV"
_CACHE_VERSION = 1
_CACHE_HEADER = struct.Struct("<4sIQ")


@dataclass(frozen=True)
class FactoredModulus:
    """A modulus together with its prime factorization.

    ``gamma`` and ``gamma_min`` are the largest and smallest p-adic
    valuations; ``core`` is the product of the distinct primes.
    The unit modulus q = 1 is represented with an empty factor list.
    """

    q: int
    factors: tuple[tuple[int, int], ...]
    gamma: int = field(init=False)
    gamma_min: int = field(init=False)
    core: int = field(init=False)

    def __post_init__(self) -> None:
        exps = [v for _, v in self.factors]
        object.__setattr__(self, "gamma", max(exps, default=0))
        object.__setattr__(self, "gamma_min", min(exps, default=0))
        object.__setattr__(self, "core", math.prod(p for p, _ in self.factors))
        if math.prod(p**v for p, v in self.factors) != self.q:
            raise DomainError(f"factors {self.factors} do not multiply to {self.q}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def prime_powers(self) -> tuple[int, ...]:
        return tuple(p**v for p, v in self.factors)

    def phi(self) -> int:
        return math.prod((p - 1) * p ** (v - 1) for p, v in self.factors)

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "*".join(f"{p}^{v}" if v > 1 else str(p) for p, v in self.factors)


UNIT_MODULUS = FactoredModulus(1, ())


def factor(q: int) -> FactoredModulus:
    """Factor ``q >= 2`` by trial division.

    The moduli of interest are smooth by construction, so trial division
    terminates quickly; no attempt is made to handle large semiprimes.
    """
    q = _as_int(q, "q")
    if q < 2:
        raise DomainError(f"factor() needs q >= 2, got {q}")
    factors = []
    n = q
    for p in (2, 3):
        if n % p == 0:
            v = 0
            while n % p == 0:
                n //= p
                v += 1
            factors.append((p, v))
    p = 5
    step = 2
    while p * p <= n:
        if n % p == 0:
            v = 0
            while n % p == 0:
                n //= p
                v += 1
            factors.append((p, v))
        p += step
        step = 6 - step
    if n > 1:
        factors.append((n, 1))
    return FactoredModulus(q, tuple(factors))


def modulus(q: int | FactoredModulus) -> FactoredModulus:
    """Coerce ``q`` to a FactoredModulus, accepting q = 1."""
    if isinstance(q, FactoredModulus):
        return q
    q = _as_int(q, "q")
    if q == 1:
        return UNIT_MODULUS
    return factor(q)


def is_admissible(m: FactoredModulus, gamma0: int = 10) -> bool:
    """Powerful-modulus test: min valuation >= 0.7 * max valuation and
    max valuation >= gamma0, done in integers as 10*gamma_min >= 7*gamma."""
    if not m.factors:
        return False
    return 10 * m.gamma_min >= 7 * m.gamma and m.gamma >= gamma0


@dataclass(frozen=True, eq=False)
class SieveTable:
    """mu, Lambda and smallest prime factor for 0 <= n <= limit.

    Index 0 holds mu = 0, Lambda = 0, spf = 0; index 1 holds spf = 1.
    Arrays are read-only.
    """

    limit: int
    mu: np.ndarray
    lambda_log: np.ndarray
    spf: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.mu, self.lambda_log, self.spf):
            if arr.shape != (self.limit + 1,):
                raise DomainError("sieve arrays must have length limit + 1")
            arr.flags.writeable = False

    def check(self, x: float) -> int:
        """Return floor(x), raising RangeError when it exceeds the table."""
        n = math.floor(x)
        if n > self.limit:
            raise RangeError(f"cutoff {n} exceeds sieve limit {self.limit}")
        return max(n, 0)


def _as_int(v, name: str) -> int:
    if isinstance(v, (bool, np.bool_)):
        raise DomainError(f"{name} must be an integer")
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise DomainError(f"{name} must be an integer, got {v!r}")


def _small_primes(bound: int) -> np.ndarray:
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(bound + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(bound) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return np.flatnonzero(flags).astype(np.int64)


def _sieve_segment(lo: int, hi: int, primes: np.ndarray):
    """mu, Lambda, spf for lo <= n < hi using primes up to sqrt(hi - 1)."""
    size = hi - lo
    n = np.arange(lo, hi, dtype=np.int64)
    mu = np.ones(size, dtype=np.int8)
    rad = np.ones(size, dtype=np.int64)
    spf = np.zeros(size, dtype=np.int64)
    lam = np.zeros(size, dtype=np.float64)
    for p in primes.tolist():
        start = (-lo) % p
        mu[start::p] *= -1
        rad[start::p] *= p
        view = spf[start::p]
        view[view == 0] = p
        pp = p * p
        mu[(-lo) % pp :: pp] = 0
        logp = math.log(p)
        pk = pp
        while pk < hi:
            if pk >= lo:
                lam[pk - lo] = logp
            pk *= p
    # a squarefree n with rad < n has exactly one prime factor above sqrt(limit)
    big = (rad != n) & (mu != 0)
    mu[big] *= -1
    unmarked = (spf == 0) & (n >= 2)
    spf[unmarked] = n[unmarked]
    prime = (spf == n) & (n >= 2)
    lam[prime] = np.log(n[prime].astype(np.float64))
    if lo == 0:
        mu[0] = 0
        spf[0] = 0
        if size > 1:
            spf[1] = 1
    return mu, lam, spf


def build_sieve(limit: int, cap: int = DEFAULT_SIEVE_CAP) -> SieveTable:
    """Sieve mu, Lambda and smallest prime factors up to ``limit``."""
    limit = _as_int(limit, "limit")
    if limit < 1:
        raise DomainError(f"sieve limit must be >= 1, got {limit}")
    if limit > cap:
        raise ResourceError(f"sieve limit {limit} exceeds cap {cap}")
    primes = _small_primes(math.isqrt(limit))
    mu = np.empty(limit + 1, dtype=np.int8)
    lam = np.empty(limit + 1, dtype=np.float64)
    spf = np.empty(limit + 1, dtype=np.uint32)
    for lo in range(0, limit + 1, SEGMENT_LENGTH):
        hi = min(lo + SEGMENT_LENGTH, limit + 1)
        m, lm, s = _sieve_segment(lo, hi, primes)
        mu[lo:hi] = m
        lam[lo:hi] = lm
        spf[lo:hi] = s
    return SieveTable(limit, mu, lam, spf)


def mertens(x: float, t: SieveTable) -> int:
    """M(x) = sum of mu(n) over 1 <= n <= x."""
    n = t.check(x)
    return int(t.mu[1 : n + 1].sum(dtype=np.int64))


def save_sieve(t: SieveTable, path: str | os.PathLike) -> None:
    """Dump ``t`` as: 16-byte header ("PMSV", u32 version, u64 limit),
    then mu as int8, spf as uint32 and Lambda as float64, all little-endian."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_HEADER.pack(_CACHE_MAGIC, _CACHE_VERSION, t.limit))
        fh.write(t.mu.astype("<i1").tobytes())
        fh.write(t.spf.astype("<u4").tobytes())
        fh.write(t.lambda_log.astype("<f8").tobytes())


def load_sieve(path: str | os.PathLike) -> SieveTable:
    with open(path, "rb") as fh:
        header = fh.read(_CACHE_HEADER.size)
        if len(header) != _CACHE_HEADER.size:
            raise DomainError(f"{path}: truncated sieve cache header")
        magic, version, limit = _CACHE_HEADER.unpack(header)
        if magic != _CACHE_MAGIC or version != _CACHE_VERSION:
            raise DomainError(f"{path}: not a version-{_CACHE_VERSION} sieve cache")
        count = limit + 1
        mu = np.fromfile(fh, dtype="<i1", count=count).astype(np.int8)
        spf = np.fromfile(fh, dtype="<u4", count=count).astype(np.uint32)
        lam = np.fromfile(fh, dtype="<f8", count=count).astype(np.float64)
    if len(mu) != count or len(spf) != count or len(lam) != count:
        raise DomainError(f"{path}: truncated sieve cache body")
    return SieveTable(int(limit), mu, lam, spf)


def cached_sieve(limit: int, cap: int = DEFAULT_SIEVE_CAP) -> SieveTable:
    """Build a sieve, reusing a dump under $POWMOD_SIEVE_CACHE when set.

    Any cached table with limit >= ``limit`` is accepted; the smallest
    such file wins.
    """
    cache_dir = os.environ.get("POWMOD_SIEVE_CACHE")
    if not cache_dir:
        return build_sieve(limit, cap)
    root = Path(cache_dir)
    root.mkdir(parents=True, exist_ok=True)
    best = None
    for path in root.glob("sieve_*.pmsv"):
        try:
            have = int(path.stem.split("_", 1)[1])
        except ValueError:
            continue
        if have >= limit and (best is None or have < best[0]):
            best = (have, path)
    if best is not None:
        return load_sieve(best[1])
    table = build_sieve(limit, cap)
    save_sieve(table, root / f"sieve_{limit}.pmsv")
    return table
