"""Slow, independent reference computations.

Nothing here imports the sieve, the character tables or the sum kernels;
everything is trial division, brute-force group enumeration and plain
loops, so agreement with the fast paths is meaningful.
"""

from __future__ import annotations

import cmath
import itertools
import math
from fractions import Fraction

import numpy as np

__all__ = [
    "mobius_td",
    "mangoldt_td",
    "factorize_td",
    "brute_characters",
    "brute_conductor",
    "naive_twisted_sum",
    "naive_exp_sum",
    "naive_progression_sum",
    "walsh_product_form",
    "zeta2",
    "neg_logderiv_zeta2",
    "L1_mod3",
    "CHEBYSHEV_PSI_CONSTANT",
]

# psi(x) < 1.03883 x for all x > 0 (Rosser and Schoenfeld)
CHEBYSHEV_PSI_CONSTANT = 1.03883


def factorize_td(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            v = 0
            while n % p == 0:
                n //= p
                v += 1
            out.append((p, v))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def mobius_td(n: int) -> int:
    if n < 1:
        raise ValueError("mobius_td needs n >= 1")
    f = factorize_td(n)
    if any(v > 1 for _, v in f):
        return 0
    return -1 if len(f) % 2 else 1


def mangoldt_td(n: int) -> float:
    f = factorize_td(n) if n > 1 else []
    return math.log(f[0][0]) if len(f) == 1 else 0.0


def _order(g: int, m: int) -> int:
    k, x = 1, g % m
    while x != 1:
        x = x * g % m
        k += 1
    return k


def _local_generators(p: int, v: int) -> list[tuple[int, int]]:
    pk = p**v
    phi = (p - 1) * p ** (v - 1)
    if pk == 2:
        return []
    if p == 2 and v >= 3:
        order = phi // 2
        g = next(g for g in range(5, pk, 4) if _order(g, pk) == order)
        return [(pk - 1, 2), (g, order)]
    g = next(g for g in range(2, pk) if math.gcd(g, pk) == 1 and _order(g, pk) == phi)
    return [(g, phi)]


def brute_characters(q: int) -> list[list[complex]]:
    """Value vectors [chi(0), ..., chi(q-1)] of every character mod q.

    Built from brute-force generators of each local unit group and an
    exhaustive table of generator-power products.
    """
    locals_ = []
    for p, v in factorize_td(q):
        pk = p**v
        gens = _local_generators(p, v)
        logs = {}
        for exps in itertools.product(*(range(d) for _, d in gens)):
            x = 1
            for (g, _), e in zip(gens, exps):
                x = x * pow(g, e, pk) % pk
            logs[x] = exps
        if not gens:
            logs = {1 % pk: ()}
        locals_.append((pk, gens, logs))
    all_gens = [(pk, d) for pk, gens, _ in locals_ for _, d in gens]
    chars = []
    for exps in itertools.product(*(range(d) for _, d in all_gens)):
        vals = []
        for n in range(q):
            if math.gcd(n, q) != 1:
                vals.append(0j)
                continue
            turn = Fraction(0)
            i = 0
            for pk, gens, logs in locals_:
                for a in logs[n % pk]:
                    turn += Fraction(exps[i] * a, all_gens[i][1])
                    i += 1
            vals.append(cmath.exp(2j * math.pi * float(turn % 1)))
        chars.append(vals)
    return chars


def brute_conductor(values: list[complex], q: int) -> int:
    """Least d | q with chi(n) = 1 for every unit n = 1 mod d."""
    for d in range(1, q + 1):
        if q % d:
            continue
        if all(abs(values[n] - 1) < 1e-9 for n in range(1, q, d) if math.gcd(n, q) == 1):
            return d
    return q


def naive_twisted_sum(x: float, values: list[complex], weight) -> complex:
    """sum_{n <= x} weight(n) * values[n mod q] by a direct loop,
    accumulated with math.fsum so the oracle itself is exactly rounded."""
    q = len(values)
    terms = [weight(n) * values[n % q] for n in range(1, math.floor(x) + 1)]
    return complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms))


def naive_exp_sum(x: float, q: int, a: int) -> complex:
    # reduce a n mod q in integers first; a float phase 2 pi a n / q drifts for large n
    terms = [mobius_td(n) * cmath.exp(2j * math.pi * ((a * n) % q) / q) for n in range(1, math.floor(x) + 1)]
    return complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms))


def naive_progression_sum(x: float, q: int, a: int) -> int:
    return sum(mobius_td(n) for n in range(1, math.floor(x) + 1) if (n - a) % q == 0)


def walsh_product_form(n: int, A, mu_values, mu_zero: int = 0) -> int:
    """Sum over bit vectors (x_0..x_{n-1}) of prod_{j in A}(1 - 2 x_j) * mu(sum 2^j x_j).

    ``mu_values[m]`` gives mu(m) for 1 <= m < 2^n.
    """
    bits = np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)[:, ::-1]
    m = bits @ (1 << np.arange(n, dtype=np.int64))
    mu = np.array([mu_zero if k == 0 else int(mu_values[k]) for k in m], dtype=np.int64)
    prod = np.ones(len(m), dtype=np.int64)
    for j in A:
        prod *= 1 - 2 * bits[:, j]
    return int((prod * mu).sum())


def zeta2(N: int = 10**6) -> tuple[float, float]:
    """zeta(2) from a partial sum and the integral bracket on the tail.

    Returns (value, error bound): the tail lies in [1/(N+1), 1/N].
    """
    head = math.fsum(1.0 / (n * n) for n in range(N, 0, -1))
    lo, hi = 1.0 / (N + 1), 1.0 / N
    return head + (lo + hi) / 2, (hi - lo) / 2 + 1e-15


def _mangoldt_table(N: int) -> list[float]:
    composite = bytearray(N + 1)
    lam = [0.0] * (N + 1)
    for p in range(2, N + 1):
        if composite[p]:
            continue
        for k in range(p * p, N + 1, p):
            composite[k] = 1
        lp = math.log(p)
        pk = p
        while pk <= N:
            lam[pk] = lp
            pk *= p
    return lam


def neg_logderiv_zeta2(N: int = 10**6) -> tuple[float, float]:
    """-zeta'/zeta(2) = sum Lambda(n)/n^2 with the Chebyshev tail bound
    sum_{n > N} Lambda(n) n^-2 <= 2 * 1.03883 / N.  Returns (value, bound)."""
    lam = _mangoldt_table(N)
    head = math.fsum(lam[n] / (n * n) for n in range(2, N + 1))
    tail = 2 * CHEBYSHEV_PSI_CONSTANT / N
    return head + tail / 2, tail / 2 + 1e-15


L1_mod3 = math.pi / (3 * math.sqrt(3))
