"""Numerical Dirichlet L-functions.

Two independent evaluation routes are provided for a character chi mod q:

``truncated_abel``
    sum_{n <= N} chi(n) n^(-s) with the partial-summation tail bound
    (1 + |s|/sigma) B_chi N^(-sigma), where B_chi is the largest
    |sum_{n <= u} chi(n)| over one period.  Non-principal chi only.

``hurwitz_em``
    L(s, chi) = sum_a chi(a) sum_{k >= 0} (kq + a)^(-s), each inner sum
    split at k = N and finished by Euler-Maclaurin with an explicit
    remainder bound.  The same expansion differentiates term by term, so
    L'(s) comes with a bound too (Cauchy estimate on the remainder).

Principal characters are evaluated as zeta(s) prod_{p | q} (1 - p^(-s)) and
only for sigma > 1.  All reported bounds include a floating-point rounding
allowance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.ndimage import minimum_filter
from scipy.special import bernoulli

from .arith import SieveTable, cached_sieve
from .bounds import EnvelopeConfig, region_params
from .characters import DirichletCharacter
from .errors import DomainError, PrecisionError
from .oracles import CHEBYSHEV_PSI_CONSTANT
from .point import ComplexPoint
from .sums import mobius_sum, psi_sum

__all__ = [
    "LEvaluation",
    "LogDerivative",
    "Reciprocal",
    "Rectangle",
    "ZeroScanReport",
    "PerronResult",
    "evaluate_L",
    "evaluate_L_array",
    "evaluate_logderiv",
    "logderiv_array",
    "evaluate_recip",
    "zero_scan",
    "perron_reconstruct",
    "abel_bound_constant",
    "NONPRINCIPAL_SIGMA_MIN",
]

Method = Literal["auto", "truncated_abel", "hurwitz_em"]

NONPRINCIPAL_SIGMA_MIN = 0.1
EM_ORDER = 15
CAUCHY_RADIUS = 0.5
DEFAULT_MAX_TERMS = 10**7
AUTO_ABEL_TERMS = 10**6
_EPS = np.finfo(float).eps
_MATRIX_BUDGET = 1 << 21
# B_{2j} / (2j)! for j = 1..EM_ORDER
_B = bernoulli(2 * EM_ORDER)
_EM_COEF = np.array([_B[2 * j] / math.factorial(2 * j) for j in range(1, EM_ORDER + 1)])


@dataclass(frozen=True)
class LEvaluation:
    s: ComplexPoint
    value: complex
    abs_error_bound: float
    method: str
    terms_used: int


@dataclass(frozen=True)
class LogDerivative:
    """L'/L at s.  ``rigorous`` is False for the finite-difference route."""

    s: ComplexPoint
    value: complex
    abs_error_bound: float
    method: str
    rigorous: bool


@dataclass(frozen=True)
class Reciprocal:
    """1/L at s.  When |L| <= 10 * error the value is unreliable, which
    flags a possible nearby zero; ``near_zero`` is then set and the bound
    is infinite."""

    s: ComplexPoint
    value: complex
    abs_error_bound: float
    method: str
    near_zero: bool


# ---------------------------------------------------------------- kernels


def _as_points(s) -> np.ndarray:
    if isinstance(s, ComplexPoint):
        return np.array([s.s])
    return np.atleast_1d(np.asarray(s, dtype=np.complex128))


def _pochhammer(s: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(s)_r and d/ds (s)_r for r = 0..n, shape (n + 1, len(s))."""
    P = np.empty((n + 1, len(s)), dtype=np.complex128)
    dP = np.empty_like(P)
    P[0], dP[0] = 1.0, 0.0
    for r in range(n):
        P[r + 1] = P[r] * (s + r)
        dP[r + 1] = dP[r] * (s + r) + P[r]
    return P, dP


def _phi(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """phi(w) = (e^w - 1)/w and phi'(w), with series near w = 0."""
    small = np.abs(w) < 0.5
    ws = np.where(small, 1.0, w)
    phi = np.where(small, 0.0, np.expm1(ws) / ws)
    dphi = np.where(small, 0.0, (np.exp(ws) * (ws - 1) + 1) / ws**2)
    if small.any():
        z = w[small]
        p = np.zeros_like(z)
        dp = np.zeros_like(z)
        for k in range(24, -1, -1):
            p = p * z + 1 / math.factorial(k + 1)
        for k in range(24, 0, -1):
            dp = dp * z + k / math.factorial(k + 1)
        phi[small] = p
        dphi[small] = dp
    return phi, dphi


def _direct(s: np.ndarray, n: np.ndarray, c: np.ndarray, deriv: bool):
    """sum chi(n) n^-s (and the derivative) with absolute-value sums for rounding."""
    logn = np.log(n.astype(np.float64))
    P = len(s)
    val = np.empty(P, dtype=np.complex128)
    dval = np.zeros(P, dtype=np.complex128)
    mag = np.empty(P)
    rows = max(1, _MATRIX_BUDGET // max(1, len(n)))
    for lo in range(0, P, rows):
        sl = slice(lo, min(lo + rows, P))
        ss = s[sl, None]
        amp = np.exp(-ss.real * logn)
        terms = c * amp * np.exp(-1j * ss.imag * logn)
        val[sl] = terms.sum(axis=1)
        mag[sl] = (np.abs(c) * amp).sum(axis=1)
        if deriv:
            dval[sl] = -(terms * logn).sum(axis=1)
    return val, dval, mag


@dataclass
class _Kernel:
    value: np.ndarray
    error: np.ndarray
    deriv: np.ndarray
    deriv_error: np.ndarray
    terms: int


def _em_remainder(s: np.ndarray, y: np.ndarray, w: np.ndarray, q: int, shift: float) -> np.ndarray:
    """Euler-Maclaurin remainder bound at order EM_ORDER, evaluated for
    sigma - shift and |s| + shift (shift > 0 gives the Cauchy circle)."""
    m2 = 2 * EM_ORDER
    sig = s.real - shift
    poch = np.ones(len(s))
    for i in range(m2):
        poch = poch * (np.abs(s + i) + shift)
    ratio = (q / y)[None, :] ** (m2 - 1)
    tail = (w[None, :] * ratio * np.exp(-sig[:, None] * np.log(y)[None, :])).sum(axis=1)
    return abs(_EM_COEF[-1]) * poch * tail / (sig + m2 - 1)


def _hurwitz_em(s: np.ndarray, table: np.ndarray, target: float, deriv: bool, max_terms: int) -> _Kernel:
    """sum_{n >= 1} table[n mod q] n^-s for a q-periodic coefficient table."""
    q = len(table)
    classes = np.array([a for a in range(1, q + 1) if table[a % q] != 0], dtype=np.int64)
    coef = table[classes % q]
    weight = np.abs(coef)
    balanced = abs(coef.sum()) < 1e-9
    m2 = 2 * EM_ORDER
    shift = CAUCHY_RADIUS if deriv else 0.0
    if np.min(s.real) - shift + m2 - 1 <= 0:
        raise DomainError("sigma too far left for the Euler-Maclaurin kernel")
    if not balanced and np.any(np.abs(s - 1) < 1e-300):
        raise DomainError("pole at s = 1")
    smax = float(np.max(np.abs(s)))
    N = max(1, math.ceil((smax + m2 + 10 + shift) / q))
    while True:
        y = (N * q + classes).astype(np.float64)
        rem = _em_remainder(s, y, weight, q, 0.0)
        drem = _em_remainder(s, y, weight, q, CAUCHY_RADIUS) / CAUCHY_RADIUS if deriv else rem * 0
        if max(rem.max(), drem.max()) <= target / 4 or N * q > max_terms:
            break
        N *= 2
    n = np.arange(1, N * q + 1, dtype=np.int64)
    c = table[n % q]
    keep = c != 0
    n, c = n[keep], c[keep]
    val, dval, mag = _direct(s, n, c, deriv)

    logy = np.log(y)
    P, dP = _pochhammer(s, m2)
    Y = np.exp(-s[:, None] * logy[None, :])  # y^-s
    G = np.full((len(s), len(y)), 0.5, dtype=np.complex128)
    dG = np.zeros_like(G)
    for j in range(1, EM_ORDER + 1):
        r = (q / y) ** (2 * j - 1)
        G += _EM_COEF[j - 1] * P[2 * j - 1][:, None] * r[None, :]
        dG += _EM_COEF[j - 1] * dP[2 * j - 1][:, None] * r[None, :]
    tail = (coef[None, :] * Y * G).sum(axis=1)
    dtail = (coef[None, :] * Y * (dG - logy[None, :] * G)).sum(axis=1)
    if balanced:
        wv = (1 - s)[:, None] * logy[None, :]
        ph, dph = _phi(wv)
        pole = (coef[None, :] * (-(logy / q)[None, :]) * ph).sum(axis=1)
        dpole = (coef[None, :] * ((logy**2) / q)[None, :] * dph).sum(axis=1)
    else:
        Yp = Y * y[None, :]
        sm1 = (s - 1)[:, None]
        pole = (coef[None, :] * Yp / (q * sm1)).sum(axis=1)
        dpole = (coef[None, :] * (-logy[None, :] * Yp / (q * sm1) - Yp / (q * sm1**2))).sum(axis=1)
    value = val + tail + pole
    dvalue = dval + dtail + dpole

    spread = np.abs(s) * math.log(N * q + q) + math.log2(len(n) + 2) + 16
    tail_mag = np.abs(coef[None, :] * Y * G).sum(axis=1) + np.abs(pole) * (1 + np.abs(s) * logy.max())
    rounding = _EPS * spread * (mag + tail_mag)
    drounding = rounding * (math.log(N * q + q) + 1) * 2
    err = rem + rounding
    derr = drem + drounding
    return _Kernel(value, err, dvalue, derr, int(len(n)))


def abel_bound_constant(chi: DirichletCharacter) -> float:
    """B_chi = max over 0 <= u < q of |sum_{n <= u} chi(n)|."""
    return float(np.max(np.abs(np.cumsum(chi.value_table[1:])), initial=0.0))


def _abel_terms(s: np.ndarray, B: float, target: float) -> int:
    need = ((1 + np.abs(s) / s.real) * B / target) ** (1 / s.real)
    return int(math.ceil(float(np.max(need))))


def _truncated_abel(
    s: np.ndarray, chi: DirichletCharacter, target: float, terms: int | None, max_terms: int
) -> _Kernel:
    if chi.is_principal:
        raise DomainError("truncated_abel needs a non-principal character")
    if np.any(s.real <= 0):
        raise DomainError("truncated_abel needs sigma > 0")
    B = abel_bound_constant(chi)
    N = terms if terms is not None else max(chi.q, _abel_terms(s, B, target / 2))
    if N > max_terms:
        raise PrecisionError(f"truncated_abel would need {N} terms (cap {max_terms})")
    n = np.arange(1, N + 1, dtype=np.int64)
    c = chi.values(n)
    keep = c != 0
    val, _, mag = _direct(s, n[keep], c[keep], False)
    tail = (1 + np.abs(s) / s.real) * B * N ** (-s.real)
    rounding = _EPS * mag * (np.abs(s) * math.log(N + 1) + math.log2(N + 2) + 16)
    return _Kernel(val, tail + rounding, val * np.nan, val.real * np.nan, N)


def _euler_factor(s: np.ndarray, chi: DirichletCharacter):
    """prod_{p | q}(1 - p^-s), its log-derivative, and prod (1 + p^-sigma)."""
    E = np.ones(len(s), dtype=np.complex128)
    dlog = np.zeros(len(s), dtype=np.complex128)
    Emax = np.ones(len(s))
    for p in chi.structure.modulus.primes:
        ps = np.exp(-s * math.log(p))
        E *= 1 - ps
        dlog += math.log(p) * ps / (1 - ps)
        Emax *= 1 + np.exp(-s.real * math.log(p))
    return E, dlog, Emax


def _kernel(
    s: np.ndarray,
    chi: DirichletCharacter,
    target: float,
    method: str,
    deriv: bool,
    terms: int | None = None,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> tuple[_Kernel, str]:
    if not target > 0:
        raise DomainError(f"target error must be positive, got {target}")
    if chi.is_principal:
        if np.any(s.real <= 1):
            raise DomainError("principal characters are evaluated for sigma > 1 only")
        if method == "truncated_abel":
            raise DomainError("truncated_abel needs a non-principal character")
        E, dlogE, Emax = _euler_factor(s, chi)
        k = _hurwitz_em(s, np.ones(1, dtype=np.complex128), target / float(Emax.max()), deriv, max_terms)
        zeta, dzeta = k.value, k.deriv
        value = zeta * E
        dvalue = dzeta * E + zeta * E * dlogE
        err = k.error * Emax
        dlog_mag = np.abs(dlogE)
        derr = (k.deriv_error + k.error * dlog_mag) * Emax
        return _Kernel(value, err, dvalue, derr, k.terms), "hurwitz_em"
    if np.any(s.real <= NONPRINCIPAL_SIGMA_MIN):
        raise DomainError(f"non-principal evaluation needs sigma > {NONPRINCIPAL_SIGMA_MIN}")
    if method == "auto":
        if deriv or terms is not None:
            method = "hurwitz_em" if terms is None else "truncated_abel"
        else:
            need = _abel_terms(s, abel_bound_constant(chi), target / 2)
            method = "truncated_abel" if need <= AUTO_ABEL_TERMS else "hurwitz_em"
    if method == "truncated_abel":
        k = _truncated_abel(s, chi, target, terms, max_terms)
    elif method == "hurwitz_em":
        k = _hurwitz_em(s, chi.value_table, target, deriv, max_terms)
    else:
        raise DomainError(f"unknown method {method!r}")
    if terms is None and np.max(k.error) > target:
        raise PrecisionError(f"{method}: error bound {np.max(k.error):.3g} exceeds target {target:.3g}")
    return k, method


# ---------------------------------------------------------------- public API


def evaluate_L(
    s: ComplexPoint | complex,
    chi: DirichletCharacter,
    target_abs_error: float = 1e-10,
    method: Method = "auto",
    *,
    terms: int | None = None,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> LEvaluation:
    """L(s, chi) with a rigorous absolute error bound.

    ``method="auto"`` uses the truncated series when it needs at most
    10^6 terms and Euler-Maclaurin otherwise.  Passing ``terms`` fixes the
    truncation point of ``truncated_abel`` and skips the target check.
    """
    p = ComplexPoint.of(s)
    k, used = _kernel(_as_points(p), chi, target_abs_error, method, False, terms, max_terms)
    return LEvaluation(p, complex(k.value[0]), float(k.error[0]), used, k.terms)


def evaluate_L_array(
    s,
    chi: DirichletCharacter,
    target_abs_error: float = 1e-10,
    method: Method = "hurwitz_em",
    *,
    terms: int | None = None,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized evaluate_L over an array of complex s: (values, error bounds)."""
    k, _ = _kernel(_as_points(s), chi, target_abs_error, method, False, terms, max_terms)
    return k.value, k.error


def _logderiv_from(k: _Kernel) -> tuple[np.ndarray, np.ndarray]:
    L, dL, e0, e1 = k.value, k.deriv, k.error, k.deriv_error
    absL = np.abs(L)
    ok = absL > 10 * e0
    ratio = dL / L
    err = np.where(ok, (e1 + np.abs(ratio) * e0) / np.where(ok, absL - e0, 1.0), np.inf)
    return ratio, err


def logderiv_array(s, chi: DirichletCharacter, target_abs_error: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized L'/L by the differentiated Euler-Maclaurin expansion."""
    k, _ = _kernel(_as_points(s), chi, target_abs_error, "hurwitz_em", True)
    return _logderiv_from(k)


def _dirichlet_series_logderiv(p: ComplexPoint, chi: DirichletCharacter, target: float, max_terms: int):
    if p.sigma <= 1:
        raise DomainError("the Dirichlet-series route needs sigma > 1")
    # sum_{n > N} Lambda(n) n^-sigma <= 1.03883 sigma/(sigma - 1) N^(1 - sigma)
    const = CHEBYSHEV_PSI_CONSTANT * p.sigma / (p.sigma - 1)
    N = max(2, math.ceil((const / target) ** (1 / (p.sigma - 1))))
    if N > max_terms:
        raise PrecisionError(f"dirichlet_series would need {N} terms (cap {max_terms})")
    t = cached_sieve(N, cap=max(N, max_terms))
    n = np.flatnonzero(t.lambda_log[: N + 1])
    c = chi.values(n) * t.lambda_log[n]
    val, _, mag = _direct(np.array([p.s]), n, c, False)
    err = const * N ** (1 - p.sigma) + _EPS * mag[0] * (abs(p.s) * math.log(N) + 40)
    return -complex(val[0]), float(err)


def evaluate_logderiv(
    s: ComplexPoint | complex,
    chi: DirichletCharacter,
    target_abs_error: float = 1e-10,
    method: Literal["auto", "hurwitz_em", "dirichlet_series", "finite_difference"] = "auto",
    *,
    h: float = 1e-5,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> LogDerivative:
    """L'/L(s, chi).

    ``hurwitz_em`` (the default route) differentiates the Euler-Maclaurin
    expansion and is rigorous wherever that expansion is valid.
    ``dirichlet_series`` sums -sum Lambda(n) chi(n) n^-s for sigma > 1 with
    a Chebyshev tail bound.  ``finite_difference`` takes a central
    difference of log L with step h and is labelled non-rigorous.
    """
    p = ComplexPoint.of(s)
    if method in ("auto", "hurwitz_em"):
        v, e = logderiv_array(p.s, chi, target_abs_error)
        return LogDerivative(p, complex(v[0]), float(e[0]), "hurwitz_em", True)
    if method == "dirichlet_series":
        v, e = _dirichlet_series_logderiv(p, chi, target_abs_error, max_terms)
        return LogDerivative(p, v, e, "dirichlet_series", True)
    if method == "finite_difference":
        pts = np.array([p.s + h, p.s - h])
        vals, errs = evaluate_L_array(pts, chi, 1e-13, "hurwitz_em")
        mid = evaluate_L(p, chi, 1e-13, "hurwitz_em").value
        d = (vals[0] - vals[1]) / (2 * h)
        # truncation O(h^2) is not bounded; only the propagated evaluation error is reported
        return LogDerivative(p, complex(d / mid), float(errs.max() / h / abs(mid)), "finite_difference", False)
    raise DomainError(f"unknown method {method!r}")


def evaluate_recip(
    s: ComplexPoint | complex,
    chi: DirichletCharacter,
    target_abs_error: float = 1e-10,
    method: Method = "auto",
) -> Reciprocal:
    """1/L(s, chi), error propagated as err / |L|^2 (requires |L| > 10 err)."""
    ev = evaluate_L(s, chi, target_abs_error, method)
    absL = abs(ev.value)
    if absL <= 10 * ev.abs_error_bound:
        return Reciprocal(ev.s, complex(math.nan, math.nan), math.inf, ev.method, True)
    err = ev.abs_error_bound / (absL * (absL - ev.abs_error_bound))
    return Reciprocal(ev.s, 1 / ev.value, err, ev.method, False)


# ---------------------------------------------------------------- zero scan


@dataclass(frozen=True)
class Rectangle:
    sigma_min: float
    sigma_max: float
    t_min: float
    t_max: float

    def __post_init__(self) -> None:
        if self.sigma_min > self.sigma_max or self.t_min > self.t_max:
            raise DomainError(f"empty rectangle {self}")

    def contains(self, z: complex, pad_sigma: float = 0.0, pad_t: float = 0.0) -> bool:
        return (
            self.sigma_min - pad_sigma <= z.real <= self.sigma_max + pad_sigma
            and self.t_min - pad_t <= z.imag <= self.t_max + pad_t
        )


@dataclass(frozen=True)
class ZeroScanReport:
    rectangle: Rectangle
    grid: tuple[int, int]
    min_abs_L: float
    argmin: ComplexPoint
    zeros_found: tuple[ComplexPoint, ...]
    vartheta_used: float
    character_label: str
    candidates: int = 0
    max_abs_error: float = 0.0
    point_errors: tuple[tuple[float, float, str], ...] = field(default=())

    def to_dict(self, config_hash: str | None = None) -> dict:
        r = self.rectangle
        return {
            "character": self.character_label,
            "rectangle": {"sigma_min": r.sigma_min, "sigma_max": r.sigma_max, "t_min": r.t_min, "t_max": r.t_max},
            "grid": list(self.grid),
            "min_abs_L": self.min_abs_L,
            "argmin": {"sigma": self.argmin.sigma, "t": self.argmin.t},
            "zeros": [{"sigma": z.sigma, "t": z.t} for z in self.zeros_found],
            "candidates": self.candidates,
            "max_abs_error": self.max_abs_error,
            "point_errors": [{"sigma": a, "t": b, "error": m} for a, b, m in self.point_errors],
            "vartheta_used": None if math.isnan(self.vartheta_used) else self.vartheta_used,
            "config_hash": config_hash,
        }

    def to_json(self, config_hash: str | None = None) -> str:
        return json.dumps(self.to_dict(config_hash), indent=2, sort_keys=True)


def _newton(z: complex, chi, rect: Rectangle, pad: tuple[float, float], tol: float, target: float, max_iter: int, h: float):
    for _ in range(max_iter):
        v, _ = evaluate_L_array(np.array([z, z + h, z - h]), chi, target, "hurwitz_em")
        if abs(v[0]) < tol:
            return z, abs(v[0])
        d = (v[1] - v[2]) / (2 * h)
        if d == 0:
            return None
        z = z - v[0] / d
        if not rect.contains(z, *pad) or z.real <= NONPRINCIPAL_SIGMA_MIN or (chi.is_principal and z.real <= 1):
            return None
    return None


def zero_scan(
    chi: DirichletCharacter,
    rectangle: Rectangle,
    grid: tuple[int, int] = (50, 200),
    refine_tol: float = 1e-10,
    *,
    threshold: float = 1.0,
    target_abs_error: float = 1e-12,
    newton_step: float = 1e-6,
    max_newton: int = 50,
    cfg: EnvelopeConfig | None = None,
) -> ZeroScanReport:
    """Grid |L| over the rectangle and Newton-refine local minima below ``threshold``.

    A degenerate side (sigma_min == sigma_max or t_min == t_max) collapses
    that axis to a single row.  Points whose evaluation fails are recorded
    in ``point_errors`` instead of aborting the scan.
    """
    ns, nt = grid
    if ns < 1 or nt < 1:
        raise DomainError(f"grid sizes must be positive, got {grid}")
    r = rectangle
    floor_ = 1.0 if chi.is_principal else NONPRINCIPAL_SIGMA_MIN
    if r.sigma_min <= floor_:
        raise DomainError(f"rectangle must lie in sigma > {floor_} for this character")
    sig = np.linspace(r.sigma_min, r.sigma_max, ns if r.sigma_max > r.sigma_min else 1)
    ts = np.linspace(r.t_min, r.t_max, nt if r.t_max > r.t_min else 1)
    S = sig[:, None] + 1j * ts[None, :]
    flat = S.ravel()
    vals = np.full(flat.shape, np.nan, dtype=np.complex128)
    errs = np.full(flat.shape, np.nan)
    failures = []
    chunk = 256
    for lo in range(0, len(flat), chunk):
        part = flat[lo : lo + chunk]
        try:
            vals[lo : lo + chunk], errs[lo : lo + chunk] = evaluate_L_array(part, chi, target_abs_error)
        except PrecisionError:
            for i, z in enumerate(part):
                try:
                    v, e = evaluate_L_array(z, chi, target_abs_error)
                    vals[lo + i], errs[lo + i] = v[0], e[0]
                except PrecisionError as exc:
                    failures.append((float(z.real), float(z.imag), str(exc)))
    mags = np.abs(vals).reshape(S.shape)
    filled = np.where(np.isnan(mags), np.inf, mags)
    i = int(np.argmin(filled))
    argmin = ComplexPoint(float(flat[i].real), float(flat[i].imag))
    local = (filled == minimum_filter(filled, size=3, mode="nearest")) & (filled < threshold)
    pad = (
        (sig[1] - sig[0]) if len(sig) > 1 else 0.0,
        (ts[1] - ts[0]) if len(ts) > 1 else 0.0,
    )
    zeros: list[complex] = []
    seeds = np.flatnonzero(local.ravel())
    for k in seeds:
        found = _newton(complex(flat[k]), chi, r, pad, refine_tol, target_abs_error, max_newton, newton_step)
        if found is None:
            continue
        z, _ = found
        if all(abs(z - w) > 1e-6 for w in zeros):
            zeros.append(z)
    vartheta = math.nan
    if chi.q >= 3:
        height = max(abs(r.t_min), abs(r.t_max))
        vartheta = region_params(chi.structure.modulus, height, cfg or EnvelopeConfig()).vartheta
    zeros.sort(key=lambda z: (z.imag, z.real))
    return ZeroScanReport(
        r,
        (len(sig), len(ts)),
        float(filled.flat[i]),
        argmin,
        tuple(ComplexPoint(float(z.real), float(z.imag)) for z in zeros),
        vartheta,
        chi.label,
        int(len(seeds)),
        float(np.nanmax(errs)) if np.isfinite(errs).any() else math.nan,
        tuple(failures),
    )


# ---------------------------------------------------------------- Perron


@dataclass(frozen=True)
class PerronResult:
    """Truncated Perron integral against the direct sum.

    ``quadrature_error`` is the Richardson estimate |I_h - I_2h| / 15 from
    the step-halving audit; ``integrand_error`` bounds the effect of the
    L-evaluation errors on the integral.
    """

    kind: str
    x: float
    character_label: str
    T: float
    step: float
    sigma0: float
    integral_value: complex
    direct_value: complex
    discrepancy: float
    R_bound: float
    R_constant: float
    coarse_value: complex
    coarse_discrepancy: float
    quadrature_error: float
    integrand_error: float
    nodes: int

    def to_dict(self, config_hash: str | None = None) -> dict:
        def c(z: complex) -> dict:
            return {"re": z.real, "im": z.imag}

        return {
            "kind": self.kind,
            "x": self.x,
            "character": self.character_label,
            "T": self.T,
            "step": self.step,
            "sigma0": self.sigma0,
            "integral_value": c(self.integral_value),
            "direct_value": c(self.direct_value),
            "discrepancy": self.discrepancy,
            "R_bound": self.R_bound,
            "R_constant": self.R_constant,
            "within_bound": self.discrepancy < self.R_bound,
            "coarse_discrepancy": self.coarse_discrepancy,
            "quadrature_error": self.quadrature_error,
            "integrand_error": self.integrand_error,
            "nodes": self.nodes,
            "config_hash": config_hash,
        }


def _integrand(kind: str, s: np.ndarray, chi: DirichletCharacter, target: float):
    if kind == "psi":
        v, e = logderiv_array(s, chi, target)
        return -v, e
    if kind == "mobius":
        L, e = evaluate_L_array(s, chi, target, "hurwitz_em")
        absL = np.abs(L)
        err = np.where(absL > 10 * e, e / (absL * np.maximum(absL - e, 1e-300)), np.inf)
        return 1 / L, err
    raise DomainError(f"kind must be 'psi' or 'mobius', got {kind!r}")


def perron_reconstruct(
    kind: Literal["psi", "mobius"],
    x: float,
    chi: DirichletCharacter,
    T: float,
    quadrature_step: float = 1e-2,
    t: SieveTable | None = None,
    *,
    R_constant: float = 10.0,
    target_abs_error: float = 1e-10,
    chunk: int = 512,
) -> PerronResult:
    """(1/2 pi i) int_{sigma0 - iT}^{sigma0 + iT} F(s) x^s / s ds with
    F = -L'/L (kind psi) or 1/L (kind mobius), sigma0 = 1 + 1/log x,
    by composite Simpson in t, compared with the sum over n <= x."""
    if not x > math.e:
        raise DomainError(f"need x > e, got {x}")
    if not T >= 2:
        raise DomainError(f"need T >= 2, got {T}")
    if not quadrature_step > 0:
        raise DomainError("quadrature step must be positive")
    if t is None:
        t = cached_sieve(max(math.floor(x), 2))
    lx = math.log(x)
    sigma0 = 1 + 1 / lx
    n = max(2, math.ceil(2 * T / quadrature_step))
    n += n % 4  # even fine grid whose every-other subgrid is also even
    ts = np.linspace(-T, T, n + 1)
    h = ts[1] - ts[0]
    vals = np.empty(n + 1, dtype=np.complex128)
    errs = np.empty(n + 1)
    for lo in range(0, n + 1, chunk):
        s = sigma0 + 1j * ts[lo : lo + chunk]
        F, e = _integrand(kind, s, chi, target_abs_error)
        kern = np.exp(s * lx) / s
        vals[lo : lo + chunk] = F * kern
        errs[lo : lo + chunk] = e * np.abs(kern)

    def simpson(f: np.ndarray, step: float) -> complex:
        w = np.ones(len(f))
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        return complex(step / 3 * np.dot(w, f))

    fine = simpson(vals, h) / (2 * math.pi)
    coarse = simpson(vals[::2], 2 * h) / (2 * math.pi)
    integrand_error = float(2 * T * errs.max() / (2 * math.pi))
    direct = (psi_sum if kind == "psi" else mobius_sum)(x, chi, t).value
    R = R_constant * x * (lx**2 if kind == "psi" else lx) / T
    return PerronResult(
        kind, float(x), chi.label, float(T), float(h), sigma0,
        fine, direct, abs(fine - direct), R, R_constant,
        coarse, abs(coarse - direct), abs(fine - coarse) / 15, integrand_error, n + 1,
    )
