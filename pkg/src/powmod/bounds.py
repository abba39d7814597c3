"""Closed-form envelopes, thresholds and region parameters.

Every quantity here is a formula evaluation.  The constants that the
underlying estimates only assert to exist (c, A, B, B1, B2, xi0, ...) are
carried by EnvelopeConfig with arbitrary labelled defaults, so the numbers
produced are formula values under those defaults and nothing more.

Thresholds such as exp((log q)^7 / log log q) overflow a double for very
modest q, so everything is computed as a logarithm first; the public float
accessors return ``inf`` when the exponential does not fit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .arith import FactoredModulus, modulus
from .errors import DomainError

__all__ = [
    "EnvelopeConfig",
    "DYADIC_C",
    "NON_PAPER_NOTICE",
    "Thresholds",
    "thresholds_Q",
    "log_envelope_E",
    "envelope_E",
    "envelope_branches",
    "envelope_jump",
    "beta",
    "beta_branch",
    "beta_closed",
    "log_dyadic_envelope_f",
    "dyadic_envelope_f",
    "RegionParams",
    "region_params",
    "remark_theta3",
    "IwaniecCheck",
    "iwaniec_admissible",
    "mv_bound_b",
    "PerronChoice",
    "perron_T_select",
    "WiredCheck",
    "perron_wired_check",
    "safe_exp",
]

DYADIC_C = 1001

NON_PAPER_NOTICE = (
    "NON-PAPER constants: c, c1, c2, A, B, B1, B2, gamma0, xi0, c0, c_perron are "
    "placeholders; the source only proves that suitable values exist"
)


def safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.7 else math.inf


@dataclass(frozen=True)
class EnvelopeConfig:
    """Every unquantified constant, with labelled non-paper defaults.

    ``c0`` defaults to C (C - 1)^2 xi0 with C = 1001.
    """

    c: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    A: float = 1.0
    B: float = 1.0
    B1: float = 1.0
    B2: float = 1.0
    gamma0: int = 10
    xi0: float = 1e-4
    c0: float | None = None
    c_perron: float = 0.25

    def __post_init__(self) -> None:
        if self.c0 is None:
            object.__setattr__(self, "c0", DYADIC_C * (DYADIC_C - 1) ** 2 * self.xi0)
        for name, value in asdict(self).items():
            if not value > 0:
                raise DomainError(f"EnvelopeConfig.{name} must be positive, got {value}")
        if int(self.gamma0) != self.gamma0:
            raise DomainError(f"gamma0 must be an integer, got {self.gamma0}")
        if self.c_perron >= 0.5:
            raise DomainError(f"c_perron must lie in (0, 1/2), got {self.c_perron}")
        if self.B1 > self.B2:
            raise DomainError(f"need B1 <= B2, got B1={self.B1}, B2={self.B2}")

    def replace(self, **changes) -> "EnvelopeConfig":
        values = asdict(self)
        if "xi0" in changes and "c0" not in changes:
            values["c0"] = None
        values.update(changes)
        return EnvelopeConfig(**values)


def _logs(q: float) -> tuple[float, float]:
    if not q >= 3:
        raise DomainError(f"need q >= 3 so that log log q > 0, got {q}")
    lq = math.log(q)
    return lq, math.log(lq)


def _log_arg(x: float | None, log_x: float | None, name: str = "x") -> float:
    if log_x is not None:
        return float(log_x)
    if x is None:
        raise DomainError(f"{name} or log_{name} is required")
    if not x > 0:
        raise DomainError(f"{name} must be positive, got {x}")
    return math.log(x)


@dataclass(frozen=True)
class Thresholds:
    log_Q1: float
    log_Q2: float

    @property
    def Q1(self) -> float:
        return safe_exp(self.log_Q1)

    @property
    def Q2(self) -> float:
        return safe_exp(self.log_Q2)


def thresholds_Q(q: float) -> Thresholds:
    """log Q1 = (log q)^(7/3) (log log q)^(5/3), log Q2 = (log q)^7 / log log q."""
    lq, llq = _logs(q)
    return Thresholds(lq ** (7 / 3) * llq ** (5 / 3), lq**7 / llq)


def envelope_branches(j: int, log_x: float, q: float, cfg: EnvelopeConfig) -> tuple[float, float, float]:
    """log of each of the three branch formulas of E_j at x = exp(log_x)."""
    if j not in (1, 2):
        raise DomainError(f"j must be 1 or 2, got {j}")
    if not log_x >= math.log(3):
        raise DomainError("need x >= 3")
    lq, llq = _logs(q)
    b1 = -cfg.c * log_x * lq ** (-2 / 3) * llq ** (-4 / 3) + j * math.log(log_x)
    b2 = -cfg.c * math.sqrt(log_x * lq / llq)
    b3 = -cfg.c * log_x ** (4 / 7) * math.log(log_x) ** (-3 / 7)
    return b1, b2, b3


def log_envelope_E(j: int, log_x: float, q: float, cfg: EnvelopeConfig) -> tuple[float, int]:
    """(log E_j, branch index) with branches x <= Q1, Q1 < x <= Q2, x > Q2."""
    th = thresholds_Q(q)
    branches = envelope_branches(j, log_x, q, cfg)
    if log_x <= th.log_Q1:
        return branches[0], 1
    if log_x <= th.log_Q2:
        return branches[1], 2
    return branches[2], 3


def envelope_E(
    j: int, x: float | None, q: float, cfg: EnvelopeConfig, *, log_x: float | None = None
) -> float:
    return safe_exp(log_envelope_E(j, _log_arg(x, log_x), q, cfg)[0])


@dataclass(frozen=True)
class JumpProbe:
    log_x_left: float
    log_x_right: float
    log_left: float
    log_right: float

    @property
    def ratio(self) -> float:
        """E just right of the boundary divided by E just left of it."""
        return safe_exp(self.log_right - self.log_left)


def envelope_jump(j: int, boundary: int, q: float, cfg: EnvelopeConfig, rel: float = 1e-9) -> JumpProbe:
    """Evaluate E_j at Q(1 - rel) and Q(1 + rel) for Q = Q1 or Q2."""
    th = thresholds_Q(q)
    log_Q = {1: th.log_Q1, 2: th.log_Q2}[boundary]
    lo, hi = log_Q + math.log1p(-rel), log_Q + math.log1p(rel)
    return JumpProbe(lo, hi, log_envelope_E(j, lo, q, cfg)[0], log_envelope_E(j, hi, q, cfg)[0])


_SEVENTH = Fraction(1, 7)
_THREE_SEVENTHS = Fraction(3, 7)


def beta_branch(alpha, k: int):
    """Formula of branch k (1, 2, 3) of beta, evaluated regardless of range."""
    if k == 1:
        return Fraction(4, 7) if isinstance(alpha, Rational) else 4 / 7
    if k == 2:
        return (1 + alpha) / 2
    if k == 3:
        return 1 - 2 * alpha / Fraction(3) if isinstance(alpha, Rational) else 1 - 2 * alpha / 3
    raise DomainError(f"branch must be 1, 2 or 3, got {k}")


def beta(alpha):
    """Saving exponent as a function of log q / log log x growth.

    Exact when ``alpha`` is a Fraction (or int).
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if isinstance(alpha, Rational):
        alpha = Fraction(alpha)
        lo, hi = _SEVENTH, _THREE_SEVENTHS
    else:
        # both doubles round below the exact rationals, so no float sits
        # between them and the branch choice is unchanged
        lo, hi = 1 / 7, 3 / 7
    if alpha <= lo:
        return beta_branch(alpha, 1)
    if alpha <= hi:
        return beta_branch(alpha, 2)
    return beta_branch(alpha, 3)


def beta_closed(alpha):
    """min{max{4/7, (1 + alpha)/2}, 1 - 2 alpha/3}."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if isinstance(alpha, Rational):
        alpha = Fraction(alpha)
    return min(max(beta_branch(alpha, 1), beta_branch(alpha, 2)), beta_branch(alpha, 3))


def log_dyadic_envelope_f(log_u: float, m: FactoredModulus, cfg: EnvelopeConfig, q: float | None = None) -> tuple[float, int]:
    """(log f(u), branch) for the dyadic-block envelope.

    Branch 1 (core^gamma0 <= u <= q^C): u^(1 - xi0 (log u)^2 / (log q)^2).
    Branch 2 (u > q^C): u q^(-c0).
    """
    q = m.q if q is None else q
    lq = math.log(q)
    floor_ = cfg.gamma0 * math.log(m.core)
    if log_u < floor_ * (1 - 1e-15):
        raise DomainError(f"u below core^gamma0 = exp({floor_:.6g})")
    if log_u <= DYADIC_C * lq:
        return log_u * (1 - cfg.xi0 * (log_u / lq) ** 2), 1
    return log_u - cfg.c0 * lq, 2


def dyadic_envelope_f(
    u: float | None, m: FactoredModulus, cfg: EnvelopeConfig, *, q: float | None = None, log_u: float | None = None
) -> float:
    return safe_exp(log_dyadic_envelope_f(_log_arg(u, log_u, "u"), m, cfg, q)[0])


@dataclass(frozen=True)
class RegionParams:
    """Parameters attached to the height t for modulus q.

    Quantities that overflow are stored as logarithms (``log_*``).
    ``case_eta`` selects (eta, vartheta, K) against T1, T2;
    ``case_Theta`` selects Theta against T1, T3.
    """

    q: int
    log_abs_t: float
    tau: float
    ell: float
    log_Q0: float
    log_Y: float
    eta1: float
    eta2: float
    eta3: float
    theta1: float
    theta2: float
    theta3: float
    log_T1: float
    log_T2: float
    log_T3: float
    log_K: float
    eta: float
    vartheta: float
    Theta: float
    case_eta: int
    case_Theta: int

    @property
    def Q0(self) -> float:
        return safe_exp(self.log_Q0)

    @property
    def Y(self) -> float:
        return safe_exp(self.log_Y)

    @property
    def T1(self) -> float:
        return safe_exp(self.log_T1)

    @property
    def T2(self) -> float:
        return safe_exp(self.log_T2)

    @property
    def T3(self) -> float:
        return safe_exp(self.log_T3)

    @property
    def K(self) -> float:
        return safe_exp(self.log_K)


def _log_tau(log_abs_t: float) -> float:
    # log(|t| + 3) without forming |t| when it is huge
    if log_abs_t == -math.inf:
        return math.log(3.0)
    if log_abs_t > 700:
        return log_abs_t + math.log1p(3 * math.exp(-log_abs_t))
    return math.log(math.exp(log_abs_t) + 3.0)


def region_params(
    m: FactoredModulus | int, t: float | None, cfg: EnvelopeConfig, *, log_abs_t: float | None = None
) -> RegionParams:
    """All height-dependent parameters at s = sigma + i t.

    Pass ``log_abs_t`` instead of ``t`` for heights beyond float range.
    """
    m = modulus(m)
    q = m.q
    lq, llq = _logs(q)
    if log_abs_t is None:
        if t is None:
            raise DomainError("t or log_abs_t is required")
        log_abs_t = math.log(abs(t)) if t else -math.inf
        tau = abs(t) + 3.0
        log_tau = math.log(tau)
    else:
        log_tau = _log_tau(log_abs_t)
        tau = safe_exp(log_tau)
    ell = lq + log_tau
    lell = math.log(ell)
    A = cfg.A

    log_Q0 = math.log(m.core) * max(cfg.gamma0, 4 * ell / lq)
    log_Y = 60 * (ell * math.log(2 * ell)) ** 0.75

    eta1 = A / (lq ** (2 / 3) * llq ** (1 / 3))
    eta2 = A * lq / ell
    eta3 = A / (ell**0.5 * lell**0.75)
    theta1 = eta1 / 2
    theta2 = eta2 / 2
    theta3 = 0.5 * ell**-0.25 * eta3

    log_T1 = cfg.B1 * lq ** (5 / 3) * llq ** (1 / 3)
    log_T2 = cfg.B2 * lq**4 * llq**3
    log_T3 = cfg.B2 * lq**4 / llq

    if log_abs_t <= log_T1:
        case_eta, eta, vartheta = 1, eta1, theta1
        log_K = math.log(lq ** (2 / 3) * llq ** (1 / 3))
    elif log_abs_t <= log_T2:
        case_eta, eta, vartheta = 2, eta2, theta2
        log_K = math.log(ell / lq)
    else:
        case_eta, eta, vartheta = 3, eta3, theta3
        log_K = 100 * ell**0.25

    if log_abs_t <= log_T1:
        case_Theta, Theta = 1, lq ** (2 / 3) * llq ** (4 / 3)
    elif log_abs_t <= log_T3:
        case_Theta, Theta = 2, ell * llq / lq
    else:
        case_Theta, Theta = 3, (ell * lell) ** 0.75

    return RegionParams(
        q, log_abs_t, tau, ell, log_Q0, log_Y,
        eta1, eta2, eta3, theta1, theta2, theta3,
        log_T1, log_T2, log_T3, log_K,
        eta, vartheta, Theta, case_eta, case_Theta,
    )


@dataclass(frozen=True)
class Theta3Remark:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def remark_theta3(m: FactoredModulus | int, t: float, cfg: EnvelopeConfig) -> Theta3Remark:
    """Both sides of A/(l log l)^(3/4) <= 1/(40000 (log core + (l log 2l)^(3/4)))."""
    m = modulus(m)
    ell = math.log(m.q) + math.log(abs(t) + 3)
    lhs = cfg.A / (ell * math.log(ell)) ** 0.75
    rhs = 1 / (40000 * (math.log(m.core) + (ell * math.log(2 * ell)) ** 0.75))
    return Theta3Remark(lhs, rhs)


@dataclass(frozen=True)
class IwaniecCheck:
    holds: bool
    vartheta: float | Fraction
    lhs: float
    rhs: float


def iwaniec_admissible(
    eta, K: float | None = None, T: float = 1.0, q: float = 3, *, log_K=None
) -> IwaniecCheck:
    """vartheta = eta / (400 log K) and the admissibility inequality

        8 log(5 log 3q) + (24/eta) log(2K / (5 vartheta)) <= 1 / (15 vartheta).

    When ``eta`` and ``log_K`` are rationals, ``vartheta`` is exact.
    """
    if not 0 < eta < Fraction(1, 3):
        raise DomainError(f"eta must lie in (0, 1/3), got {eta}")
    if log_K is None:
        if K is None:
            raise DomainError("K or log_K is required")
        if not K >= math.e:
            raise DomainError(f"need K >= e, got {K}")
        log_K = math.log(K)
    elif not log_K >= 1:
        raise DomainError(f"need log K >= 1, got {log_K}")
    if not T >= 1:
        raise DomainError(f"need T >= 1, got {T}")
    if not q >= 1:
        raise DomainError(f"need q >= 1, got {q}")
    if isinstance(eta, Rational) and isinstance(log_K, Rational):
        vartheta = Fraction(eta) / (400 * Fraction(log_K))
    else:
        vartheta = eta / (400 * log_K)
    v = float(vartheta)
    e = float(eta)
    lhs = 8 * math.log(5 * math.log(3 * q)) + (24 / e) * (math.log(2 / (5 * v)) + float(log_K))
    rhs = 1 / (15 * v)
    return IwaniecCheck(lhs <= rhs, vartheta, lhs, rhs)


def mv_bound_b(Delta: float, r: float, R: float) -> float:
    """b(Delta, r, R) = 2R/(R - r)^2 + 1/((R - r) log(Delta/R)) for 0 < r < R < Delta."""
    if not 0 < r < R < Delta:
        raise DomainError(f"need 0 < r < R < Delta, got r={r}, R={R}, Delta={Delta}")
    return 2 * R / (R - r) ** 2 + 1 / ((R - r) * math.log(Delta / R))


@dataclass(frozen=True)
class PerronChoice:
    case: int
    log_T: float

    @property
    def T(self) -> float:
        return safe_exp(self.log_T)


def perron_T_select(
    x: float | None, q: float, cfg: EnvelopeConfig, *, log_x: float | None = None
) -> PerronChoice:
    """Truncation height T for Perron's formula, by the range of x against Q1, Q2."""
    lx = _log_arg(x, log_x)
    if not lx > math.e:
        raise DomainError("need x > e^e")
    lq, llq = _logs(q)
    th = thresholds_Q(q)
    if lx <= th.log_Q1:
        return PerronChoice(1, cfg.B1 * lx / (lq ** (2 / 3) * llq ** (4 / 3)))
    if lx <= th.log_Q2:
        return PerronChoice(2, cfg.B1 * math.sqrt(lx * lq / llq))
    return PerronChoice(3, 16 * cfg.B2 * lx ** (4 / 7) * math.log(lx) ** (-3 / 7))


@dataclass(frozen=True)
class WiredCheck:
    passed: bool
    threshold: float
    min_vartheta: float
    argmin_log_t: float
    offending_log_t: tuple[float, ...] = field(default=())
    grid: int = 0


def perron_wired_check(
    m: FactoredModulus | int,
    T: float | None,
    cfg: EnvelopeConfig,
    grid: int = 1000,
    *,
    log_T: float | None = None,
) -> WiredCheck:
    """Check c_perron / Theta(T) < vartheta(t) on t = 0 and a log grid of [1, T]."""
    if grid < 2:
        raise DomainError("grid needs at least two points")
    lT = _log_arg(T, log_T, "T")
    if lT < 0:
        raise DomainError("need T >= 1")
    threshold = cfg.c_perron / region_params(m, None, cfg, log_abs_t=lT).Theta
    log_ts = np.concatenate(([-math.inf], np.linspace(0.0, lT, grid - 1)))
    thetas = np.array([region_params(m, None, cfg, log_abs_t=float(lt)).vartheta for lt in log_ts])
    bad = tuple(float(lt) for lt, v in zip(log_ts, thetas) if not threshold < v)
    i = int(np.argmin(thetas))
    return WiredCheck(not bad, threshold, float(thetas[i]), float(log_ts[i]), bad, grid)
