"""Command-line entry point: ``powmod <subcommand> ...``.

Exit codes: 0 success, 1 failed verification, 2 bad arguments or
out-of-domain input, 3 resource or precision limits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from .acceptance import run_all
from .arith import cached_sieve
from .bounds import NON_PAPER_NOTICE, beta, log_envelope_E, perron_T_select, region_params
from .characters import (
    DirichletCharacter,
    build_structure,
    character_from_label,
    enumerate_characters,
    principal,
)
from .config import RunConfig, load_config
from .errors import DomainError, PrecisionError, RangeError, ResourceError
from .lfunc import NONPRINCIPAL_SIGMA_MIN, Rectangle, perron_reconstruct, zero_scan
from .sums import (
    character_sums,
    dirichlet_poly,
    exp_sum,
    max_exp_sum,
    max_over_characters,
    max_progression_sum,
    mobius_sum,
    progression_sum,
    psi_sum,
    walsh_coefficient,
)

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _g(v: float) -> str:
    return format(float(v), ".17g")


def _csv_text(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in cfg.header_lines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_g(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(cfg: RunConfig, payload: dict) -> str:
    payload = dict(payload, config_hash=cfg.hash, notice=NON_PAPER_NOTICE)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _require(args, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing {', '.join(missing)}")


def _x_values(args) -> list[float]:
    if args.x_grid:
        try:
            return [float(v) for v in args.x_grid.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --x-grid {args.x_grid!r}") from exc
    _require(args, "x")
    return [args.x]


def _sieve(cfg: RunConfig, need: int):
    if need > cfg.sieve_limit:
        raise ResourceError(f"needs a sieve to {need}, above sieve_limit={cfg.sieve_limit}")
    return cached_sieve(max(need, 2), cap=cfg.sieve_limit)


def _character(args) -> DirichletCharacter:
    """The --character label, else the first non-principal character mod --q."""
    if args.character:
        chi = character_from_label(args.character)
        if args.q is not None and chi.q != args.q:
            raise UsageError(f"character {args.character} is not mod {args.q}")
        return chi
    _require(args, "q")
    chars = [c for c in enumerate_characters(build_structure(args.q)) if not c.is_principal]
    if not chars:
        return next(iter(enumerate_characters(build_structure(args.q))))
    return chars[0]


# ---------------------------------------------------------------- sums


def cmd_sums(args, cfg: RunConfig) -> int:
    header = ["kind", "q", "character_label_or_a", "x", "re", "im", "abs", "normalized"]
    rows = []
    kind = args.kind
    if kind == "walsh":
        _require(args, "n")
        t = _sieve(cfg, (1 << args.n) - 1)
        mask = args.A
        v = walsh_coefficient(args.n, mask, t, args.mu_zero)
        rows.append(["walsh", "", f"{mask:#x}", float((1 << args.n) - 1), float(v), 0.0, float(abs(v)), v / 2**args.n])
    elif kind == "dirichlet-poly":
        _require(args, "M", "N", "t")
        chi = _character(args)
        v = dirichlet_poly(args.M, args.N, args.t, chi, cap=cfg.sieve_limit)
        rows.append(["dirichlet-poly", chi.q, chi.label, float(args.M + args.N), v.real, v.imag, abs(v), abs(v) / args.N])
    else:
        _require(args, "q")
        xs = _x_values(args)
        t = _sieve(cfg, math.floor(max(xs)))
        for x in xs:
            rows.extend(_sum_rows(args, kind, x, t))
    with _output(args.out) as fh:
        fh.write(_csv_text(cfg, header, rows))
    return 0


def _sum_rows(args, kind: str, x: float, t) -> list[list]:
    q = args.q
    if kind in ("mobius", "psi"):
        if args.character:
            chi = _character(args)
            v = (mobius_sum if kind == "mobius" else psi_sum)(x, chi, t).value
            return [[kind, q, chi.label, float(x), v.real, v.imag, abs(v), abs(v) / x]]
        if args.max:
            r = max_over_characters(x, q, kind, t)
            return [[f"max-{kind}", q, r.argmax_label, float(x), r.value, 0.0, r.value, r.normalized]]
        chars, vals = character_sums(x, q, kind, t)
        return [[kind, q, c.label, float(x), v.real, v.imag, abs(v), abs(v) / x] for c, v in zip(chars, vals)]
    if kind == "exp":
        if args.a is not None:
            v = exp_sum(x, q, args.a, t)
            return [["exp", q, args.a, float(x), v.real, v.imag, abs(v), abs(v) / x]]
        r = max_exp_sum(x, q, t)
        return [["max-exp", q, r.argmax_label, float(x), r.value, 0.0, r.value, r.normalized]]
    if kind == "progression":
        if args.a is not None:
            v = progression_sum(x, q, args.a, t)
            return [["progression", q, args.a, float(x), float(v), 0.0, float(abs(v)), abs(v) / x]]
        r = max_progression_sum(x, q, t)
        return [["max-progression", q, r.argmax_label, float(x), r.value, 0.0, r.value, r.normalized]]
    raise UsageError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------- envelopes


def cmd_envelopes(args, cfg: RunConfig) -> int:
    env = cfg.envelope
    if args.beta:
        n = args.grid
        if n < 1:
            raise UsageError("--grid must be positive")
        rows = []
        top = Fraction(args.alpha_max).limit_denominator(10**6)
        for k in range(1, n + 1):
            a = k * top / n
            rows.append([float(a), float(beta(a))])
        text = _csv_text(cfg, ["alpha", "beta"], rows)
    else:
        _require(args, "q")
        if args.log_x:
            log_xs = [float(v) for v in args.log_x.split(",")]
        else:
            log_xs = list(np.linspace(math.log(args.x_min), math.log(args.x_max), args.points))
        rows = []
        for lx in log_xs:
            l1, case = log_envelope_E(1, lx, args.q, env)
            l2, _ = log_envelope_E(2, lx, args.q, env)
            choice = perron_T_select(None, args.q, env, log_x=lx) if lx > math.e else None
            rows.append([
                _exp(lx), float(args.q), _exp(l1), _exp(l2), case,
                choice.T if choice else math.nan, lx, l1, l2,
                choice.log_T if choice else math.nan,
            ])
        text = _csv_text(cfg, ["x", "q", "E1", "E2", "case", "T", "log_x", "log_E1", "log_E2", "log_T"], rows)
    with _output(args.out) as fh:
        fh.write(text)
    return 0


def _exp(v: float) -> float:
    return math.exp(v) if v < 709.7 else math.inf


# ---------------------------------------------------------------- L-functions


def cmd_scan_zeros(args, cfg: RunConfig) -> int:
    chi = _character(args)
    sigma_max = args.sigma_max
    sigma_min = args.sigma_min
    if sigma_min is None:
        floor_ = 1.0 if chi.is_principal else NONPRINCIPAL_SIGMA_MIN
        vartheta = region_params(chi.structure.modulus, args.t_max, cfg.envelope).vartheta if chi.q >= 3 else 0.5
        sigma_min = max(1 - vartheta, floor_ + 1e-3)
    t_min = -args.t_max if args.t_min is None else args.t_min
    rect = Rectangle(sigma_min, sigma_max, t_min, args.t_max)
    rep = zero_scan(
        chi, rect, (args.n_sigma, args.n_t), args.refine_tol or cfg.refine_tol,
        target_abs_error=min(cfg.target_abs_error, 1e-10), cfg=cfg.envelope,
    )
    with _output(args.out) as fh:
        fh.write(_json_text(cfg, rep.to_dict(cfg.hash)))
    return 0


def cmd_perron(args, cfg: RunConfig) -> int:
    _require(args, "x", "T")
    if args.principal or args.q == 1:
        _require(args, "q")
        chi = principal(args.q)
    else:
        chi = _character(args)
    t = _sieve(cfg, math.floor(args.x))
    r = perron_reconstruct(
        args.kind, args.x, chi, args.T, args.step or cfg.quadrature_step, t, R_constant=args.R_constant
    )
    with _output(args.out) as fh:
        fh.write(_json_text(cfg, r.to_dict(cfg.hash)))
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    only = [int(v) for v in args.only.split(",")] if args.only else None
    results = run_all(seed=cfg.seed if args.seed is None else args.seed, only=only)
    with _output(args.out) as fh:
        for line in cfg.header_lines():
            fh.write(f"# {line}\n")
        for r in results:
            fh.write(r.line() + "\n")
        passed = sum(r.passed for r in results)
        fh.write(f"{passed}/{len(results)} criteria passed\n")
    return 0 if passed == len(results) else 1


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int0(v: str) -> int:
    return int(v, 0)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="powmod", description="Twisted Mobius sums, envelopes and L-function tools.")
    p.add_argument("--config", help="key=value file overriding RunConfig / EnvelopeConfig defaults")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sums", help="character, additive, progression, Walsh and polynomial sums")
    s.add_argument("--kind", required=True, choices=["mobius", "psi", "exp", "progression", "walsh", "dirichlet-poly"])
    s.add_argument("--q", type=int)
    s.add_argument("--x", type=float)
    s.add_argument("--x-grid", help="comma-separated cutoffs")
    s.add_argument("--character", help="character label such as 8:1,0")
    s.add_argument("--a", type=int)
    s.add_argument("--max", action="store_true", help="report the maximum over characters")
    s.add_argument("--n", type=int, help="bit length for --kind walsh")
    s.add_argument("--A", type=_int0, default=0, help="index-set mask for --kind walsh (e.g. 0x5)")
    s.add_argument("--mu-zero", type=int, default=0)
    s.add_argument("--M", type=float)
    s.add_argument("--N", type=float)
    s.add_argument("--t", type=float)
    s.add_argument("--out")

    e = sub.add_parser("envelopes", help="beta(alpha) or E_1, E_2 and the Perron T over an x grid")
    e.add_argument("--beta", action="store_true")
    e.add_argument("--grid", type=int, default=1000)
    e.add_argument("--alpha-max", type=float, default=10 / 7)
    e.add_argument("--q", type=float)
    e.add_argument("--x-min", type=float, default=1e3)
    e.add_argument("--x-max", type=float, default=1e300)
    e.add_argument("--points", type=int, default=100)
    e.add_argument("--log-x", help="comma-separated log x values (for x beyond double range)")
    e.add_argument("--out")

    z = sub.add_parser("scan-zeros", help="grid |L| over a rectangle and refine zeros")
    z.add_argument("--q", type=int)
    z.add_argument("--character")
    z.add_argument("--sigma-min", type=float)
    z.add_argument("--sigma-max", type=float, default=1.1)
    z.add_argument("--t-min", type=float)
    z.add_argument("--t-max", type=float, default=20.0)
    z.add_argument("--n-sigma", type=int, default=50)
    z.add_argument("--n-t", type=int, default=200)
    z.add_argument("--refine-tol", type=float)
    z.add_argument("--out")

    r = sub.add_parser("perron", help="truncated Perron integral against the direct sum")
    r.add_argument("--kind", required=True, choices=["psi", "mobius"])
    r.add_argument("--x", type=float)
    r.add_argument("--q", type=int)
    r.add_argument("--character")
    r.add_argument("--principal", action="store_true", help="use the principal character mod q")
    r.add_argument("--T", type=float)
    r.add_argument("--step", type=float)
    r.add_argument("--R-constant", type=float, default=10.0)
    r.add_argument("--out")

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    return p


_COMMANDS = {
    "sums": cmd_sums,
    "envelopes": cmd_envelopes,
    "scan-zeros": cmd_scan_zeros,
    "perron": cmd_perron,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except (UsageError, DomainError, RangeError, OSError) as exc:
        print(f"powmod: error: {exc}", file=sys.stderr)
        return 2
    except (ResourceError, PrecisionError, MemoryError) as exc:
        print(f"powmod: resource error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
