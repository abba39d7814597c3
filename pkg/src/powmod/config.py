"""Run configuration: a flat ``key = value`` file with a stable hash.

Envelope constants use their EnvelopeConfig field names; the remaining
keys are listed in RunConfig.  Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .bounds import EnvelopeConfig, NON_PAPER_NOTICE
from .errors import DomainError

__all__ = ["RunConfig", "parse_config", "load_config", "SIEVE_LIMIT_CAP"]

SIEVE_LIMIT_CAP = 10**8

_ENVELOPE_KEYS = {f.name for f in fields(EnvelopeConfig)}


@dataclass(frozen=True)
class RunConfig:
    envelope: EnvelopeConfig = field(default_factory=EnvelopeConfig)
    sieve_limit: int = 10**7
    target_abs_error: float = 1e-10
    refine_tol: float = 1e-10
    quadrature_step: float = 1e-2
    output_format: str = "csv"
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.sieve_limit <= SIEVE_LIMIT_CAP:
            raise DomainError(f"sieve_limit must lie in [1, {SIEVE_LIMIT_CAP}], got {self.sieve_limit}")
        for name in ("target_abs_error", "refine_tol", "quadrature_step"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"output_format must be csv or json, got {self.output_format!r}")

    def items(self) -> list[tuple[str, object]]:
        out = list(asdict(self.envelope).items())
        out += [(f.name, getattr(self, f.name)) for f in fields(self) if f.name != "envelope"]
        return sorted(out)

    def canonical(self) -> str:
        """One ``key=value`` line per setting, sorted, floats via repr."""
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.items())

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def header_lines(self) -> list[str]:
        return [f"config_hash={self.hash}", NON_PAPER_NOTICE, "config: " + " ".join(self.canonical().split())]

    def with_overrides(self, values: dict[str, str]) -> "RunConfig":
        env_changes = {}
        run_changes = {}
        run_types = {f.name: f.type for f in fields(self) if f.name != "envelope"}
        for key, raw in values.items():
            if key in _ENVELOPE_KEYS:
                env_changes[key] = _coerce(key, raw, int if key == "gamma0" else float)
            elif key in run_types:
                kind = {"sieve_limit": int, "seed": int, "output_format": str}.get(key, float)
                run_changes[key] = _coerce(key, raw, kind)
            else:
                raise DomainError(f"unknown config key {key!r}")
        env = self.envelope.replace(**env_changes) if env_changes else self.envelope
        return replace(self, envelope=env, **run_changes)


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(key: str, raw: str, kind):
    if raw.strip().lower() == "none" and key == "c0":
        return None
    try:
        if kind is int:
            return int(raw, 0)
        return kind(raw)
    except ValueError as exc:
        raise DomainError(f"bad value for {key}: {raw!r}") from exc


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise DomainError(f"line {lineno}: duplicate key {key!r}")
        values[key] = raw
    return (base or RunConfig()).with_overrides(values)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text())
