"""Run configuration and structured verification reports.

The report JSON schema is frozen: field names below may gain siblings in
later versions but are never renamed.  Top level:

    scenario, seed, samples, version, xi, checks, controls, verdict

Each check record:

    id, anchor, max_residual, mean_residual, tolerance, passed, samples,
    na, note, worst  (worst: up to three {chart, point, residual} entries)

Control records additionally carry ``expected_min``: the run passes the
control when the deliberately broken input produces a residual above
that floor.  The overall verdict is "pass" iff every non-control check
passes and every control fails as expected; a quiet control yields
"control_failure".
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

__all__ = [
    "ConfigError",
    "RunConfig",
    "CheckRecord",
    "VerificationReport",
    "parse_config",
    "serialize_config",
    "emit_report",
    "DEFAULT_SAMPLES",
    "DEFAULT_SEED",
]

DEFAULT_SAMPLES = 200
DEFAULT_SEED = 42
_FORMATS = ("json", "text")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str = ""
    xi: tuple[float, ...] | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    tolerances: dict[str, float] = field(default_factory=dict)
    out: str = ""
    format: str = "json"

    def validate(self) -> "RunConfig":
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.format not in _FORMATS:
            raise ConfigError(f"format must be one of {_FORMATS}")
        for k, v in self.tolerances.items():
            if v <= 0.0:
                raise ConfigError(f"tolerance override {k} must be positive")
        return self


def default_seed() -> int:
    env = os.environ.get("LCS_REDUCE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as e:
            raise ConfigError(f"LCS_REDUCE_SEED must be an integer, got {env!r}") from e
    return DEFAULT_SEED


def parse_config(text: str) -> RunConfig:
    """Parse the flat `key = value` configuration format."""
    cfg = RunConfig(seed=default_seed())
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "scenario":
                cfg.scenario = value
            elif key == "xi":
                cfg.xi = tuple(float(x) for x in value.split(",") if x.strip())
            elif key == "samples":
                cfg.samples = int(value)
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "format":
                cfg.format = value
            elif key == "out":
                cfg.out = value
            elif key.startswith("tol."):
                cfg.tolerances[key[4:]] = float(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {e}") from e
    return cfg.validate()


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    if cfg.scenario:
        lines.append(f"scenario = {cfg.scenario}")
    if cfg.xi is not None:
        lines.append("xi = " + ",".join(repr(x) for x in cfg.xi))
    lines.append(f"samples = {cfg.samples}")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"format = {cfg.format}")
    if cfg.out:
        lines.append(f"out = {cfg.out}")
    for k in sorted(cfg.tolerances):
        lines.append(f"tol.{k} = {cfg.tolerances[k]!r}")
    return "\n".join(lines) + "\n"


@dataclass
class CheckRecord:
    id: str
    anchor: str
    max_residual: float
    mean_residual: float
    tolerance: float
    passed: bool
    samples: int
    na: bool = False
    note: str = ""
    worst: list[dict] = field(default_factory=list)
    expected_min: float | None = None  # controls only

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "anchor": self.anchor,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "samples": self.samples,
            "na": self.na,
            "note": self.note,
            "worst": self.worst,
        }
        if self.expected_min is not None:
            d["expected_min"] = self.expected_min
        return d


@dataclass
class VerificationReport:
    scenario: str
    seed: int
    samples: int
    version: str
    xi: tuple[float, ...]
    checks: list[CheckRecord] = field(default_factory=list)
    controls: list[CheckRecord] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        active = [c for c in self.checks if not c.na]
        if any(not c.passed for c in active):
            return "fail"
        if any(not c.passed for c in self.controls if not c.na):
            return "control_failure"
        return "pass"

    def exit_code(self) -> int:
        return 0 if self.verdict == "pass" else 1

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "samples": self.samples,
            "version": self.version,
            "xi": list(self.xi),
            "checks": [c.to_dict() for c in self.checks],
            "controls": [c.to_dict() for c in self.controls],
            "verdict": self.verdict,
        }


def emit_report(report: VerificationReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode()
    if fmt == "text":
        return _text_report(report).encode()
    raise ConfigError(f"unknown report format {fmt!r}")


def _fmt_res(x: float) -> str:
    return f"{x:.3e}"


def _text_report(report: VerificationReport) -> str:
    lines = [
        f"scenario {report.scenario}  seed {report.seed}  samples {report.samples}"
        f"  version {report.version}",
        f"xi sweep: {', '.join(str(x) for x in report.xi)}",
        "",
    ]
    for rec in report.checks:
        if rec.na:
            lines.append(f"  n/a  {rec.id:<24} {rec.note}")
            continue
        status = "pass" if rec.passed else "FAIL"
        lines.append(
            f"  {status} {rec.id:<24} max {_fmt_res(rec.max_residual)} "
            f"mean {_fmt_res(rec.mean_residual)} tol {_fmt_res(rec.tolerance)} "
            f"[{rec.samples} samples]  {rec.anchor}"
        )
        if not rec.passed:
            for w in rec.worst:
                pt = ", ".join(f"{v:+.4f}" for v in w["point"])
                lines.append(f"         worst {_fmt_res(w['residual'])} at "
                             f"{w['chart']} ({pt})")
    if report.controls:
        lines.append("")
        lines.append("  negative controls (must exceed their floor):")
        for rec in report.controls:
            if rec.na:
                lines.append(f"  n/a  {rec.id:<24} {rec.note}")
                continue
            status = "ok" if rec.passed else "QUIET"
            lines.append(
                f"  {status:>4} {rec.id:<24} residual {_fmt_res(rec.max_residual)} "
                f"floor {_fmt_res(rec.expected_min or 0.0)}  {rec.anchor}"
            )
    lines.append("")
    lines.append(f"verdict: {report.verdict}")
    return "\n".join(lines) + "\n"
