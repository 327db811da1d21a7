"""Report data model and emission in human, json, and tsv formats.

Machine formats are byte-stable for a fixed configuration: timing fields are
suppressed unless explicitly requested, field order is fixed, and JSON is
emitted with sorted keys so a parse/re-emit round trip is the identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__

__all__ = [
    "CHECK_IDS",
    "DIAGNOSTIC_IDS",
    "CheckSpec",
    "VerificationReport",
    "RunConfig",
    "SuiteReport",
    "emit_report",
    "REPORT_SCHEMA_VERSION",
]

REPORT_SCHEMA_VERSION = 1

CHECK_IDS = (
    "MainSupercongruence",
    "ScalarKatzDwork",
    "MixedCartierCancellation",
    "ClosureScalars",
    "BridgeCancellation",
    "LayerDivisibility",
    "NumeratorSaturation",
    "LayerDefectEquivalence",
    "SplitTower",
    "InertObstruction",
    "InertParity",
    "InertAp72",
    "MumSignature",
    "TransportDiagnostic",
)

DIAGNOSTIC_IDS = ("TransportDiagnostic",)


@dataclass(frozen=True)
class CheckSpec:
    """A named machine-checkable job with its parameters."""

    id: str
    prime: int | None = None
    ell: tuple = (1, 2, 3)
    m_max: int = 3
    r_max: int = 2
    precision_override: int | None = None

    def __post_init__(self):
        if self.id not in CHECK_IDS:
            raise ValueError(f"unknown check id {self.id!r}")

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "prime": self.prime,
            "ell": list(self.ell),
            "m_max": self.m_max,
            "r_max": self.r_max,
            "precision_override": self.precision_override,
        }


@dataclass
class VerificationReport:
    """Outcome of one check: status, witness scalars, and coverage."""

    spec: CheckSpec
    status: str  # Pass | Fail | Skipped
    modulus: str = ""
    witnesses: dict = field(default_factory=dict)
    max_index_tested: int = 0
    elapsed_ms: float = 0.0
    failure_detail: str | None = None

    def __post_init__(self):
        if self.status not in ("Pass", "Fail", "Skipped"):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "Fail" and not self.failure_detail:
            raise ValueError("Fail reports must carry failure_detail")

    @property
    def diagnostic(self) -> bool:
        return self.spec.id in DIAGNOSTIC_IDS

    def to_json_dict(self, timings: bool = False) -> dict:
        out = {
            "id": self.spec.id,
            "prime": self.spec.prime,
            "ell": list(self.spec.ell),
            "modulus": self.modulus,
            "status": self.status,
            "witnesses": dict(sorted(self.witnesses.items())),
            "max_index_tested": self.max_index_tested,
            "failure_detail": self.failure_detail,
            "diagnostic": self.diagnostic,
        }
        if timings:
            out["elapsed_ms"] = round(self.elapsed_ms, 3)
        return out


@dataclass
class RunConfig:
    """Echoed configuration: flags beat environment beat defaults."""

    command: str = "suite"
    primes: tuple = ()
    ell: tuple = (1, 2, 3)
    m_max: int = 3
    r_max: int = 2
    precision: int | None = None
    backend: str = "residue"
    cache_dir: str | None = None
    report_format: str = "human"
    out: str | None = None
    seed: int = 0
    jobs: int = 1
    diagnostics: bool = False
    timings: bool = False

    def __post_init__(self):
        if self.backend not in ("residue", "exact"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.report_format not in ("human", "json", "tsv"):
            raise ValueError(f"unknown format {self.report_format!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "primes": list(self.primes),
            "ell": list(self.ell),
            "m_max": self.m_max,
            "r_max": self.r_max,
            "precision": self.precision,
            "backend": self.backend,
            "cache_dir": self.cache_dir,
            "format": self.report_format,
            "seed": self.seed,
            "jobs": self.jobs,
            "diagnostics": self.diagnostics,
        }


def aggregate_status(reports) -> str:
    """Pass iff every non-diagnostic check passes; any Fail wins; else Skipped."""
    gating = [r for r in reports if not r.diagnostic]
    if any(r.status == "Fail" for r in gating):
        return "Fail"
    if gating and all(r.status == "Pass" for r in gating):
        return "Pass"
    return "Skipped"


@dataclass
class SuiteReport:
    config: RunConfig
    reports: list
    consistency: list = field(default_factory=list)
    total_elapsed_ms: float = 0.0
    tool_version: str = __version__

    @property
    def aggregate(self) -> str:
        if self.consistency:
            return "Fail"
        return aggregate_status(self.reports)

    def sorted_reports(self):
        return sorted(
            self.reports,
            key=lambda r: (r.spec.id, r.spec.prime or 0, r.spec.ell),
        )

    def to_json_dict(self, timings: bool | None = None) -> dict:
        timings = self.config.timings if timings is None else timings
        out = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "tool": {"name": "qcartier", "version": self.tool_version},
            "config": self.config.to_json_dict(),
            "checks": [r.to_json_dict(timings) for r in self.sorted_reports()],
            "consistency": list(self.consistency),
            "aggregate": self.aggregate,
        }
        if timings:
            out["total_elapsed_ms"] = round(self.total_elapsed_ms, 3)
        return out


def _witness_cell(witnesses: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in sorted(witnesses.items())) or "-"


def _emit_json(suite: SuiteReport) -> str:
    return json.dumps(suite.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _emit_tsv(suite: SuiteReport) -> str:
    lines = ["id\tp\tell\tmodulus\tstatus\twitnesses\tmax_index\tms"]
    for r in suite.sorted_reports():
        ms = f"{r.elapsed_ms:.3f}" if suite.config.timings else "-"
        lines.append(
            "\t".join(
                [
                    r.spec.id,
                    str(r.spec.prime) if r.spec.prime is not None else "-",
                    ",".join(str(e) for e in r.spec.ell),
                    r.modulus or "-",
                    r.status,
                    _witness_cell(r.witnesses),
                    str(r.max_index_tested),
                    ms,
                ]
            )
        )
    lines.append(f"# aggregate\t{suite.aggregate}")
    return "\n".join(lines) + "\n"


def _emit_human(suite: SuiteReport) -> str:
    rows = []
    header = ("check", "p", "ell", "modulus", "status", "max_n", "witnesses")
    rows.append(header)
    for r in suite.sorted_reports():
        rows.append(
            (
                r.spec.id,
                str(r.spec.prime) if r.spec.prime is not None else "-",
                ",".join(str(e) for e in r.spec.ell),
                r.modulus or "-",
                r.status,
                str(r.max_index_tested),
                _witness_cell(r.witnesses),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = [f"qcartier verification report (v{suite.tool_version})"]
    cfg = suite.config
    lines.append(
        f"config: command={cfg.command} primes={','.join(map(str, cfg.primes)) or '-'} "
        f"backend={cfg.backend} ell={','.join(map(str, cfg.ell))} "
        f"m_max={cfg.m_max} r_max={cfg.r_max} seed={cfg.seed}"
    )
    lines.append("")
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(len(header))))
    # scalar table in the style of the computational summary
    scalar_rows = [
        r for r in suite.sorted_reports() if r.spec.id == "ClosureScalars" and r.witnesses
    ]
    if scalar_rows:
        lines.append("")
        lines.append("bridge scalars:")
        for r in scalar_rows:
            pieces = []
            for ell in r.spec.ell:
                g = r.witnesses.get(f"gamma_{ell}")
                b = r.witnesses.get(f"beta_{ell}")
                if g is not None:
                    pieces.append(f"(gamma_{ell},beta_{ell})=({g},{b})")
            lines.append(f"  p={r.spec.prime}: " + " ".join(pieces))
    for r in suite.sorted_reports():
        if r.status == "Fail":
            lines.append("")
            lines.append(f"FAIL {r.spec.id} p={r.spec.prime}: {r.failure_detail}")
    for note in suite.consistency:
        lines.append("")
        lines.append(f"INTERNAL INCONSISTENCY: {note}")
    lines.append("")
    tail = f"aggregate: {suite.aggregate}"
    if suite.config.timings:
        tail += f" (total {suite.total_elapsed_ms / 1000.0:.2f}s)"
    lines.append(tail)
    return "\n".join(lines) + "\n"


def emit_report(suite: SuiteReport, report_format: str | None = None) -> str:
    fmt = report_format or suite.config.report_format
    if fmt == "json":
        return _emit_json(suite)
    if fmt == "tsv":
        return _emit_tsv(suite)
    if fmt == "human":
        return _emit_human(suite)
    raise ValueError(f"unknown format {fmt!r}")
