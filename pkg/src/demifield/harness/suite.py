"""Run a list of configured checks and emit byte-deterministic JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..checks import CHECKS, CheckConfig, InequalityReport, run_check
from .seeding import GENERATOR_ID, NORMAL_METHOD

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2
CSV_COLUMNS = ("check", "theorem", "kind", "label", "lhs", "lhs_se", "rhs", "rhs_se", "margin", "z_score", "verdict")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    replicates: int = 100_000
    z: float = 3.0
    workers: int | None = None
    checks: tuple[dict, ...] = ()

    def __post_init__(self):
        if self.replicates < 2:
            raise ConfigError("replicates must be >= 2")
        if not self.z > 0:
            raise ConfigError("z must be > 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for entry in self.checks:
            if entry.get("theorem") not in CHECKS:
                raise ConfigError(f"unknown theorem {entry.get('theorem')!r}; known: {sorted(CHECKS)}")

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        known = {"seed", "replicates", "z", "workers", "checks", "description"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown run-config fields {sorted(extra)}")
        workers = data.get("workers")
        return cls(int(data.get("seed", 0)), int(data.get("replicates", 100_000)), float(data.get("z", 3.0)),
                   None if workers is None else int(workers), tuple(data.get("checks", ())))

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))

    def effective_workers(self) -> int | None:
        env = os.environ.get("DEMIFIELD_WORKERS")
        return int(env) if env else self.workers


@dataclass
class SuiteResult:
    report: dict
    exit_code: int
    reports: list = field(default_factory=list)

    def to_json_bytes(self) -> bytes:
        return dumps(self.report).encode("utf-8")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for entry in self.report["checks"]:
            rep = entry.get("report")
            if rep is None:
                writer.writerow([entry["name"], entry["theorem"], "error", "", "", "", "", "", "", "", "ERROR"])
            elif rep["kind"] == "inequality":
                for row in rep["rows"]:
                    writer.writerow([entry["name"], rep["theorem"], "inequality", row["label"], row["lhs"],
                                     row["lhs_se"], row["rhs"], row["rhs_se"], row["margin"], row["z_score"],
                                     row["verdict"]])
            else:
                value = "ratio" if rep["theorem"] == "limsup_trend" else "tail_probability"
                for row in rep["series"]:
                    writer.writerow([entry["name"], rep["theorem"], "trend", "x".join(map(str, row["box"])),
                                     row[value], row["se"], "", "", "", "", rep["verdict"]])
        return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _check_config(entry: dict, run: RunConfig) -> CheckConfig:
    defaults = {"seed": run.seed, "replicates": run.replicates, "z": run.z, "workers": run.effective_workers()}
    return CheckConfig.from_json(entry, defaults)


def run_suite(config: RunConfig, out_dir=None) -> SuiteResult:
    """Execute every check; exit code 2 on any error, else 1 on any VIOLATION, else 0."""
    entries, reports = [], []
    errors = violations = 0
    counts: dict[str, int] = {}
    for n, entry in enumerate(config.checks):
        name = entry.get("name", f"check{n}")
        record = {"name": name, "theorem": entry["theorem"]}
        try:
            rep = run_check(entry["theorem"], _check_config(entry, config))
        except Exception as exc:  # recorded per check, never aborts the suite
            errors += 1
            record["error"] = f"{type(exc).__name__}: {exc}"
            counts["ERROR"] = counts.get("ERROR", 0) + 1
        else:
            reports.append(rep)
            record["report"] = rep.to_json()
            counts[rep.verdict] = counts.get(rep.verdict, 0) + 1
            if isinstance(rep, InequalityReport) and rep.verdict == "VIOLATION":
                violations += 1
        entries.append(record)
    exit_code = EXIT_ERROR if errors else (EXIT_VIOLATION if violations else EXIT_OK)
    report = {
        "seed": config.seed,
        "replicates": config.replicates,
        "z": config.z,
        "rng": {"generator": GENERATOR_ID, "normals": NORMAL_METHOD},
        "summary": {"counts": dict(sorted(counts.items())), "exit_code": exit_code},
        "checks": entries,
    }
    result = SuiteResult(report, exit_code, reports)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_bytes(result.to_json_bytes())
        (out / "rows.csv").write_text(result.to_csv(), encoding="utf-8")
    return result
