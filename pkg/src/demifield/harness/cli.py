"""``demifield`` command line: gen, check, upcross, suite."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from ..checks import CheckConfig, InequalityReport, run_check
from ..fields import FieldSample, parse_generator, sample_field
from ..stats import MODES, upcross_total
from .seeding import derive_seed
from .suite import EXIT_ERROR, EXIT_OK, EXIT_VIOLATION, RunConfig, dumps, run_suite


def _load(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}") from exc


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _generator_section(data: dict) -> dict:
    return data.get("generator", data)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Simulate multiindexed demimartingales and check maximal inequalities."""


@main.command()
@click.option("--config", "config_path", required=True, help="Generator JSON (or an object with a 'generator' key).")
@click.option("--out", default=None, help="CSV destination; stdout if omitted.")
@click.option("--seed", type=int, default=None, help="Master seed; replicate 0 of this seed is written.")
def gen(config_path, out, seed):
    """Write one field realisation as CSV."""
    data = _load(config_path)
    seed = int(data.get("seed", 0)) if seed is None else seed
    try:
        spec = parse_generator(_generator_section(data))
        field = sample_field(spec, derive_seed(seed, 0))
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    _emit(field.to_csv(), out)


@main.command()
@click.option("--theorem", required=True, help="Check id, e.g. cairoli_moment.")
@click.option("--config", "config_path", required=True, help="Check config JSON.")
@click.option("--seed", type=int, default=None, help="Master seed (overrides the config).")
@click.option("--out", default=None, help="Report destination; stdout if omitted.")
def check(theorem, config_path, seed, out):
    """Run one check and emit its JSON report."""
    data = _load(config_path)
    if seed is not None:
        data = dict(data, seed=seed)
    try:
        report = run_check(theorem, CheckConfig.from_json(data))
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    _emit(dumps(report.to_json()), out)
    click.echo(f"{theorem}: {report.verdict}", err=True)
    violated = isinstance(report, InequalityReport) and report.verdict == "VIOLATION"
    sys.exit(EXIT_VIOLATION if violated else EXIT_OK)


@main.command()
@click.option("--config", "config_path", required=True,
              help="JSON with 'a', 'b', optional 'mode', and either 'values' or 'generator' (+ 'seed').")
def upcross(config_path):
    """Count directional upcrossings of one field."""
    data = _load(config_path)
    mode = data.get("mode", "corner_line")
    if mode not in MODES:
        raise click.ClickException(f"mode must be one of {MODES}")
    try:
        if "values" in data:
            field = FieldSample.from_array(np.asarray(data["values"], dtype=float))
        else:
            field = sample_field(parse_generator(data["generator"]), derive_seed(int(data.get("seed", 0)), 0))
        report = upcross_total(field, float(data["a"]), float(data["b"]), mode)
    except (KeyError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(dumps(report.to_json()), nl=False)


@main.command()
@click.option("--config", "config_path", required=True, help="Suite JSON.")
@click.option("--out", required=True, help="Output directory for report.json and rows.csv.")
def suite(config_path, out):
    """Run every configured check; exit 0 all clear, 1 on a VIOLATION, 2 on errors."""
    try:
        config = RunConfig.from_json(_load(config_path))
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    result = run_suite(config, out)
    for entry in result.report["checks"]:
        status = entry["report"]["verdict"] if "report" in entry else "ERROR"
        click.echo(f"{entry['name']}: {status}", err=True)
    sys.exit(result.exit_code)


if __name__ == "__main__":
    main()
