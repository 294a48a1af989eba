"""Command-line client. It builds a RunConfig, posts it to the in-process HTTP app and writes
the JSON report and CSV table to the output directory."""

from __future__ import annotations

import json
import os
import sys
import warnings
from pathlib import Path
from typing import Any, Optional

import click

with warnings.catch_warnings():
    # Starlette flags its httpx transport as deprecated on import; the client works unchanged.
    warnings.filterwarnings("ignore", message=".*httpx.*")
    from fastapi.testclient import TestClient

from .api import app
from .models import COMMANDS
from .service import CSV_COLUMNS, EXIT_USAGE

THREADS_ENV = "HEISCONVEX_THREADS"


def _pairs(values: tuple[str, ...], what: str, parse_json: bool) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in values:
        if "=" not in item:
            raise click.UsageError(f"{what} must look like KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        if parse_json:
            try:
                out[k] = json.loads(v)
            except json.JSONDecodeError:
                out[k] = v
        else:
            try:
                out[k] = float(v)
            except ValueError as exc:
                raise click.UsageError(f"{what} {k} needs a number, got {v!r}") from exc
    return out


def build_config(command: str, json_path: Optional[str], flags: dict[str, Any]) -> dict[str, Any]:
    """Merge a JSON config file with explicit flags (flags win; threads fall back to the env var)."""
    cfg: dict[str, Any] = {}
    if json_path:
        try:
            cfg = json.loads(Path(json_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise click.UsageError(f"cannot read config {json_path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise click.UsageError("config must be a JSON object")
        if cfg.get("command") not in (None, command):
            raise click.UsageError(f"config command {cfg['command']!r} does not match {command!r}")
    cfg["command"] = command
    gal = dict(cfg.get("gallery") or {})
    if flags["gallery"]:
        gal["name"] = flags["gallery"]
    if flags["param"]:
        gal["params"] = {**gal.get("params", {}), **_pairs(flags["param"], "--param", False)}
    if gal:
        cfg["gallery"] = gal
    grids = dict(cfg.get("grids") or {})
    for key in ("cell", "slice_samples", "base_grid", "seed", "t_spacing"):
        if flags[key] is not None:
            grids[key] = flags[key]
    if grids:
        cfg["grids"] = grids
    if flags["out"]:
        cfg["output_dir"] = flags["out"]
    if flags["threads"] is not None:
        cfg["threads"] = flags["threads"]
    elif cfg.get("threads") is None and os.environ.get(THREADS_ENV):
        try:
            cfg["threads"] = int(os.environ[THREADS_ENV])
        except ValueError as exc:
            raise click.UsageError(f"{THREADS_ENV} must be an integer") from exc
    if flags["field"]:
        cfg["field"] = flags["field"]
    if flags["R"] is not None:
        cfg["R"] = flags["R"]
    if flags["option"]:
        cfg["options"] = {**cfg.get("options", {}), **_pairs(flags["option"], "--option", True)}
    return cfg


def write_outputs(out_dir: str, slug: str, report: dict, csv: str) -> tuple[Path, Path]:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    jp, cp = d / f"{slug}.json", d / f"{slug}.csv"
    with open(jp, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    with open(cp, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(csv)
    return jp, cp


def run_command(command: str, json_path: Optional[str], flags: dict[str, Any]) -> int:
    cfg = build_config(command, json_path, flags)
    with TestClient(app) as client:
        resp = client.post("/run", json=cfg)
    if resp.status_code == 422:
        detail = "; ".join(f"{'.'.join(map(str, e['loc'][1:]))}: {e['msg']}" for e in resp.json()["detail"])
        click.echo(f"error: invalid config: {detail}", err=True)
        return EXIT_USAGE
    resp.raise_for_status()
    res = resp.json()
    slug = command.replace(" ", "-")
    jp, cp = write_outputs(cfg.get("output_dir", "."), slug, res["report"], res["csv"])
    if res["exit_code"] == EXIT_USAGE:
        click.echo(f"error: {res['message']}", err=True)
    click.echo(f"{command}: {res['verdict']} (exit {res['exit_code']})")
    click.echo(f"report: {jp}")
    click.echo(f"table:  {cp}")
    return int(res["exit_code"])


def _common(fn):
    opts = [
        click.option("--gallery", "gallery", default=None, help="Gallery entry name."),
        click.option("--param", "param", multiple=True, help="Gallery parameter KEY=VALUE (repeatable)."),
        click.option("--field", "field", default=None, help="Field of the gallery entry to use."),
        click.option("--R", "R", type=float, default=None, help="Ball radius for the Harnack check."),
        click.option("--cell", type=float, default=None, help="p-grid cell size."),
        click.option("--slice-samples", "slice_samples", type=int, default=None, help="Slice samples per base point."),
        click.option("--base-grid", "base_grid", type=int, default=None, help="Base points per axis for slicing quantities."),
        click.option("--t-spacing", "t_spacing", type=float, default=None, help="Vertical spacing of region grids."),
        click.option("--seed", type=int, default=None, help="Seed for every sampled quantity."),
        click.option("--threads", type=int, default=None, help=f"Worker threads (fallback: ${THREADS_ENV})."),
        click.option("--out", "out", default=None, help="Output directory for the JSON and CSV files."),
        click.option("--json", "json_path", default=None, help="JSON config file; explicit flags override it."),
        click.option("--option", "option", multiple=True, help="Command option KEY=VALUE, VALUE parsed as JSON."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _make_command(group: str, name: str) -> click.Command:
    command = f"{group} {name}"

    @click.command(name=name, help=f"Run `{command}`.\n\nCSV columns: {CSV_COLUMNS[command]}")
    @_common
    def cmd(json_path: Optional[str], **flags: Any) -> int:
        return run_command(command, json_path, flags)

    return cmd


@click.group(help="Sampled verifiers and experiments for convexity on the Heisenberg group.")
def cli() -> None:
    pass


for _group, _names in COMMANDS.items():
    _g = click.Group(name=_group, help=f"{_group} subcommands.")
    for _name in _names:
        _g.add_command(_make_command(_group, _name))
    cli.add_command(_g)


def main(argv: Optional[list[str]] = None) -> None:
    """Entry point. Click reports usage errors with status 2, which is reserved here for witnessed
    violations, so they are remapped to 1."""
    try:
        code = cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        code = exc.exit_code
    except click.exceptions.Abort:
        code = EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        code = EXIT_USAGE
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
