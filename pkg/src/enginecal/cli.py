"""Command line client of the calibration service.

Talks to a running service given by ``--server`` (or ENGINECAL_SERVER);
without one, the service app is started in-process.

Exit codes: 0 success, 2 budget exhausted, 3 infeasible limits,
1 any other error (including a failed verification).
"""
from __future__ import annotations

import json
import sys
import warnings
from typing import Optional

import click
import httpx


class Client:
    def __init__(self, server: Optional[str]):
        if server:
            self._http = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from enginecal.service.app import create_app
            self._http = TestClient(create_app())

    def call(self, method: str, path: str, body: Optional[dict] = None) -> dict:
        r = self._http.request(method, path, json=body)
        if r.status_code >= 400:
            try:
                detail = r.json().get("detail", r.text)
            except ValueError:
                detail = r.text
            raise click.ClickException(f"{r.status_code}: {detail}")
        return r.json()


def _emit(data: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        for line in lines:
            click.echo(line)


def _campaign_lines(res: dict) -> list[str]:
    rep = res["report"]
    sel = rep.get("selection") or {}
    out = [f"status: {res['status']}", f"evaluations: {res['evaluations']}",
           f"stored points: {rep['stored_points']}  reduced: {rep['reduced_points']}"]
    if sel:
        out.append(f"ilp: {sel.get('ilp_status')}  objective: {sel.get('objective')}")
        for pol, val in (sel.get("cycle_mg_per_km") or {}).items():
            out.append(f"  {pol}: {val:.4g} mg/km (limit {rep['limits_mg_per_km'].get(pol)})")
    if rep.get("violating"):
        out.append(f"violating: {', '.join(rep['violating'])}")
    if res.get("out_dir"):
        out.append(f"output: {res['out_dir']}")
    return out


seed_option = click.option("--seed", type=int, default=None, help="Random seed (overrides the config).")
json_option = click.option("--json", "as_json", is_flag=True, help="Print the raw response.")


@click.group()
@click.option("--server", envvar="ENGINECAL_SERVER", default=None, help="Service URL; in-process if omitted.")
@click.pass_context
def main(ctx, server):
    """Adaptive engine calibration."""
    ctx.obj = Client(server)


def _run(ctx, mode: str, config: str, seed, budget, out, as_json):
    res = ctx.obj.call("POST", "/campaigns", {"config": config, "mode": mode, "seed": seed,
                                              "budget": budget, "out_dir": out})
    _emit(res, as_json, _campaign_lines(res))
    sys.exit(res["exit_code"])


@main.command()
@click.argument("config")
@seed_option
@click.option("--budget", type=int, default=None, help="Oracle evaluation budget.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Run directory.")
@json_option
@click.pass_context
def calibrate(ctx, config, seed, budget, out, as_json):
    """Run an adaptive campaign from CONFIG (bundled name or file)."""
    _run(ctx, "adaptive", config, seed, budget, out, as_json)


@main.command()
@click.argument("config")
@seed_option
@click.option("--budget", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@json_option
@click.pass_context
def baseline(ctx, config, seed, budget, out, as_json):
    """Measure uniform lattices of growing resolution until a map conforms."""
    _run(ctx, "baseline", config, seed, budget, out, as_json)


@main.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@seed_option
@click.option("--budget", type=int, default=None, help="New total budget.")
@json_option
@click.pass_context
def resume(ctx, run_dir, seed, budget, as_json):
    """Continue a campaign from its last snapshot."""
    res = ctx.obj.call("POST", "/campaigns/resume", {"out_dir": run_dir, "budget": budget, "seed": seed})
    _emit(res, as_json, _campaign_lines(res))
    sys.exit(res["exit_code"])


@main.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--against", type=click.Path(exists=True, file_okay=False), default=None,
              help="Second run; writes cellwise ratio maps.")
@seed_option
@json_option
@click.pass_context
def export(ctx, run_dir, out, against, seed, as_json):
    """Write engine maps, rate maps and the weighting table as text."""
    res = ctx.obj.call("POST", "/export", {"run_dir": run_dir, "out_dir": out, "against": against})
    _emit(res, as_json, res["files"])


@main.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@seed_option
@json_option
@click.pass_context
def verify(ctx, run_dir, seed, as_json):
    """Re-check a stored solution against its drivability and emission rows."""
    res = ctx.obj.call("POST", "/verify", {"run_dir": run_dir})
    lines = [f"ok: {res['ok']}"]
    if res.get("reason"):
        lines.append(f"reason: {res['reason']}")
    for part in ("ilp", "map"):
        rep = res.get(part)
        if rep:
            lines.append(f"{part}: violated rows {rep['violated_rows'] or 'none'}")
    if res.get("complete") is not None:
        lines.append(f"complete: {res['complete']}")
    _emit(res, as_json, lines)
    sys.exit(0 if res["ok"] else 1)


if __name__ == "__main__":
    main()
