"""Command-line interface.

`run` drives a session (synthetic crowd, live serving, or both), `replay`
re-executes a log and verifies it, `train-critic` fits per-species critics
from a run's dataset files, and `report` prints the experiment-vs-permuted
comparison table.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .critic.features import DatasetShortfall, build_dataset, read_dataset_rows
from .critic.training import compare, cross_validate
from .morphology import SPECIES_NAMES
from .orchestrator import SessionConfig, run_session, replay as replay_log, ReplayError
from .synthcrowd import load_config


def fail(slug: str, **kv) -> None:
    parts = [f"error: {slug}"] + [f"{k}={v}" for k, v in kv.items()]
    click.echo(" ".join(parts), err=True)
    sys.exit(2)


@click.group()
def main():
    """Crowd-in-the-loop evolutionary robotics platform."""


@main.command()
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--ticks", type=int, default=720, show_default=True,
              help="Number of 30-second evaluation windows (0 with --serve: run forever).")
@click.option("--oracle", "oracle_name", type=str, default=None,
              help="Synthetic crowd config: a built-in name or a JSON file path.")
@click.option("--realtime", is_flag=True, help="Pace ticks at 30 wall-clock seconds.")
@click.option("--serve", "serve_addr", type=str, default=None, metavar="HOST:PORT",
              help="Expose the wire protocol while the session runs.")
@click.option("--out", "out_dir", type=click.Path(), default="run_out", show_default=True)
@click.option("--window-ticks", type=int, default=6, show_default=True)
@click.option("--inject-every", type=int, default=120, show_default=True)
@click.option("--generations", type=int, default=120, show_default=True,
              help="Secondary hill-climber generations per injection cycle.")
@click.option("--snapshot-every", type=int, default=1, show_default=True)
@click.option("--quiet", is_flag=True)
def run(seed, ticks, oracle_name, realtime, serve_addr, out_dir, window_ticks,
        inject_every, generations, snapshot_every, quiet):
    """Run a platform session."""
    oracle = None
    if oracle_name:
        try:
            oracle = load_config(oracle_name)
        except FileNotFoundError:
            fail("unknown-oracle-config", name=oracle_name)
    config = SessionConfig(
        seed=seed, window_ticks=window_ticks, inject_every=inject_every,
        generations_per_cycle=generations, snapshot_every=snapshot_every,
        realtime=realtime, oracle=oracle,
    )
    progress = None
    if not quiet:
        def progress(t):
            if t % 60 == 0 or t == ticks:
                click.echo(f"tick {t}/{ticks}")

    if serve_addr:
        _run_serving(config, ticks, out_dir, serve_addr)
    else:
        platform = run_session(config, ticks, out_dir=out_dir, progress=progress)
        click.echo(f"done: {ticks} ticks, state {platform.state_hash()[:16]}, "
                   f"log {Path(out_dir) / 'events.ndjson'}")


def _run_serving(config, ticks, out_dir, serve_addr):
    import uvicorn

    from .service import LiveSession, create_app

    host, _, port = serve_addr.rpartition(":")
    if not host or not port.isdigit():
        fail("bad-serve-address", value=serve_addr)
    session = LiveSession(config, ticks=ticks or 10**9, out_dir=out_dir)
    frontend = Path(__file__).resolve().parents[2] / "frontend"
    app = create_app(session, frontend_dir=frontend if frontend.exists() else None)
    server = uvicorn.Server(uvicorn.Config(app, host=host, port=int(port), log_level="warning"))

    import threading

    def watch():
        session.done.wait()
        server.should_exit = True

    session.start()
    threading.Thread(target=watch, daemon=True).start()
    click.echo(f"serving on {serve_addr}; session of {ticks} ticks started")
    server.run()


@main.command()
@click.argument("log_path", type=click.Path(exists=True))
def replay(log_path):
    """Re-execute a session log and verify every snapshot hash."""
    try:
        platform = replay_log(log_path)
    except ReplayError as err:
        fail("replay-failed", reason=str(err).replace(" ", "_"))
    click.echo(f"replay ok: tick {platform.tick}, state {platform.state_hash()[:16]}")


@main.command("train-critic")
@click.option("--species", required=True, type=click.Choice(SPECIES_NAMES))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True),
              help="A run output directory containing datasets/<species>.tsv.")
@click.option("--folds", type=int, default=30, show_default=True)
@click.option("--epochs", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--per-class", type=int, default=100, show_default=True,
              help="Positive and negative examples drawn per class.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--quiet", is_flag=True)
def train_critic(species, data_dir, folds, epochs, seed, per_class, jobs, quiet):
    """Train a per-species critic with k-fold cross-validation."""
    data_dir = Path(data_dir)
    dataset_path = data_dir / "datasets" / f"{species}.tsv"
    if not dataset_path.exists():
        fail("missing-dataset", species=species, path=dataset_path)
    rows = read_dataset_rows(dataset_path)
    try:
        ds = build_dataset(rows, species, rng_seed=seed, n_per_class=per_class)
    except DatasetShortfall as err:
        fail("insufficient-examples", species=species, positives=err.positives,
             negatives=err.negatives, required=err.required)
    progress = None
    if not quiet:
        def progress(done, total):
            click.echo(f"  fold {done}/{total}")
    report, models, _ = cross_validate(
        ds.X, ds.y, species=species, checksum=ds.checksum,
        folds=folds, epochs=epochs, seed=seed, jobs=jobs, progress=progress,
    )
    out = data_dir / "critics" / species
    out.mkdir(parents=True, exist_ok=True)
    for i, model in enumerate(models):
        model.save(out / f"fold_{i:02d}.npz", meta={"dataset_checksum": ds.checksum})
    (out / "report.json").write_text(report.to_json())
    click.echo(
        f"{species}: MAE {report.mean_absolute_error:.3f} "
        f"permuted {report.permuted_mae:.3f} t={report.t_statistic:.2f} "
        f"p={report.p_raw:.2e} corrected={report.p_corrected:.2e}"
    )


def _stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "n.s."


@main.command()
@click.argument("run_dir", type=click.Path(exists=True))
@click.option("--pairwise", is_flag=True, help="Also print species-vs-species comparisons.")
def report(run_dir, pairwise):
    """Print the experiment-vs-permuted comparison table for trained critics."""
    critics_dir = Path(run_dir) / "critics"
    if not critics_dir.exists():
        fail("no-critics", path=critics_dir)
    from .critic.training import CriticReport

    reports = []
    for rp in sorted(critics_dir.glob("*/report.json")):
        reports.append(CriticReport.from_json(rp.read_text()))
    if not reports:
        fail("no-critics", path=critics_dir)

    click.echo(f"{'species':12s} {'n':>4s} {'MAE':>7s} {'signed':>8s} "
               f"{'permuted':>9s} {'t':>8s} {'p.corr':>10s}  sig")
    for r in reports:
        click.echo(
            f"{r.species:12s} {r.n_samples:4d} {r.mean_absolute_error:7.3f} "
            f"{r.mean_signed_error:8.3f} {r.permuted_mae:9.3f} "
            f"{r.t_statistic:8.2f} {r.p_corrected:10.2e}  {_stars(r.p_corrected)}"
        )
    if pairwise and len(reports) > 1:
        click.echo("\npairwise experiment MAE comparisons (corrected p):")
        for i, a in enumerate(reports):
            for b in reports[i + 1:]:
                _, _, pc = compare(a.fold_mae, b.fold_mae)
                click.echo(f"  {a.species} vs {b.species}: p={pc:.3e} {_stars(pc)}")


@main.command()
@click.option("--server", default="http://127.0.0.1:8000", show_default=True)
@click.option("--user", "username", default="cli", show_default=True)
@click.argument("text")
def chat(server, username, text):
    """Send one chat message to a running serve session."""
    import httpx

    try:
        resp = httpx.post(f"{server}/v1/chat", json={"username": username, "text": text},
                          timeout=10.0)
        resp.raise_for_status()
    except httpx.HTTPError as err:
        fail("chat-failed", reason=type(err).__name__)
    doc = resp.json()
    click.echo(f"accepted={doc['accepted']} parsed_as={doc['parsed_as']}")


if __name__ == "__main__":
    main()
