"""Operator command line: generate, solve, verify, eval, serve, replay,
import.

Every command exits 0 on success; failures print one machine-parsable
"error: <code>: <message>" line on stderr and exit nonzero.  All
randomness flows from --seed; when omitted a random seed is drawn and
logged so runs can be reproduced.
"""

from __future__ import annotations

import json
import secrets
import sys
from pathlib import Path as FilePath

import click

from . import env as gymenv
from .errors import GridGymError, PathFormatError
from .fixtures import sample_puzzles
from .generator import (
    DIFFICULTY_WEIGHTS,
    FEATURE_RANGES,
    GenConfig,
    difficulty_level,
    generate_with_trace,
    generation_manifest_entry,
)
from .grid import parse_puzzle, serialize_puzzle
from .harness import AgentBinding, aggregate, run_episodes
from .importer import convert_record, iter_records
from .logstore import EpisodeLog, persist_and_replay, session_entries
from .paths import mode_from_name, parse_path, validate_path
from .report import metrics_text_table, write_report
from .rules import verify
from .search import SearchBudget, enumerate_solutions


def _fail(code: str, message: str, exit_code: int = 1):
    click.echo(f"error: {code}: {message}", err=True)
    sys.exit(exit_code)


def _load_puzzle(path: str):
    try:
        return parse_puzzle(FilePath(path).read_text())
    except FileNotFoundError:
        _fail("not_found", f"no such puzzle file {path}")
    except GridGymError as exc:
        _fail("bad_puzzle", str(exc))


@click.group()
def main():
    """Grid-puzzle engine, solver, generator, evaluator and service."""


@main.command()
@click.option("--count", default=1, show_default=True, help="puzzles to emit")
@click.option("--seed", default=None, help="base seed (random when omitted)")
@click.option("--out", "out_dir", default="puzzles", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--cols", default="2,6", show_default=True, help="cell column range lo,hi")
@click.option("--rows", default="2,6", show_default=True, help="cell row range lo,hi")
@click.option("--density", default=0.5, show_default=True)
def generate(count, seed, out_dir, cols, rows, density):
    """Generate certified puzzles plus a manifest."""
    if seed is None:
        seed = secrets.token_hex(4)
        click.echo(f"seed: {seed} (drawn randomly; pass --seed {seed} to reproduce)")
    try:
        cols_range = tuple(int(v) for v in cols.split(","))
        rows_range = tuple(int(v) for v in rows.split(","))
    except ValueError:
        _fail("usage", "--cols/--rows must look like lo,hi")
    out = FilePath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "seed": str(seed),
        "difficulty_weights": DIFFICULTY_WEIGHTS,
        "feature_ranges": {k: list(v) for k, v in FEATURE_RANGES.items()},
        "puzzles": [],
    }
    for k in range(count):
        config = GenConfig(seed=f"{seed}-{k}", cols_range=cols_range,
                           rows_range=rows_range, initial_density=density)
        try:
            puzzle, solutions, _ = generate_with_trace(config)
        except GridGymError as exc:
            _fail("generation_exhausted", str(exc))
        filename = f"{puzzle.puzzle_id}.puz"
        (out / filename).write_text(serialize_puzzle(puzzle))
        manifest["puzzles"].append(generation_manifest_entry(puzzle, solutions, filename))
        click.echo(f"{filename}  level={manifest['puzzles'][-1]['level']} "
                   f"solutions={len(solutions.solutions)}")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    click.echo(f"wrote {count} puzzle(s) to {out}")


@main.command()
@click.argument("puzzle_file", type=click.Path(exists=True))
@click.option("--max-solutions", default=51, show_default=True)
@click.option("--max-nodes", default=50_000_000, show_default=True)
@click.option("--max-time", default=60.0, show_default=True)
@click.option("--json", "json_out", type=click.Path(dir_okay=False),
              help="also write the report to a file")
def solve(puzzle_file, max_solutions, max_nodes, max_time, json_out):
    """Exhaustively enumerate solutions and print the solver report."""
    puzzle = _load_puzzle(puzzle_file)
    budget = SearchBudget(max_solutions=max_solutions, max_nodes=max_nodes,
                          max_time=max_time)
    report = enumerate_solutions(puzzle, budget).to_report()
    text = json.dumps(report, indent=2)
    click.echo(text)
    if json_out:
        FilePath(json_out).write_text(text + "\n")


@main.command(name="verify")
@click.argument("puzzle_file", type=click.Path(exists=True))
@click.option("--path", "path_text", required=True,
              help='"(x0,y0)->(x1,y1)->..." or a direction string like DDRR')
def verify_cmd(puzzle_file, path_text):
    """Check a completed path against all rules; exit 0 iff satisfied."""
    puzzle = _load_puzzle(puzzle_file)
    try:
        path = parse_path(path_text, start=puzzle.start)
        validate_path(puzzle, path)
    except PathFormatError as exc:
        _fail("bad_path", str(exc))
    verdict = verify(puzzle, path)
    click.echo(json.dumps(verdict.to_dict(), indent=2))
    sys.exit(0 if verdict.satisfied else 2)


@main.command(name="eval")
@click.option("--agent", "agent_kind", required=True,
              type=click.Choice(["random", "astar", "chat"]))
@click.option("--puzzles", "puzzles_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--mode", default="no_backtrack", show_default=True,
              type=click.Choice(["no_backtrack", "backtrack"]))
@click.option("--seed", default=None, help="base seed (random agents)")
@click.option("--out", "out_dir", default="eval-out", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--endpoint", default=None, help="chat-completions base URL")
@click.option("--model", default="", help="chat model name")
@click.option("--parallel", default=1, show_default=True)
@click.option("--step-limit", default=100, show_default=True)
@click.option("--process-rewards", is_flag=True, default=False)
def eval_cmd(agent_kind, puzzles_dir, mode, seed, out_dir, endpoint, model,
             parallel, step_limit, process_rewards):
    """Run one episode per puzzle and write the metrics report."""
    if seed is None:
        seed = secrets.token_hex(4)
        click.echo(f"seed: {seed} (drawn randomly; pass --seed {seed} to reproduce)")
    puzzles = {}
    for file in sorted(FilePath(puzzles_dir).glob("*.puz")):
        puzzle = _load_puzzle(str(file))
        puzzles[puzzle.puzzle_id] = puzzle
    if not puzzles:
        _fail("usage", f"no .puz files under {puzzles_dir}")
    if agent_kind == "random":
        binding = AgentBinding(kind="random_walk", seed=str(seed))
    elif agent_kind == "astar":
        binding = AgentBinding(kind="astar")
    else:
        if not endpoint or not model:
            _fail("usage", "--agent chat needs --endpoint and --model")
        binding = AgentBinding(kind="chat_model", endpoint=endpoint, model_name=model)
    config = gymenv.EnvConfig(step_limit=step_limit, process_rewards=process_rewards)
    ordered = [puzzles[k] for k in sorted(puzzles)]
    records = run_episodes(binding, ordered, mode_from_name(mode), config,
                           parallel=parallel)
    report = aggregate(records, puzzles)
    paths = write_report(report, records, out_dir)
    click.echo(metrics_text_table(report))
    click.echo(f"report written to {paths['json']}")


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--puzzles", "puzzles_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="catalog directory (built-in samples when omitted)")
@click.option("--log-dir", default="gridgym-logs", show_default=True,
              type=click.Path(file_okay=False))
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False),
              help="serve a built browser UI from this directory at /")
@click.option("--token", default=None,
              help="shared bearer token (or set GRIDGYM_SERVICE_TOKEN)")
def serve(port, host, puzzles_dir, log_dir, ui_dir, token):
    """Run the session service."""
    import uvicorn

    from .service import PuzzleCatalog, create_app

    if puzzles_dir:
        catalog = PuzzleCatalog.from_dir(puzzles_dir)
    else:
        catalog = PuzzleCatalog(sample_puzzles())
        click.echo("serving built-in sample puzzles (pass --puzzles DIR for your own)")
    app = create_app(catalog, log_dir, auth_token=token)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("log_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--session", "session_id", default=None,
              help="replay just one session id")
@click.option("--puzzles", "puzzles_dir", default=None,
              type=click.Path(exists=True, file_okay=False))
def replay(log_dir, session_id, puzzles_dir):
    """Reconstruct episode transcripts from the service log and verify
    they replay exactly."""
    puzzles = dict(sample_puzzles())
    if puzzles_dir:
        for file in sorted(FilePath(puzzles_dir).glob("*.puz")):
            puzzle = _load_puzzle(str(file))
            puzzles[puzzle.puzzle_id] = puzzle
    entries = EpisodeLog(log_dir).read_entries()
    ids = [session_id] if session_id else sorted({e["session_id"] for e in entries})
    ok = 0
    for sid in ids:
        trace = session_entries(entries, sid)
        try:
            record = persist_and_replay(trace, puzzles)
        except GridGymError as exc:
            _fail("corrupt_log", f"session {sid}: {exc}")
        click.echo(json.dumps({
            "session_id": sid,
            "puzzle_id": record.puzzle_id,
            "status": record.status,
            "total_actions": record.total_actions,
            "forward_edges": record.forward_edges,
            "integrity": "ok",
        }))
        ok += 1
    click.echo(f"{ok} session(s) replayed with integrity ok")


@main.command(name="import")
@click.argument("source", type=click.Path(exists=True))
@click.option("--out", "out_dir", default="imported", show_default=True,
              type=click.Path(file_okay=False))
def import_cmd(source, out_dir):
    """Best-effort conversion of upstream dataset records to the
    canonical schema."""
    src = FilePath(source)
    files = sorted(src.glob("*.json*")) if src.is_dir() else [src]
    out = FilePath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    converted, failed = 0, 0
    for file in files:
        for k, record in enumerate(iter_records(file.read_text())):
            try:
                puzzle = convert_record(record, fallback_id=f"{file.stem}-{k}")
                (out / f"{puzzle.puzzle_id}.puz").write_text(serialize_puzzle(puzzle))
                converted += 1
            except (GridGymError, ValueError, json.JSONDecodeError) as exc:
                failed += 1
                click.echo(f"skip {file.name}[{k}]: {exc}", err=True)
    click.echo(f"imported {converted} puzzle(s), {failed} failed")
    if converted == 0:
        _fail("import_empty", "no record could be converted")


if __name__ == "__main__":
    main()
