"""CLI entry point for evolving-graph queries."""

import click
import functools
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Tuple
from pydantic import ValidationError

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.algorithms import AlgorithmKind
from src.config import THREADS_ENV_VAR, EngineConfig, EngineTemplate
from src.evolving_query import MODES, EvolvingQueryEngine, find_divergence
from src.exceptions import ConfigurationError, EvolvingGraphError
from src.ingest import SnapshotSeries, VertexIdMap, load_series
from src.reporting import (
    build_bench_report,
    build_stats_report,
    measure_windows,
    render_bench_table,
    render_table,
    render_window_table,
    write_json,
    write_result_files,
)
from src.trace_generator import generate_evolving, write_trace

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE = Path(__file__).parent.parent / "templates" / "engine_default.json"

EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_DATA = 3


class UsageFailure(click.ClickException):
    exit_code = EXIT_USAGE


class DataFailure(click.ClickException):
    exit_code = EXIT_DATA


def load_and_validate_template(template_path: str) -> EngineTemplate:
    """
    Load and validate an engine template with helpful error messages.

    Args:
        template_path: Path to the template JSON file

    Returns:
        EngineTemplate: Validated template object

    Raises:
        FileNotFoundError: If template file doesn't exist
        ConfigurationError: If the JSON is malformed or validation fails
    """
    if not Path(template_path).exists():
        raise FileNotFoundError(f"Template file not found: {template_path}")

    try:
        with open(template_path, 'r', encoding='utf-8') as f:
            template_data = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in template: {template_path}")
        raise ConfigurationError(
            f"Template '{template_path}' contains invalid JSON.\n"
            f"Error at line {e.lineno}, column {e.colno}: {e.msg}"
        )

    try:
        validated = EngineTemplate(**template_data)
        logger.debug(f"Template validated: {validated.template_name} v{validated.version}")
        return validated
    except ValidationError as e:
        logger.error(f"Template validation failed: {template_path}")
        logger.error(f"Validation errors:\n{e}")

        error_details = []
        for error in e.errors():
            field = '.'.join(str(x) for x in error['loc'])
            error_details.append(f"  - {field}: {error['msg']}")

        raise ConfigurationError(
            f"Template '{template_path}' has validation errors.\n"
            f"Please check the structure:\n" + '\n'.join(error_details)
        )


def resolve_threads(flag: Optional[str], config: EngineConfig) -> int:
    """Thread count from the flag, then the environment, then the template."""
    for origin, raw in (("--threads", flag), (THREADS_ENV_VAR, os.environ.get(THREADS_ENV_VAR))):
        if raw is None or raw == "":
            continue
        if raw.strip().lower() == "max":
            return os.cpu_count() or 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigurationError(f"{origin} must be a positive integer or 'max', got '{raw}'")
        if threads < 1:
            raise ConfigurationError(f"{origin} must be at least 1, got {threads}")
        return threads
    return config.threads or 1


def parse_window(raw: Optional[str]) -> Optional[Tuple[int, int]]:
    if raw is None:
        return None
    try:
        start, stop = (int(part) for part in raw.split(':'))
    except ValueError:
        raise click.BadParameter(f"expected START:STOP, got '{raw}'", param_hint="--window")
    return start, stop


def parse_window_sizes(raw: Optional[str], available: int) -> List[int]:
    if not raw:
        return [available]
    try:
        return [int(part) for part in raw.split(',') if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated sizes, got '{raw}'", param_hint="--windows")


def guarded(command):
    """Translate engine errors into exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigurationError as e:
            logger.error(f"Configuration error: {e}")
            raise UsageFailure(str(e))
        except FileNotFoundError as e:
            logger.error(f"File not found: {e}")
            raise DataFailure(str(e))
        except (EvolvingGraphError, OSError) as e:
            logger.error(f"{type(e).__name__}: {e}")
            raise DataFailure(str(e))
    return wrapper


def _open_engine(
    ctx: click.Context, manifest: str, window: Optional[str], threads: Optional[str] = None
) -> EvolvingQueryEngine:
    if threads is not None:
        ctx.obj['threads'] = resolve_threads(threads, ctx.obj['config'])
        logger.debug(f"Engine threads: {ctx.obj['threads']}")
    series: SnapshotSeries = load_series(manifest)
    bounds = parse_window(window)
    if bounds is not None:
        series = series.window(*bounds)
    return EvolvingQueryEngine(series, ctx.obj['config'], ctx.obj['threads'])


def _source_vertex(series: SnapshotSeries, token: str) -> int:
    id_map = series.id_map or VertexIdMap.identity(series.num_vertices)
    return id_map.lookup(token)


manifest_option = click.option(
    '--manifest', '-m', required=True, type=click.Path(dir_okay=False), help='Dataset manifest JSON'
)
alg_option = click.option(
    '--alg', 'algorithm', required=True,
    type=click.Choice([k.value for k in AlgorithmKind], case_sensitive=False),
    help='Query algorithm'
)
source_option = click.option('--source', '-s', required=True, help='Source vertex (external id)')
window_option = click.option('--window', default=None, help='Only snapshots START..STOP-1, e.g. 2:6')
threads_option = click.option(
    '--threads', '-t', default=None, help='Worker threads, or "max"; overrides the global option'
)


@click.group()
@click.option(
    '--config', '-c', 'config_path',
    default=None,
    help='Path to engine template (default: templates/engine_default.json)'
)
@click.option('--threads', '-t', default=None, help=f'Worker threads, or "max" (default: ${THREADS_ENV_VAR})')
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.pass_context
@guarded
def cli(ctx, config_path, threads, verbose):
    """Query evolving graphs across many snapshots at once.

    Example:
        evograph query -m data/canonical/manifest.json --alg sssp -s 0 --mode cqrs
    """
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    if config_path is not None:
        config = load_and_validate_template(config_path).engine
    elif DEFAULT_TEMPLATE.exists():
        config = load_and_validate_template(str(DEFAULT_TEMPLATE)).engine
    else:
        config = EngineConfig()

    ctx.ensure_object(dict)
    ctx.obj['config'] = config
    ctx.obj['threads'] = resolve_threads(threads, config)
    logger.debug(f"Engine threads: {ctx.obj['threads']}")


@cli.command()
@click.option('--vertices', required=True, type=click.IntRange(min=1), help='Vertex count')
@click.option('--edges', required=True, type=click.IntRange(min=0), help='Edges in the base snapshot')
@click.option('--snapshots', required=True, type=click.IntRange(min=0), help='Number of delta batches')
@click.option('--batch-size', required=True, type=click.IntRange(min=0), help='Updates per delta batch')
@click.option('--add-fraction', default=0.5, show_default=True, type=float, help='Share of additions per batch')
@click.option('--seed', default=0, show_default=True, type=int, help='Random seed')
@click.option('--out-dir', '-o', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.pass_context
@guarded
def generate(ctx, vertices, edges, snapshots, batch_size, add_fraction, seed, out_dir):
    """Generate a synthetic evolution trace (base, deltas, manifest)."""
    base, deltas = generate_evolving(
        vertices, edges, snapshots, batch_size, add_fraction, seed, ctx.obj['config'].generator
    )
    written = write_trace(
        out_dir, vertices, base, deltas,
        info=f"generated with seed={seed} batch_size={batch_size} add_fraction={add_fraction}"
    )
    click.echo(f"✓ Wrote {len(written)} files to {out_dir}")


@cli.command()
@manifest_option
@alg_option
@source_option
@click.option('--mode', type=click.Choice(MODES), default='cqrs', show_default=True, help='Evaluation mode')
@click.option('--out-dir', '-o', default=None, type=click.Path(file_okay=False), help='Write result files here')
@click.option('--stats', 'stats_path', default=None, type=click.Path(dir_okay=False), help='Write stats JSON here')
@window_option
@threads_option
@click.pass_context
@guarded
def query(ctx, manifest, algorithm, source, mode, out_dir, stats_path, window, threads):
    """Evaluate a query on every snapshot."""
    engine = _open_engine(ctx, manifest, window, threads)
    q = engine.query(algorithm, _source_vertex(engine.series, source))
    outcome = engine.run(mode, q)

    if out_dir:
        write_result_files(out_dir, outcome, engine.series)
    report = build_stats_report(outcome, engine.series)
    if stats_path:
        write_json(report, stats_path)
    click.echo(render_table(report))


@cli.command()
@manifest_option
@alg_option
@source_option
@click.option('--mode', type=click.Choice(MODES), default='cqrs', show_default=True, help='Mode to check')
@window_option
@threads_option
@click.pass_context
@guarded
def verify(ctx, manifest, algorithm, source, mode, window, threads):
    """Check a mode against full recomputation of every snapshot."""
    engine = _open_engine(ctx, manifest, window, threads)
    q = engine.query(algorithm, _source_vertex(engine.series, source))
    got = engine.run(mode, q)
    want = engine.run("full", q) if mode != "full" else got

    divergence = find_divergence(got.results, want.results)
    if divergence is None:
        click.echo(f"✓ {mode} matches full recomputation on {len(got.results)} snapshots")
        return

    id_map = engine.series.id_map or VertexIdMap.identity(engine.series.num_vertices)
    click.echo(
        f"MISMATCH snapshot={got.snapshot_indices[divergence.snapshot]} "
        f"vertex={id_map.external(divergence.vertex)} got={divergence.got} want={divergence.want}",
        err=True,
    )
    ctx.exit(EXIT_MISMATCH)


@cli.command()
@manifest_option
@alg_option
@source_option
@click.option('--windows', default=None, help='Comma-separated window sizes (default: all snapshots)')
@click.option('--out', 'out_path', default=None, type=click.Path(dir_okay=False), help='Write JSON here')
@click.pass_context
@guarded
def stats(ctx, manifest, algorithm, source, windows, out_path):
    """Unchanged-vertex fractions and detection recall per window prefix."""
    engine = _open_engine(ctx, manifest, None)
    sizes = parse_window_sizes(windows, len(engine.series))
    report = measure_windows(engine, algorithm, _source_vertex(engine.series, source), sizes)
    if out_path:
        write_json(report, out_path)
        click.echo(render_window_table(report))
    else:
        click.echo(json.dumps(report.model_dump(), indent=2))


@cli.command()
@manifest_option
@alg_option
@source_option
@click.option('--stats', 'stats_path', default=None, type=click.Path(dir_okay=False), help='Write JSON here')
@window_option
@threads_option
@click.pass_context
@guarded
def bench(ctx, manifest, algorithm, source, stats_path, window, threads):
    """Run all modes on one query and compare time and work."""
    engine = _open_engine(ctx, manifest, window, threads)
    q = engine.query(algorithm, _source_vertex(engine.series, source))
    outcomes = [engine.run(mode, q) for mode in MODES]
    report = build_bench_report(outcomes, engine.series)
    if stats_path:
        write_json(report, stats_path)
    click.echo(render_bench_table(report))
    if not report.identical_results:
        ctx.exit(EXIT_MISMATCH)


if __name__ == '__main__':
    cli()
