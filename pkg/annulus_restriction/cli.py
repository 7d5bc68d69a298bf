import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import click

from annulus_restriction.asympt import Quantity, classify, gap_report, slope_fit
from annulus_restriction.confmap import compute_L
from annulus_restriction.elliptic import AnnulusParams, Branch
from annulus_restriction.errors import RestrictionError
from annulus_restriction.mcref import McConfig, estimate_avoidance
from annulus_restriction.oracle import precision_check
from annulus_restriction.output import OutputFormat, logreal_columns, render
from annulus_restriction.restriction import BoundPair, F_bounds
from annulus_restriction.util import load_config, worker_count

logger = logging.getLogger(__name__)


def setup_logging(config):
    log_level = config.log_level
    log_file = config.log_file
    log_fmt = "[%(asctime)s] %(levelname)s %(filename)s:%(funcName)s:%(lineno)i :: %(message)s"
    datefmt = "%Y-%m-%d %H:%M:%S"
    logging.basicConfig(filename=log_file, format=log_fmt, level=log_level, datefmt=datefmt)


def _emit(ctx: click.Context, records: Sequence[Dict[str, Any]]) -> None:
    click.echo(render(records, ctx.obj["format"]), nl=False)


def _parse_grid(_ctx, _param, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _branch(value: Optional[str]) -> Optional[Branch]:
    return Branch(value) if value else None


def _bounds_record(pair: BoundPair) -> Dict[str, Any]:
    record: Dict[str, Any] = {}
    record.update(logreal_columns("lower", pair.lower))
    record.update(logreal_columns("upper", pair.upper))
    for name, value in pair.terms.items():
        record.update(logreal_columns(name, value))
    return record


branch_option = click.option("--branch", type=click.Choice([b.value for b in Branch]), default=None)


@click.group(invoke_without_command=True)
@click.option("--format", "fmt", type=click.Choice([f.value for f in OutputFormat]), default="csv")
@click.option("--precision-check", "run_checks", is_flag=True, help="Run the high-precision consistency suites.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--log-level", default=None, help="Overrides log_level from the config.")
@click.pass_context
def cli(ctx, fmt, run_checks, config_file, log_level):
    """Bounds and reference computations for conformal restriction hulls avoiding a disk."""
    config = load_config(config_file)
    if log_level:
        config.log_level = log_level.upper()
    setup_logging(config)
    logger.debug(f"Starting with config : \n{json.dumps(config, indent=4)}")
    ctx.obj = {"format": OutputFormat(fmt), "config": config}

    if run_checks:
        results = precision_check(config.numerics.high_precision_dps)
        records = [
            {"suite": r.suite, "passed": r.passed, "worst": r.worst, "tolerance": r.tolerance, "points": r.points}
            for r in results
        ]
        _emit(ctx, records)
        ctx.exit(0 if all(r.passed for r in results) else 1)
    elif ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())


@cli.command("map")
@click.option("--a", "a", type=float, required=True)
@branch_option
@click.pass_context
def map_command(ctx, a, branch):
    """Slit half-length L, 1 - L, K and the two nomes."""
    params = AnnulusParams(a)
    data = compute_L(params, _branch(branch))
    record: Dict[str, Any] = {"a": a, "q": params.q, "log_h": params.log_h, "log_hp": params.log_hp}
    record["branch"] = data.branch.value
    record["L"] = data.L
    record.update(logreal_columns("one_minus_L", data.one_minus_L))
    record.update(logreal_columns("K", data.K))
    record.update(logreal_columns("K_prime", data.K_prime))
    record["k"] = data.modulus
    _emit(ctx, [record])


@cli.command()
@click.option("--a", "a", type=float, required=True)
@click.option("--b", "b", type=float, required=True)
@click.option("--x", "x", type=float, required=True)
@branch_option
@click.pass_context
def bounds(ctx, a, b, x, branch):
    """Lower and upper bounds on F(a, b, x) with their breakdown."""
    pair = F_bounds(a, b, x, _branch(branch))
    record: Dict[str, Any] = {"a": a, "b": b, "x": x, "verdict": classify(b, x).value}
    record.update(_bounds_record(pair))
    _emit(ctx, [record])


@cli.command()
@click.option("--b", "b", type=float, required=True)
@click.option("--x", "x", type=float, required=True)
@click.option("--a-grid", callback=_parse_grid, default=None, help="Comma-separated negative a values.")
@click.option("--quantity", type=click.Choice([q.value for q in Quantity]), default=Quantity.lower.value)
@click.pass_context
def slope(ctx, b, x, a_grid, quantity):
    """Least-squares slope of a log-quantity against 1/a."""
    config = ctx.obj["config"]
    grid = a_grid or config.asympt.default_grid
    fit = slope_fit(Quantity(quantity), b, x, grid, threads=worker_count(config))
    record = {
        "quantity": fit.quantity.value,
        "b": fit.b,
        "x": fit.x,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "target": fit.target,
        "ratio": fit.ratio,
        "rms_residual": fit.rms_residual,
        "log_ratio": fit.log_ratio,
        "grid": ";".join(repr(a) for a in fit.grid),
    }
    _emit(ctx, [record])


@cli.command()
@click.option("--b", "b", type=float, required=True)
@click.option("--x", "x", type=float, required=True)
@click.option("--a-grid", callback=_parse_grid, default=None, help="Comma-separated negative a values.")
@click.pass_context
def gap(ctx, b, x, a_grid):
    """Per-a gap between the bounds and the cross-term headroom."""
    config = ctx.obj["config"]
    report = gap_report(b, x, a_grid or config.asympt.default_grid, threads=worker_count(config))
    _emit(ctx, report.to_dict(orient="records"))


@cli.command("classify")
@click.option("--b", "b", type=float, required=True)
@click.option("--x", "x", type=float, required=True)
@click.pass_context
def classify_command(ctx, b, x):
    """Which hypothesis covers (b, x)."""
    _emit(ctx, [{"b": b, "x": x, "verdict": classify(b, x).value}])


@cli.command()
@click.option("--q", "q", type=float, required=True)
@click.option("--x", "x", type=float, required=True)
@click.option("--samples", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--step", type=float, default=None)
@click.option("--delta", type=float, default=None, help="Launch distance from the circle.")
@click.option("--target-arc", type=float, default=None)
@click.pass_context
def mc(ctx, q, x, samples, seed, step, delta, target_arc):
    """Monte Carlo estimate for b = 1, next to the bounds it should fall between."""
    config = ctx.obj["config"]
    cfg = McConfig(
        q=q,
        x=x,
        n_samples=samples,
        seed=seed,
        launch_offset=delta if delta is not None else config.mc.launch_offset,
        target_arc=target_arc if target_arc is not None else config.mc.target_arc,
        step=step,
        chunk_size=config.mc.chunk_size,
        max_steps=config.mc.max_steps,
        min_accepted=config.mc.min_accepted,
    )
    estimate = estimate_avoidance(cfg, threads=worker_count(config))
    record: Dict[str, Any] = {
        "q": q,
        "x": x,
        "seed": estimate.seed,
        "n_samples": estimate.n_samples,
        "n_accepted": estimate.n_accepted,
        "n_avoid": estimate.n_avoid,
        "p_hat": estimate.p_hat,
        "ci_halfwidth": estimate.ci_halfwidth,
    }
    if q > 0:
        record.update(_bounds_record(F_bounds(math.log(q), 1.0, x)))
    _emit(ctx, [record])


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = list(argv) if argv is not None else None
        rv = cli.main(args=args, prog_name="annulus_restriction", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except RestrictionError as e:
        logger.critical(f"Exception while running {e}")
        click.echo(f"{type(e).__name__}: {e}", err=True)
        return 1
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
