"""
Command-line surface: one subcommand per experiment plus `suite`

Exit codes: 0 when every asserted row passes, 1 on an assertion failure or an
experiment error, 2 on usage or config errors.
"""
import logging
import sys
from typing import List, Optional, Sequence

import click
import orjson

from .config import Config, configure_logging, load_experiment_config
from .errors import ConfigError
from .graph import ACCEPTANCE_EXPERIMENTS, run_suite
from .nodes.exponents import exponent_verdict
from .state import LabState
from .tools.report_io import write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _run(selected: List[str], config_path: Optional[str], out: Optional[str]) -> int:
    config = load_experiment_config(config_path)
    logger.info("running %s", ", ".join(selected))
    state = run_suite(LabState(config=config, selected=selected))
    directory = out or Config.REPORT_DIR
    for report in state.reports:
        json_path, _ = write_report(report, directory)
        verdict = "passed" if report.passed else "FAILED"
        click.echo(f"{report.experiment_id}: {verdict} ({json_path})")
        for row in report.failures():
            click.echo(f"  ✗ {row.name} = {row.value} ({row.comparison} {row.tolerance}) {row.note}".rstrip())
    for error in state.errors:
        click.echo(f"error: {error}", err=True)
    return EXIT_OK if state.passed else EXIT_FAILED


def experiment_options(func):
    func = click.option("--out", type=click.Path(file_okay=False), default=None,
                        help="Report directory (default: MAXRESTRICT_REPORT_DIR)")(func)
    func = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                        help="Experiment config file")(func)
    return func


@click.group()
@click.option("--log-level", default=None, help="Override LOG_LEVEL")
def cli(log_level: Optional[str]):
    """Numerical lab for the maximal Fourier restriction operator on the sphere"""
    configure_logging(log_level)


@cli.command()
@click.option("--d", "d", type=click.IntRange(2, None), default=None, help="Dimension")
@click.option("--p", "p", default=None, help="Exponent on R^d, e.g. 4/3")
@click.option("--q", "q", default=None, help="Exponent on the sphere, e.g. 2")
@experiment_options
def exponents(d: Optional[int], p: Optional[str], q: Optional[str], config_path, out) -> int:
    """Exponent verdicts for (d, p, q), or the exact exponent checks without arguments"""
    if p is None and q is None and d is None:
        return _run(["exponents"], config_path, out)
    if p is None or q is None:
        raise click.UsageError("--p and --q must be given together")
    verdict = exponent_verdict(d or 3, p, q)
    click.echo(orjson.dumps(verdict, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2).decode())
    return EXIT_OK


def _experiment_command(name: str, help_text: str):
    @experiment_options
    def command(config_path, out) -> int:
        return _run([name], config_path, out)

    command.__doc__ = help_text
    cli.command(name=name)(command)


_experiment_command("extension", "Closed-form restriction and extension checks")
_experiment_command("maximal", "Maximal operator sweep on the Gaussian dilation family")
_experiment_command("knapp", "Knapp cap scaling slopes")
_experiment_command("lebesgue", "Lebesgue-point oscillation experiment")
_experiment_command("identities", "Identity suite of the restriction operators")
_experiment_command("sweep", "Ratio sweep with the operator, family and exponents of the config")
_experiment_command("infrastructure", "Quadrature exactness, Plancherel constant and determinism")


@cli.command()
@experiment_options
def suite(config_path, out) -> int:
    """Every acceptance experiment in sequence"""
    return _run(list(ACCEPTANCE_EXPERIMENTS), config_path, out)


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return its exit code"""
    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name="maxrestrict",
                        standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
