# -*- coding: utf-8 -*-

"""Command line interface: ``qdiv [OPTIONS] COMMAND``."""

import logging
import sys

import click
from colorama import Fore, Style

from qdiv import __version__
from qdiv.exceptions import AnalysisError, ScenarioError
from qdiv.pipeline import emit, run
from qdiv.scenario import parse_scenario

logger = logging.getLogger(__name__)

EXIT_SCENARIO = 2
EXIT_ANALYSIS = 3

VERDICT_COLORS = {
    'CP-divisible': Fore.GREEN,
    'P-divisible-only': Fore.YELLOW,
    'divisible-not-P': Fore.RED,
    'not-divisible': Fore.RED,
    'image non-increasing': Fore.GREEN,
    'not image non-increasing': Fore.YELLOW,
    'none': Fore.GREEN,
    'detected': Fore.RED,
    'P-divisible': Fore.GREEN,
    'not P-divisible': Fore.RED,
}

COMMAND_ANALYSES = {
    'simulate': ('trajectory', 'image-profile'),
    'divisibility': ('image-profile', 'divisibility'),
    'backflow': ('backflow',),
    'certify': ('certify',),
}


def _configure_logging(debug):
    package_logger = logging.getLogger('qdiv')
    if not package_logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter('%(message)s'))
        package_logger.addHandler(handler)
    package_logger.setLevel(logging.DEBUG if debug else logging.INFO)


def colorize_verdict(verdict):
    """Return the verdict wrapped in its colour."""
    return Style.BRIGHT + VERDICT_COLORS.get(verdict, '') + verdict + Fore.RESET + Style.NORMAL


def _execute(ctx, analyses):
    options = ctx.obj
    color = options['color']
    try:
        with open(options['scenario'], 'r', encoding='utf-8') as fh:
            scenario = parse_scenario(fh.read())
    except ScenarioError as err:
        click.secho('invalid scenario %s:' % click.format_filename(options['scenario']), fg='red', err=True,
                    color=color)
        for issue in err.issues:
            click.secho('  %s' % issue, fg='red', err=True, color=color)
        sys.exit(EXIT_SCENARIO)
    scenario = scenario.with_overrides(options['seed'], options['tol_rank'], options['threshold'])
    logger.debug('scenario seed %d, tolerances %s', scenario.seed, scenario.tolerances)
    try:
        record = run(scenario, analyses)
    except AnalysisError as err:
        click.secho('ERROR: %s' % err, fg='red', err=True, color=color)
        sys.exit(EXIT_ANALYSIS)
    emit(record, options['out'])
    for name, verdict in record.verdicts().items():
        click.secho('%s: ' % name, nl=False, bold=True, color=color)
        click.echo(colorize_verdict(verdict), color=color)
    if record.backflow is not None:
        click.echo('max sigma: %.3e at t=%g' % (record.backflow.max_sigma, record.backflow.argmax_t))
    sys.exit(record.exit_code())


@click.group()
@click.version_option(__version__, prog_name='qdiv')
@click.option('-s', '--scenario', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Scenario file.')
@click.option('-o', '--out', default='qdiv-out', type=click.Path(file_okay=False), show_default=True,
              help='Output directory.')
@click.option('--seed', type=click.IntRange(min=0), envvar='QDIV_SEED', default=None,
              help='Sampler seed, overrides QDIV_SEED and the scenario.')
@click.option('--tol-rank', type=float, default=None, help='Relative singular value cutoff.')
@click.option('--threshold', type=float, default=None, help='Backflow threshold.')
@click.option('-D', '--debug', is_flag=True, default=False)
@click.option('--color', default='auto', type=click.Choice(['auto', 'never', 'always'], case_sensitive=False))
@click.pass_context
def main(ctx, scenario, out, seed, tol_rank, threshold, debug, color):
    """Analyse divisibility and information flow of a qubit dynamical map."""
    _configure_logging(debug)
    color = color.lower()
    ctx.obj = {
        'scenario': scenario,
        'out': out,
        'seed': seed,
        'tol_rank': tol_rank,
        'threshold': threshold,
        'color': {'never': False, 'always': True}.get(color),
    }


@main.command()
@click.pass_context
def simulate(ctx):
    """Build the trajectory and its image profile."""
    _execute(ctx, COMMAND_ANALYSES['simulate'])


@main.command()
@click.pass_context
def divisibility(ctx):
    """Classify every grid interval as CP-, P- or not divisible."""
    _execute(ctx, COMMAND_ANALYSES['divisibility'])


@main.command()
@click.pass_context
def backflow(ctx):
    """Hunt for information backflow."""
    _execute(ctx, COMMAND_ANALYSES['backflow'])


@main.command()
@click.pass_context
def certify(ctx):
    """Check projector existence on density subspaces and pure-output shapes."""
    _execute(ctx, COMMAND_ANALYSES['certify'])


@main.command(name='all')
@click.pass_context
def run_all(ctx):
    """Run every analysis listed in the scenario."""
    _execute(ctx, None)


if __name__ == '__main__':
    main()
