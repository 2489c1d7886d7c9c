# app/routes/cli.py
import json

import click
from flask import Blueprint, current_app

from app.models.experiment import SamplerKind
from app.models.schedule import CompetenceVariant, Weighting
from app.services.experiment_service import ExperimentService
from app.services.graph_service import GraphService
from app.services.report_service import ReportService
from app.utils.validators import Validators

harness = Blueprint('harness', __name__, cli_group=None)


class HarnessUsageError(click.UsageError):
    exit_code = 1


class HarnessRuntimeError(click.ClickException):
    exit_code = 2


def _fail_on_error(result):
    if 'error' in result:
        raise HarnessRuntimeError(result['error'])
    return result


def _experiment_options(command):
    options = [
        click.option('--config', 'config_path', help='Experiment JSON file or bundled experiment name'),
        click.option('--scenario', help='Simulator scenario file or bundled scenario name'),
        click.option('--sampler', help='UNIFORM, PROPORTIONAL, TEMPERATURE, CCLM_MAX or CCLM_AVG'),
        click.option('--tau', help='Temperature for temperature sampling (a number or inf)'),
        click.option('--weighting', type=click.Choice([w.value for w in Weighting]),
                     help='Weight refresh used inside the curriculum'),
        click.option('--threshold', type=float, help='Promotion threshold t in [0, 1]'),
        click.option('--variant', type=click.Choice([v.value for v in CompetenceVariant]),
                     help='HRL-evaluated competence variant'),
        click.option('--eval-interval', type=int, help='Training steps between evaluation rounds'),
        click.option('--dev-sample', 'dev_sample_size', type=int, help='Dev samples per language per evaluation'),
        click.option('--patience', type=int, help='Rounds without improvement before stopping'),
        click.option('--fallback-after', type=int, help='Round at which leftover candidates are added'),
        click.option('--max-steps', type=int, help='Training step budget'),
        click.option('--seed', 'seeds', type=int, multiple=True, help='Seed; repeat for several seeds'),
        click.option('--output-dir', help='Directory receiving the run directory'),
        click.option('--benchmarks', type=click.Choice(['fixture', 'simulated']),
                     help='Take L* from the fixture table or from simulated bitext models'),
        click.option('--name', help='Run name (the run directory name)')
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _load_experiment(config_path, sampler=None, tau=None, variant=None, seeds=(), **overrides):
    service = ExperimentService()
    try:
        if sampler is not None:
            sampler, parsed_tau = SamplerKind.parse(sampler)
            tau = tau if tau is not None else parsed_tau
        if variant is not None:
            overrides['competence_variant'] = variant

        base = service.load_experiment(config_path)
        kind = sampler or base.sampler
        weighting = overrides.get('weighting') or base.scheduler.weighting
        needs_tau = kind is SamplerKind.TEMPERATURE or weighting == Weighting.TEMPERATURE
        if needs_tau and tau is None and base.temperature is None:
            tau = current_app.config['TEMPERATURE']

        experiment = base.with_overrides(sampler=sampler, temperature=tau, seeds=seeds or None, **overrides)
        if variant is not None and experiment.sampler.is_curriculum:
            # curriculum samplers carry their variant in the sampler name
            experiment = experiment.with_overrides(sampler=f"CCLM_{variant.upper()}")
    except ValueError as e:
        raise HarnessUsageError(str(e))
    return service, experiment


@harness.cli.command('graph-build')
@click.option('--hrl', 'hrls', multiple=True, help='HRL corpus as CODE=PATH; repeat per language')
@click.option('--lrl', 'lrls', multiple=True, help='LRL corpus as CODE=PATH; repeat per language')
@click.option('--fixture', help='Bundled graph fixture name or graph file')
@click.option('--k', type=int, help='Vocabulary size per language')
@click.option('--output', help='Where to write the graph file')
@click.option('--name', help='Graph name stored in the file')
def graph_build(hrls, lrls, fixture, k, output, name):
    """Build the HRL x LRL similarity graph and print its matrix."""
    if fixture and (hrls or lrls):
        raise HarnessUsageError('give either --fixture or corpora, not both')
    if not fixture and not (hrls and lrls):
        raise HarnessUsageError('need --fixture or at least one --hrl and one --lrl corpus')
    try:
        hrl_corpora = dict(Validators.parse_assignment(value) for value in hrls)
        lrl_corpora = dict(Validators.parse_assignment(value) for value in lrls)
    except ValueError as e:
        raise HarnessUsageError(str(e))
    if k is not None and k < 1:
        raise HarnessUsageError('invalid k')

    result = _fail_on_error(GraphService().graph_build(hrl_corpora, lrl_corpora, fixture=fixture,
                                                        k=k, output=output, name=name))
    click.echo(result['matrix'])
    if 'path' in result:
        click.echo(f"graph written to {result['path']}")


@harness.cli.command('run')
@_experiment_options
def run_command(config_path, **options):
    """Run one experiment (every seed) and write its report and traces."""
    service, experiment = _load_experiment(config_path, **options)
    result = _fail_on_error(service.run_experiment(experiment))
    click.echo(result['summary'], nl=False)
    click.echo(f"report written to {result['run_dir']}")


@harness.cli.command('grid-search')
@_experiment_options
@click.option('--thresholds', help='Comma separated thresholds; defaults to the configured grid')
@click.option('--workers', type=int, help='Grid cells run in parallel')
def grid_search(config_path, thresholds, workers, **options):
    """Sweep the promotion threshold and mark the best mean weighted dev loss."""
    try:
        values = (Validators.parse_float_list(thresholds) if thresholds is not None
                  else list(current_app.config['GRID_THRESHOLDS']))
    except ValueError as e:
        raise HarnessUsageError(str(e))
    if not Validators.validate_thresholds(values):
        raise HarnessUsageError('thresholds must be a non-empty list of values in [0, 1]')
    if workers is not None and workers < 1:
        raise HarnessUsageError('workers must be positive')

    service, experiment = _load_experiment(config_path, **options)
    if not experiment.sampler.is_curriculum:
        raise HarnessUsageError(f"grid search needs a CCLM sampler, got {experiment.sampler.value}")

    result = _fail_on_error(service.grid_search(experiment, values, workers))
    click.echo(result['summary'], nl=False)
    click.echo(f"summary written to {result['grid_dir']}")
    if result['failures']:
        raise HarnessRuntimeError(f"{len(result['failures'])} grid cell(s) failed")


@harness.cli.command('report')
@click.argument('run_dirs', nargs=-1)
@click.option('--output-dir', help='Where comparison.csv and comparison.txt go')
@click.option('--json', 'as_json', is_flag=True, help='Print the table as JSON instead of text')
def report(run_dirs, output_dir, as_json):
    """Compare run directories that share a scenario."""
    if not run_dirs:
        raise HarnessUsageError('report needs at least one run directory')

    result = _fail_on_error(ReportService().compare(list(run_dirs), output_dir))
    if as_json:
        click.echo(json.dumps(result['table'], indent=2))
    else:
        click.echo(result['text'], nl=False)
