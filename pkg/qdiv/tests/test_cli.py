# -*- coding: utf-8 -*-
"""Tests for the cli interface and the analysis pipeline."""

import pytest
from click.testing import CliRunner

from qdiv import __version__, cli
from qdiv.exceptions import NotDivisible
from qdiv.pipeline import run
from qdiv.propagation import DivisibilityReport
from qdiv.scenario import parse_scenario

MARKOVIAN = """
model = pauli
pauli.gamma1 = constant(1)
pauli.gamma2 = constant(0.5)
pauli.gamma3 = constant(0.2)
grid.t_end = 1
grid.steps = 10
sampler.n_pairs = 2
sampler.ancilla_dim = 1
sampler.biased = false
certify.subspaces = 1
certify.p_values = 0.5
"""


@pytest.fixture
def scenario_file(tmp_path):
    """Write a scenario into the temporary directory."""
    def write(text, name='scenario.txt'):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def _invoke(args, env=None):
    runner = CliRunner()
    return runner.invoke(cli.main, ['--color', 'never'] + args, env=env)


def test_version():
    """Print the version without a scenario."""
    result = _invoke(['--version'])
    assert 0 == result.exit_code
    assert __version__ in result.output


def test_missing_scenario():
    """The scenario option is required."""
    result = _invoke(['divisibility'])
    assert 2 == result.exit_code
    assert 'scenario' in result.output


def test_divisibility(scenario_file, tmp_path):
    """A Markovian scenario is CP-divisible."""
    out = tmp_path / 'out'
    result = _invoke(['-s', scenario_file(MARKOVIAN), '-o', str(out), 'divisibility'])
    assert 0 == result.exit_code
    assert 'divisibility: CP-divisible' in result.output
    assert 'image-profile: image non-increasing' in result.output
    assert (out / 'report.txt').exists()
    trajectory = [line.split(',') for line in (out / 'trajectory.csv').read_text().splitlines()]
    assert 35 == len(trajectory[0])
    assert ['t', 're00', 'im00'] == trajectory[0][:3]
    assert ['rank', 'min_choi_eig'] == trajectory[0][-2:]
    assert 12 == len(trajectory)
    assert ['4', ''] == trajectory[1][-2:]
    assert all(float(row[-1]) >= -1e-9 for row in trajectory[2:])
    verdicts = (out / 'verdicts.csv').read_text().splitlines()
    assert 's,t,domain_rank,kernel_ok,cp,p_div,min_choi_eig,witness' == verdicts[0]
    assert 11 == len(verdicts)
    assert 'rate criterion: CP-divisible' in (out / 'report.txt').read_text()


def test_invalid_scenario(scenario_file, tmp_path):
    """Scenario problems exit with status 2 and list every issue."""
    path = scenario_file('model = pauly\ngrid.steps = 3\n')
    result = _invoke(['-s', path, '-o', str(tmp_path / 'out'), 'simulate'])
    assert 2 == result.exit_code
    assert 'line 1: UnknownKey' in result.output
    assert 'line 2: BadValue' in result.output
    assert not (tmp_path / 'out').exists()


def test_no_analyses(scenario_file, tmp_path):
    """With an empty analyses list only the report is written."""
    out = tmp_path / 'out'
    result = _invoke(['-s', scenario_file(MARKOVIAN + 'analyses =\n'), '-o', str(out), 'all'])
    assert 0 == result.exit_code
    assert ['report.txt'] == sorted(p.name for p in out.iterdir())


def test_backflow_files(scenario_file, tmp_path):
    """The hunt writes every sample, its settings and per-pair curves."""
    out = tmp_path / 'out'
    result = _invoke(['-s', scenario_file(MARKOVIAN), '-o', str(out), 'backflow'])
    assert 0 == result.exit_code
    assert 'backflow: none' in result.output
    rows = (out / 'backflow.csv').read_text().splitlines()
    assert 't,sigma,pair_id' == rows[0]
    assert 1 + (3 + 2) * 11 == len(rows)
    meta = (out / 'backflow-meta.csv').read_text()
    assert 'seed,0' in meta
    assert 'samples_used,55' in meta
    assert (out / 'plotdata' / 'pair-x.csv').exists()


def test_seed_determinism(scenario_file, tmp_path):
    """Equal seeds give byte-identical tables."""
    path = scenario_file(MARKOVIAN)
    for name in ('a', 'b'):
        result = _invoke(['-s', path, '-o', str(tmp_path / name), '--seed', '3', 'backflow'])
        assert 0 == result.exit_code
    for table in ('backflow.csv', 'backflow-meta.csv'):
        assert (tmp_path / 'a' / table).read_bytes() == (tmp_path / 'b' / table).read_bytes()


def test_seed_from_environment(scenario_file, tmp_path):
    """QDIV_SEED sets the seed when --seed is absent."""
    out = tmp_path / 'out'
    result = _invoke(['-s', scenario_file(MARKOVIAN), '-o', str(out), 'backflow'], env={'QDIV_SEED': '7'})
    assert 0 == result.exit_code
    assert 'seed,7' in (out / 'backflow-meta.csv').read_text()
    assert 'seed: 7' in (out / 'report.txt').read_text()


def test_certify(scenario_file, tmp_path):
    """Projector and pure-output certificates land in one table."""
    out = tmp_path / 'out'
    result = _invoke(['-s', scenario_file(MARKOVIAN), '-o', str(out), 'certify'])
    assert 0 == result.exit_code
    rows = (out / 'certificates.csv').read_text(encoding='utf-8').splitlines()
    assert 1 + 2 + 3 == len(rows)
    diagonal = [row for row in rows if row.startswith('projector,diagonal-0.5,')]
    assert 1 == len(diagonal)
    assert ',false,true,true,' in diagonal[0]
    assert any(row.startswith('pure-output,disk-projector,') and row.endswith(',great circle') for row in rows)


def test_classical(scenario_file, tmp_path):
    """Classical chains run the stochastic check and skip the quantum analyses."""
    path = scenario_file('model = classical\nclassical.matrix = 0.9 0.2; 0.1 0.8\nanalyses = all\n')
    out = tmp_path / 'out'
    result = _invoke(['-s', path, '-o', str(out), 'all'])
    assert 0 == result.exit_code
    assert 'classical: P-divisible' in result.output
    report = (out / 'report.txt').read_text()
    assert 'skipped: backflow' in report
    assert 'classical,power-chain-10,' in (out / 'certificates.csv').read_text(encoding='utf-8')


def test_analysis_error(scenario_file, tmp_path, monkeypatch):
    """Library errors inside an analysis exit with status 3."""
    def broken(traj, tolerances=None, workers=1):
        raise NotDivisible('forced', 0.0, 0.1)
    monkeypatch.setattr('qdiv.pipeline.classify', broken)
    result = _invoke(['-s', scenario_file(MARKOVIAN), '-o', str(tmp_path / 'out'), 'divisibility'])
    assert 3 == result.exit_code
    assert 'divisibility analysis on pauli model failed' in result.output


def test_not_divisible_exit_code(scenario_file, tmp_path, monkeypatch):
    """A not-divisible verdict exits with status 3 after writing the results."""
    monkeypatch.setattr('qdiv.pipeline.classify',
                        lambda traj, tolerances=None, workers=1: DivisibilityReport((), 'not-divisible'))
    out = tmp_path / 'out'
    result = _invoke(['-s', scenario_file(MARKOVIAN), '-o', str(out), 'divisibility'])
    assert 3 == result.exit_code
    assert (out / 'report.txt').exists()


def test_pipeline_composition():
    """The rotating composition keeps CP-divisibility while its image rotates."""
    scenario = parse_scenario('model = composition\ncomposition.p = ramp(1)\ngrid.steps = 20\n'
                              'analyses = image-profile, divisibility\n')
    record = run(scenario)
    verdicts = record.verdicts()
    assert 'CP-divisible' == verdicts['divisibility']
    assert 'not image non-increasing' == verdicts['image-profile']
    assert record.limit is not None
    assert record.limit.residual < 1e-5


def test_pipeline_integrated_source():
    """Integrated maps are used unless a singular instant falls on the grid."""
    text = 'model = pauli\npauli.gamma1 = zero\npauli.gamma2 = zero\npauli.gamma3 = {}\nsource = integrated\n' \
           'analyses = trajectory\n'
    assert 'generator-integrated' == run(parse_scenario(text.format('tanh'))).source
    assert 'analytic' == run(parse_scenario(text.format('blowup(1)'))).source
