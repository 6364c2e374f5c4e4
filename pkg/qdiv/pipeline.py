# -*- coding: utf-8 -*-

"""
Run the analyses a scenario asks for and write their results.

Analyses are registered by name and always run in the order
trajectory, image-profile, divisibility, backflow, certify. Every library
error raised by an analysis is re-raised as AnalysisError carrying the
analysis and model names.
"""

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from class_registry import ClassRegistry
from slugify import slugify

from qdiv import __version__
from qdiv.certify import (
    cptp_projector_feasibility, diagonal_subspace, ptp_projector_existence, pure_output_scan,
    random_density_subspace,
)
from qdiv.exceptions import AnalysisError, NotDivisible, QdivError
from qdiv.infoflow import hunt_backflow
from qdiv.models import pauli_rate_conditions
from qdiv.propagation import (
    analytic_trajectory, classical_pdiv, classify, first_singular_time, image_profile, integrate,
    limit_projector, power_chain, propagator,
)
from qdiv.scenario import ANALYSES, print_scenario
from qdiv.superop import disk_projector, half_depolarizer, is_cp, is_positive_map, unitary_map

logger = logging.getLogger(__name__)

analysisdex = ClassRegistry('name')

FLOAT_FORMAT = '%.16e'

# what each verdict means, for the human report
VERDICT_CRITERIA = {
    'CP-divisible': 'every propagator V(t,s) is completely positive and trace preserving',
    'P-divisible-only': 'every propagator is positive and trace preserving, some are not CP',
    'divisible-not-P': 'propagators exist but some are not even positive',
    'not-divisible': 'a kernel of Lambda_s is not contained in the kernel of a later Lambda_t',
}


@dataclass
class RunRecord():
    """Everything one run produced: scenario echo, analysis results and timing."""

    scenario: object
    scenario_text: str
    version: str = __version__
    started: str = ''
    wall_time: float = 0.0
    source: str = None
    trajectory: object = None
    image_profile: object = None
    divisibility: object = None
    rate_criterion: str = None
    limit: object = None
    backflow: object = None
    certificates: list = field(default_factory=list)
    classical: object = None
    skipped: list = field(default_factory=list)

    def verdicts(self):
        """Return the headline results as a dict of strings."""
        result = {}
        if self.divisibility is not None:
            result['divisibility'] = self.divisibility.verdict
        if self.image_profile is not None:
            result['image-profile'] = ('image non-increasing' if self.image_profile.non_increasing
                                       else 'not image non-increasing')
        if self.backflow is not None:
            result['backflow'] = 'detected' if self.backflow.detected else 'none'
        if self.classical is not None:
            result['classical'] = 'P-divisible' if self.classical.p_div else 'not P-divisible'
        return result

    def exit_code(self):
        """Return 3 for a not-divisible verdict, 0 otherwise."""
        if self.divisibility is not None and self.divisibility.verdict == 'not-divisible':
            return 3
        return 0


class Analysis():
    """Base class for analyses."""

    name = None

    def __call__(self, context, record):
        """Run the analysis and store its results in ``record``."""
        raise NotImplementedError('Must be implemented in subclass.')


class Context():
    """Shared, lazily built inputs of the analyses of one run."""

    def __init__(self, scenario):  # noqa: D107
        self.scenario = scenario
        self._trajectory = None

    def trajectory(self, record):
        """Return the map trajectory, built on first use."""
        if self._trajectory is None:
            self._trajectory = build_trajectory(self.scenario)
            record.source = self._trajectory.source
        return self._trajectory


def build_trajectory(scenario):
    """
    Evaluate or integrate the scenario dynamics on its grid.

    Blow-up instants inside the range become grid points. The generator is
    not integrable across them, so such scenarios always use the closed
    form, whatever ``source`` says.
    """
    dynamics = scenario.dynamics()
    singular = [t for t in dynamics.singular_times() if t <= scenario.t_end]
    grid = scenario.grid().including(singular)
    if scenario.source == 'integrated' and not singular:
        return integrate(dynamics.generator_at, grid)
    if scenario.source == 'integrated':
        logger.warning('singular instants %s inside the grid, using the closed-form map', singular)
    return analytic_trajectory(dynamics.map_at, grid)


@analysisdex.register
class TrajectoryAnalysis(Analysis):
    """Build Lambda_t on the grid."""

    name = 'trajectory'

    def __call__(self, context, record):  # noqa: D102
        record.trajectory = context.trajectory(record)


@analysisdex.register
class ImageProfileAnalysis(Analysis):
    """Track the image dimension of Lambda_t and the inclusion of images."""

    name = 'image-profile'

    def __call__(self, context, record):  # noqa: D102
        traj = context.trajectory(record)
        record.trajectory = traj
        record.image_profile = image_profile(traj, context.scenario.tolerances.rank)


@analysisdex.register
class DivisibilityAnalysis(Analysis):
    """Classify every grid interval and extrapolate across the first singular instant."""

    name = 'divisibility'

    def __call__(self, context, record):  # noqa: D102
        scenario = context.scenario
        traj = context.trajectory(record)
        record.trajectory = traj
        record.divisibility = classify(traj, scenario.tolerances, scenario.workers)
        if scenario.model == 'pauli':
            record.rate_criterion = _pauli_criterion(scenario.dynamics(), traj.times)
        bracket = first_singular_time(traj, scenario.tolerances.rank)
        if bracket is not None and bracket[1] > 0:
            try:
                record.limit = limit_projector(scenario.dynamics().map_at, bracket[1],
                                               tol_rank=scenario.tolerances.rank)
            except np.linalg.LinAlgError as err:
                logger.warning('no limit propagator at t=%g: %s', bracket[1], err)


def _pauli_criterion(rates, times):
    """Return the verdict of the rate conditions checked at interval midpoints."""
    midpoints = 0.5 * (np.asarray(times[1:]) + np.asarray(times[:-1]))
    conditions = [pauli_rate_conditions(rates, t) for t in midpoints]
    if all(c.cp for c in conditions):
        return 'CP-divisible'
    if all(c.p for c in conditions):
        return 'P-divisible-only'
    return 'divisible-not-P'


@analysisdex.register
class BackflowAnalysis(Analysis):
    """Hunt for information backflow."""

    name = 'backflow'

    def __call__(self, context, record):  # noqa: D102
        scenario = context.scenario
        record.backflow = hunt_backflow(
            context.trajectory(record), n_pairs=scenario.n_pairs, ancilla_dim=scenario.ancilla_dim,
            biased=scenario.biased, seed=scenario.seed, workers=scenario.workers,
            threshold=scenario.tolerances.threshold, tol_rank=scenario.tolerances.rank)


@analysisdex.register
class CertifyAnalysis(Analysis):
    """Projector certificates on density subspaces and pure-output shapes of the named maps."""

    name = 'certify'

    def __call__(self, context, record):  # noqa: D102
        scenario = context.scenario
        rng = np.random.default_rng([scenario.seed, 1])
        subspaces = [('random-%d' % i, random_density_subspace(rng)) for i in range(scenario.subspaces)]
        subspaces += [('diagonal-%s' % p, diagonal_subspace(p)) for p in scenario.p_values]
        for label, sub in subspaces:
            cptp = cptp_projector_feasibility(sub)
            ptp = ptp_projector_existence(sub)
            record.certificates.append({
                'kind': 'projector',
                'label': label,
                'p': sub.p,
                'cptp_feasible': cptp.cptp_feasible,
                'ptp_feasible': ptp.ptp_feasible,
                'operator_system': ptp.operator_system,
                'witness': _format_witness(dict(cptp.witness, **ptp.witness)),
                'detail': ptp.scan.classification if ptp.scan is not None else '',
            })
        for label, s in (('disk-projector', disk_projector()), ('half-depolarizer', half_depolarizer()),
                         ('hadamard', unitary_map(np.array([[1, 1], [1, -1]]) / math.sqrt(2)))):
            scan = pure_output_scan(s)
            record.certificates.append({
                'kind': 'pure-output',
                'label': label,
                'p': math.nan,
                'cptp_feasible': is_cp(s).ok,
                'ptp_feasible': is_positive_map(s).ok,
                'operator_system': '',
                'witness': _format_witness({'pure_count': scan.pure_count,
                                            'plane_residual': scan.plane_residual}),
                'detail': 'great circle' if scan.great_circle else scan.classification,
            })


def _format_witness(witness):
    parts = []
    for key in sorted(witness):
        value = witness[key]
        parts.append('%s=%s' % (key, FLOAT_FORMAT % value if isinstance(value, float) else value))
    return ';'.join(parts)


def _run_classical(scenario, record):
    matrix, steps = scenario.classical_chain()
    verdict = classical_pdiv(power_chain(matrix, steps))
    record.classical = verdict
    record.certificates.append({
        'kind': 'classical',
        'label': 'power-chain-%d' % steps,
        'p': math.nan,
        'cptp_feasible': '',
        'ptp_feasible': verdict.p_div,
        'operator_system': '',
        'witness': _format_witness({'contraction_ok': verdict.contraction_ok,
                                    'worst_growth': verdict.worst_growth}),
        'detail': 'consistent' if verdict.consistent() else 'inconsistent',
    })


def run(scenario, analyses=None):
    """
    Execute the requested analyses.

    :param scenario: Scenario
    :param analyses: names overriding ``scenario.analyses``
    :return: RunRecord
    """
    requested = scenario.analyses if analyses is None else tuple(a for a in ANALYSES if a in analyses)
    record = RunRecord(scenario, print_scenario(scenario))
    record.started = datetime.now(timezone.utc).isoformat(timespec='seconds')
    start = time.monotonic()
    context = Context(scenario)
    classical_done = False
    for name in requested:
        try:
            if scenario.model == 'classical':
                if name in ('divisibility', 'certify') and not classical_done:
                    _run_classical(scenario, record)
                    classical_done = True
                elif name not in ('divisibility', 'certify'):
                    logger.warning('skipping %s analysis: classical scenarios have no quantum map', name)
                    record.skipped.append(name)
                continue
            logger.debug('running %s analysis', name)
            analysisdex.get(name)(context, record)
        except QdivError as err:
            raise AnalysisError(name, scenario.model, err) from err
    record.wall_time = time.monotonic() - start
    return record


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return value


def write_csv(path, header, rows):
    """Write ``rows`` under ``header``, floats in scientific notation with 17 significant digits."""
    with open(path, 'w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(value) for value in row])


def _interval_min_choi(traj, k, tol_rank):
    if k == 0:
        return ''
    try:
        return is_cp(propagator(traj, k - 1, k, tol_rank).V).min_eig
    except NotDivisible:
        return ''


def _trajectory_rows(traj, tol_rank):
    ranks = traj.ranks(tol_rank)
    for k, t in enumerate(traj.times):
        flat = traj.maps[k].ravel()
        entries = [float(x) for z in flat for x in (z.real, z.imag)]
        yield [float(t)] + entries + [ranks[k], _interval_min_choi(traj, k, tol_rank)]


def _report_lines(record):
    scenario = record.scenario
    lines = [
        'qdiv %s' % record.version,
        'started: %s' % record.started,
        'wall time: %.3f s' % record.wall_time,
        'model: %s' % scenario.model,
        'seed: %d' % scenario.seed,
    ]
    if record.source is not None:
        lines.append('map source: %s' % record.source)
    if record.image_profile is not None:
        profile = record.image_profile
        lines.append('image dimensions: %s' % ', '.join(str(d) for d in sorted(set(profile.dims))))
        if profile.non_increasing:
            lines.append('images: image non-increasing')
        else:
            lines.append('images: not image non-increasing (first violation at t=%g)' % profile.first_violation)
    if record.divisibility is not None:
        report = record.divisibility
        lines.append('divisibility: %s, %s' % (report.verdict, VERDICT_CRITERIA[report.verdict]))
        lines.append('intervals not CP: %d of %d' % (len(report.cp_violations()), len(report.intervals)))
        lines.append('smallest Choi eigenvalue: %.3e' % report.min_choi_eig())
    if record.rate_criterion is not None:
        lines.append('rate criterion: %s' % record.rate_criterion)
    if record.limit is not None:
        lines.append('limit propagator at first singular instant: residual %.3e, CP %s' % (
            record.limit.residual, is_cp(record.limit.projector, 1e-6).ok))
    if record.backflow is not None:
        flow = record.backflow
        lines.append('backflow: max sigma %.3e at t=%g for %s (%s, threshold %.1e)' % (
            flow.max_sigma, flow.argmax_t, flow.argmax_id, 'detected' if flow.detected else 'none', flow.threshold))
        lines.append('backflow config: %s' % ', '.join('%s=%s' % kv for kv in sorted(flow.config.items())))
    if record.classical is not None:
        verdict = record.classical
        lines.append('classical chain: %s, contraction %s' % (
            'P-divisible' if verdict.p_div else 'not P-divisible',
            'monotone' if verdict.contraction_ok else 'violated'))
    if record.certificates:
        lines.append('certificates: %d rows' % len(record.certificates))
    for name in record.skipped:
        lines.append('skipped: %s' % name)
    lines.append('')
    lines.append('scenario:')
    lines.extend('  %s' % line for line in record.scenario_text.splitlines())
    return lines


def emit(record, out_dir):
    """
    Write the files of a run into ``out_dir``.

    report.txt is always written; trajectory.csv, verdicts.csv,
    backflow.csv, backflow-meta.csv, plotdata/pair-<id>.csv and
    certificates.csv only when the matching analysis ran.

    :return: list of written paths
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    report = out / 'report.txt'
    report.write_text('\n'.join(_report_lines(record)) + '\n', encoding='utf-8')
    written.append(report)

    if record.trajectory is not None:
        entries = ['%s%d%d' % (part, i, j) for i in range(4) for j in range(4) for part in ('re', 'im')]
        path = out / 'trajectory.csv'
        write_csv(path, ['t'] + entries + ['rank', 'min_choi_eig'],
                  _trajectory_rows(record.trajectory, record.scenario.tolerances.rank))
        written.append(path)

    if record.divisibility is not None:
        path = out / 'verdicts.csv'
        write_csv(path, ['s', 't', 'domain_rank', 'kernel_ok', 'cp', 'p_div', 'min_choi_eig', 'witness'], (
            [r.s, r.t, r.domain_rank, r.kernel_ok, r.cp, r.p_div, r.min_choi_eig, r.witness or '']
            for r in record.divisibility.intervals))
        written.append(path)

    if record.backflow is not None:
        flow = record.backflow
        path = out / 'backflow.csv'
        write_csv(path, ['t', 'sigma', 'pair_id'], flow.rows())
        written.append(path)
        path = out / 'backflow-meta.csv'
        meta = sorted(flow.config.items()) + [('threshold', flow.threshold), ('max_sigma', flow.max_sigma),
                                              ('argmax_t', flow.argmax_t), ('argmax_pair', flow.argmax_id),
                                              ('samples_used', flow.samples_used)]
        write_csv(path, ['key', 'value'], meta)
        written.append(path)
        plotdata = out / 'plotdata'
        plotdata.mkdir(exist_ok=True)
        biased = flow.config['biased']
        tracked = [pid for pid in flow.pair_ids
                   if not pid.startswith('random-') and (not biased or pid.endswith('-p0.5'))]
        if flow.argmax_id not in tracked:
            tracked.append(flow.argmax_id)
        for pair_id in tracked:
            path = plotdata / ('pair-%s.csv' % slugify(pair_id))
            write_csv(path, ['t', 'norm', 'sigma'], flow.curve(pair_id))
            written.append(path)

    if record.certificates:
        path = out / 'certificates.csv'
        header = ['kind', 'label', 'p', 'cptp_feasible', 'ptp_feasible', 'operator_system', 'witness', 'detail']
        write_csv(path, header, ([row[key] for key in header] for row in record.certificates))
        written.append(path)

    logger.info('wrote %d files to %s', len(written), out)
    return written
