# Copyright (c) 2026 CloudNative, Inc.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from plbiclust import Biclusterer
from plbiclust.exceptions import ConfigError, ParameterError
from plbiclust.info import overall_rate_prediction
from plbiclust.io import open_output
from plbiclust.metrics import mis, nmi
from plbiclust.model import (SAMPLING_MODES, Connectivity, balanced_labels,
                             column_mean_params, labels_from_proportions,
                             sample_sbm, true_mean_params)
from plbiclust.prototype import PrototypeHandler
from plbiclust.response import FitResponse

LOG = logging.getLogger(__name__)

ALGORITHMS = ('spectral', 'soft', 'hard', 'oracle', 'provable')

CYCLIC_B = [[1, 2, 3, 4, 5, 6],
            [2, 3, 4, 5, 6, 1],
            [3, 4, 5, 6, 1, 2],
            [4, 5, 6, 1, 2, 3]]

WIDE_B = [[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
          [4, 5, 6, 7, 8, 9, 10, 11, 12, 1, 2, 3],
          [7, 8, 9, 10, 11, 12, 1, 2, 3, 4, 5, 6],
          [10, 11, 12, 1, 2, 3, 4, 5, 6, 7, 8, 9]]

UNBALANCED_PI_Y = [1, 4, 6, 9]
UNBALANCED_PI_Z = [1, 3, 4, 6, 7, 9]

CONFIG_PROTOTYPE = {
    'B': CYCLIC_B,
    'C': 1.0,
    'alpha': 0.75,
    'n0': 100,
    'n0_grid': [100, 150, 200, 250, 300, 350, 400],
    'seeds': 30,
    'algorithms': ['spectral', 'soft', 'hard', 'oracle'],
    'pi_y': None,
    'pi_z': None,
    'mode': 'bernoulli',
    'max_outer': 50,
    'spectral': {},
    'timings': False,
    'seed': None,
}

CSV_FIELDS = ['n0', 'seed', 'algorithm', 'nmi_row', 'nmi_col',
              'nmi_overall', 'mis_row', 'mis_col', 'log_mis', 'seconds',
              'rate_overlay', 'status']

SUMMARY_FIELDS = ['n0', 'algorithm', 'runs', 'failures',
                  'nmi_overall_median', 'nmi_overall_q1', 'nmi_overall_q3',
                  'log_mis_median', 'log_mis_q1', 'log_mis_q3']

NA = 'NA'
NEG_INF = '-inf'


@dataclass
class BenchConfig:
    b_matrix: np.ndarray
    c: float
    alpha_exp: float
    n0_grid: List[int]
    seeds: int = 30
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    pi_y: Optional[np.ndarray] = None
    pi_z: Optional[np.ndarray] = None
    mode: str = 'bernoulli'
    n0: int = 100
    max_outer: int = 50
    spectral: dict = field(default_factory=dict)
    timings: bool = False
    seed: Optional[int] = None

    def __post_init__(self):
        self.b_matrix = np.asarray(self.b_matrix, dtype=float)
        if self.b_matrix.ndim != 2 or self.b_matrix.size == 0:
            raise ConfigError('B must be a nonempty matrix')
        if np.any(self.b_matrix < 0):
            raise ConfigError('B must be nonnegative')
        if not self.n0_grid:
            raise ConfigError('n0_grid must not be empty')
        if any(int(n0) < 1 for n0 in self.n0_grid) or self.n0 < 1:
            raise ConfigError('cluster sizes must be positive')
        if self.c < 0:
            raise ConfigError('C must be nonnegative')
        if self.alpha_exp < 0:
            raise ConfigError('alpha must be nonnegative')
        if self.seeds < 1:
            raise ConfigError('at least one seed is required')
        if self.mode not in SAMPLING_MODES:
            raise ConfigError('mode must be one of {}'.format(
                ', '.join(SAMPLING_MODES)))
        unknown = [name for name in self.algorithms if name not in ALGORITHMS]
        if unknown:
            raise ConfigError('unknown algorithms: {}'.format(
                ', '.join(unknown)))
        for name, pi, size in (('pi_y', self.pi_y, self.k),
                               ('pi_z', self.pi_z, self.l)):
            if pi is not None and np.size(pi) != size:
                raise ConfigError('{} must have {} entries'.format(
                    name, size))

    @property
    def k(self):
        return self.b_matrix.shape[0]

    @property
    def l(self):
        return self.b_matrix.shape[1]

    @classmethod
    def from_dict(cls, config):
        """
        Build a config from a JSON dictionary, filling missing entries from
        ``CONFIG_PROTOTYPE``.
        """
        item = dict(config or {})
        response = FitResponse()
        if not PrototypeHandler(CONFIG_PROTOTYPE).check(item, response):
            raise ConfigError(response.error_message)
        return cls(b_matrix=item['B'], c=float(item['C']),
                   alpha_exp=float(item['alpha']),
                   n0_grid=[int(n0) for n0 in item['n0_grid']],
                   seeds=int(item['seeds']),
                   algorithms=list(item['algorithms']),
                   pi_y=item['pi_y'], pi_z=item['pi_z'], mode=item['mode'],
                   n0=int(item['n0']), max_outer=int(item['max_outer']),
                   spectral=dict(item['spectral']),
                   timings=bool(item['timings']), seed=item['seed'])

    def to_dict(self):
        return {'B': self.b_matrix.tolist(), 'C': self.c,
                'alpha': self.alpha_exp, 'n0': self.n0,
                'n0_grid': list(self.n0_grid), 'seeds': self.seeds,
                'algorithms': list(self.algorithms),
                'pi_y': None if self.pi_y is None else list(self.pi_y),
                'pi_z': None if self.pi_z is None else list(self.pi_z),
                'mode': self.mode, 'max_outer': self.max_outer,
                'spectral': dict(self.spectral), 'timings': self.timings,
                'seed': self.seed}


def connectivity_from_config(cfg, n0):
    """
    ``P = C (log mn)^alpha / sqrt(mn) * B``.  Probabilities above one are a
    config error in bernoulli mode (C too large for n0).
    """
    n, m = cfg.k * n0, cfg.l * n0
    scale = cfg.c * math.log(m * n) ** cfg.alpha_exp / math.sqrt(m * n)
    p = scale * cfg.b_matrix
    if cfg.mode == 'bernoulli' and np.any(p > 1):
        raise ParameterError(
            'C={} gives probabilities above 1 at n0={}'.format(cfg.c, n0))
    return Connectivity(p)


def _labels(n0, num_classes, proportions):
    if proportions is None:
        return balanced_labels(n0, num_classes)
    return labels_from_proportions(n0 * num_classes, proportions)


@dataclass
class Instance:
    n0: int
    p: Connectivity
    y: np.ndarray
    z: np.ndarray
    a: object
    lam: np.ndarray
    gamma: np.ndarray


def generate_instance(cfg, n0, seed, threads=1):
    p = connectivity_from_config(cfg, n0)
    y = _labels(n0, cfg.k, cfg.pi_y)
    z = _labels(n0, cfg.l, cfg.pi_z)
    a = sample_sbm(p, y, z, seed, mode=cfg.mode, threads=threads)
    return Instance(n0=n0, p=p, y=y, z=z, a=a,
                    lam=true_mean_params(p, z),
                    gamma=column_mean_params(p, y))


def _fmt(value):
    if value is None:
        return NA
    if isinstance(value, str):
        return value
    if math.isnan(value):
        return NA
    if math.isinf(value):
        return NEG_INF if value < 0 else 'inf'
    return '{:.10g}'.format(value)


def overall_labels(y, z, k):
    return np.concatenate([y, np.asarray(z) + k])


def score(instance, y_hat, z_hat, k):
    """
    Row, column and overall agreement with the truth.  Overall scores treat
    rows and columns as one labeling with the column classes offset by K.
    """
    n, m = instance.y.size, instance.z.size
    mis_row = mis(y_hat, instance.y)
    mis_col = mis(z_hat, instance.z)
    overall = (n * mis_row + m * mis_col) / float(n + m)
    return {'nmi_row': nmi(y_hat, instance.y),
            'nmi_col': nmi(z_hat, instance.z),
            'nmi_overall': nmi(overall_labels(y_hat, z_hat, k),
                               overall_labels(instance.y, instance.z, k)),
            'mis_row': mis_row, 'mis_col': mis_col,
            'log_mis': math.log(overall) if overall > 0 else -math.inf}


def rate_overlay(cfg, instance):
    n, m = instance.y.size, instance.z.size
    rows = overall_rate_prediction(instance.lam, cfg.pi_y)
    cols = overall_rate_prediction(instance.gamma, cfg.pi_z)
    return (n * rows + m * cols) / float(n + m)


def _failure_row(n0, rep, algorithm, message):
    row = {name: NA for name in CSV_FIELDS}
    row.update({'n0': n0, 'seed': rep, 'algorithm': algorithm,
                'status': 'error: {}'.format(message)})
    return row


def run_cell(cfg, n0, grid_idx, rep, seed):
    """
    One instance and every algorithm of ``cfg`` on it.  Failures become
    rows with ``NA`` metrics; the run goes on.
    """
    instance_seed, algo_seed = [
        int(s) for s in
        np.random.SeedSequence([seed, grid_idx, rep]).generate_state(2)]
    try:
        instance = generate_instance(cfg, n0, instance_seed)
    except Exception as e:
        LOG.error('instance n0=%d rep=%d failed', n0, rep, exc_info=True)
        return [_failure_row(n0, rep, name, e) for name in cfg.algorithms]
    biclusterer = Biclusterer(spectral=cfg.spectral,
                              max_outer=cfg.max_outer)
    rows = []
    for name in cfg.algorithms:
        response = biclusterer.handler(
            algorithm=name, a=instance.a, k=cfg.k, l=cfg.l, seed=algo_seed,
            y_true=instance.y, z_true=instance.z, p=instance.p,
            lambda_true=instance.lam, gamma_true=instance.gamma)
        if not response.is_successful:
            LOG.error('%s on n0=%d rep=%d failed: %s', name, n0, rep,
                      response.error_message)
            rows.append(_failure_row(n0, rep, name, response.error_type))
            continue
        row = {'n0': n0, 'seed': rep, 'algorithm': name, 'status': 'ok'}
        row.update(score(instance, response.data['y'], response.data['z'],
                         cfg.k))
        row['seconds'] = (response.metadata['seconds'] if cfg.timings
                          else None)
        row['rate_overlay'] = (rate_overlay(cfg, instance)
                               if name == 'oracle' else None)
        for key in CSV_FIELDS[3:-1]:
            row[key] = _fmt(row[key])
        rows.append(row)
    return rows


def run_bench(cfg, seed, threads=1):
    if seed is None:
        raise ConfigError('the benchmark requires an explicit seed')
    cells = [(n0, grid_idx, rep)
             for grid_idx, n0 in enumerate(cfg.n0_grid)
             for rep in range(cfg.seeds)]

    def work(cell):
        n0, grid_idx, rep = cell
        return run_cell(cfg, n0, grid_idx, rep, seed)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(work, cells))
    return [row for rows in results for row in rows]


def _numeric(values):
    out = []
    for value in values:
        if value == NA:
            continue
        out.append(-math.inf if value == NEG_INF else float(value))
    return np.array(out)


def _quartiles(values):
    if values.size == 0:
        return NA, NA, NA
    # nearest rank keeps -inf entries from turning into nan
    q1, med, q3 = np.percentile(values, [25, 50, 75], method='nearest')
    return _fmt(med), _fmt(q1), _fmt(q3)


def summarize(rows):
    """
    Medians and quartiles of overall NMI and log misclassification per
    (n0, algorithm), in first-seen order.
    """
    groups = {}
    for row in rows:
        groups.setdefault((row['n0'], row['algorithm']), []).append(row)
    summary = []
    for (n0, algorithm), members in groups.items():
        ok = [row for row in members if row['status'] == 'ok']
        nmi_med, nmi_q1, nmi_q3 = _quartiles(
            _numeric(row['nmi_overall'] for row in ok))
        mis_med, mis_q1, mis_q3 = _quartiles(
            _numeric(row['log_mis'] for row in ok))
        summary.append({'n0': n0, 'algorithm': algorithm,
                        'runs': len(members),
                        'failures': len(members) - len(ok),
                        'nmi_overall_median': nmi_med,
                        'nmi_overall_q1': nmi_q1,
                        'nmi_overall_q3': nmi_q3,
                        'log_mis_median': mis_med,
                        'log_mis_q1': mis_q1,
                        'log_mis_q3': mis_q3})
    return summary


def write_csv(path, rows, fields=None):
    with open_output(path) as fp:
        writer = csv.DictWriter(fp, fieldnames=fields or CSV_FIELDS,
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
