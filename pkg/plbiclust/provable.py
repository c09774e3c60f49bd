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
"""
The partitioned pipeline: spectral labels on sub-blocks, fused through their
overlaps and refined by two likelihood ratio steps.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List

import numpy as np

from plbiclust.exceptions import PartitionError
from plbiclust.metrics import apply_permutation, mis, optimal_permutation
from plbiclust.model import BiAdjacency, as_adjacency, check_labels
from plbiclust.plops import block_compress, estimate_means, lr_classify
from plbiclust.spectral import (SpectralConfig, spectral_cluster_cols,
                                spectral_cluster_rows)

LOG = logging.getLogger(__name__)

DEFAULT_Q = 4


@dataclass(frozen=True)
class PartitionPlan:
    """
    ``row_groups[h][g]`` holds the row indices of group ``g`` in half ``h``
    (0 is the top half); ``col_groups[g]`` the columns of group ``g``.
    """
    q: int
    row_perm: np.ndarray
    col_perm: np.ndarray
    row_groups: tuple
    col_groups: tuple
    seed: int

    def half(self, h):
        return np.concatenate(self.row_groups[h])

    @property
    def top(self):
        return self.half(0)

    @property
    def bottom(self):
        return self.half(1)

    def min_group_size(self):
        sizes = [g.size for half in self.row_groups for g in half]
        sizes += [g.size for g in self.col_groups]
        return min(sizes)


def make_partition(n, m, q=DEFAULT_Q, seed=0):
    """
    Random top/bottom split of the rows, each half cut into ``q`` row
    groups, and one cut of the columns into ``q`` groups.  Group sizes
    differ by at most one.
    """
    if q < 2:
        raise PartitionError('need at least two groups per axis')
    if n < 2 * q or m < q:
        raise PartitionError(
            'a {}x{} matrix is too small for {} groups per axis'.format(
                n, m, q))
    rng = np.random.default_rng(seed)
    row_perm = rng.permutation(n)
    col_perm = rng.permutation(m)
    halves = np.array_split(row_perm, 2)
    row_groups = tuple(tuple(np.array_split(half, q)) for half in halves)
    col_groups = tuple(np.array_split(col_perm, q))
    return PartitionPlan(q=q, row_perm=row_perm, col_perm=col_perm,
                         row_groups=row_groups, col_groups=col_groups,
                         seed=seed)


def match_labels(labels_a, labels_b, num_classes=None):
    """
    The permutation ``sigma`` maximizing ``|{i: sigma[a_i] = b_i}|``;
    among several optima the lexicographically smallest.
    """
    return optimal_permutation(labels_a, labels_b, num_classes)


@dataclass
class SubBlockLabels:
    """
    Overlapping spectral labels over ``Q`` groups.  Pair ``g`` labels groups
    ``g`` and ``g + 1`` (mod Q) in a single label space: ``primary[g]`` on
    group ``g`` and ``secondary[(g + 1) % Q]`` on group ``g + 1``.
    """
    primary: List[np.ndarray] = field(default_factory=list)
    secondary: List[np.ndarray] = field(default_factory=list)

    @property
    def q(self):
        return len(self.primary)

    def validate(self, sizes=None):
        if len(self.secondary) != self.q:
            raise PartitionError('primary and secondary group counts differ')
        for g in range(self.q):
            if self.primary[g].size != self.secondary[g].size:
                raise PartitionError(
                    'group {} has labels of different lengths'.format(g))
            if sizes is not None and self.primary[g].size != sizes[g]:
                raise PartitionError(
                    'group {} labels do not match its size'.format(g))


@dataclass
class FusedLabels:
    groups: List[np.ndarray]
    permutations: List[np.ndarray]
    consistent: bool

    @property
    def labels(self):
        return np.concatenate(self.groups)


def fuse_with_permutations(sub, num_classes):
    """
    Chain matchings along the overlaps: pair 0 is the reference and pair
    ``g`` is relabeled so its ``primary[g]`` agrees with the relabeled
    ``secondary[g]`` of pair ``g - 1``.  The wrap-around overlap is only
    checked.
    """
    sub.validate()
    q = sub.q
    identity = np.arange(num_classes)
    perms = [identity]
    for g in range(1, q):
        target = apply_permutation(sub.secondary[g], perms[g - 1])
        perms.append(match_labels(sub.primary[g], target, num_classes))
    groups = [apply_permutation(sub.primary[g], perms[g]) for g in range(q)]
    closing = apply_permutation(sub.secondary[0], perms[q - 1])
    loop = match_labels(closing, groups[0], num_classes)
    consistent = bool(np.array_equal(loop, identity))
    if not consistent:
        LOG.warning('label fusion is not cyclically consistent; keeping the '
                    'chained labels')
    return FusedLabels(groups=groups, permutations=perms,
                       consistent=consistent)


def fuse_subblock_labels(sub, num_classes):
    return fuse_with_permutations(sub, num_classes).labels


def oracle_classify(a, z_true, lambda_true, seed=0):
    return lr_classify(a, lambda_true, z_true, seed)


def oracle_classify_cols(a, y_true, gamma_true, seed=0):
    return lr_classify(as_adjacency(a).T, gamma_true, y_true, seed)


@dataclass
class ProvableResult:
    y: np.ndarray
    z: np.ndarray
    report: dict


def _local_means(block, y, z, k, l, seed):
    return estimate_means(block_compress(block, z, l), y, k, seed=seed)


def _stage(labels, truth, previous=None):
    entry = {}
    if truth is not None:
        entry['mis'] = mis(labels, truth)
    if previous is not None:
        entry['changes'] = int(np.sum(labels != previous))
    return entry


class _HalfPass(object):
    """
    One pass of the pipeline for one orientation and one choice of the
    estimation half.
    """

    def __init__(self, a, groups, col_groups, k, l, cfg, seed, pool):
        self.a = a
        self.groups = list(groups)
        self.col_groups = list(col_groups)
        self.q = len(self.groups)
        self.k = k
        self.l = l
        self.cfg = cfg
        self.pool = pool
        self.seeds = [int(s) for s in
                      np.random.SeedSequence(seed).generate_state(4 * self.q)]

    def block(self, r, c):
        return self.a.submatrix(self.groups[r % self.q],
                                self.col_groups[c % self.q])

    def _split(self, labels, sizes):
        return np.split(labels, np.cumsum(sizes)[:-1])

    def initial_labels(self):
        q = self.q
        row_sizes = [g.size for g in self.groups]
        col_sizes = [g.size for g in self.col_groups]

        def row_task(g):
            # groups g and g + 1 over column group g + 1
            stacked = BiAdjacency.vstack([self.block(g, g + 1),
                                          self.block(g + 1, g + 1)])
            cfg = self.cfg.with_seed(self.seeds[g])
            labels = spectral_cluster_rows(stacked, self.k, self.l, cfg)
            return self._split(labels, [row_sizes[g],
                                        row_sizes[(g + 1) % q]])

        def col_task(g):
            # column groups g and g + 1 over row group g
            stacked = BiAdjacency.hstack([self.block(g, g),
                                          self.block(g, g + 1)])
            cfg = self.cfg.with_seed(self.seeds[q + g])
            labels = spectral_cluster_cols(stacked, self.k, self.l, cfg)
            return self._split(labels, [col_sizes[g],
                                        col_sizes[(g + 1) % q]])

        rows = list(self.pool.map(row_task, range(q)))
        cols = list(self.pool.map(col_task, range(q)))
        row_sub = SubBlockLabels(
            primary=[rows[g][0] for g in range(q)],
            secondary=[rows[(g - 1) % q][1] for g in range(q)])
        col_sub = SubBlockLabels(
            primary=[cols[g][0] for g in range(q)],
            secondary=[cols[(g - 1) % q][1] for g in range(q)])
        return row_sub, col_sub

    def first_refinement(self, y, z):
        q = self.q

        def row_task(g):
            block = self.block(g, g + 2)
            lam = _local_means(block, y[g], z[(g + 2) % q], self.k, self.l,
                               self.seeds[2 * q + g])
            return lr_classify(block, lam, z[(g + 2) % q],
                               self.seeds[2 * q + g])

        def col_task(g):
            # block (g + 2, g) seen from its columns, with the fused row
            # labels that never touched it
            block = self.block(g + 2, g).T
            gam = _local_means(block, z[g], y[(g + 2) % q], self.l, self.k,
                               self.seeds[3 * q + g])
            return lr_classify(block, gam, y[(g + 2) % q],
                               self.seeds[3 * q + g])

        new_y = list(self.pool.map(row_task, range(q)))
        new_z = list(self.pool.map(col_task, range(q)))
        return new_y, new_z

    def global_means(self, y, z):
        q = self.q

        def task(g):
            return _local_means(self.block(g, g + 3), y[g], z[(g + 3) % q],
                                self.k, self.l, self.seeds[g] + 1)

        return np.sum(list(self.pool.map(task, range(q))), axis=0)

    def scatter_columns(self, z):
        out = np.zeros(self.a.m, dtype=np.int64)
        for g, cols in enumerate(self.col_groups):
            out[cols] = z[g]
        return out


def _run_half(a, plan, estimate, classify, k, l, cfg, seed, pool,
              anchor=None, truth=None):
    """
    Estimate on half ``estimate`` and classify the rows of half
    ``classify``.  With ``anchor`` (labels of the estimation rows) the fused
    spectral row labels are matched to it first.
    """
    started = time.time()
    groups = plan.row_groups[estimate]
    rows = np.concatenate(groups)
    target = np.concatenate(plan.row_groups[classify])
    half = _HalfPass(a, groups, plan.col_groups, k, l, cfg, seed, pool)
    truth_est = truth[rows] if truth is not None else None
    truth_cls = truth[target] if truth is not None else None

    row_sub, col_sub = half.initial_labels()
    fused_y = fuse_with_permutations(row_sub, k)
    fused_z = fuse_with_permutations(col_sub, l)
    y = fused_y.groups
    if anchor is not None:
        sigma = match_labels(np.concatenate(y), anchor, k)
        y = [apply_permutation(labels, sigma) for labels in y]
    z = fused_z.groups
    report = {'cyclic_consistent': fused_y.consistent and fused_z.consistent,
              'spectral': _stage(np.concatenate(y), truth_est)}

    new_y, new_z = half.first_refinement(y, z)
    report['first_lr'] = _stage(np.concatenate(new_y), truth_est,
                                np.concatenate(y))
    lam = half.global_means(new_y, new_z)
    z_full = half.scatter_columns(new_z)
    y_hat = lr_classify(a.submatrix(target, np.arange(a.m)), lam, z_full,
                        seed)
    report['final'] = _stage(y_hat, truth_cls)
    report['seconds'] = time.time() - started
    LOG.debug('half pass %d -> %d finished in %.3fs', estimate, classify,
              report['seconds'])
    return target, y_hat, lam, report


def _provable_rows(a, k, l, cfg, seed, q, pool, truth=None):
    plan = make_partition(a.n, a.m, q, seed)
    if plan.min_group_size() < max(k, l):
        raise PartitionError(
            'sub-blocks of a {}x{} matrix are smaller than max(K, L) = {}'
            .format(a.n, a.m, max(k, l)))
    seeds = np.random.SeedSequence(seed).generate_state(2)
    top, y_top, lam, first = _run_half(a, plan, 1, 0, k, l, cfg,
                                       int(seeds[0]), pool, truth=truth)
    bottom, y_bottom, _, second = _run_half(a, plan, 0, 1, k, l, cfg,
                                            int(seeds[1]), pool,
                                            anchor=y_top, truth=truth)
    y = np.zeros(a.n, dtype=np.int64)
    y[top] = y_top
    y[bottom] = y_bottom
    return y, lam, {'top': first, 'bottom': second}


def provable_fit(a, k, l, cfg=None, seed=0, q=DEFAULT_Q, threads=1,
                 y_true=None, z_true=None):
    """
    Row and column labels from the partitioned pipeline.

    ``y_true``/``z_true`` only feed the report, which then holds per-stage
    misclassification rates; without them it holds label change counts.
    The result depends on ``(a, seed)`` only, never on ``threads``.
    """
    cfg = cfg or SpectralConfig()
    a = as_adjacency(a)
    if y_true is not None:
        y_true = check_labels(y_true, k, a.n)
    if z_true is not None:
        z_true = check_labels(z_true, l, a.m)
    row_seed, col_seed = np.random.SeedSequence(seed).spawn(2)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        y, lam, row_report = _provable_rows(
            a, k, l, cfg, int(row_seed.generate_state(1)[0]), q, pool,
            truth=y_true)
        z, gam, col_report = _provable_rows(
            a.T, l, k, cfg, int(col_seed.generate_state(1)[0]), q, pool,
            truth=z_true)
    report = {'rows': row_report, 'cols': col_report,
              'lambda_hat': lam, 'gamma_hat': gam}
    if y_true is not None:
        report['rows']['mis'] = mis(y, y_true)
    if z_true is not None:
        report['cols']['mis'] = mis(z, z_true)
    return ProvableResult(y=y, z=z, report=report)
