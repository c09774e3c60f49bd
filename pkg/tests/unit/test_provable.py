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

import os
import unittest
from concurrent.futures import ThreadPoolExecutor

import mock
import numpy as np

from plbiclust import info, metrics, model, plops, provable, spectral
from plbiclust.exceptions import PartitionError

BLOCK_P = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]


def _block_instance(n, m, seed):
    y = model.random_labels(n, 2, seed)
    z = model.random_labels(m, 3, seed + 1)
    a = model.BiAdjacency(model.expected_adjacency(BLOCK_P, y, z))
    return a, y, z


class TestPartition(unittest.TestCase):

    def _check_cover(self, plan, n, m):
        rows = np.sort(np.concatenate([plan.top, plan.bottom]))
        np.testing.assert_array_equal(rows, np.arange(n))
        cols = np.sort(np.concatenate(plan.col_groups))
        np.testing.assert_array_equal(cols, np.arange(m))

    def test_even(self):
        plan = provable.make_partition(16, 12, q=4, seed=1)
        self.assertEqual([g.size for g in plan.row_groups[0]], [2] * 4)
        self.assertEqual([g.size for g in plan.row_groups[1]], [2] * 4)
        self.assertEqual([g.size for g in plan.col_groups], [3] * 4)
        self.assertEqual(plan.min_group_size(), 2)
        self._check_cover(plan, 16, 12)

    def test_uneven(self):
        plan = provable.make_partition(17, 10, q=4, seed=2)
        self.assertEqual([g.size for g in plan.row_groups[0]], [3, 2, 2, 2])
        self.assertEqual([g.size for g in plan.row_groups[1]], [2] * 4)
        self.assertEqual([g.size for g in plan.col_groups], [3, 3, 2, 2])
        self._check_cover(plan, 17, 10)

    def test_seeded(self):
        first = provable.make_partition(40, 40, seed=5)
        second = provable.make_partition(40, 40, seed=5)
        np.testing.assert_array_equal(first.row_perm, second.row_perm)
        np.testing.assert_array_equal(first.col_perm, second.col_perm)

    def test_too_small(self):
        self.assertRaises(PartitionError, provable.make_partition, 7, 10, 4)
        self.assertRaises(PartitionError, provable.make_partition, 10, 3, 4)
        self.assertRaises(PartitionError, provable.make_partition, 10, 10, 1)


class TestFusion(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(21)
        self.q = 4
        self.k = 3
        self.truth = []
        for _ in range(self.q):
            self.truth.append(
                self.rng.permutation(np.repeat(np.arange(self.k), 10)))
        self.perms = [self.rng.permutation(self.k) for _ in range(self.q)]

    def _sub(self):
        q = self.q
        return provable.SubBlockLabels(
            primary=[self.perms[g][self.truth[g]] for g in range(q)],
            secondary=[self.perms[(g - 1) % q][self.truth[g]]
                       for g in range(q)])

    def test_match_labels(self):
        sigma = provable.match_labels([0, 0, 1, 1, 2], [1, 1, 2, 2, 0])
        np.testing.assert_array_equal(sigma, [1, 2, 0])

    def test_consistent(self):
        fused = provable.fuse_with_permutations(self._sub(), self.k)
        self.assertTrue(fused.consistent)
        for g in range(self.q):
            np.testing.assert_array_equal(fused.groups[g],
                                          self.perms[0][self.truth[g]])
        np.testing.assert_array_equal(fused.permutations[0],
                                      np.arange(self.k))
        self.assertEqual(fused.labels.size, 30 * self.q)

    def test_inconsistent_loop(self):
        sub = self._sub()
        sub.secondary[0] = (sub.secondary[0] + 1) % self.k
        with mock.patch.object(provable.LOG, 'warning') as warning:
            fused = provable.fuse_with_permutations(sub, self.k)
        self.assertFalse(fused.consistent)
        warning.assert_called_once()
        for g in range(self.q):
            np.testing.assert_array_equal(fused.groups[g],
                                          self.perms[0][self.truth[g]])

    def test_fused_error_bounded(self):
        rng = np.random.default_rng(5)
        k, q, size = 3, 4, 200
        error_rate = 1.0 / (32 * k)
        flips = int(error_rate * size)
        for _ in range(100):
            truth = [rng.integers(0, k, size=size) for _ in range(q)]
            perms = [rng.permutation(k) for _ in range(q)]
            primary, secondary = [], []
            for g in range(q):
                noisy = []
                for labels, perm in ((truth[g], perms[g]),
                                     (truth[g], perms[(g - 1) % q])):
                    out = perm[labels]
                    idx = rng.choice(size, size=flips, replace=False)
                    out[idx] = (out[idx] + 1) % k
                    noisy.append(out)
                primary.append(noisy[0])
                secondary.append(noisy[1])
            sub = provable.SubBlockLabels(primary=primary,
                                          secondary=secondary)
            fused = provable.fuse_subblock_labels(sub, k)
            self.assertLessEqual(
                metrics.mis(fused, np.concatenate(truth)), 2.0 * error_rate)

    def test_mismatched_lengths(self):
        sub = self._sub()
        sub.secondary[1] = sub.secondary[1][:-1]
        self.assertRaises(PartitionError, provable.fuse_with_permutations,
                          sub, self.k)


class TestOracle(unittest.TestCase):

    def test_rows_and_columns(self):
        a, y, z = _block_instance(60, 45, seed=3)
        lam = model.true_mean_params(BLOCK_P, z)
        gamma = model.column_mean_params(BLOCK_P, y)
        np.testing.assert_array_equal(provable.oracle_classify(a, z, lam), y)
        np.testing.assert_array_equal(
            provable.oracle_classify_cols(a, y, gamma), z)

    def test_same_as_classifier(self):
        p = model.Connectivity([[0.3, 0.1], [0.1, 0.3]])
        y = model.balanced_labels(30, 2)
        a = model.sample_sbm(p, y, y, seed=4)
        lam = model.true_mean_params(p, y)
        np.testing.assert_array_equal(provable.oracle_classify(a, y, lam),
                                      plops.lr_classify(a, lam, y))


class TestProvableFit(unittest.TestCase):

    def test_block_recovery(self):
        a, y, z = _block_instance(320, 320, seed=11)
        result = provable.provable_fit(a, 2, 3, seed=7, y_true=y, z_true=z)
        self.assertEqual(metrics.mis(result.y, y), 0.0)
        self.assertEqual(metrics.mis(result.z, z), 0.0)
        self.assertEqual(result.report['rows']['mis'], 0.0)
        self.assertEqual(result.report['cols']['mis'], 0.0)

    def test_report(self):
        a, y, z = _block_instance(160, 160, seed=12)
        result = provable.provable_fit(a, 2, 3, seed=1, y_true=y)
        for side in ('rows', 'cols'):
            for half in ('top', 'bottom'):
                entry = result.report[side][half]
                for key in ('cyclic_consistent', 'spectral', 'first_lr',
                            'final', 'seconds'):
                    self.assertIn(key, entry)
        self.assertIn('mis', result.report['rows']['top']['final'])
        self.assertNotIn('mis', result.report['cols']['top']['final'])
        self.assertIn('changes', result.report['cols']['top']['first_lr'])
        self.assertEqual(result.report['lambda_hat'].shape, (2, 3))
        self.assertEqual(result.report['gamma_hat'].shape, (3, 2))

    def test_thread_independent(self):
        p = model.Connectivity([[0.4, 0.1], [0.1, 0.4]])
        y = model.random_labels(160, 2, seed=8)
        z = model.random_labels(160, 2, seed=9)
        a = model.sample_sbm(p, y, z, seed=10)
        one = provable.provable_fit(a, 2, 2, seed=3, threads=1)
        many = provable.provable_fit(a, 2, 2, seed=3, threads=4)
        np.testing.assert_array_equal(one.y, many.y)
        np.testing.assert_array_equal(one.z, many.z)

    def test_initial_labels_ignore_later_blocks(self):
        rng = np.random.default_rng(21)
        dense = (rng.random((160, 80)) < 0.3).astype(float)
        plan = provable.make_partition(160, 80, q=4, seed=2)
        groups = plan.row_groups[1]
        initial = np.zeros(dense.shape, dtype=bool)
        for r, rows in enumerate(groups):
            for c in (r, (r + 1) % 4):
                initial[np.ix_(rows, plan.col_groups[c])] = True
        mutated = dense.copy()
        mutated[~initial] = (rng.random(int((~initial).sum())) < 0.3)

        def labels(matrix):
            with ThreadPoolExecutor(max_workers=1) as pool:
                half = provable._HalfPass(model.BiAdjacency(matrix), groups,
                                          plan.col_groups, 2, 2,
                                          spectral.SpectralConfig(), 4, pool)
                row_sub, col_sub = half.initial_labels()
            return (provable.fuse_subblock_labels(row_sub, 2),
                    provable.fuse_subblock_labels(col_sub, 2))

        with mock.patch.object(provable.LOG, 'warning'):
            y_one, z_one = labels(dense)
            y_two, z_two = labels(mutated)
        self.assertGreater(np.sum(dense != mutated), 0)
        np.testing.assert_array_equal(y_one, y_two)
        np.testing.assert_array_equal(z_one, z_two)

    def test_too_small(self):
        a = model.BiAdjacency(np.ones((6, 6)))
        self.assertRaises(PartitionError, provable.provable_fit, a, 2, 2)

    def test_groups_smaller_than_classes(self):
        a = model.BiAdjacency(np.ones((16, 16)))
        self.assertRaises(PartitionError, provable.provable_fit, a, 3, 2)


@unittest.skipUnless(os.environ.get('PLBICLUST_SLOW_TESTS'),
                     'set PLBICLUST_SLOW_TESTS to run')
class TestExactRecovery(unittest.TestCase):

    def test_planted_partition(self):
        n = 1024
        b = 4.0
        a = (np.sqrt(b) + np.sqrt(3.0 * np.log(n))) ** 2
        self.assertAlmostEqual(info.exact_recovery_margin(a, b, 2, n), 1.5)
        p = model.planted_partition(2, a, b, n)
        exact = 0
        for seed in range(20):
            y = model.random_labels(n, 2, seed=100 + seed)
            z = model.random_labels(n, 2, seed=200 + seed)
            adj = model.sample_sbm(p, y, z, seed=seed)
            result = provable.provable_fit(adj, 2, 2, seed=seed, threads=4)
            if metrics.mis(result.y, y) == 0.0:
                exact += 1
        self.assertGreaterEqual(exact, 18)


@unittest.skipUnless(os.environ.get('PLBICLUST_SLOW_TESTS'),
                     'set PLBICLUST_SLOW_TESTS to run')
class TestStages(unittest.TestCase):

    def test_stage_medians_decrease(self):
        # n = 4m, so each column label sees more entries than a row label
        p = model.Connectivity([[0.12, 0.012], [0.012, 0.12]])
        stages = {'spectral': [], 'first_lr': [], 'final': []}
        for seed in range(20):
            y = model.random_labels(1600, 2, seed=300 + seed)
            z = model.random_labels(400, 2, seed=400 + seed)
            adj = model.sample_sbm(p, y, z, seed=seed)
            with mock.patch.object(provable.LOG, 'warning'):
                result = provable.provable_fit(adj, 2, 2, seed=seed,
                                               threads=4, y_true=y)
            top = result.report['rows']['top']
            for name in stages:
                stages[name].append(top[name]['mis'])
        medians = {name: np.median(values)
                   for name, values in stages.items()}
        self.assertLessEqual(medians['final'], medians['first_lr'])
        self.assertLessEqual(medians['first_lr'], medians['spectral'])
        self.assertLess(medians['final'], medians['spectral'])
