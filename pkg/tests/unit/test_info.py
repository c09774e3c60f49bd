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

import unittest

import numpy as np

from plbiclust import info
from plbiclust.exceptions import DimensionError, ParameterError


def _grid_max(lam_k, lam_r, points=10001):
    grid = np.linspace(0.0, 1.0, points)
    values = [info.chernoff_objective(s, lam_k, lam_r) for s in grid]
    best = int(np.argmax(values))
    return values[best], grid[best]


class TestChernoffInfo(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(1234)

    def test_symmetric_pair(self):
        result = info.chernoff_info([[4.0, 1.0], [1.0, 4.0]])
        self.assertAlmostEqual(result.i_kr[0, 1], 1.0, places=9)
        self.assertAlmostEqual(result.s_star[0, 1], 0.5, places=8)
        self.assertAlmostEqual(result.i_min, 1.0, places=9)
        self.assertEqual(result.num_classes, 2)

    def test_identical_rows(self):
        value, s = info.chernoff_pair([2.0, 3.0], [2.0, 3.0])
        self.assertEqual(value, 0.0)
        self.assertEqual(s, 0.5)

    def test_matches_grid_search(self):
        for _ in range(25):
            lam = self.rng.uniform(0.1, 10.0, size=(2, 4))
            value, s = info.chernoff_pair(lam[0], lam[1])
            grid_value, grid_s = _grid_max(lam[0], lam[1])
            self.assertGreaterEqual(value, grid_value - 1e-9)
            self.assertAlmostEqual(value, grid_value, delta=1e-5)
            self.assertAlmostEqual(s, grid_s, delta=2e-4)

    def test_symmetry(self):
        lam = self.rng.uniform(0.5, 5.0, size=(4, 3))
        result = info.chernoff_info(lam)
        np.testing.assert_allclose(result.i_kr, result.i_kr.T)
        np.testing.assert_allclose(result.s_star + result.s_star.T, 1.0)
        np.testing.assert_allclose(np.diag(result.i_kr), 0.0)

    def test_threads_agree(self):
        lam = self.rng.uniform(0.5, 5.0, size=(5, 3))
        one = info.chernoff_info(lam, threads=1)
        many = info.chernoff_info(lam, threads=4)
        np.testing.assert_array_equal(one.i_kr, many.i_kr)
        np.testing.assert_array_equal(one.s_star, many.s_star)

    def test_homogeneous(self):
        lam = self.rng.uniform(0.5, 5.0, size=(3, 4))
        base = info.chernoff_info(lam).i_kr
        scaled = info.chernoff_info(7.0 * lam).i_kr
        np.testing.assert_allclose(scaled, 7.0 * base, rtol=1e-7)

    def test_hellinger_lower_bound(self):
        for _ in range(20):
            lam = self.rng.uniform(0.1, 10.0, size=(2, 5))
            value, _ = info.chernoff_pair(lam[0], lam[1])
            half = 0.5 * np.sum((np.sqrt(lam[0]) - np.sqrt(lam[1])) ** 2)
            self.assertGreaterEqual(value, half - 1e-12)

    def test_l2_link(self):
        for _ in range(20):
            lam = self.rng.uniform(0.5, 10.0, size=(2, 5))
            value, _ = info.chernoff_pair(lam[0], lam[1])
            dist = np.sum((lam[0] - lam[1]) ** 2)
            self.assertGreaterEqual(value, dist / (8.0 * lam.max()) - 1e-12)
            self.assertLessEqual(value, dist / (2.0 * lam.min()) + 1e-12)

    def test_optimal_exponent_range(self):
        for _ in range(20):
            lam = self.rng.uniform(0.2, 20.0, size=(2, 3))
            _, s = info.chernoff_pair(lam[0], lam[1])
            omega = lam.max() / lam.min()
            self.assertGreaterEqual(s, 1.0 / (2.0 * omega))
            self.assertLessEqual(s, 1.0 - 1.0 / (2.0 * omega))

    def test_zero_entries_floored(self):
        result = info.chernoff_info([[0.0, 3.0], [3.0, 0.0]])
        self.assertTrue(np.isfinite(result.i_kr[0, 1]))
        self.assertGreater(result.i_kr[0, 1], 0.0)

    def test_column_info(self):
        gamma = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 1.0]])
        np.testing.assert_allclose(info.column_info(gamma).i_kr,
                                   info.chernoff_info(gamma).i_kr)

    def test_invalid(self):
        self.assertRaises(ParameterError, info.chernoff_info,
                          [[1.0, -1.0], [1.0, 2.0]])
        self.assertRaises(DimensionError, info.chernoff_info, [1.0, 2.0])


class TestSeparation(unittest.TestCase):

    def test_ratio(self):
        sep = info.separation([[4.0, 1.0], [1.0, 4.0]])
        self.assertAlmostEqual(sep.eps_kr[0, 1], 3.0)
        self.assertAlmostEqual(sep.eps, 3.0)
        np.testing.assert_allclose(sep.eps_k, [3.0, 3.0])

    def test_identical_rows(self):
        sep = info.separation([[1.0, 2.0], [1.0, 2.0], [3.0, 3.0]])
        self.assertEqual(sep.eps_kr[0, 1], 0.0)
        self.assertEqual(sep.eps, 0.0)

    def test_lower_bound_from_information(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            k, l = int(rng.integers(2, 5)), int(rng.integers(1, 6))
            lam = rng.uniform(0.1, 10.0, size=(k, l))
            eps = info.separation(lam).eps_kr
            i_kr = info.chernoff_info(lam).i_kr
            bound = np.minimum(2.0 * i_kr / (l * lam.max()), 2.0)
            off = ~np.eye(k, dtype=bool)
            self.assertTrue(np.all(eps[off] >= bound[off] - 1e-9))


class TestRatePrediction(unittest.TestCase):

    def test_two_classes(self):
        result = info.chernoff_info([[4.0, 1.0], [1.0, 4.0]])
        self.assertAlmostEqual(info.rate_prediction(result, 1.0, 0),
                               np.exp(-1.0), places=8)

    def test_lambda_min(self):
        result = info.chernoff_info([[4.0, 1.0], [1.0, 4.0]])
        self.assertAlmostEqual(info.rate_prediction(result, 4.0, 1),
                               np.exp(-1.0) / 2.0, places=8)

    def test_separation_factor(self):
        lam = [[4.0, 1.0], [1.0, 4.0]]
        result = info.chernoff_info(lam)
        value = info.rate_prediction(result, 1.0, 0, info.separation(lam))
        self.assertAlmostEqual(value, np.exp(-1.0) * 4.0 / 3.0, places=8)

    def test_infinite_information(self):
        i_kr = np.array([[0.0, np.inf], [np.inf, 0.0]])
        self.assertEqual(info.rate_prediction(i_kr, 1.0, 0), 0.0)

    def test_invalid_lambda_min(self):
        self.assertRaises(ParameterError, info.rate_prediction,
                          np.zeros((2, 2)), 0.0, 0)

    def test_overall(self):
        value = info.overall_rate_prediction([[4.0, 1.0], [1.0, 4.0]])
        self.assertAlmostEqual(value, np.exp(-1.0), places=8)

    def test_exact_recovery_margin(self):
        n = np.exp(2.0)
        self.assertAlmostEqual(
            info.exact_recovery_margin(9.0, 1.0, 2, n), 1.0)
        self.assertAlmostEqual(
            info.exact_recovery_margin(9.0, 1.0, 2, n, beta=2.0), 0.5)
        self.assertRaises(ParameterError, info.exact_recovery_margin,
                          9.0, 1.0, 2, 1)
