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
import json
import os
import unittest

from click.testing import CliRunner

from plbiclust import bench
from plbiclust.scripts.cli import cli

CONFIG = {'n0': 20, 'n0_grid': [20], 'C': 2.0, 'seeds': 1,
          'algorithms': ['spectral'], 'timings': False}


class TestCLI(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()

    def tearDown(self):
        pass

    def _config(self, config=None):
        with open('config.json', 'w') as fp:
            json.dump(config or CONFIG, fp)
        return 'config.json'

    def _generate(self, out='data', seed='3'):
        return self.runner.invoke(
            cli, ['--config', self._config(), '--seed', seed, '--out', out,
                  'generate'])

    def test_generate(self):
        with self.runner.isolated_filesystem():
            result = self._generate()
            self.assertEqual(result.exit_code, 0, result.output)
            for name in ('edges.tsv', 'y.txt', 'z.txt', 'truth.json'):
                self.assertTrue(os.path.exists(os.path.join('data', name)))
            with open(os.path.join('data', 'truth.json')) as fp:
                truth = json.load(fp)
            self.assertEqual((truth['K'], truth['L']), (4, 6))
            self.assertEqual((truth['n'], truth['m']), (80, 120))
            self.assertEqual(truth['seed'], 3)
            self.assertIn('version', truth)

    def test_generate_is_seeded(self):
        with self.runner.isolated_filesystem():
            self._generate('one')
            self._generate('two')
            with open(os.path.join('one', 'edges.tsv')) as fp:
                first = fp.read()
            with open(os.path.join('two', 'edges.tsv')) as fp:
                second = fp.read()
            self.assertEqual(first, second)

    def test_fit_and_eval(self):
        with self.runner.isolated_filesystem():
            self._generate()
            result = self.runner.invoke(
                cli, ['--config', 'config.json', '--seed', '1', '--out', 'fit',
                      'fit', '--algo', 'oracle', '--meta', 'data/truth.json',
                      '--y-true', 'data/y.txt', '--z-true', 'data/z.txt',
                      'data/edges.tsv'])
            self.assertEqual(result.exit_code, 0, result.output)
            for name in ('y_hat.txt', 'z_hat.txt', 'fit.json'):
                self.assertTrue(os.path.exists(os.path.join('fit', name)))
            with open(os.path.join('fit', 'fit.json')) as fp:
                fitted = json.load(fp)
            self.assertEqual(fitted['config']['seed'], 1)
            self.assertEqual(fitted['config']['alpha'], 0.75)
            self.assertEqual(fitted['config']['n0_grid'], [20])
            self.assertIn('version', fitted)
            result = self.runner.invoke(
                cli, ['--out', 'scores', 'eval', 'data/y.txt', 'data/y.txt'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open(os.path.join('scores', 'eval.json')) as fp:
                scores = json.load(fp)
            self.assertEqual(scores['mis'], 0.0)
            self.assertAlmostEqual(scores['nmi'], 1.0)
            self.assertEqual(scores['permutation'], [0, 1, 2, 3])
            self.assertEqual(scores['config']['max_outer'], 50)
            self.assertIn('version', scores)

    def test_fit_spectral(self):
        with self.runner.isolated_filesystem():
            self._generate()
            result = self.runner.invoke(
                cli, ['--out', 'fit', 'fit', '--algo', 'spectral', '-k',
                      '4', '-l', '6', 'data/edges.tsv'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open(os.path.join('fit', 'y_hat.txt')) as fp:
                self.assertEqual(len(fp.read().split()), 80)

    def test_oracle_without_truth(self):
        with self.runner.isolated_filesystem():
            self._generate()
            result = self.runner.invoke(
                cli, ['fit', '--algo', 'oracle', '-k', '4', '-l', '6',
                      'data/edges.tsv'])
            self.assertEqual(result.exit_code, 2)

    def test_missing_classes(self):
        with self.runner.isolated_filesystem():
            self._generate()
            result = self.runner.invoke(
                cli, ['fit', '--algo', 'spectral', 'data/edges.tsv'])
            self.assertEqual(result.exit_code, 2)

    def test_provable_too_small(self):
        with self.runner.isolated_filesystem():
            with open('tiny.tsv', 'w') as fp:
                fp.write('# 6\t6\tbernoulli\n0\t1\n2\t3\n')
            result = self.runner.invoke(
                cli, ['fit', '--algo', 'provable', '-k', '2', '-l', '2',
                      'tiny.tsv'])
            self.assertEqual(result.exit_code, 2)
            self.assertIn('PartitionError', result.output)

    def test_malformed_edges(self):
        with self.runner.isolated_filesystem():
            with open('bad.tsv', 'w') as fp:
                fp.write('0\tx\n')
            result = self.runner.invoke(
                cli, ['fit', '--algo', 'spectral', '-k', '2', '-l', '2',
                      'bad.tsv'])
            self.assertEqual(result.exit_code, 3)

    def test_invalid_config(self):
        with self.runner.isolated_filesystem():
            with open('config.json', 'w') as fp:
                fp.write('{"C": ')
            result = self.runner.invoke(
                cli, ['--config', 'config.json', 'generate'])
            self.assertEqual(result.exit_code, 2)
            result = self.runner.invoke(
                cli, ['--config', self._config({'C': 'big'}), 'generate'])
            self.assertEqual(result.exit_code, 2)

    def test_bench(self):
        with self.runner.isolated_filesystem():
            args = ['--config', self._config(), '--seed', '4', '--out']
            result = self.runner.invoke(cli, args + ['one', 'bench'])
            self.assertEqual(result.exit_code, 0, result.output)
            self.runner.invoke(cli, args + ['two', 'bench'])
            with open(os.path.join('one', 'bench.csv')) as fp:
                first = fp.read()
            with open(os.path.join('two', 'bench.csv')) as fp:
                second = fp.read()
            self.assertEqual(first, second)
            with open(os.path.join('one', 'bench.csv')) as fp:
                rows = list(csv.DictReader(fp))
            self.assertEqual(list(rows[0].keys()), bench.CSV_FIELDS)
            self.assertEqual(len(rows), 1)
            for name in ('summary.csv', 'bench.json'):
                self.assertTrue(os.path.exists(os.path.join('one', name)))

    def test_bench_requires_seed(self):
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(
                cli, ['--config', self._config(), 'bench'])
            self.assertEqual(result.exit_code, 2)
