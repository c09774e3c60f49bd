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
* edge list: tab separated ``row<TAB>col[<TAB>count]`` lines, 0-indexed,
  preceded by a ``# n<TAB>m<TAB>mode`` header line
* labels: one 0-indexed integer label per line
* connectivity and sidecars: JSON
"""

import json
import logging
import os
import subprocess

import numpy as np

from plbiclust.exceptions import ConfigError, DataError
from plbiclust.model import BiAdjacency, Connectivity, check_labels
from plbiclust.response import _jsonable

LOG = logging.getLogger(__name__)

HEADER_PREFIX = '#'


def open_output(path):
    try:
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(directory):
            os.makedirs(directory)
        return open(path, 'w')
    except (IOError, OSError) as e:
        raise ConfigError('cannot write {}: {}'.format(path, e))


def open_input(path):
    try:
        return open(path)
    except (IOError, OSError) as e:
        raise DataError('cannot read {}: {}'.format(path, e))


def write_edges(path, a):
    rows, cols, data = a.edges()
    with open_output(path) as fp:
        fp.write('{} {}\t{}\t{}\n'.format(HEADER_PREFIX, a.n, a.m, a.mode))
        if a.mode == 'bernoulli':
            for i, j in zip(rows, cols):
                fp.write('{}\t{}\n'.format(i, j))
        else:
            fmt = repr if a.mode == 'mean' else int
            for i, j, c in zip(rows, cols, data):
                fp.write('{}\t{}\t{}\n'.format(i, j, fmt(float(c))))


def read_edges(path, n=None, m=None):
    """
    Parse an edge list.  Without a header line the shape comes from ``n``
    and ``m`` or, failing that, from the largest indices seen.
    """
    mode = None
    rows, cols, counts = [], [], []
    with open_input(path) as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(HEADER_PREFIX):
                fields = line[len(HEADER_PREFIX):].split()
                if len(fields) >= 2 and n is None and m is None:
                    n, m = int(fields[0]), int(fields[1])
                if len(fields) >= 3:
                    mode = fields[2]
                continue
            fields = line.split()
            if len(fields) not in (2, 3):
                raise DataError('{}:{}: expected 2 or 3 fields'.format(
                    path, lineno))
            try:
                rows.append(int(fields[0]))
                cols.append(int(fields[1]))
                counts.append(float(fields[2]) if len(fields) == 3 else 1.0)
            except ValueError:
                raise DataError('{}:{}: malformed edge'.format(path, lineno))
    if n is None:
        n = max(rows) + 1 if rows else 0
    if m is None:
        m = max(cols) + 1 if cols else 0
    if mode is None:
        mode = 'bernoulli' if all(c == 1.0 for c in counts) else 'poisson'
    return BiAdjacency.from_edges(n, m, rows, cols, counts, mode=mode)


def write_labels(path, labels):
    labels = check_labels(labels)
    with open_output(path) as fp:
        for label in labels:
            fp.write('{}\n'.format(int(label)))


def read_labels(path):
    labels = []
    with open_input(path) as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise DataError('{}:{}: malformed label'.format(path, lineno))
    return check_labels(np.array(labels, dtype=np.int64))


def write_json(path, data):
    with open_output(path) as fp:
        json.dump(_jsonable(data), fp, indent=4, sort_keys=True)
        fp.write('\n')


def read_json(path):
    with open_input(path) as fp:
        try:
            return json.load(fp)
        except ValueError as e:
            raise DataError('{} is not valid JSON: {}'.format(path, e))


def read_connectivity(path):
    return Connectivity.from_dict(read_json(path))


def version_string():
    """
    ``git describe`` of the source tree when available, else the package
    version.
    """
    from plbiclust import __version__
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.check_output(
            ['git', 'describe', '--always', '--dirty', '--tags'],
            cwd=here, stderr=subprocess.DEVNULL)
        described = out.decode('utf-8').strip()
        if described:
            return described
    except (OSError, subprocess.CalledProcessError):
        LOG.debug('git describe unavailable, using package version')
    return __version__


def sidecar(config, **fields):
    data = {'config': config, 'version': version_string()}
    data.update(fields)
    return data
