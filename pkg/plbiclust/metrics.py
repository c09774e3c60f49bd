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
Permutations map estimated labels to reference labels, ``sigma[y_hat]``.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import normalized_mutual_info_score

from plbiclust.exceptions import DimensionError
from plbiclust.model import check_labels

NMI_NORMALIZATION = 'geometric'


def _pair(y_hat, y):
    y_hat = check_labels(y_hat)
    y = check_labels(y)
    if y_hat.size != y.size:
        raise DimensionError(
            'label vectors differ in length: {} vs {}'.format(
                y_hat.size, y.size))
    return y_hat, y


def confusion_matrix(y_hat, y, num_classes=None):
    """
    Square matrix ``N[a, b] = |{i: y_hat_i = a, y_i = b}|``, padded with
    zeros when the two labelings use different numbers of classes.
    """
    y_hat, y = _pair(y_hat, y)
    size = max(int(y_hat.max()) + 1 if y_hat.size else 1,
               int(y.max()) + 1 if y.size else 1,
               num_classes or 1)
    counts = np.zeros((size, size), dtype=np.int64)
    np.add.at(counts, (y_hat, y), 1)
    return counts


def _best_agreement(counts):
    if counts.size == 0:
        return 0
    rows, cols = linear_sum_assignment(counts, maximize=True)
    return int(counts[rows, cols].sum())


def best_permutation(counts):
    """
    The lexicographically smallest permutation among those maximizing
    ``sum_a counts[a, sigma[a]]``.
    """
    counts = np.asarray(counts)
    size = counts.shape[0]
    target = _best_agreement(counts)
    sigma = np.zeros(size, dtype=np.int64)
    free_rows = list(range(size))
    free_cols = list(range(size))
    fixed = 0
    for a in range(size):
        free_rows.remove(a)
        for b in sorted(free_cols):
            rest = [c for c in free_cols if c != b]
            sub = counts[np.ix_(free_rows, rest)]
            if fixed + counts[a, b] + _best_agreement(sub) == target:
                sigma[a] = b
                fixed += int(counts[a, b])
                free_cols.remove(b)
                break
    return sigma


def optimal_permutation(y_hat, y, num_classes=None):
    return best_permutation(confusion_matrix(y_hat, y, num_classes))


def apply_permutation(labels, sigma):
    return np.asarray(sigma, dtype=np.int64)[check_labels(labels)]


def mis(y_hat, y, num_classes=None):
    y_hat, y = _pair(y_hat, y)
    if y.size == 0:
        return 0.0
    counts = confusion_matrix(y_hat, y, num_classes)
    return 1.0 - _best_agreement(counts) / float(y.size)


def mis_per_class(y_hat, y, num_classes=None):
    """
    ``Mis_k`` for every reference class, all under one optimal permutation.
    Classes absent from ``y`` get ``nan``.
    """
    y_hat, y = _pair(y_hat, y)
    sigma = optimal_permutation(y_hat, y, num_classes)
    mapped = sigma[y_hat]
    rates = np.full(sigma.size, np.nan)
    for k in range(sigma.size):
        members = y == k
        if members.any():
            rates[k] = float(np.mean(mapped[members] != k))
    return rates


def mis_k(y_hat, y, k, num_classes=None):
    return float(mis_per_class(y_hat, y, num_classes)[k])


def dmis(y_hat, y):
    y_hat, y = _pair(y_hat, y)
    if y.size == 0:
        return 0.0
    return float(np.mean(y_hat != y))


def nmi(y_hat, y):
    """
    ``I(y_hat; y) / sqrt(H(y_hat) H(y))`` with natural-log entropies; two
    constant labelings score 1.
    """
    y_hat, y = _pair(y_hat, y)
    if np.unique(y_hat).size <= 1 and np.unique(y).size <= 1:
        return 1.0
    return float(normalized_mutual_info_score(
        y, y_hat, average_method=NMI_NORMALIZATION))
