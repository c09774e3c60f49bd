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
Labels are 0-indexed; a two-dimensional label array holds soft labels.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from plbiclust.exceptions import DataError, DimensionError, ParameterError

LOG = logging.getLogger(__name__)

SAMPLING_MODES = ('bernoulli', 'poisson')
ADJACENCY_MODES = SAMPLING_MODES + ('mean',)

# rows per sampling task; fixed so the output does not depend on threads
SAMPLE_BLOCK_ROWS = 512

SOFT_TOLERANCE = 1e-9


class Connectivity(object):

    def __init__(self, p):
        p = np.array(p, dtype=float)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise DimensionError(
                'connectivity must be a non-empty K x L matrix')
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ParameterError(
                'connectivity entries must be finite and nonnegative')
        p.setflags(write=False)
        self.p = p

    def __repr__(self):
        return 'Connectivity(K={}, L={})'.format(self.k, self.l)

    @property
    def k(self):
        return self.p.shape[0]

    @property
    def l(self):
        return self.p.shape[1]

    @property
    def is_probability(self):
        return bool(np.all(self.p <= 1.0))

    @property
    def T(self):
        return Connectivity(self.p.T)

    def to_dict(self):
        return {'K': self.k, 'L': self.l, 'P': self.p.tolist()}

    @classmethod
    def from_dict(cls, data):
        try:
            conn = cls(data['P'])
        except KeyError:
            raise DataError('connectivity JSON requires a "P" field')
        if data.get('K', conn.k) != conn.k or data.get('L', conn.l) != conn.l:
            raise DimensionError('"K"/"L" do not match the shape of "P"')
        return conn


def as_connectivity(p):
    if isinstance(p, Connectivity):
        return p
    return Connectivity(p)


def is_soft(labels):
    return np.ndim(labels) == 2


def check_labels(labels, num_classes=None, length=None):
    """
    Validate a hard label vector and return it as an integer array.
    """
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise DimensionError('hard labels must be a vector')
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise DataError('hard labels must be integers')
    arr = arr.astype(np.int64)
    if length is not None and arr.size != length:
        raise DimensionError(
            'expected {} labels, got {}'.format(length, arr.size))
    if arr.size and arr.min() < 0:
        raise DataError('labels must be nonnegative')
    if num_classes is not None and arr.size and arr.max() >= num_classes:
        raise DataError(
            'label {} out of range for {} classes'.format(
                arr.max(), num_classes))
    return arr


def check_soft_labels(weights, num_classes=None, length=None):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise DimensionError('soft labels must be an n x K matrix')
    if length is not None and w.shape[0] != length:
        raise DimensionError(
            'expected {} soft label rows, got {}'.format(length, w.shape[0]))
    if num_classes is not None and w.shape[1] != num_classes:
        raise DimensionError(
            'expected {} classes, got {}'.format(num_classes, w.shape[1]))
    if np.any(w < 0) or np.any(np.abs(w.sum(axis=1) - 1.0) > SOFT_TOLERANCE):
        raise DataError('soft label rows must be probability vectors')
    return w


def one_hot(labels, num_classes):
    labels = check_labels(labels, num_classes)
    out = np.zeros((labels.size, num_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def label_weights(labels, num_classes, length=None):
    """
    The n x K weight matrix of hard or soft labels.
    """
    if is_soft(labels):
        return check_soft_labels(labels, num_classes, length)
    return one_hot(check_labels(labels, num_classes, length), num_classes)


def class_counts(labels, num_classes):
    if is_soft(labels):
        return check_soft_labels(labels, num_classes).sum(axis=0)
    labels = check_labels(labels, num_classes)
    return np.bincount(labels, minlength=num_classes).astype(float)


def class_proportions(labels, num_classes):
    counts = class_counts(labels, num_classes)
    return counts / max(counts.sum(), 1.0)


def balanced_labels(n0, num_classes):
    return np.repeat(np.arange(num_classes), n0)


def labels_from_proportions(n, proportions):
    """
    Deterministic labels with class sizes as close as possible to
    ``n * proportions`` (largest remainder rounding).
    """
    pi = np.asarray(proportions, dtype=float)
    if pi.ndim != 1 or np.any(pi < 0) or pi.sum() <= 0:
        raise ParameterError('proportions must be a nonnegative vector')
    pi = pi / pi.sum()
    raw = n * pi
    sizes = np.floor(raw).astype(np.int64)
    short = n - sizes.sum()
    order = np.argsort(-(raw - sizes), kind='stable')
    sizes[order[:short]] += 1
    return np.repeat(np.arange(pi.size), sizes)


def random_labels(n, num_classes, seed, proportions=None, concentration=None):
    """
    Random labels, i.i.d. from ``proportions`` (uniform by default).  With
    ``concentration`` the proportions are first drawn from a symmetric
    Dirichlet prior.
    """
    rng = np.random.default_rng(seed)
    if concentration is not None:
        pi = rng.dirichlet(np.full(num_classes, float(concentration)))
    elif proportions is not None:
        pi = np.asarray(proportions, dtype=float)
        pi = pi / pi.sum()
    else:
        pi = np.full(num_classes, 1.0 / num_classes)
    return rng.choice(num_classes, size=n, p=pi)


def planted_partition(num_classes, a, b, n):
    """
    Planted partition connectivity with P_kk = a/n and P_kr = b/n.
    """
    p = np.full((num_classes, num_classes), b / float(n))
    np.fill_diagonal(p, a / float(n))
    return Connectivity(p)


class BiAdjacency(object):
    """
    Immutable sparse n x m biadjacency matrix.

    Both the CSR and CSC forms are kept: block compression walks rows and
    its column dual walks columns.  ``mode`` is ``bernoulli`` (0/1 entries),
    ``poisson`` (nonnegative integer counts) or ``mean`` (nonnegative reals,
    used for expected adjacency matrices).
    """

    def __init__(self, matrix, mode='bernoulli'):
        if mode not in ADJACENCY_MODES:
            raise ParameterError('unknown adjacency mode: {}'.format(mode))
        csr = sparse.csr_matrix(matrix, dtype=float, copy=True)
        csr.sum_duplicates()
        csr.eliminate_zeros()
        data = csr.data
        if data.size:
            if not np.all(np.isfinite(data)) or data.min() < 0:
                raise DataError('adjacency entries must be nonnegative')
            if mode == 'bernoulli' and np.any(data != 1):
                raise DataError('bernoulli adjacency must be binary')
            if mode == 'poisson' and np.any(np.mod(data, 1) != 0):
                raise DataError('poisson adjacency must hold integer counts')
        self.mode = mode
        self.csr = csr
        self.csc = csr.tocsc()

    def __repr__(self):
        return 'BiAdjacency(n={}, m={}, nnz={}, mode={})'.format(
            self.n, self.m, self.nnz, self.mode)

    @classmethod
    def from_edges(cls, n, m, rows, cols, counts=None, mode='bernoulli'):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.shape != cols.shape:
            raise DimensionError('edge row and column arrays differ in size')
        if rows.size and (rows.min() < 0 or rows.max() >= n or
                          cols.min() < 0 or cols.max() >= m):
            raise DataError('edge index out of range for {}x{}'.format(n, m))
        if counts is None:
            counts = np.ones(rows.size)
        coo = sparse.coo_matrix((np.asarray(counts, dtype=float),
                                 (rows, cols)), shape=(n, m))
        if mode == 'bernoulli':
            keys = rows * m + cols
            if np.unique(keys).size != keys.size:
                raise DataError('duplicate edges in bernoulli mode')
        return cls(coo, mode=mode)

    @property
    def n(self):
        return self.csr.shape[0]

    @property
    def m(self):
        return self.csr.shape[1]

    @property
    def shape(self):
        return self.csr.shape

    @property
    def nnz(self):
        return self.csr.nnz

    @property
    def T(self):
        # the transpose of a CSC matrix is a CSR matrix over the same arrays
        out = BiAdjacency.__new__(BiAdjacency)
        out.mode = self.mode
        out.csr = sparse.csr_matrix(self.csc.T)
        out.csc = sparse.csc_matrix(self.csr.T)
        return out

    def row_degrees(self):
        return np.asarray(self.csr.sum(axis=1)).ravel()

    def col_degrees(self):
        return np.asarray(self.csc.sum(axis=0)).ravel()

    def edges(self):
        coo = self.csr.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def submatrix(self, rows, cols):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        return BiAdjacency(self.csr[rows][:, cols], mode=self.mode)

    def toarray(self):
        return self.csr.toarray()

    @staticmethod
    def vstack(blocks):
        return BiAdjacency(sparse.vstack([b.csr for b in blocks]),
                           mode=blocks[0].mode)

    @staticmethod
    def hstack(blocks):
        return BiAdjacency(sparse.hstack([b.csr for b in blocks]),
                           mode=blocks[0].mode)


def as_adjacency(a, mode=None):
    if isinstance(a, BiAdjacency):
        return a
    if mode is None:
        values = (sparse.csr_matrix(a).data if sparse.issparse(a)
                  else np.asarray(a, dtype=float))
        mode = 'bernoulli'
        if np.any(values > 1):
            mode = 'poisson'
        if np.any(np.mod(values, 1) != 0):
            mode = 'mean'
    return BiAdjacency(a, mode=mode)


def true_mean_params(p, z):
    """
    Row mean parameters ``lambda_kl = P_kl * n_l(z)``.  Called with the
    transposed connectivity and the row labels it yields the column mean
    parameters (see ``column_mean_params``).
    """
    p = as_connectivity(p)
    if is_soft(z):
        if np.shape(z)[1] != p.l:
            raise DimensionError(
                'labels have {} classes, P has {} columns'.format(
                    np.shape(z)[1], p.l))
    counts = class_counts(z, p.l)
    return p.p * counts[np.newaxis, :]


def column_mean_params(p, y):
    """
    Column mean parameters Gamma (L x K), ``Gamma^T = diag(n(y)) P``.
    """
    return true_mean_params(as_connectivity(p).T, y)


def expected_adjacency(p, y, z):
    p = as_connectivity(p)
    y = check_labels(y, p.k)
    z = check_labels(z, p.l)
    return p.p[y][:, z]


def _sample_rows(p, mode, y_block, row_offset, col_index, seed):
    rng = np.random.default_rng(seed)
    rows_out, cols_out, data_out = [], [], []
    for k in range(p.shape[0]):
        rows_k = row_offset + np.flatnonzero(y_block == k)
        if rows_k.size == 0:
            continue
        for l, cols_l in enumerate(col_index):
            cells = rows_k.size * cols_l.size
            prob = p[k, l]
            if cells == 0 or prob == 0:
                continue
            if mode == 'bernoulli':
                count = rng.binomial(cells, prob)
                flat = rng.choice(cells, size=count, replace=False)
                weights = np.ones(count)
            else:
                count = rng.poisson(cells * prob)
                flat, weights = np.unique(
                    rng.integers(0, cells, size=count), return_counts=True)
            rows_out.append(rows_k[flat // cols_l.size])
            cols_out.append(cols_l[flat % cols_l.size])
            data_out.append(weights.astype(float))
    return rows_out, cols_out, data_out


def sample_sbm(p, y, z, seed, mode='bernoulli', threads=1):
    """
    Draw a biadjacency matrix with independent entries of mean
    ``P[y_i, z_j]``.

    Rows are sampled in fixed-size blocks, each with its own seed spawned
    from ``seed``, so the output is identical for every ``threads`` value.
    """
    p = as_connectivity(p)
    if mode not in SAMPLING_MODES:
        raise ParameterError('unknown sampling mode: {}'.format(mode))
    if mode == 'bernoulli' and not p.is_probability:
        raise ParameterError(
            'connectivity entry {:.4g} > 1 in bernoulli mode'.format(
                p.p.max()))
    y = check_labels(y, p.k)
    z = check_labels(z, p.l)
    n, m = y.size, z.size
    col_index = [np.flatnonzero(z == l) for l in range(p.l)]
    starts = list(range(0, n, SAMPLE_BLOCK_ROWS))
    children = np.random.SeedSequence(seed).spawn(len(starts))

    def work(task):
        start, child = task
        stop = min(n, start + SAMPLE_BLOCK_ROWS)
        return _sample_rows(p.p, mode, y[start:stop], start, col_index, child)

    tasks = list(zip(starts, children))
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(work, tasks))
    else:
        parts = [work(t) for t in tasks]
    rows = [r for part in parts for r in part[0]]
    cols = [c for part in parts for c in part[1]]
    data = [d for part in parts for d in part[2]]
    if rows:
        rows, cols, data = (np.concatenate(rows), np.concatenate(cols),
                            np.concatenate(data))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    LOG.debug('sampled %d nonzeros for a %dx%d %s model',
              rows.size, n, m, mode)
    coo = sparse.coo_matrix((data, (rows, cols)), shape=(n, m))
    return BiAdjacency(coo, mode=mode)


@dataclass(frozen=True)
class ModelDiagnostics:
    omega: float
    beta: float
    alpha: float
    j_kr: np.ndarray


def _spread(params):
    params = np.asarray(params, dtype=float)
    lo = params.min()
    if lo <= 0:
        return np.inf
    return params.max() / lo


def _balance(labels, num_classes):
    pi = class_proportions(labels, num_classes)
    if np.any(pi == 0):
        return np.inf
    scaled = num_classes * pi
    return float(np.max(np.maximum(scaled, 1.0 / scaled)))


def diagnostics(lam, gamma, y, z, info):
    """
    Assumption measures of the model: ``omega`` (mean parameter spread),
    ``beta`` (cluster balance), ``alpha = m/n`` and ``J_kr = L |Lambda|_inf /
    I_kr``.  Degenerate values are reported as ``inf``.
    """
    lam = np.asarray(lam, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    k, l = lam.shape
    omega = max(_spread(lam), _spread(gamma))
    beta = max(_balance(y, k), _balance(z, l))
    n = np.shape(y)[0]
    m = np.shape(z)[0]
    i_kr = np.asarray(info.i_kr, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        j_kr = np.where(i_kr > 0, l * lam.max() / i_kr, np.inf)
    return ModelDiagnostics(omega=float(omega), beta=float(beta),
                            alpha=m / float(n), j_kr=j_kr)
