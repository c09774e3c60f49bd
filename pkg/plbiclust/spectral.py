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

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, svds
from sklearn.cluster import KMeans

from plbiclust.exceptions import NumericalError, ParameterError
from plbiclust.model import as_adjacency

LOG = logging.getLogger(__name__)

SVD_TOLERANCE = 1e-8
SVD_MAXITER = 1000


@dataclass(frozen=True)
class SpectralConfig:
    rank: Optional[int] = None
    regularize: bool = True
    regularization_quantile: float = 0.9
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300
    # informational only; k-means++ is the approximate solver used
    kappa_target: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.rank is not None and self.rank < 1:
            raise ParameterError('spectral rank must be at least 1')
        if not 0.0 < self.regularization_quantile <= 1.0:
            raise ParameterError('regularization quantile must lie in (0, 1]')
        if self.kmeans_restarts < 1 or self.kmeans_max_iter < 1:
            raise ParameterError('k-means restarts and iterations must be '
                                 'positive')

    @classmethod
    def from_dict(cls, data):
        fields = cls.__dataclass_fields__
        return cls(**{key: val for key, val in (data or {}).items()
                      if key in fields})

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


def degree_threshold(degrees, quantile):
    degrees = np.asarray(degrees, dtype=float)
    if degrees.size == 0:
        return 0.0
    return max(float(np.quantile(degrees, quantile)), 2.0 * degrees.mean())


def _scale_factors(degrees, quantile):
    tau = degree_threshold(degrees, quantile)
    scale = np.ones(degrees.size)
    heavy = degrees > tau
    scale[heavy] = tau / degrees[heavy]
    return scale, int(heavy.sum())


def regularize_degrees(a, cfg=None):
    """
    Scale every row and column whose degree exceeds
    ``max(q-quantile, 2 * mean degree)`` down to that threshold.  Both
    scale vectors come from the degrees of the input, so the result is
    ``D_r A D_c`` with diagonal entries at most one.
    """
    cfg = cfg or SpectralConfig()
    a = as_adjacency(a)
    row_deg = np.asarray(a.csr.sum(axis=1)).ravel()
    col_deg = np.asarray(a.csr.sum(axis=0)).ravel()
    row_scale, heavy_rows = _scale_factors(row_deg,
                                           cfg.regularization_quantile)
    col_scale, heavy_cols = _scale_factors(col_deg,
                                           cfg.regularization_quantile)
    if heavy_rows or heavy_cols:
        LOG.debug('regularized %d rows and %d columns', heavy_rows,
                  heavy_cols)
    return sparse.csr_matrix(
        sparse.diags(row_scale) @ a.csr @ sparse.diags(col_scale))


def _normalize_signs(u, v):
    for col in range(u.shape[1]):
        pivot = np.argmax(np.abs(u[:, col]))
        if u[pivot, col] < 0:
            u[:, col] *= -1.0
            v[:, col] *= -1.0
    return u, v


def _arpack_residual(matrix, error):
    vecs = getattr(error, 'eigenvectors', None)
    vals = getattr(error, 'eigenvalues', None)
    if vecs is None or vals is None or np.size(vals) == 0:
        return None
    if vecs.shape[0] == matrix.shape[1]:
        applied = matrix.T @ (matrix @ vecs)
    else:
        applied = matrix @ (matrix.T @ vecs)
    norms = np.linalg.norm(applied - vecs * vals, axis=0)
    return float(np.max(norms / np.maximum(np.abs(vals), 1e-300)))


def truncated_svd(a_re, rank, seed=0):
    """
    Top ``rank`` singular triplets ``(U, S, V)`` with ``S`` nonincreasing.

    The iterative solver runs on the sparse matrix; a matrix too small for it
    (``rank >= min(n, m)``) is factorized densely.  Signs are fixed so the
    largest entry of each left singular vector is positive.
    """
    matrix = sparse.csr_matrix(a_re, dtype=float)
    n, m = matrix.shape
    if rank < 1 or rank > min(n, m):
        raise ParameterError(
            'rank {} is not in [1, {}]'.format(rank, min(n, m)))
    if rank >= min(n, m):
        u, s, vt = np.linalg.svd(matrix.toarray(), full_matrices=False)
        u, s, v = u[:, :rank], s[:rank], vt[:rank].T
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.uniform(-1.0, 1.0, size=min(n, m))
        try:
            u, s, vt = svds(matrix, k=rank, v0=v0, tol=SVD_TOLERANCE,
                            maxiter=SVD_MAXITER)
        except ArpackNoConvergence as exc:
            residual = _arpack_residual(matrix, exc)
            raise NumericalError(
                'truncated SVD did not converge in {} iterations'.format(
                    SVD_MAXITER), residual=residual)
        order = np.argsort(-s, kind='stable')
        u, s, v = u[:, order], s[order], vt[order].T
    u, v = _normalize_signs(np.array(u), np.array(v))
    return u, np.maximum(s, 0.0), v


def kmeans_rows(points, k, cfg=None):
    """
    k-means++ with ``cfg.kmeans_restarts`` restarts; the run with the lowest
    within-cluster sum of squares wins.
    """
    cfg = cfg or SpectralConfig()
    points = np.asarray(points, dtype=float)
    if k < 1:
        raise ParameterError('number of clusters must be at least 1')
    if points.shape[0] < k:
        raise ParameterError(
            'cannot form {} clusters from {} points'.format(
                k, points.shape[0]))
    km = KMeans(n_clusters=k, init='k-means++', n_init=cfg.kmeans_restarts,
                max_iter=cfg.kmeans_max_iter, random_state=cfg.seed)
    labels = km.fit_predict(points)
    found = np.unique(labels).size
    if found < k:
        LOG.warning('k-means produced %d nonempty clusters out of %d',
                    found, k)
    return labels.astype(np.int64)


def embed_rows(a, k, l, cfg=None):
    cfg = cfg or SpectralConfig()
    a = as_adjacency(a)
    rank = cfg.rank or min(k, l)
    rank = min(rank, a.n, a.m)
    matrix = regularize_degrees(a, cfg) if cfg.regularize else a.csr
    u, s, _ = truncated_svd(matrix, rank, cfg.seed)
    return u * s[np.newaxis, :]


def spectral_cluster_rows(a, k, l, cfg=None):
    """
    Row labels from k-means on the scaled left singular vectors of the
    regularized matrix.
    """
    cfg = cfg or SpectralConfig()
    return kmeans_rows(embed_rows(a, k, l, cfg), k, cfg)


def spectral_cluster_cols(a, k, l, cfg=None):
    """
    Column labels; the row algorithm run on the transpose.
    """
    a = as_adjacency(a)
    return spectral_cluster_rows(a.T, l, k, cfg)


def spectral_fit(a, k, l, cfg=None):
    cfg = cfg or SpectralConfig()
    y = spectral_cluster_rows(a, k, l, cfg)
    z = spectral_cluster_cols(a, k, l, cfg)
    return y, z
