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
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from plbiclust.exceptions import DimensionError, ParameterError

LOG = logging.getLogger(__name__)

LAMBDA_FLOOR = 1e-8
IDENTICAL_RTOL = 1e-12
S_TOLERANCE = 1e-10


@dataclass(frozen=True)
class InfoMatrix:
    i_kr: np.ndarray
    s_star: np.ndarray

    @property
    def num_classes(self):
        return self.i_kr.shape[0]

    @property
    def i_min(self):
        k = self.num_classes
        if k < 2:
            return np.inf
        return float(np.min(self.i_kr[~np.eye(k, dtype=bool)]))

    def to_dict(self):
        return {'I': self.i_kr.tolist(), 's_star': self.s_star.tolist(),
                'I_min': self.i_min}


@dataclass(frozen=True)
class SeparationMatrix:
    eps_kr: np.ndarray

    @property
    def eps_k(self):
        k = self.eps_kr.shape[0]
        off = np.where(np.eye(k, dtype=bool), np.inf, self.eps_kr)
        return off.min(axis=1)

    @property
    def eps(self):
        return float(np.min(self.eps_k)) if self.eps_kr.size else np.inf


def _positive(lam):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 2:
        raise DimensionError('mean parameters must be a matrix')
    if np.any(~np.isfinite(lam)) or np.any(lam < 0):
        raise ParameterError('mean parameters must be finite and '
                             'nonnegative')
    return np.maximum(lam, LAMBDA_FLOOR)


def chernoff_objective(s, lam_k, lam_r):
    """``I_s = sum_l (1-s) lam_k + s lam_r - lam_k^(1-s) lam_r^s``."""
    return float(np.sum((1.0 - s) * lam_k + s * lam_r
                        - lam_k ** (1.0 - s) * lam_r ** s))


def _derivative(s, lam_k, lam_r, log_ratio):
    lam_s = lam_k ** (1.0 - s) * lam_r ** s
    return float(np.sum(lam_r - lam_k + lam_s * log_ratio))


def chernoff_pair(lam_k, lam_r):
    """
    Return ``(I, s*)`` for one pair of rows.  The map ``s -> I_s`` is
    strictly concave on (0, 1) unless the rows coincide, so the root of its
    derivative is found by bracketing; a bounded scalar search covers the
    case where the derivative does not change sign numerically.
    """
    lam_k = np.maximum(np.asarray(lam_k, dtype=float), LAMBDA_FLOOR)
    lam_r = np.maximum(np.asarray(lam_r, dtype=float), LAMBDA_FLOOR)
    if np.allclose(lam_k, lam_r, rtol=IDENTICAL_RTOL, atol=0.0):
        return 0.0, 0.5
    log_ratio = np.log(lam_k / lam_r)
    low = _derivative(0.0, lam_k, lam_r, log_ratio)
    high = _derivative(1.0, lam_k, lam_r, log_ratio)
    if low > 0 > high:
        s_star = brentq(_derivative, 0.0, 1.0,
                        args=(lam_k, lam_r, log_ratio), xtol=S_TOLERANCE)
    else:
        res = minimize_scalar(
            lambda s: -chernoff_objective(s, lam_k, lam_r),
            bounds=(0.0, 1.0), method='bounded',
            options={'xatol': S_TOLERANCE})
        s_star = float(res.x)
    return max(chernoff_objective(s_star, lam_k, lam_r), 0.0), float(s_star)


def chernoff_info(lam, threads=1):
    """
    Pairwise Chernoff exponents of the rows of ``lam``.  ``s_star[r, k]`` is
    ``1 - s_star[k, r]``; the diagonal holds ``I = 0`` and ``s* = 0.5``.
    """
    lam = _positive(lam)
    k = lam.shape[0]
    pairs = [(a, b) for a in range(k) for b in range(a + 1, k)]
    i_kr = np.zeros((k, k))
    s_star = np.full((k, k), 0.5)

    def work(pair):
        return chernoff_pair(lam[pair[0]], lam[pair[1]])

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(work, pairs))
    for (a, b), (value, s) in zip(pairs, results):
        i_kr[a, b] = i_kr[b, a] = value
        s_star[a, b] = s
        s_star[b, a] = 1.0 - s
    return InfoMatrix(i_kr=i_kr, s_star=s_star)


def column_info(gamma, threads=1):
    return chernoff_info(gamma, threads)


def separation(lam):
    """
    ``eps_kr = max_l max(lam_kl / lam_rl, lam_rl / lam_kl) - 1``.
    """
    lam = _positive(lam)
    ratio = lam[:, np.newaxis, :] / lam[np.newaxis, :, :]
    eps = np.max(np.maximum(ratio, 1.0 / ratio), axis=2) - 1.0
    np.fill_diagonal(eps, 0.0)
    return SeparationMatrix(eps_kr=np.maximum(eps, 0.0))


def rate_prediction(info, lambda_min, k, separation=None):
    """
    Oracle-rate overlay for class ``k``:
    ``sum_{r != k} exp(-I_kr - log(lambda_min) / 2)``, optionally multiplied
    by ``1 + 1/eps_kr``.  Constants are omitted; this is an order of
    magnitude guide and not a bound.
    """
    if lambda_min <= 0:
        raise ParameterError('lambda_min must be positive')
    i_kr = info.i_kr if isinstance(info, InfoMatrix) else np.asarray(info)
    total = 0.0
    for r in range(i_kr.shape[0]):
        if r == k or np.isinf(i_kr[k, r]):
            continue
        term = np.exp(-i_kr[k, r] - 0.5 * np.log(lambda_min))
        if separation is not None:
            eps = separation.eps_kr[k, r]
            term *= np.inf if eps <= 0 else 1.0 + 1.0 / eps
        total += term
    return float(total)


def overall_rate_prediction(lam, proportions=None, separated=False):
    """
    Class-weighted average of the per-class overlays for the model ``lam``
    (uniform weights by default).
    """
    lam = _positive(lam)
    info = chernoff_info(lam)
    sep = separation(lam) if separated else None
    k = lam.shape[0]
    weights = (np.full(k, 1.0 / k) if proportions is None
               else np.asarray(proportions, dtype=float))
    weights = weights / weights.sum()
    lambda_min = float(lam.min())
    return float(sum(weights[c] * rate_prediction(info, lambda_min, c, sep)
                     for c in range(k)))


def exact_recovery_margin(a, b, k, n, beta=1.0):
    """
    ``(sqrt(a) - sqrt(b))^2 / (beta K log n)`` for the planted partition
    with ``P_kk = a/n`` and ``P_kr = b/n``; values above one fall in the
    exact recovery regime.
    """
    if n <= 1 or k < 1 or beta <= 0:
        raise ParameterError('need n > 1, K >= 1 and beta > 0')
    return float((np.sqrt(a) - np.sqrt(b)) ** 2 / (beta * k * np.log(n)))
