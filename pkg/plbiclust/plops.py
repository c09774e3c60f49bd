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
Pseudo-likelihood operators and the meta algorithm.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from plbiclust.exceptions import DimensionError, ParameterError
from plbiclust.model import (as_adjacency, check_labels, class_counts,
                             is_soft, label_weights, one_hot)

LOG = logging.getLogger(__name__)

LAMBDA_FLOOR = 1e-8
TIE_TOLERANCE = 1e-12
EMPTY_CLASS_JITTER = 1e-3

PRIORS = ('flat', 'empirical')
INNER_LOOPS = ('once', 'converge')
HARDENINGS = ('keep-soft', 'harden-each-step', 'harden-at-end')


def clamp_means(lam):
    return np.maximum(np.asarray(lam, dtype=float), LAMBDA_FLOOR)


def _num_classes(labels, num_classes):
    if num_classes is not None:
        return num_classes
    if is_soft(labels):
        return np.shape(labels)[1]
    labels = check_labels(labels)
    return int(labels.max()) + 1 if labels.size else 1


def block_compress(a, z, num_classes=None):
    """
    Return the n x L matrix ``b_il = sum_j A_ij 1{z_j = l}``; soft column
    labels replace the indicator with ``z_jl``.
    """
    a = as_adjacency(a)
    num_classes = _num_classes(z, num_classes)
    weights = label_weights(z, num_classes)
    if weights.shape[0] != a.m:
        raise DimensionError(
            'column labels have length {}, A has {} columns'.format(
                weights.shape[0], a.m))
    return np.asarray(a.csr @ weights)


def empty_classes(y, num_classes):
    return np.flatnonzero(class_counts(y, num_classes) <= 0)


def estimate_means(b, y, num_classes=None, seed=0):
    """
    Return ``lambda_kl = (1/n_k(y)) sum_i b_il 1{y_i = k}`` (soft weights for
    soft ``y``).

    An empty class gets the global column mean of ``b`` plus a small jitter,
    so K stays fixed; the event is logged.
    """
    b = np.asarray(b, dtype=float)
    num_classes = _num_classes(y, num_classes)
    weights = label_weights(y, num_classes)
    if weights.shape[0] != b.shape[0]:
        raise DimensionError(
            'row labels have length {}, b has {} rows'.format(
                weights.shape[0], b.shape[0]))
    counts = weights.sum(axis=0)
    sums = weights.T @ b
    lam = np.zeros_like(sums)
    full = counts > 0
    lam[full] = sums[full] / counts[full, np.newaxis]
    if not np.all(full):
        rng = np.random.default_rng(seed)
        base = b.mean(axis=0) if b.shape[0] else np.zeros(b.shape[1])
        for k in np.flatnonzero(~full):
            jitter = rng.uniform(0.0, EMPTY_CLASS_JITTER, size=b.shape[1])
            lam[k] = base * (1.0 + jitter) + LAMBDA_FLOOR
            LOG.warning('class %d is empty; re-seeded its mean parameters', k)
    return lam


def mean_params(a, y, z, num_row_classes, num_col_classes):
    """
    Evaluate ``[L(A, y, z)]_kl = sum_{i,j} A_ij 1{y_i=k, z_j=l} / n_k(y)``
    directly from the nonzeros of A (hard labels).
    """
    a = as_adjacency(a)
    y = check_labels(y, num_row_classes, a.n)
    z = check_labels(z, num_col_classes, a.m)
    rows, cols, data = a.edges()
    totals = np.zeros((num_row_classes, num_col_classes))
    np.add.at(totals, (y[rows], z[cols]), data)
    counts = np.bincount(y, minlength=num_row_classes).astype(float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(counts[:, np.newaxis] > 0,
                        totals / counts[:, np.newaxis], 0.0)


@dataclass(frozen=True)
class ClassPrior:
    """
    Row class prior.  The flat prior is stored unnormalized (all ones) and
    flagged; it only enters the posterior up to a constant.
    """
    pi: np.ndarray
    flat: bool = False

    @classmethod
    def uniform(cls, num_classes):
        return cls(pi=np.ones(num_classes), flat=True)

    @classmethod
    def empirical(cls, y, num_classes):
        """
        Class proportions of ``y``; the flat prior while any class is empty.
        """
        counts = class_counts(y, num_classes)
        if np.any(counts <= 0):
            LOG.warning('empirical prior has %d empty classes; using the '
                        'flat prior', int(np.sum(counts <= 0)))
            return cls.uniform(num_classes)
        return cls(pi=counts / counts.sum(), flat=False)

    @property
    def log_pi(self):
        with np.errstate(divide='ignore'):
            return np.log(np.asarray(self.pi, dtype=float))


def log_likelihoods(b, lam):
    """
    The n x K table ``log Phi(b_i, lambda_k) = sum_l b_il log lambda_kl -
    lambda_kl``.
    """
    b = np.asarray(b, dtype=float)
    lam = clamp_means(lam)
    if b.shape[1] != lam.shape[1]:
        raise DimensionError(
            'b has {} columns, mean parameters have {}'.format(
                b.shape[1], lam.shape[1]))
    return b @ np.log(lam).T - lam.sum(axis=1)[np.newaxis, :]


def _log_scores(b, lam, prior):
    scores = log_likelihoods(b, lam)
    if prior is not None and not prior.flat:
        if np.size(prior.pi) != scores.shape[1]:
            raise DimensionError('prior length does not match K')
        scores = scores + prior.log_pi[np.newaxis, :]
    return scores


def class_posterior(b, lambda_hat, prior=None):
    """
    Row class posterior ``pi_ik ~ prior_k prod_l phi(b_il, lambda_kl)``,
    computed in log space.
    """
    scores = _log_scores(b, lambda_hat, prior)
    return np.exp(scores - logsumexp(scores, axis=1, keepdims=True))


def harden(scores, seed=0):
    """
    Row-wise argmax of ``scores``.  Ties are broken uniformly at random by a
    stream derived from ``(seed, row index)``, so the result does not depend
    on evaluation order.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    best = scores.max(axis=1, keepdims=True)
    tol = TIE_TOLERANCE * np.maximum(1.0, np.abs(best))
    ties = scores >= best - tol
    labels = np.argmax(ties, axis=1)
    for i in np.flatnonzero(ties.sum(axis=1) > 1):
        choices = np.flatnonzero(ties[i])
        rng = np.random.default_rng([int(seed), int(i)])
        labels[i] = choices[rng.integers(choices.size)]
    return labels.astype(np.int64)


def poisson_llr(x, lam, lam_prime):
    """
    ``sum_l x_l log(lambda_l / lambda'_l) + lambda'_l - lambda_l``.
    """
    x = np.asarray(x, dtype=float)
    lam = clamp_means(lam)
    lam_prime = clamp_means(lam_prime)
    if not (x.shape == lam.shape == lam_prime.shape):
        raise DimensionError('count and mean vectors differ in length')
    return float(np.sum(x * np.log(lam / lam_prime) + lam_prime - lam))


def lr_classify(a, lambda_tilde, z, seed=0):
    """
    Likelihood ratio classifier: each row goes to the class maximizing the
    product-Poisson likelihood of its compressed counts ``b_i(z)``.
    """
    lam = clamp_means(lambda_tilde)
    b = block_compress(a, z, lam.shape[1])
    return harden(log_likelihoods(b, lam), seed)


def pl_simplified(a, z0, lambda_tilde, seed=0):
    """
    Simplified pseudo-likelihood clustering: compress by ``z0``, take the
    flat-prior posterior under ``lambda_tilde`` and return its MAP labels.
    The result equals ``lr_classify(a, lambda_tilde, z0, seed)``.
    """
    lam = clamp_means(lambda_tilde)
    b = block_compress(a, z0, lam.shape[1])
    prior = ClassPrior.uniform(lam.shape[0])
    return harden(_log_scores(b, lam, prior), seed)


@dataclass(frozen=True)
class PLOptions:
    prior: str = 'flat'
    inner: str = 'once'
    hardening: str = 'keep-soft'
    max_outer: int = 50
    max_inner: int = 50
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.prior not in PRIORS:
            raise ParameterError('prior must be one of {}'.format(PRIORS))
        if self.inner not in INNER_LOOPS:
            raise ParameterError(
                'inner loop must be one of {}'.format(INNER_LOOPS))
        if self.hardening not in HARDENINGS:
            raise ParameterError(
                'hardening must be one of {}'.format(HARDENINGS))
        if self.max_outer < 1 or self.max_inner < 1:
            raise ParameterError('iteration caps must be positive')

    @classmethod
    def soft(cls, **kwargs):
        return cls(prior='flat', inner='once', hardening='keep-soft',
                   **kwargs)

    @classmethod
    def hard(cls, **kwargs):
        return cls(prior='flat', inner='once', hardening='harden-each-step',
                   **kwargs)


@dataclass
class PLResult:
    y: np.ndarray
    z: np.ndarray
    y_hard: np.ndarray
    z_hard: np.ndarray
    lambda_hat: np.ndarray
    gamma_hat: np.ndarray
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)


def _log_pseudo_likelihood(b, lam, prior):
    scores = _log_scores(b, lam, prior)
    if prior.flat:
        scores = scores - np.log(scores.shape[1])
    return float(np.sum(logsumexp(scores, axis=1)))


def _update_side(a, y, z, num_classes, options, seed):
    """
    One row update of the meta algorithm: compress by ``z``,
    then estimate means, pick the prior and refresh ``y`` once or until the
    soft labels settle.
    """
    b = a.csr @ z
    steps = options.max_inner if options.inner == 'converge' else 1
    lam = None
    prior = None
    for step in range(steps):
        lam = estimate_means(b, y, num_classes, seed=seed + step)
        if options.prior == 'flat':
            prior = ClassPrior.uniform(num_classes)
        else:
            prior = ClassPrior.empirical(y, num_classes)
        scores = _log_scores(b, lam, prior)
        if options.hardening == 'harden-each-step':
            y_new = one_hot(harden(scores, seed + step), num_classes)
        else:
            y_new = np.exp(scores - logsumexp(scores, axis=1, keepdims=True))
        moved = np.max(np.abs(y_new - y)) if y.size else 0.0
        y = y_new
        if moved < options.tol:
            break
    return y, lam, _log_pseudo_likelihood(b, lam, prior)


def pl_meta(a, y0, z0, num_row_classes, num_col_classes, options=None):
    """
    Pseudo-likelihood biclustering (meta algorithm).

    Alternates row updates and column updates (the same update run on the
    transpose with the label roles swapped) until the hardened labels stop
    changing, the soft labels move less than ``options.tol``, or
    ``options.max_outer`` iterations have run.  ``options`` selects the
    prior (flat/empirical), the inner loop (once/converge) and the
    hardening policy.

    When the cap is hit, the iterate with the highest log pseudo-likelihood
    is returned with ``converged=False``.
    """
    options = options or PLOptions()
    a = as_adjacency(a)
    k, l = num_row_classes, num_col_classes
    y = label_weights(y0, k, a.n)
    z = label_weights(z0, l, a.m)
    at = a.T
    y_hard = harden(np.log(np.maximum(y, 1e-300)), options.seed)
    z_hard = harden(np.log(np.maximum(z, 1e-300)), options.seed)
    best = None
    converged = False
    trace = []
    iteration = 0
    for iteration in range(1, options.max_outer + 1):
        seed = options.seed + 2 * iteration * options.max_inner
        y_new, lam, ll_row = _update_side(a, y, z, k, options, seed)
        z_new, gam, ll_col = _update_side(at, z, y_new, l, options,
                                          seed + options.max_inner)
        if options.hardening == 'harden-at-end':
            y_new = one_hot(harden(np.log(np.maximum(y_new, 1e-300)), seed),
                            k)
            z_new = one_hot(harden(np.log(np.maximum(z_new, 1e-300)), seed),
                            l)
        y_hard_new = harden(np.log(np.maximum(y_new, 1e-300)), seed)
        z_hard_new = harden(np.log(np.maximum(z_new, 1e-300)), seed)
        row_changes = int(np.sum(y_hard_new != y_hard))
        col_changes = int(np.sum(z_hard_new != z_hard))
        moved = max(np.max(np.abs(y_new - y)) if y.size else 0.0,
                    np.max(np.abs(z_new - z)) if z.size else 0.0)
        trace.append({'iteration': iteration,
                      'row_changes': row_changes,
                      'col_changes': col_changes,
                      'max_move': float(moved),
                      'log_pl': ll_row + ll_col})
        y, z, y_hard, z_hard = y_new, z_new, y_hard_new, z_hard_new
        current = PLResult(y=y, z=z, y_hard=y_hard, z_hard=z_hard,
                           lambda_hat=lam, gamma_hat=gam, converged=False,
                           iterations=iteration, trace=trace)
        if best is None or ll_row + ll_col > best[0]:
            best = (ll_row + ll_col, current)
        if (row_changes == 0 and col_changes == 0) or moved < options.tol:
            converged = True
            break
    if converged:
        current.converged = True
        return current
    LOG.warning('pseudo-likelihood iterations did not converge in %d '
                'outer steps', options.max_outer)
    result = best[1]
    result.iterations = iteration
    return result
