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

import copy
import inspect
import logging
import os
import time

import numpy as np

from plbiclust.exceptions import PLBiclustError, ParameterError
from plbiclust.model import (as_adjacency, as_connectivity, check_labels,
                             column_mean_params, true_mean_params)
from plbiclust.plops import PLOptions, pl_meta
from plbiclust.provable import (oracle_classify, oracle_classify_cols,
                                provable_fit)
from plbiclust.response import FitResponse
from plbiclust.spectral import (SpectralConfig, spectral_cluster_cols,
                                spectral_cluster_rows)

__version__ = open(os.path.join(os.path.dirname(__file__),
                                '_version')).read().strip()

LOG = logging.getLogger(__name__)


class Biclusterer(object):

    SupportedAlgorithms = ["spectral", "soft", "hard", "oracle",
                           "provable", "describe", "ping"]

    def __init__(self, **kwargs):
        """
        Create a new biclustering handler.  The handler accepts the
        following parameters:

        * spectral - a dictionary of ``SpectralConfig`` fields used by the
          spectral algorithm and by every spectral initialization
        * max_outer - iteration cap of the pseudo-likelihood algorithms
          (default 50)
        * tol - soft label tolerance of the pseudo-likelihood algorithms
          (default 1e-6)
        * threads - worker threads for the partitioned pipeline
        * supported_algorithms - a list of the algorithms this handler will
          run (choices are spectral, soft, hard, oracle, provable, describe,
          ping)
        * debug - if not False the full result object is left in the
          raw_response of every response
        """
        self.spectral_options = kwargs.get('spectral', dict())
        self.spectral_config = SpectralConfig.from_dict(
            self.spectral_options)
        self.max_outer = kwargs.get('max_outer', 50)
        self.tol = kwargs.get('tol', 1e-6)
        self.threads = kwargs.get('threads', 1)
        self.supported_algorithms = list(
            kwargs.get('supported_algorithms', self.SupportedAlgorithms))
        for name in ('describe', 'ping'):
            if name not in self.supported_algorithms:
                self.supported_algorithms.append(name)
        self._debug = kwargs.get('debug', False)

    def _check_supported_algorithm(self, name, response):
        if name not in self.supported_algorithms:
            response.status = 'error'
            response.error_type = 'UnsupportedAlgorithm'
            response.error_code = ParameterError.exit_code
            response.error_message = 'Unsupported algorithm: {}'.format(name)
            return False
        return True

    def _call_algorithm(self, method, kwargs, response):
        started = time.time()
        try:
            response.raw_response = method(**kwargs)
        except PLBiclustError as e:
            LOG.debug(e)
            response.fail(e)
        except Exception as e:
            LOG.exception('%s failed', getattr(method, '__name__', method))
            response.fail(e)
            response.error_code = PLBiclustError.exit_code
        response.metadata = {'seconds': time.time() - started}

    def _new_response(self):
        return FitResponse(self._debug)

    def _spectral_config(self, seed):
        return self.spectral_config.with_seed(seed)

    def _run(self, name, method, kwargs):
        response = self._new_response()
        if self._check_supported_algorithm(name, response):
            self._call_algorithm(method, kwargs, response)
            if response.status == 'success':
                result = response.raw_response
                response.data = {'algorithm': name,
                                 'y': result['y'], 'z': result['z']}
                response.metadata.update(result.get('metadata', {}))
        response.prepare()
        return response

    def ping(self, **kwargs):
        """
        A no-op method that simply returns a successful response.
        """
        response = self._new_response()
        return response

    def describe(self, **kwargs):
        """
        Returns descriptive information about this handler and the
        algorithms supported by it.
        """
        response = self._new_response()
        description = {
            'plbiclust_version': __version__,
            'supported_algorithms': copy.copy(self.supported_algorithms),
            'spectral': copy.deepcopy(self.spectral_config.__dict__),
            'max_outer': self.max_outer,
            'tol': self.tol,
            'operations': {}
        }
        for name, method in inspect.getmembers(self, inspect.ismethod):
            if not name.startswith('_'):
                params = inspect.signature(method).parameters
                description['operations'][name] = {
                    'docs': inspect.getdoc(method),
                    'args': [p for p in params
                             if params[p].kind not in
                             (inspect.Parameter.VAR_KEYWORD,
                              inspect.Parameter.VAR_POSITIONAL)],
                }
        response.data = description
        return response

    def _spectral(self, a, k, l, seed):
        a = as_adjacency(a)
        cfg = self._spectral_config(seed)
        started = time.time()
        y = spectral_cluster_rows(a, k, l, cfg)
        z = spectral_cluster_cols(a, k, l, cfg)
        return {'y': y, 'z': z,
                'metadata': {'stages': {'spectral': time.time() - started}}}

    def spectral(self, a, k, l, seed=0, **kwargs):
        """
        Spectral clustering of rows and columns on the degree-regularized
        matrix.
        """
        return self._run('spectral', self._spectral,
                         {'a': a, 'k': k, 'l': l,
                          'seed': seed})

    def _pseudo_likelihood(self, a, k, l, options, y0, z0):
        a = as_adjacency(a)
        stages = {}
        if y0 is None or z0 is None:
            init = self._spectral(a, k, l, options.seed)
            stages.update(init['metadata']['stages'])
            y0 = init['y'] if y0 is None else y0
            z0 = init['z'] if z0 is None else z0
        started = time.time()
        result = pl_meta(a, y0, z0, k, l, options)
        stages['pseudo_likelihood'] = time.time() - started
        return {'y': result.y_hard, 'z': result.z_hard, 'result': result,
                'metadata': {'stages': stages,
                             'converged': result.converged,
                             'iterations': result.iterations,
                             'trace': result.trace}}

    def soft(self, a, k, l, seed=0, y0=None, z0=None, **kwargs):
        """
        Pseudo-likelihood biclustering with a flat prior, one inner step and
        soft labels throughout, started from spectral labels unless ``y0``
        and ``z0`` are given.  Returns the MAP labels.
        """
        options = PLOptions.soft(max_outer=self.max_outer, tol=self.tol,
                                 seed=seed)
        return self._run('soft', self._pseudo_likelihood,
                         {'a': a, 'k': k, 'l': l,
                          'options': options, 'y0': y0, 'z0': z0})

    def hard(self, a, k, l, seed=0, y0=None, z0=None, **kwargs):
        """
        Pseudo-likelihood biclustering with a flat prior, one inner step and
        hard labels after every label computation.
        """
        options = PLOptions.hard(max_outer=self.max_outer, tol=self.tol,
                                 seed=seed)
        return self._run('hard', self._pseudo_likelihood,
                         {'a': a, 'k': k, 'l': l,
                          'options': options, 'y0': y0, 'z0': z0})

    def _oracle(self, a, k, l, y_true, z_true, p, lam, gamma, seed):
        a = as_adjacency(a)
        y_true = check_labels(y_true, k, a.n)
        z_true = check_labels(z_true, l, a.m)
        if lam is None:
            lam = true_mean_params(as_connectivity(p), z_true)
        if gamma is None:
            gamma = column_mean_params(as_connectivity(p), y_true)
        started = time.time()
        y = oracle_classify(a, z_true, np.asarray(lam, dtype=float), seed)
        z = oracle_classify_cols(a, y_true, np.asarray(gamma, dtype=float),
                                 seed)
        return {'y': y, 'z': z,
                'metadata': {'stages': {'oracle': time.time() - started}}}

    def oracle(self, a, k, l, y_true=None, z_true=None, p=None,
               lambda_true=None, gamma_true=None, seed=0, **kwargs):
        """
        The likelihood ratio classifier given the truth: rows use the true
        column labels and Lambda, columns the true row labels and Gamma.
        The mean parameters are derived from the connectivity ``p`` unless
        passed directly.
        """
        response = self._new_response()
        if y_true is None or z_true is None:
            response.status = 'error'
            response.error_type = 'TruthRequired'
            response.error_code = ParameterError.exit_code
            response.error_message = ('The oracle requires the true row and '
                                      'column labels')
            return response
        if (lambda_true is None or gamma_true is None) and p is None:
            response.status = 'error'
            response.error_type = 'TruthRequired'
            response.error_code = ParameterError.exit_code
            response.error_message = ('The oracle requires the connectivity '
                                      'or the true mean parameters')
            return response
        return self._run('oracle', self._oracle,
                         {'a': a, 'k': k, 'l': l, 'y_true': y_true,
                          'z_true': z_true, 'p': p, 'lam': lambda_true,
                          'gamma': gamma_true, 'seed': seed})

    def _provable(self, a, k, l, seed, y_true, z_true):
        a = as_adjacency(a)
        result = provable_fit(a, k, l, self.spectral_config, seed=seed,
                              threads=self.threads, y_true=y_true,
                              z_true=z_true)
        return {'y': result.y, 'z': result.z, 'result': result,
                'metadata': {'report': result.report}}

    def provable(self, a, k, l, seed=0, y_true=None, z_true=None,
                 **kwargs):
        """
        The partitioned pipeline.  Truth labels, when given, only add
        per-stage misclassification rates to the report.
        """
        return self._run('provable', self._provable,
                         {'a': a, 'k': k, 'l': l,
                          'seed': seed, 'y_true': y_true,
                          'z_true': z_true})

    def handler(self, algorithm=None, **kwargs):
        """
        A generic entry point that dispatches on ``algorithm``:

        ```
        params = {
            'algorithm': 'soft',
            'a': adjacency, 'k': 4, 'l': 6, 'seed': 7
        }
        response = biclusterer.handler(**params)
        ```
        """
        response = self._new_response()
        if algorithm is None:
            response.status = 'error'
            response.error_type = 'MissingAlgorithm'
            response.error_code = ParameterError.exit_code
            response.error_message = 'You must pass an algorithm'
            return response
        algorithm = algorithm.lower()
        if self._check_supported_algorithm(algorithm, response):
            method = getattr(self, algorithm, None)
            if callable(method):
                try:
                    response = method(**kwargs)
                except PLBiclustError as e:
                    response.fail(e)
                except TypeError as e:
                    # missing or unexpected arguments for the algorithm
                    response.fail(e)
                    response.error_code = ParameterError.exit_code
            else:
                response.status = 'error'
                response.error_type = 'NotImplemented'
                response.error_code = ParameterError.exit_code
                msg = 'Algorithm: {} is not implemented'.format(algorithm)
                response.error_message = msg
        return response
