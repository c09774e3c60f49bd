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
import json
import logging
import os

import click
import numpy as np

from plbiclust import Biclusterer, __version__
from plbiclust import bench as bench_mod
from plbiclust import io
from plbiclust.exceptions import ConfigError, PLBiclustError
from plbiclust.metrics import (dmis, mis, mis_per_class, nmi,
                               optimal_permutation)
from plbiclust.response import FitResponse

LOG = logging.getLogger(__name__)


class CLIHandler(object):

    def __init__(self, config_file, seed, threads, out, debug=False):
        try:
            self.config = json.load(config_file) if config_file else {}
        except ValueError as e:
            raise ConfigError('config file is not valid JSON: {}'.format(e))
        self.seed = seed
        self.threads = threads
        self.out = out
        self.debug = debug

    def bench_config(self):
        config = dict(self.config)
        if self.seed is not None:
            config['seed'] = self.seed
        return bench_mod.BenchConfig.from_dict(config)

    def path(self, name):
        return os.path.join(self.out or '.', name)

    def fail(self, error):
        response = FitResponse(self.debug)
        response.fail(error)
        self._handle_response(response)

    def _handle_response(self, response):
        if response.status == 'success':
            click.echo(json.dumps(response.flatten()['data'], indent=4,
                                  sort_keys=True))
        else:
            click.echo(click.style(response.status, fg='red'), err=True)
            click.echo(click.style(str(response.error_type), fg='red'),
                       err=True)
            click.echo(click.style(str(response.error_message), fg='red'),
                       err=True)
            click.get_current_context().exit(response.error_code or 1)

    def run(self, func, *args, **kwargs):
        try:
            return func(*args, **kwargs)
        except PLBiclustError as e:
            LOG.debug(e, exc_info=True)
            self.fail(e)

pass_handler = click.make_pass_decorator(CLIHandler)


@click.group()
@click.option(
    '--config',
    help='JSON config file', type=click.File('r'))
@click.option(
    '--seed',
    default=None, type=int,
    help='Random seed (overrides the config file)')
@click.option(
    '--threads',
    default=1, type=int,
    help='Worker threads')
@click.option(
    '--out',
    default=None, type=click.Path(file_okay=False),
    help='Output directory (default: current directory)')
@click.option(
    '--debug/--no-debug',
    default=False,
    help='Turn on debugging output'
)
@click.version_option(__version__)
@click.pass_context
def cli(ctx, config, seed, threads, out, debug):
    """
    plbiclust fits bipartite stochastic block models: it generates
    simulated networks, fits them with spectral, pseudo-likelihood, oracle
    or partitioned algorithms, scores label estimates and runs the
    simulation benchmark.
    """
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format='%(asctime)s %(name)s %(levelname)s %(message)s')
    try:
        ctx.obj = CLIHandler(config, seed, threads, out, debug)
    except ConfigError as e:
        click.echo(click.style(str(e), fg='red'), err=True)
        ctx.exit(e.exit_code)


def _generate(handler, n0):
    cfg = handler.bench_config()
    n0 = n0 or cfg.n0
    seed = cfg.seed if cfg.seed is not None else 0
    instance = bench_mod.generate_instance(cfg, n0, seed,
                                           threads=handler.threads)
    io.write_edges(handler.path('edges.tsv'), instance.a)
    io.write_labels(handler.path('y.txt'), instance.y)
    io.write_labels(handler.path('z.txt'), instance.z)
    meta = io.sidecar(cfg.to_dict(), seed=seed, n0=n0, K=cfg.k, L=cfg.l,
                      n=instance.a.n, m=instance.a.m, P=instance.p.p,
                      Lambda=instance.lam, Gamma=instance.gamma)
    io.write_json(handler.path('truth.json'), meta)
    return {'edges': instance.a.nnz, 'n': instance.a.n, 'm': instance.a.m,
            'out': handler.out or '.'}


@cli.command()
@click.option('--n0', default=None, type=int,
              help='Nodes per cluster (overrides the config file)')
@pass_handler
def generate(handler, n0):
    """Sample a network and its truth from the configured model"""
    summary = handler.run(_generate, handler, n0)
    click.echo(json.dumps(summary, indent=4, sort_keys=True))


def _fit(handler, edges, algo, k, l, meta, y_true, z_true):
    a = io.read_edges(edges)
    truth = io.read_json(meta) if meta else {}
    k = k or truth.get('K')
    l = l or truth.get('L')
    if not k or not l:
        raise ConfigError('K and L are required (options or --meta)')
    y = io.read_labels(y_true) if y_true else None
    z = io.read_labels(z_true) if z_true else None
    if algo == 'oracle' and (not truth or y is None or z is None):
        raise ConfigError('the oracle needs --meta, --y-true and --z-true')
    config = handler.bench_config()
    biclusterer = Biclusterer(spectral=config.spectral,
                              max_outer=config.max_outer,
                              threads=handler.threads, debug=handler.debug)
    seed = handler.seed if handler.seed is not None else 0
    response = biclusterer.handler(
        algorithm=algo, a=a, k=k, l=l, seed=seed, y_true=y, z_true=z,
        p=truth.get('P'), lambda_true=truth.get('Lambda'),
        gamma_true=truth.get('Gamma'))
    if response.is_successful:
        io.write_labels(handler.path('y_hat.txt'), response.data['y'])
        io.write_labels(handler.path('z_hat.txt'), response.data['z'])
        io.write_json(handler.path('fit.json'), io.sidecar(
            config.to_dict(), algorithm=algo, seed=seed, K=k, L=l,
            metadata=response.metadata))
    return response


@cli.command()
@click.option('--algo', required=True,
              type=click.Choice(bench_mod.ALGORITHMS),
              help='Algorithm to run')
@click.option('-k', '--k', 'k', default=None, type=int,
              help='Number of row clusters')
@click.option('-l', '--l', 'l', default=None, type=int,
              help='Number of column clusters')
@click.option('--meta', default=None, type=click.Path(exists=True),
              help='Truth sidecar written by generate')
@click.option('--y-true', default=None, type=click.Path(exists=True),
              help='True row labels')
@click.option('--z-true', default=None, type=click.Path(exists=True),
              help='True column labels')
@click.argument('edges', type=click.Path(exists=True))
@pass_handler
def fit(handler, edges, algo, k, l, meta, y_true, z_true):
    """Fit an edge list and write the estimated labels"""
    response = handler.run(_fit, handler, edges, algo, k, l, meta, y_true,
                           z_true)
    summary = FitResponse(handler.debug, response.__dict__)
    if summary.is_successful:
        summary.data = {'algorithm': algo, 'out': handler.out or '.',
                        'seconds': response.metadata['seconds']}
    handler._handle_response(summary)


def evaluate(y_hat, y):
    sigma = optimal_permutation(y_hat, y)
    return {'mis': mis(y_hat, y),
            'mis_k': [None if np.isnan(v) else v
                      for v in mis_per_class(y_hat, y)],
            'dmis': dmis(y_hat, y),
            'nmi': nmi(y_hat, y),
            'nmi_normalization': 'sqrt',
            'permutation': sigma.tolist()}


@cli.command(name='eval')
@click.argument('y_hat', type=click.Path(exists=True))
@click.argument('y', type=click.Path(exists=True))
@pass_handler
def eval_(handler, y_hat, y):
    """Score estimated labels against reference labels"""
    def score():
        result = evaluate(io.read_labels(y_hat), io.read_labels(y))
        if handler.out:
            io.write_json(handler.path('eval.json'), io.sidecar(
                handler.bench_config().to_dict(), **result))
        return result
    result = handler.run(score)
    click.echo(json.dumps(result, indent=4, sort_keys=True))


def _bench(handler):
    cfg = handler.bench_config()
    if cfg.seed is None:
        raise ConfigError('bench requires --seed')
    rows = bench_mod.run_bench(cfg, cfg.seed, handler.threads)
    summary = bench_mod.summarize(rows)
    bench_mod.write_csv(handler.path('bench.csv'), rows)
    bench_mod.write_csv(handler.path('summary.csv'), summary,
                        bench_mod.SUMMARY_FIELDS)
    io.write_json(handler.path('bench.json'), io.sidecar(
        cfg.to_dict(), rows=len(rows),
        failures=sum(1 for row in rows if row['status'] != 'ok'),
        rate_overlay='order of magnitude overlay, not a bound',
        nmi_normalization='sqrt'))
    return {'rows': len(rows), 'out': handler.out or '.'}


@cli.command()
@pass_handler
def bench(handler):
    """Run the simulation benchmark and write CSV results"""
    result = handler.run(_bench, handler)
    click.echo(json.dumps(result, indent=4, sort_keys=True))
