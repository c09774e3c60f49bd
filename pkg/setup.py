#!/usr/bin/env python

import os
from setuptools import setup, find_packages

requires = [
    'numpy>=1.22',
    'scipy>=1.8',
    'scikit-learn>=1.1',
    'click',
]


setup(
    name='plbiclust',
    version=open(os.path.join('plbiclust', '_version')).read().strip(),
    description='Pseudo-likelihood biclustering of bipartite stochastic '
                'block models',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    author='Mitch Garnaat',
    author_email='mitch@cloudnative.io',
    url='https://github.com/cloudnative/plbiclust',
    packages=find_packages(exclude=['tests*']),
    package_data={'plbiclust': ['_version']},
    entry_points="""
        [console_scripts]
        plbiclust=plbiclust.scripts.cli:cli
    """,
    install_requires=requires,
    python_requires='>=3.8',
    license="Apache License 2.0",
    classifiers=(
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'License :: OSI Approved :: Apache Software License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Topic :: Scientific/Engineering :: Mathematics'
    ),
)
