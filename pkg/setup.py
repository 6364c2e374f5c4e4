#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Setup the package."""

import sys

from setuptools import find_packages, setup

if sys.version_info < (3, 8):
    sys.exit('Sorry, Python < 3.8 is not supported')

setup(
    name='qdiv',
    version='0.1.0',
    author='Paul Kremer',
    author_email='@'.join(('paul', 'spurious.biz')),  # avoid spam,
    description='Divisibility and information flow analysis of qubit dynamical maps',
    packages=find_packages(),
    # https://packaging.python.org/tutorials/distributing-packages/#python-requires
    python_requires='>=3.8',
    setup_requires=['pytest-runner', 'setuptools>=12'],
    license='MIT',
    install_requires=[
        'click >= 7.0',
        'colorama',  # verdict colours
        'numpy >= 1.20',
        'phx-class-registry >= 3.0.5',  # rate, ramp and analysis registries
        'python-slugify>=3.0.3',  # plot data file names
        'scipy >= 1.6',  # expm, quad, null_space, minimize_scalar, linprog(highs)
    ],
    tests_require=['pytest>=3.0.7'],
    entry_points={
        'console_scripts': [
            'qdiv = qdiv.cli:main',
        ]
    },
    data_files=[],
    classifiers=[
        'DO NOT UPLOAD',  # block pypi publication
        'Topic :: Scientific/Engineering :: Physics',
        'Programming Language :: Python :: 3.8',
    ]
)
