# -*- coding: utf-8 -*-
"""Divisibility and information flow analysis of qubit dynamical maps."""

__version__ = '0.1.0'
