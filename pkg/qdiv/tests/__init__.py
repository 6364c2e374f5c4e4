# -*- coding: utf-8 -*-
"""Test this package."""
