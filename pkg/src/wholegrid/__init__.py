# -*- coding: utf-8 -*-
"""
    wholegrid
    ~~~~~~~~~

    Impedance-based whole-system small-signal modeling of power grids

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""

__version__ = '0.1.0'
