# -*- coding: utf-8 -*-
"""
    wholegrid.utils
    ~~~~~~~~~~~~~~~

    Utilities/Misc methods

    :copyright: (c) 2026 by the wholegrid developers.
    :license: GPLv3, see LICENSE for more details.
"""
import re

import numpy as np

from wholegrid.errors import SchemaError

LOCATOR_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")


def parse_locator(locator):
    """
    Splits a parameter locator such as ``machines[2].pll_bandwidth_hz`` or
    ``network.branches[0].R`` into its keys and indices.

    Args:
        locator (str): dotted path with bracketed list indices

    Returns:
        list: str keys and int indices, in order
    """
    if not isinstance(locator, str) or not re.fullmatch(r"[A-Za-z_]\w*(\[\d+\]|\.[A-Za-z_]\w*)*", locator):
        raise SchemaError(f"malformed parameter locator {locator!r}", path=locator)
    return [key if key else int(index) for key, index in LOCATOR_TOKEN.findall(locator)]


def locator_pointer(locator):
    """
    JSON pointer equivalent of a locator.
    """
    return "/" + "/".join(str(part) for part in parse_locator(locator))


def _walk(data, parts, locator):
    node = data
    for part in parts:
        try:
            node = node[part]
        except (KeyError, IndexError, TypeError):
            raise SchemaError(f"parameter locator {locator!r} does not resolve", path=locator)
    return node


def get_value(data, locator):
    """
    Reads the field at ``locator`` from nested configuration data.
    """
    return _walk(data, parse_locator(locator), locator)


def set_value(data, locator, value):
    """
    Replaces the numeric field at ``locator`` in place. The field must
    exist on list entries; on objects it may be new, so that a converter
    configured by gains can be switched to bandwidths.
    """
    parts = parse_locator(locator)
    parent = _walk(data, parts[:-1], locator)
    last = parts[-1]
    if isinstance(parent, list):
        if not isinstance(last, int) or last >= len(parent):
            raise SchemaError(f"parameter locator {locator!r} does not resolve", path=locator)
    elif not isinstance(parent, dict) or not isinstance(last, str):
        raise SchemaError(f"parameter locator {locator!r} does not resolve", path=locator)
    current = parent[last] if isinstance(parent, list) else parent.get(last, 0.0)
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise SchemaError(f"parameter locator {locator!r} is not a numeric field", path=locator)
    parent[last] = float(value)


def format_complex_columns(prefix, values):
    """
    Splits complex values into ``<prefix>_re`` and ``<prefix>_im`` columns.
    """
    values = np.asarray(values)
    return {f"{prefix}_re": values.real, f"{prefix}_im": values.imag}
