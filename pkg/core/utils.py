import numpy as np
from django.utils.text import slugify


def float_repr(value):
    """Shortest string that round-trips the float exactly ("" for None)."""
    if value is None:
        return ""
    return repr(float(value))


def make_rng(seed):
    return np.random.default_rng(seed)


def run_slug(*parts):
    """
    Build a stable identifier such as ``tfi-sb-n10-d3-s7`` from run attributes.
    """
    return slugify("-".join(str(part) for part in parts if part not in (None, "")))
