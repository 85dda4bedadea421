"""Central tolerance handling.

All verdict-bearing tolerances in the package go through :func:`tol` so
that the environment variable MUTRANS_TOL_SCALE (a positive float,
default 1.0) rescales every acceptance threshold at once. Diagnostic
values are always reported unscaled.
"""

import os

_ENV_VAR = "MUTRANS_TOL_SCALE"


def tol_scale():
    """Return the global tolerance multiplier from the environment."""
    raw = os.environ.get(_ENV_VAR, "")
    if not raw:
        return 1.0
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(
            f"{_ENV_VAR} must be a positive float, got {raw!r}") from None
    if not value > 0.0:
        raise ValueError(f"{_ENV_VAR} must be positive, got {value}")
    return value


def tol(base):
    """Scale a base tolerance by the global multiplier."""
    return base * tol_scale()
