"""Piecewise adaptive quadrature on a finite interval."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np
from scipy.integrate import quad

from .errors import NumericalFailureError


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    breaks: Iterable[float] = (),
    epsabs: float = 1e-10,
    epsrel: float = 1e-10,
    limit: int = 200,
) -> float:
    """Integrate ``f`` over ``[lo, hi]``, splitting at every break inside the interval.

    Raises NumericalFailureError if the summed error estimate exceeds ``epsabs``
    (or ``epsrel`` times the result, whichever is larger).
    """
    if not hi > lo:
        return 0.0
    inner = sorted({float(b) for b in breaks if lo < b < hi})
    edges = [lo, *inner, hi]
    n_pieces = len(edges) - 1
    total = 0.0
    error = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        out = quad(f, a, b, epsabs=epsabs / n_pieces, epsrel=epsrel, limit=limit, full_output=1)
        total += out[0]
        error += out[1]
    if not np.isfinite(total) or error > max(epsabs, epsrel * abs(total)):
        raise NumericalFailureError(
            f"quadrature on [{lo:g}, {hi:g}] reached error {error:.3g}, "
            f"requested {max(epsabs, epsrel * abs(total)):.3g}",
            achieved=error,
        )
    return total
