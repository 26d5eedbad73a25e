"""Large-N behaviour of the winning bid for standard-normal bidders.

With ``N`` bidders the log of the winning price is ``-q'`` where ``q'`` is the
minimum of the bidders' log variables. The rescaled quantity
``a_N * (-q') + b_N`` converges in law to the Gumbel distribution, which yields
the large-N expansion of the seller's maximal profit intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "EULER_GAMMA",
    "NormingConstants",
    "norming_constants",
    "rescale_winner",
    "gumbel_cdf",
    "gumbel_pdf",
    "exact_rescaled_cdf",
    "gumbel_sup_distance",
    "asymptotic_max_rho",
    "log_fit",
]

EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class NormingConstants:
    a_N: float
    b_N: float
    N: int


def norming_constants(n: int) -> NormingConstants:
    if n < 2:
        raise DomainError(f"norming constants need N >= 2, got {n}")
    ln_n = math.log(n)
    a = math.sqrt(2.0 * ln_n)
    b = 0.5 * (math.log(4.0 * math.pi) + math.log(ln_n)) - 2.0 * ln_n
    return NormingConstants(a, b, n)


def rescale_winner(q_min, n: int):
    """Map the minimum log variable ``q'`` to ``a_N * (-q') + b_N``."""
    c = norming_constants(n)
    return c.a_N * (-np.asarray(q_min, dtype=float)) + c.b_N


def gumbel_cdf(x):
    out = np.exp(-np.exp(-np.asarray(x, dtype=float)))
    return float(out) if out.ndim == 0 else out


def gumbel_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-np.exp(-x) - x)
    return float(out) if out.ndim == 0 else out


def exact_rescaled_cdf(x, n: int):
    """Exact CDF of ``a_N * (-q') + b_N`` for ``n`` standard-normal bidders.

    Uses ``P(q' >= t) = S(t)^N`` with ``t = -(x - b_N) / a_N``.
    """
    c = norming_constants(n)
    t = -(np.asarray(x, dtype=float) - c.b_N) / c.a_N
    out = np.exp(n * special.log_ndtr(-t))
    return float(out) if out.ndim == 0 else out


def gumbel_sup_distance(n: int, lo: float = -5.0, hi: float = 10.0, points: int = 2001) -> float:
    """``sup_x |F_N(x) - exp(-exp(-x))|`` on an even grid."""
    x = np.linspace(lo, hi, points)
    return float(np.max(np.abs(exact_rescaled_cdf(x, n) - gumbel_cdf(x))))


def asymptotic_max_rho(n: int) -> float:
    """Large-N expansion of the seller's maximal profit intensity, in units of sigma."""
    if n < 3:
        raise DomainError(f"the expansion needs N >= 3, got {n}")
    ln_n = math.log(n)
    return math.sqrt(ln_n / 2.0) + (2.0 * EULER_GAMMA - math.log(4.0 * math.pi) - math.log(ln_n)) / (
        4.0 * math.sqrt(2.0 * ln_n)
    )


def log_fit(n: int) -> float:
    """Empirical fit ``0.21 ln N + 0.3`` of the maximal profit intensity for ``N <= 100``."""
    if n < 1:
        raise DomainError(f"N must be >= 1, got {n}")
    return 0.21 * math.log(n) + 0.3
