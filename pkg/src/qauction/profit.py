"""Profit intensities of sellers and bidders in the English q-auction.

The seller fixes a withdrawal log-price ``p'`` and faces ``N`` bidders sharing
the strategy ``eta``. Her profit intensity is

    rho_N(p') = -int_{-inf}^{-p'} q f(q) S(q)^(N-1) dq
                / (1/N + int_{-inf}^{-p'} f(q) S(q)^(N-1) dq)

with ``f`` the density and ``S`` the survival function of ``eta``. ``p' = -inf``
(no withdrawal price at all) is accepted as ``-math.inf`` and evaluates the
unconditional integrals.

At the maximiser the withdrawal log-price equals the profit intensity it
produces, ``p* = rho_N(p*)``; :func:`max_rho` exploits this by iterating
``p <- rho_N(p)`` and checks it against golden-section search.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._quad import integrate
from .errors import DomainError
from .strategies import Gaussian, Strategy, first_order_statistic_density, order_stat_mean

__all__ = [
    "ProfitResult",
    "MaxProfit",
    "rho_seller",
    "rho_limit_identity",
    "max_rho",
    "fixed_point_max",
    "golden_section_max",
    "golden_section",
    "profit_ratio",
    "rho_bidder",
    "bidder_loss_intensity",
]

log = logging.getLogger(__name__)

FIXED_POINT = "fixed-point"
GOLDEN_SECTION = "golden-section"
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ProfitResult:
    rho: float
    numerator: float
    denominator: float
    p_prime: float


@dataclass(frozen=True)
class MaxProfit:
    p_star: float
    rho_star: float
    method: str
    iterations: int


def rho_seller(eta: Strategy, n: int, p_prime: float, epsabs: float = 1e-10) -> ProfitResult:
    if n < 1:
        raise DomainError("n must be >= 1")
    lo, hi, breaks = eta.quad_range(n)
    upper = min(hi, -p_prime)
    # Integrate the density of the minimum (mass 1) rather than f S^(n-1)
    # (mass 1/n) so the absolute tolerance stays meaningful for large n.
    dens = lambda q: first_order_statistic_density(eta, n, q)  # noqa: E731
    mass = integrate(dens, lo, upper, breaks, epsabs=epsabs)
    first = integrate(lambda q: q * dens(q), lo, upper, breaks, epsabs=epsabs)
    numerator = -first / n
    denominator = 1.0 / n + mass / n
    return ProfitResult(numerator / denominator, numerator, denominator, p_prime)


def rho_limit_identity(eta: Strategy, n: int) -> float:
    """``rho_N(-inf)`` through the expected minimum: ``-E(min of N) / 2``."""
    return -order_stat_mean(eta, n) / 2.0


def _bracket(eta: Strategy, n: int) -> tuple[float, float]:
    spread = math.sqrt(2.0 * math.log(n))
    if isinstance(eta, Gaussian):
        return -eta.mu - (6.0 + spread) * eta.sigma, -eta.mu + 6.0 * eta.sigma
    lo, hi, _ = eta.quad_range(n)
    return -hi, -lo


def golden_section(f, a: float, b: float, tol: float = 1e-8, max_iter: int = 500):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x), iterations)``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while abs(b - a) > tol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        it += 1
    x = 0.5 * (a + b)
    return x, f(x), it


def golden_section_max(eta: Strategy, n: int, tol: float = 1e-8) -> MaxProfit:
    a, b = _bracket(eta, n)
    x, fx, it = golden_section(lambda p: rho_seller(eta, n, p).rho, a, b, tol=tol)
    return MaxProfit(x, fx, GOLDEN_SECTION, it)


def fixed_point_max(eta: Strategy, n: int, tol: float = 1e-10, max_iter: int = 200) -> MaxProfit | None:
    """Iterate ``p <- rho_N(p)`` from ``p = 0``; ``None`` if it has not settled after ``max_iter`` steps."""
    p = 0.0
    for it in range(1, max_iter + 1):
        nxt = rho_seller(eta, n, p).rho
        if abs(nxt - p) <= tol:
            return MaxProfit(nxt, rho_seller(eta, n, nxt).rho, FIXED_POINT, it)
        p = nxt
    return None


def max_rho(eta: Strategy, n: int, method: str | None = None) -> MaxProfit:
    """Maximum over the withdrawal log-price of the seller's profit intensity.

    By default Gaussian strategies use the fixed-point iteration and everything
    else golden-section search. A fixed-point run that fails to converge falls
    back to golden-section and reports that method.
    """
    if method is None:
        method = FIXED_POINT if isinstance(eta, Gaussian) else GOLDEN_SECTION
    if method == GOLDEN_SECTION:
        return golden_section_max(eta, n)
    if method != FIXED_POINT:
        raise ValueError(f"unknown method {method!r}")
    res = fixed_point_max(eta, n)
    if res is None:
        log.warning("fixed-point iteration did not converge for n=%d; using golden-section", n)
        return golden_section_max(eta, n)
    return res


def profit_ratio(eta: Strategy, n: int) -> float:
    """``max rho_N / rho_N(-inf)``, a number independent of the dispersion of ``eta``."""
    if n < 2:
        raise DomainError("the ratio needs n >= 2 (rho_1(-inf) = 0)")
    return max_rho(eta, n).rho_star / rho_seller(eta, n, -math.inf).rho


def rho_bidder(eta: Strategy, n: int, p_prime: float, q_prime):
    """Profit intensity of a bidder with deterministic ``q'`` against ``n - 1`` rivals using ``eta``.

    ``[q' + p' <= 0] q' / (1 + S(q')^(1-n))``, evaluated as ``q' * expit((n-1) ln S(q'))``.
    """
    q = np.asarray(q_prime, dtype=float)
    if n == 1:
        weight = np.full(q.shape, 0.5)
    else:
        weight = special.expit((n - 1) * np.asarray(eta.log_survival(q), dtype=float))
    out = np.where(q + p_prime <= 0, q * weight, 0.0)
    return float(out) if out.ndim == 0 else out


def bidder_loss_intensity(rho_inf: float, n: int) -> float:
    """Average loss intensity of bidders when the seller sets no withdrawal price."""
    return -2.0 * rho_inf / (1 + n)
