"""Reference computations kept independent of the library code paths they check."""

from __future__ import annotations

import itertools
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def norm_pdf(x, mu=0.0, sigma=1.0) -> float:
    z = (mp.mpf(x) - mu) / sigma
    return float(mp.exp(-z * z / 2) / (sigma * mp.sqrt(2 * mp.pi)))


def norm_sf(x, mu=0.0, sigma=1.0) -> float:
    """P(X >= x) through the complementary error function."""
    z = (mp.mpf(x) - mu) / sigma
    return float(mp.erfc(z / mp.sqrt(2)) / 2)


def norm_log_sf(x, mu=0.0, sigma=1.0) -> float:
    z = (mp.mpf(x) - mu) / sigma
    return float(mp.log(mp.erfc(z / mp.sqrt(2)) / 2))


def expected_min_normal(n: int) -> float:
    """E(min of n standard normals) from the survival integral, no density involved.

    E(X) = int_0^inf P(X > x) dx - int_{-inf}^0 P(X < x) dx with P(min > x) = S(x)^n.
    """
    sf = lambda x: (mp.erfc(x / mp.sqrt(2)) / 2) ** n  # noqa: E731
    pos = mp.quad(sf, [0, 2, 5, mp.inf])
    neg = mp.quad(lambda x: 1 - sf(x), [-mp.inf, -6, -3, -1, 0])
    return float(pos - neg)


def rho_seller_mp(n: int, p_prime: float, sigma: float = 1.0) -> float:
    """Seller profit intensity for Gaussian(0, sigma) bidders at 50-digit precision."""
    upper = mp.inf if p_prime == -np.inf else -mp.mpf(p_prime)
    s = mp.mpf(sigma)
    f = lambda q: mp.exp(-(q / s) ** 2 / 2) / (s * mp.sqrt(2 * mp.pi)) * (mp.erfc(q / (s * mp.sqrt(2))) / 2) ** (n - 1)  # noqa: E731
    pts = [-mp.inf, -3 * s, -s, 0, upper] if upper == mp.inf or upper > 0 else [-mp.inf, upper]
    pts = sorted(set(pts), key=lambda v: float(v))
    num = -mp.quad(lambda q: q * f(q), pts)
    den = mp.mpf(1) / n + mp.quad(f, pts)
    return float(num / den)


def _cell_mass_between(x0, x1, y0, y1, a, b):
    """Exact integral over [a, b] ∩ [x0, x1] of the line through (x0, y0), (x1, y1)."""
    lo, hi = max(a, x0), min(b, x1)
    if hi <= lo:
        return 0.0
    slope = (y1 - y0) / (x1 - x0)
    f = lambda t: y0 * (t - x0) + slope * (t - x0) ** 2 / 2  # noqa: E731
    return f(hi) - f(lo)


def _linear_at(grid, values, q):
    for i in range(len(grid) - 1):
        if grid[i] <= q <= grid[i + 1]:
            lam = (q - grid[i]) / (grid[i + 1] - grid[i])
            return values[i] * (1 - lam) + values[i + 1] * lam
    return 0.0


def brute_force_win_probability(bidders, seller, k: int, gauss_nodes: int = 8) -> float:
    """P(bidder k has the smallest q and q + p <= 0) by exhaustive summation over grid cells.

    ``bidders`` are (grid, values) pairs of normalized piecewise-linear densities;
    ``seller`` is either such a pair or ``("dirac", p0)``. For every Gauss node of
    q_k, every combination of one cell per rival and one cell for the seller is
    visited and the exact mass of each cell on the winning side of the node is
    multiplied in. Between consecutive breakpoints the integrand in q_k is a
    polynomial, so the Gauss rule is exact.
    """
    gk, vk = bidders[k]
    rivals = [b for m, b in enumerate(bidders) if m != k]
    breaks = set(gk)
    for g, _ in rivals:
        breaks.update(g)
    if seller[0] == "dirac":
        breaks.add(-seller[1])
    else:
        breaks.update(-x for x in seller[0])
    breaks = sorted(b for b in breaks if gk[0] <= b <= gk[-1])
    nodes, weights = np.polynomial.legendre.leggauss(gauss_nodes)

    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        for t, w in zip(nodes, weights):
            q = 0.5 * (a + b) + 0.5 * (b - a) * t
            dens = _linear_at(gk, vk, q)
            if dens == 0.0:
                continue
            # One list of per-cell masses per rival (cells above q) and for the seller (p <= -q).
            cell_lists = []
            for g, v in rivals:
                cell_lists.append(
                    [_cell_mass_between(g[i], g[i + 1], v[i], v[i + 1], q, np.inf) for i in range(len(g) - 1)]
                )
            if seller[0] == "dirac":
                cell_lists.append([1.0 if seller[1] <= -q else 0.0])
            else:
                sg, sv = seller
                cell_lists.append(
                    [_cell_mass_between(sg[i], sg[i + 1], sv[i], sv[i + 1], -np.inf, -q) for i in range(len(sg) - 1)]
                )
            acc = 0.0
            for combo in itertools.product(*cell_lists):
                acc += math.prod(combo)
            total += 0.5 * (b - a) * w * dens * acc
    return total
