"""Strategies: probability densities over log withdrawal prices.

A bidder's strategy is the law of ``q = -ln c`` where ``c`` is the price at which
the bidder withdraws; the seller's strategy is the law of ``p = ln c``. Four
families are supported:

* :class:`Gaussian` -- the equilibrium-market strategy,
* :class:`Dirac` -- a deterministic withdrawal price,
* :class:`Mixture` -- a convex combination of other strategies,
* :class:`Tabulated` -- a piecewise-linear density on a grid.

All functions accept scalars or numpy arrays for the evaluation point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from ._quad import integrate
from .errors import ConfigError, NoPointwiseDensityError

__all__ = [
    "Gaussian",
    "Dirac",
    "Mixture",
    "Tabulated",
    "JointStrategy2D",
    "Strategy",
    "density",
    "survival",
    "log_survival",
    "cdf",
    "sample",
    "first_order_statistic_density",
    "order_stat_mean",
    "strategy_from_dict",
    "strategy_to_dict",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _out(x):
    """Return a Python float for 0-d results, the array otherwise."""
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class Gaussian:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError("Gaussian parameters must be finite")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def density(self, q):
        z = (np.asarray(q, dtype=float) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * _SQRT_2PI)

    def survival(self, q):
        return special.ndtr((self.mu - np.asarray(q, dtype=float)) / self.sigma)

    def log_survival(self, q):
        # log_ndtr switches to an asymptotic series in the far tail, so the
        # result stays accurate where ndtr itself underflows.
        return special.log_ndtr((self.mu - np.asarray(q, dtype=float)) / self.sigma)

    def cdf(self, q):
        return special.ndtr((np.asarray(q, dtype=float) - self.mu) / self.sigma)

    def atoms(self) -> list[float]:
        return []

    def sample(self, rng: np.random.Generator, size=None):
        return self.mu + self.sigma * rng.standard_normal(size)

    def quad_range(self, n: int = 1) -> tuple[float, float, list[float]]:
        # The minimum of n draws sits near mu - sqrt(2 ln n) sigma.
        left = 8.0 + math.sqrt(2.0 * math.log(n))
        lo = self.mu - left * self.sigma
        hi = self.mu + 8.0 * self.sigma
        breaks = [self.mu + k * self.sigma for k in range(-math.ceil(left) + 1, 8)]
        return lo, hi, breaks


@dataclass(frozen=True)
class Dirac:
    """Point mass at ``q0``; ``q0 = -inf`` is allowed (a seller with no reserve)."""

    q0: float

    def __post_init__(self):
        if math.isnan(self.q0):
            raise ValueError("q0 must not be NaN")

    def density(self, q):
        raise NoPointwiseDensityError("a Dirac strategy has no pointwise density")

    def survival(self, q):
        # Inclusive boundary: S(q0) = P(X >= q0) = 1.
        return (np.asarray(q, dtype=float) <= self.q0).astype(float)

    def log_survival(self, q):
        with np.errstate(divide="ignore"):
            return np.log(self.survival(q))

    def cdf(self, q):
        return (np.asarray(q, dtype=float) >= self.q0).astype(float)

    def atoms(self) -> list[float]:
        return [self.q0]

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return float(self.q0)
        return np.full(size, float(self.q0))

    def quad_range(self, n: int = 1):
        raise NoPointwiseDensityError("a Dirac strategy cannot be integrated against")


@dataclass(frozen=True)
class Mixture:
    weights: tuple[float, ...]
    components: tuple[Any, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        comps = tuple(self.components)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)
        if not comps or len(w) != len(comps):
            raise ValueError("mixture needs one weight per component and at least one component")
        if any(x < 0 or not math.isfinite(x) for x in w):
            raise ValueError("mixture weights must be finite and >= 0")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {math.fsum(w)!r}")

    def _active(self):
        return [(w, c) for w, c in zip(self.weights, self.components) if w > 0]

    def density(self, q):
        active = self._active()
        if any(c.atoms() for _, c in active):
            raise NoPointwiseDensityError("mixture has point-mass components")
        return sum(w * c.density(q) for w, c in active)

    def survival(self, q):
        return sum(w * c.survival(q) for w, c in self._active())

    def log_survival(self, q):
        active = self._active()
        logs = np.stack([np.asarray(c.log_survival(q), dtype=float) for _, c in active])
        w = np.array([w for w, _ in active]).reshape((-1,) + (1,) * (logs.ndim - 1))
        with np.errstate(divide="ignore"):
            return special.logsumexp(logs, axis=0, b=w)

    def cdf(self, q):
        return sum(w * c.cdf(q) for w, c in self._active())

    def atoms(self) -> list[float]:
        return sorted({a for _, c in self._active() for a in c.atoms()})

    def sample(self, rng: np.random.Generator, size=None):
        n = 1 if size is None else int(np.prod(size))
        which = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
        out = np.empty(n)
        for i, comp in enumerate(self.components):
            mask = which == i
            k = int(mask.sum())
            if k:
                out[mask] = comp.sample(rng, k)
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def quad_range(self, n: int = 1):
        ranges = [c.quad_range(n) for _, c in self._active()]
        lo = min(r[0] for r in ranges)
        hi = max(r[1] for r in ranges)
        breaks = sorted({b for r in ranges for b in (r[0], r[1], *r[2])})
        return lo, hi, breaks


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear density through ``(grid[i], values[i])``, zero outside the grid.

    The values are rescaled at construction so that the trapezoid integral is 1.
    """

    grid: np.ndarray
    values: np.ndarray
    _cell_mass: np.ndarray = field(init=False, repr=False)
    _left_mass: np.ndarray = field(init=False, repr=False)
    _right_mass: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.grid, dtype=float)
        y = np.array(self.values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("grid and values must be 1-D of equal length >= 2")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise ValueError("grid and values must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(y < 0):
            raise ValueError("values must be >= 0")
        mass = np.trapezoid(y, x)
        if not mass > 0:
            raise ValueError("tabulated density has zero mass")
        y = y / mass
        cell = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "_cell_mass", cell)
        # mass strictly left of cell i, mass strictly right of cell i
        object.__setattr__(self, "_left_mass", np.concatenate([[0.0], np.cumsum(cell)[:-1]]))
        object.__setattr__(self, "_right_mass", np.concatenate([np.cumsum(cell[::-1])[::-1][1:], [0.0]]))

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self.grid, other.grid)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def density(self, q):
        return np.interp(np.asarray(q, dtype=float), self.grid, self.values, left=0.0, right=0.0)

    def _cell(self, q):
        return np.clip(np.searchsorted(self.grid, q, side="right") - 1, 0, self.grid.size - 2)

    def survival(self, q):
        q = np.asarray(q, dtype=float)
        x, y = self.grid, self.values
        i = self._cell(q)
        h = x[i + 1] - x[i]
        t = np.clip(x[i + 1] - q, 0.0, h)
        # integral of the linear piece from q to the right end of its cell
        piece = y[i + 1] * t + (y[i] - y[i + 1]) * t * t / (2.0 * h)
        s = piece + self._right_mass[i]
        s = np.where(q < x[0], 1.0, np.where(q >= x[-1], 0.0, s))
        return np.clip(s, 0.0, 1.0)

    def log_survival(self, q):
        with np.errstate(divide="ignore"):
            return np.log(self.survival(q))

    def cdf(self, q):
        return 1.0 - self.survival(q)

    def atoms(self) -> list[float]:
        return []

    def ppf(self, u):
        """Inverse of the cumulative distribution function, exact for the linear pieces."""
        u = np.asarray(u, dtype=float)
        x, y = self.grid, self.values
        i = np.clip(np.searchsorted(self._left_mass, u, side="right") - 1, 0, x.size - 2)
        h = x[i + 1] - x[i]
        r = np.clip(u - self._left_mass[i], 0.0, self._cell_mass[i])
        a = (y[i + 1] - y[i]) / (2.0 * h)
        b = y[i]
        # root of a t^2 + b t = r in its cancellation-free form
        disc = np.sqrt(np.maximum(b * b + 4.0 * a * r, 0.0))
        denom = b + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(denom > 0, 2.0 * r / denom, 0.0)
        return x[i] + np.clip(t, 0.0, h)

    def sample(self, rng: np.random.Generator, size=None):
        return _out(self.ppf(rng.random(size)))

    def quad_range(self, n: int = 1):
        return float(self.grid[0]), float(self.grid[-1]), list(self.grid)


Strategy = Union[Gaussian, Dirac, Mixture, Tabulated]


def density(s: Strategy, q: ArrayLike):
    """Pointwise density; raises NoPointwiseDensityError for point masses."""
    return _out(s.density(q))


def survival(s: Strategy, q: ArrayLike):
    """``S(q) = P(X >= q)``, the mass at or to the right of ``q``."""
    return _out(s.survival(q))


def log_survival(s: Strategy, q: ArrayLike):
    """``ln S(q)``, evaluated without forming ``S`` where it would underflow.

    Returns ``-inf`` where the survival is exactly zero.
    """
    return _out(s.log_survival(q))


def cdf(s: Strategy, q: ArrayLike):
    """``P(X <= q)``, counting any point mass at ``q``."""
    return _out(s.cdf(q))


def sample(s: Strategy, rng: np.random.Generator, size=None):
    return s.sample(rng, size)


def first_order_statistic_density(s: Strategy, n: int, q: ArrayLike):
    """Density of the minimum of ``n`` independent draws: ``n f(q) S(q)^(n-1)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    f = np.asarray(s.density(q), dtype=float)
    if n == 1:
        return _out(f)
    with np.errstate(invalid="ignore"):
        power = np.exp((n - 1) * np.asarray(s.log_survival(q), dtype=float))
    return _out(n * f * power)


def order_stat_mean(s: Strategy, n: int, epsabs: float = 1e-9) -> float:
    """Expected minimum of ``n`` independent draws from ``s``.

    Uses the tail form ``c + int_c^hi P(min > x) dx - int_lo^c P(min <= x) dx``
    with ``P(min > x) = S(x)^n``, so it never touches the density of the minimum.
    """
    lo, hi, breaks = s.quad_range(n)
    c = min(max(0.0, lo), hi)

    def above(x):
        return np.exp(n * s.log_survival(x))

    def below(x):
        return -np.expm1(n * s.log_survival(x))

    upper = integrate(above, c, hi, [b for b in breaks if b > c], epsabs=epsabs)
    lower = integrate(below, lo, c, [b for b in breaks if b < c], epsabs=epsabs)
    return c + upper - lower


def strategy_from_dict(d: Any, path: str = "") -> Strategy:
    """Build a strategy from its JSON object form.

    ``path`` prefixes error messages so that callers can name the offending field.
    """
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a JSON object")
    kind = d.get("type")

    def num(key):
        if key not in d:
            raise ConfigError(f"{path}.{key}".lstrip("."), "missing")
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{key}".lstrip("."), f"expected a number, got {v!r}")
        return float(v)

    def numlist(key):
        v = d.get(key)
        if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            raise ConfigError(f"{path}.{key}".lstrip("."), "expected a list of numbers")
        return [float(x) for x in v]

    try:
        if kind == "gaussian":
            return Gaussian(num("mu"), num("sigma"))
        if kind == "dirac":
            return Dirac(num("q0"))
        if kind == "mixture":
            comps = d.get("components")
            if not isinstance(comps, list):
                raise ConfigError(f"{path}.components".lstrip("."), "expected a list")
            parsed = [strategy_from_dict(c, f"{path}.components[{i}]".lstrip(".")) for i, c in enumerate(comps)]
            return Mixture(tuple(numlist("weights")), tuple(parsed))
        if kind == "tabulated":
            return Tabulated(np.array(numlist("grid")), np.array(numlist("values")))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.type".lstrip("."), f"unknown strategy type {kind!r}")


def strategy_to_dict(s: Strategy) -> dict:
    if isinstance(s, Gaussian):
        return {"type": "gaussian", "mu": s.mu, "sigma": s.sigma}
    if isinstance(s, Dirac):
        return {"type": "dirac", "q0": s.q0}
    if isinstance(s, Mixture):
        return {
            "type": "mixture",
            "weights": list(s.weights),
            "components": [strategy_to_dict(c) for c in s.components],
        }
    if isinstance(s, Tabulated):
        return {"type": "tabulated", "grid": s.grid.tolist(), "values": s.values.tolist()}
    raise TypeError(f"not a strategy: {s!r}")


def _cumulative_linear(x: np.ndarray, y: np.ndarray, at) -> np.ndarray:
    """``int_{-inf}^{at}`` of the piecewise-linear function through ``(x, y)``, zero outside."""
    at = np.asarray(at, dtype=float)
    cell = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
    left = np.concatenate([[0.0], np.cumsum(cell)])
    i = np.clip(np.searchsorted(x, at, side="right") - 1, 0, x.size - 2)
    h = x[i + 1] - x[i]
    t = np.clip(at - x[i], 0.0, h)
    part = y[i] * t + (y[i + 1] - y[i]) * t * t / (2.0 * h)
    out = left[i] + part
    return np.where(at < x[0], 0.0, np.where(at >= x[-1], left[-1], out))


@dataclass(frozen=True, eq=False)
class JointStrategy2D:
    """Non-negative density over ``(p, q)``, bilinear between grid nodes.

    ``values[i, j]`` is the density at ``(p_grid[i], q_grid[j])``. An axis with a
    single node is a point mass in that coordinate. Values are rescaled at
    construction so the (trapezoid) total mass is 1.
    """

    p_grid: np.ndarray
    q_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        p = np.array(self.p_grid, dtype=float).ravel()
        q = np.array(self.q_grid, dtype=float).ravel()
        v = np.array(self.values, dtype=float)
        if p.size < 1 or q.size < 1 or v.shape != (p.size, q.size):
            raise ValueError(f"values must have shape (len(p_grid), len(q_grid)) = {(p.size, q.size)}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            raise ValueError("grids and values must be finite")
        if np.any(np.diff(p) <= 0) or np.any(np.diff(q) <= 0):
            raise ValueError("grids must be strictly increasing")
        if np.any(v < 0):
            raise ValueError("values must be >= 0 (signed densities are not supported)")
        mass = v
        if q.size > 1:
            mass = np.trapezoid(mass, q, axis=1)
        else:
            mass = mass[:, 0]
        mass = np.trapezoid(mass, p) if p.size > 1 else mass[0]
        if not mass > 0:
            raise ValueError("joint density has zero mass")
        v = v / mass
        for arr in (p, q, v):
            arr.setflags(write=False)
        object.__setattr__(self, "p_grid", p)
        object.__setattr__(self, "q_grid", q)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_product(cls, p_grid, p_values, q_grid, q_values) -> JointStrategy2D:
        """Separable density ``g(p) h(q)`` from two tabulated marginals."""
        return cls(p_grid, q_grid, np.outer(np.asarray(p_values, float), np.asarray(q_values, float)))

    def density(self, p, q):
        if self.p_grid.size == 1 or self.q_grid.size == 1:
            raise NoPointwiseDensityError("a joint strategy with a point-mass axis has no pointwise density")
        from scipy.interpolate import RegularGridInterpolator

        interp = RegularGridInterpolator(
            (self.p_grid, self.q_grid), self.values, bounds_error=False, fill_value=0.0
        )
        p_b, q_b = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
        out = interp(np.stack([p_b.ravel(), q_b.ravel()], axis=-1)).reshape(p_b.shape)
        return _out(out)

    def _marginal(self, grid, node_mass):
        if grid.size == 1:
            return Dirac(float(grid[0]))
        return Tabulated(grid, node_mass)

    def marginal_p(self) -> Strategy:
        m = np.trapezoid(self.values, self.q_grid, axis=1) if self.q_grid.size > 1 else self.values[:, 0]
        return self._marginal(self.p_grid, m)

    def marginal_q(self) -> Strategy:
        m = np.trapezoid(self.values, self.p_grid, axis=0) if self.p_grid.size > 1 else self.values[0, :]
        return self._marginal(self.q_grid, m)

    def _slice_at_q(self, q_value: float) -> np.ndarray:
        if self.q_grid.size == 1:
            return self.values[:, 0]
        return np.array([np.interp(q_value, self.q_grid, row, left=0.0, right=0.0) for row in self.values])

    def _slice_at_p(self, p_value: float) -> np.ndarray:
        if self.p_grid.size == 1:
            return self.values[0, :]
        return np.array([np.interp(p_value, self.p_grid, col, left=0.0, right=0.0) for col in self.values.T])

    def demand_curve(self, q_value: float, p_points):
        """``int_{-inf}^{p} eta(p', q_value) dp'`` at each of ``p_points``."""
        if self.p_grid.size == 1:
            raise NoPointwiseDensityError("p axis is a point mass")
        return _out(_cumulative_linear(self.p_grid, self._slice_at_q(q_value), p_points))

    def supply_curve(self, p_value: float, q_points):
        """``int_{-inf}^{q} eta(p_value, q') dq'`` at each of ``q_points``."""
        if self.q_grid.size == 1:
            raise NoPointwiseDensityError("q axis is a point mass")
        return _out(_cumulative_linear(self.q_grid, self._slice_at_p(p_value), q_points))

    def sample(self, rng: np.random.Generator, size: int, chunk: int = 8192) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``size`` pairs: inverse CDF of the p-marginal, then of q given p."""
        p = np.asarray(self.marginal_p().sample(rng, size), dtype=float)
        if self.q_grid.size == 1:
            return p, np.full(size, float(self.q_grid[0]))
        if self.p_grid.size == 1:
            return p, np.asarray(Tabulated(self.q_grid, self.values[0]).sample(rng, size), dtype=float)
        u = rng.random(size)
        q = np.empty(size)
        xg, V = self.q_grid, self.values
        dq = np.diff(xg)
        i_all = np.clip(np.searchsorted(self.p_grid, p, side="right") - 1, 0, self.p_grid.size - 2)
        for start in range(0, size, chunk):
            sl = slice(start, min(start + chunk, size))
            i = i_all[sl]
            lam = np.clip((p[sl] - self.p_grid[i]) / (self.p_grid[i + 1] - self.p_grid[i]), 0.0, 1.0)
            y = (1.0 - lam)[:, None] * V[i] + lam[:, None] * V[i + 1]
            cell = 0.5 * (y[:, 1:] + y[:, :-1]) * dq
            cum = np.cumsum(cell, axis=1)
            total = cum[:, -1]
            target = u[sl] * total
            j = np.minimum((cum < target[:, None]).sum(axis=1), dq.size - 1)
            rows = np.arange(j.size)
            left = np.where(j > 0, cum[rows, np.maximum(j - 1, 0)], 0.0)
            r = np.clip(target - left, 0.0, cell[rows, j])
            h = dq[j]
            b = y[rows, j]
            a = (y[rows, j + 1] - b) / (2.0 * h)
            denom = b + np.sqrt(np.maximum(b * b + 4.0 * a * r, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(denom > 0, 2.0 * r / denom, 0.0)
            q[sl] = xg[j] + np.clip(t, 0.0, h)
        return p, q

    def has_q_atoms(self) -> bool:
        return self.q_grid.size == 1

    def to_dict(self) -> dict:
        return {
            "type": "joint2d",
            "p_grid": self.p_grid.tolist(),
            "q_grid": self.q_grid.tolist(),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Any, path: str = "") -> JointStrategy2D:
        if not isinstance(d, dict) or d.get("type") != "joint2d":
            raise ConfigError(f"{path}.type".lstrip("."), "expected a joint2d object")
        for key in ("p_grid", "q_grid", "values"):
            if key not in d:
                raise ConfigError(f"{path}.{key}".lstrip("."), "missing")
        try:
            return cls(np.array(d["p_grid"], float), np.array(d["q_grid"], float), np.array(d["values"], float))
        except (ValueError, TypeError) as exc:
            raise ConfigError(path, str(exc)) from exc
