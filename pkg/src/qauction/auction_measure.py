"""Transaction measures of the English q-auction.

The seller's log withdrawal price ``p`` and each bidder's ``q_k`` are independent.
The deal goes to the bidder with the smallest ``q`` (the highest bid ``e^{-q}``)
and closes when ``q + p <= 0``. Every Iverson bracket is integrated out in closed
form, leaving products of survival functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ._quad import integrate
from .errors import ConfigError, TieAmbiguityError
from .strategies import Dirac, Strategy, strategy_from_dict, strategy_to_dict

__all__ = [
    "AuctionConfig",
    "rationality",
    "acceptance_probability",
    "transaction_density",
    "win_probability",
    "winner_measure_identical",
    "dominant_bidder_measure",
]


@dataclass(frozen=True)
class AuctionConfig:
    seller: Strategy
    bidders: tuple[Strategy, ...]

    def __post_init__(self):
        object.__setattr__(self, "bidders", tuple(self.bidders))
        if not self.bidders:
            raise ValueError("an auction needs at least one bidder")

    @property
    def n(self) -> int:
        return len(self.bidders)

    @classmethod
    def identical(cls, eta: Strategy, n: int, p_prime: float = -math.inf) -> AuctionConfig:
        """``n`` bidders sharing ``eta`` against a seller with fixed withdrawal log-price."""
        return cls(Dirac(p_prime), (eta,) * n)

    @classmethod
    def from_dict(cls, d: Any) -> AuctionConfig:
        if not isinstance(d, dict):
            raise ConfigError("", "expected a JSON object")
        if "seller" not in d:
            raise ConfigError("seller", "missing")
        bidders = d.get("bidders")
        if not isinstance(bidders, list) or not bidders:
            raise ConfigError("bidders", "expected a non-empty list")
        seller = strategy_from_dict(d["seller"], "seller")
        return cls(seller, tuple(strategy_from_dict(b, f"bidders[{i}]") for i, b in enumerate(bidders)))

    def to_dict(self) -> dict:
        return {"seller": strategy_to_dict(self.seller), "bidders": [strategy_to_dict(b) for b in self.bidders]}


def rationality(q, p):
    """The deal condition ``[q + p <= 0]``, boundary included."""
    return np.asarray(q) + np.asarray(p) <= 0 if np.ndim(q) or np.ndim(p) else bool(q + p <= 0)


def acceptance_probability(seller: Strategy, q):
    """Probability that the seller accepts a winning bid at log variable ``q``: ``P(p <= -q)``."""
    out = seller.cdf(-np.asarray(q, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def transaction_density(cfg: AuctionConfig, k: int, q):
    """Density in ``q`` of the event "bidder ``k`` wins at ``q`` and the deal closes".

    Equals ``f_k(q) * prod_{m != k} S_m(q) * P(p <= -q)``.
    """
    q_arr = np.asarray(q, dtype=float)
    for m, other in enumerate(cfg.bidders):
        if m != k and other.atoms() and np.any(np.isin(q_arr, other.atoms())):
            raise TieAmbiguityError(f"bidder {m} has an atom at the evaluated log-price; ties are ambiguous")
    out = np.asarray(cfg.bidders[k].density(q_arr), dtype=float)
    for m, other in enumerate(cfg.bidders):
        if m != k:
            out = out * other.survival(q_arr)
    out = out * cfg.seller.cdf(-q_arr)
    return float(out) if out.ndim == 0 else out


def _integration_window(cfg: AuctionConfig, k: int):
    lo, hi, breaks = cfg.bidders[k].quad_range(cfg.n)
    extra = [-a for a in cfg.seller.atoms() if math.isfinite(a)]
    for m, other in enumerate(cfg.bidders):
        if m != k:
            extra.extend(other.atoms())
            if not other.atoms():
                extra.extend(other.quad_range(cfg.n)[2])
    if not cfg.seller.atoms():
        extra.extend(-b for b in cfg.seller.quad_range(1)[2])
    return lo, hi, [*breaks, *extra]


def win_probability(cfg: AuctionConfig, k: int, epsabs: float = 1e-10) -> float:
    """Probability that bidder ``k`` wins and the deal closes."""
    lo, hi, breaks = _integration_window(cfg, k)
    return integrate(lambda q: transaction_density(cfg, k, q), lo, hi, breaks, epsabs=epsabs)


def winner_measure_identical(eta: Strategy, n: int, p_prime: float, q):
    """Per-bidder winning measure with ``n`` identical bidders: ``[q + p' <= 0] f(q) S(q)^(n-1)``."""
    q_arr = np.asarray(q, dtype=float)
    f = np.asarray(eta.density(q_arr), dtype=float)
    if n > 1:
        with np.errstate(invalid="ignore"):
            f = f * np.exp((n - 1) * np.asarray(eta.log_survival(q_arr), dtype=float))
    out = np.where(q_arr + p_prime <= 0, f, 0.0)
    return float(out) if out.ndim == 0 else out


def dominant_bidder_measure(eta_kprime: Strategy, p_prime: float, q):
    """Winning measure when one bidder outbids all rivals almost surely: ``[q + p' <= 0] f(q)``."""
    q_arr = np.asarray(q, dtype=float)
    out = np.where(q_arr + p_prime <= 0, np.asarray(eta_kprime.density(q_arr), dtype=float), 0.0)
    return float(out) if out.ndim == 0 else out
