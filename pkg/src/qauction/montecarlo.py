"""Seeded Monte Carlo simulation of English q-auctions.

Trials are split into fixed-size batches. Batch ``i`` of a run with seed ``s``
draws from its own Philox stream keyed by ``SeedSequence([s, i])``, and batch
summaries are combined in batch order, so results do not depend on how many
threads execute the batches.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy import special, stats

from .asymptotics import gumbel_cdf, rescale_winner
from .auction_measure import AuctionConfig
from .strategies import Dirac, Gaussian, JointStrategy2D, Strategy

__all__ = [
    "BATCH_SIZE",
    "AuctionOutcome",
    "SimulationReport",
    "BidderSummary",
    "JointSimulationReport",
    "make_stream",
    "simulate_once",
    "simulate_config",
    "estimate_rho_seller",
    "simulate_joint",
    "sample_min_standard_normal",
    "empirical_gumbel_distance",
]

BATCH_SIZE = 1 << 16
MIN_TRIALS = 1000

T = TypeVar("T")


def make_stream(seed: int, batch: int = 0) -> np.random.Generator:
    """Counter-based generator for one batch of a seeded run."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, batch])))


def _run_batches(work: Callable[[np.random.Generator, int], T], n_trials: int, seed: int, threads: int = 1) -> list[T]:
    sizes = [BATCH_SIZE] * (n_trials // BATCH_SIZE)
    if n_trials % BATCH_SIZE:
        sizes.append(n_trials % BATCH_SIZE)

    def one(i: int) -> T:
        return work(make_stream(seed, i), sizes[i])

    if threads <= 1 or len(sizes) == 1:
        return [one(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(len(sizes))))


@dataclass(frozen=True)
class AuctionOutcome:
    winner: int | None
    q_win: float
    accomplished: bool
    p_seller: float


def _pick_winners(q: np.ndarray, rng: np.random.Generator, may_tie: bool) -> np.ndarray:
    if not may_tie:
        return np.argmin(q, axis=1)
    tied = q == q.min(axis=1, keepdims=True)
    keys = np.where(tied, rng.random(q.shape), 2.0)
    return np.argmin(keys, axis=1)


def _draw(cfg: AuctionConfig, rng: np.random.Generator, n: int):
    q = np.column_stack([np.asarray(b.sample(rng, n), dtype=float) for b in cfg.bidders])
    p = np.asarray(cfg.seller.sample(rng, n), dtype=float)
    winner = _pick_winners(q, rng, any(b.atoms() for b in cfg.bidders))
    q_win = q[np.arange(n), winner]
    return winner, q_win, p, q_win + p <= 0


def simulate_once(cfg: AuctionConfig, rng: np.random.Generator) -> AuctionOutcome:
    winner, q_win, p, deal = _draw(cfg, rng, 1)
    return AuctionOutcome(int(winner[0]), float(q_win[0]), bool(deal[0]), float(p[0]))


@dataclass(frozen=True)
class SimulationReport:
    """Plug-in estimate of the seller's profit intensity.

    ``rho_estimate = mean_profit / (1 + deal_rate)`` where ``mean_profit`` is the
    average of ``-[deal] q'`` over all trials; ``mean_conditional_profit`` is the
    average of ``-q'`` over trials that closed (``None`` if none did).
    """

    n_trials: int
    deal_rate: float
    mean_conditional_profit: float | None
    rho_estimate: float
    std_error: float
    seed: int
    mean_profit: float
    win_rates: list[float] = field(default_factory=list)
    deal_rates: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Moments:
    """Running sums for the ratio estimator ``mean(X) / (1 + mean(Y))``."""

    def __init__(self, n_bidders: int):
        self.n = 0
        self.sx = self.sy = self.sxx = self.syy = self.sxy = 0.0
        self.wins = np.zeros(n_bidders, dtype=np.int64)
        self.deals = np.zeros(n_bidders, dtype=np.int64)

    def add(self, other: dict):
        self.n += other["n"]
        self.sx += other["sx"]
        self.sy += other["sy"]
        self.sxx += other["sxx"]
        self.syy += other["syy"]
        self.sxy += other["sxy"]
        self.wins += other["wins"]
        self.deals += other["deals"]

    @staticmethod
    def batch(winner: np.ndarray, q_win: np.ndarray, deal: np.ndarray, n_bidders: int) -> dict:
        x = np.where(deal, -q_win, 0.0)
        y = deal.astype(float)
        return {
            "n": int(winner.size),
            "sx": float(x.sum()),
            "sy": float(y.sum()),
            "sxx": float((x * x).sum()),
            "syy": float((y * y).sum()),
            "sxy": float((x * y).sum()),
            "wins": np.bincount(winner, minlength=n_bidders),
            "deals": np.bincount(winner[deal], minlength=n_bidders),
        }

    def report(self, seed: int) -> SimulationReport:
        n = self.n
        a = self.sx / n
        b = self.sy / n
        scale = n / (n - 1) if n > 1 else 0.0
        var_x = max(self.sxx / n - a * a, 0.0) * scale
        var_y = max(self.syy / n - b * b, 0.0) * scale
        cov = (self.sxy / n - a * b) * scale
        g0 = 1.0 / (1.0 + b)
        g1 = -a / (1.0 + b) ** 2
        var_r = max(g0 * g0 * var_x + 2.0 * g0 * g1 * cov + g1 * g1 * var_y, 0.0) / n
        return SimulationReport(
            n_trials=n,
            deal_rate=b,
            mean_conditional_profit=self.sx / self.sy if self.sy > 0 else None,
            rho_estimate=a / (1.0 + b),
            std_error=math.sqrt(var_r),
            seed=seed,
            mean_profit=a,
            win_rates=(self.wins / n).tolist(),
            deal_rates=(self.deals / n).tolist(),
        )


def _check_trials(n_trials: int):
    if n_trials < MIN_TRIALS:
        raise ValueError(f"n_trials must be >= {MIN_TRIALS}, got {n_trials}")


def simulate_config(cfg: AuctionConfig, n_trials: int, seed: int, threads: int = 1) -> SimulationReport:
    """Simulate ``n_trials`` independent auctions with configuration ``cfg``."""
    _check_trials(n_trials)

    def work(rng, n):
        winner, q_win, _, deal = _draw(cfg, rng, n)
        return _Moments.batch(winner, q_win, deal, cfg.n)

    acc = _Moments(cfg.n)
    for part in _run_batches(work, n_trials, seed, threads):
        acc.add(part)
    return acc.report(seed)


def estimate_rho_seller(
    eta: Strategy, n: int, p_prime: float, n_trials: int, seed: int, threads: int = 1
) -> SimulationReport:
    """Monte Carlo counterpart of :func:`qauction.profit.rho_seller`."""
    return simulate_config(AuctionConfig.identical(eta, n, p_prime), n_trials, seed, threads)


@dataclass(frozen=True)
class BidderSummary:
    win_rate: float
    deal_rate: float
    mean_resale: float | None
    resale_std_error: float | None
    mean_margin: float | None
    margin_std_error: float | None


@dataclass(frozen=True)
class JointSimulationReport:
    """Simulation of bidders who know their resale log-price ``p_k``.

    ``mean_resale`` is the average ``p_k`` over the auctions bidder ``k`` won;
    ``mean_margin`` is the average log resale margin ``p_k + q'`` over the deals
    bidder ``k`` closed. ``mean_winner_resale`` averages the winner's ``p_k`` over
    all trials.
    """

    report: SimulationReport
    bidders: list[BidderSummary]
    mean_winner_resale: float
    winner_resale_std_error: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _mean_se(s: float, ss: float, n: int):
    if n == 0:
        return None, None
    mean = s / n
    if n < 2:
        return mean, None
    var = max(ss / n - mean * mean, 0.0) * n / (n - 1)
    return mean, math.sqrt(var / n)


def simulate_joint(
    bidders: Sequence[JointStrategy2D],
    seller: JointStrategy2D | Strategy,
    n_trials: int,
    seed: int,
    threads: int = 1,
) -> JointSimulationReport:
    """Simulate auctions whose bidders draw ``(p_k, q_k)`` jointly.

    A joint seller contributes its ``p`` coordinate as the withdrawal log-price.
    """
    _check_trials(n_trials)
    bidders = list(bidders)
    nb = len(bidders)
    if nb == 0:
        raise ValueError("an auction needs at least one bidder")
    may_tie = any(b.has_q_atoms() for b in bidders)

    def work(rng, n):
        draws = [b.sample(rng, n) for b in bidders]
        resale = np.column_stack([d[0] for d in draws])
        q = np.column_stack([d[1] for d in draws])
        if isinstance(seller, JointStrategy2D):
            p = seller.sample(rng, n)[0]
        else:
            p = np.asarray(seller.sample(rng, n), dtype=float)
        winner = _pick_winners(q, rng, may_tie)
        rows = np.arange(n)
        q_win = q[rows, winner]
        deal = q_win + p <= 0
        p_win = resale[rows, winner]
        margin = p_win + q_win
        out = _Moments.batch(winner, q_win, deal, nb)
        out["resale_s"] = np.bincount(winner, weights=p_win, minlength=nb)
        out["resale_ss"] = np.bincount(winner, weights=p_win * p_win, minlength=nb)
        out["margin_s"] = np.bincount(winner[deal], weights=margin[deal], minlength=nb)
        out["margin_ss"] = np.bincount(winner[deal], weights=margin[deal] ** 2, minlength=nb)
        out["pw_s"] = float(p_win.sum())
        out["pw_ss"] = float((p_win * p_win).sum())
        return out

    acc = _Moments(nb)
    resale_s = np.zeros(nb)
    resale_ss = np.zeros(nb)
    margin_s = np.zeros(nb)
    margin_ss = np.zeros(nb)
    pw_s = pw_ss = 0.0
    for part in _run_batches(work, n_trials, seed, threads):
        acc.add(part)
        resale_s += part["resale_s"]
        resale_ss += part["resale_ss"]
        margin_s += part["margin_s"]
        margin_ss += part["margin_ss"]
        pw_s += part["pw_s"]
        pw_ss += part["pw_ss"]

    summaries = []
    for k in range(nb):
        r_mean, r_se = _mean_se(resale_s[k], resale_ss[k], int(acc.wins[k]))
        m_mean, m_se = _mean_se(margin_s[k], margin_ss[k], int(acc.deals[k]))
        summaries.append(
            BidderSummary(
                win_rate=float(acc.wins[k] / acc.n),
                deal_rate=float(acc.deals[k] / acc.n),
                mean_resale=r_mean,
                resale_std_error=r_se,
                mean_margin=m_mean,
                margin_std_error=m_se,
            )
        )
    w_mean, w_se = _mean_se(pw_s, pw_ss, acc.n)
    return JointSimulationReport(acc.report(seed), summaries, w_mean, w_se if w_se is not None else 0.0)


def sample_min_standard_normal(rng: np.random.Generator, n_bidders: int, size: int) -> np.ndarray:
    """Draw the minimum of ``n_bidders`` standard normals ``size`` times.

    Inverse transform on ``P(q' >= t) = S(t)^N``: with ``U`` uniform,
    ``-q' = Phi^{-1}(U^{1/N})``, evaluated through ``1 - U^{1/N}`` to keep
    precision when it is tiny.
    """
    u = rng.random(size)
    tail = -np.expm1(np.log1p(-u) / n_bidders)
    return special.ndtri(tail)


def empirical_gumbel_distance(
    n: int, n_trials: int, seed: int, threads: int = 1, method: str = "inverse"
) -> float:
    """Kolmogorov-Smirnov distance between the rescaled simulated winner and the Gumbel law.

    ``method="direct"`` draws all ``n`` bidders per trial and takes the minimum;
    ``"inverse"`` samples the minimum in one draw. Both have the same law.
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    if method == "inverse":
        work = lambda rng, k: sample_min_standard_normal(rng, n, k)  # noqa: E731
    elif method == "direct":
        work = lambda rng, k: Gaussian().sample(rng, (k, n)).min(axis=1)  # noqa: E731
    else:
        raise ValueError(f"unknown method {method!r}")
    q_min = np.concatenate(_run_batches(work, n_trials, seed, threads))
    x = rescale_winner(q_min, n)
    return float(stats.kstest(x, gumbel_cdf).statistic)
