"""Profit intensities, order statistics and simulation for English q-auctions."""

__version__ = "0.1.0"

from .asymptotics import asymptotic_max_rho, gumbel_cdf, log_fit, norming_constants
from .auction_measure import (
    AuctionConfig,
    dominant_bidder_measure,
    rationality,
    transaction_density,
    winner_measure_identical,
)
from .profit import (
    MaxProfit,
    ProfitResult,
    bidder_loss_intensity,
    max_rho,
    profit_ratio,
    rho_bidder,
    rho_limit_identity,
    rho_seller,
)
from .strategies import Dirac, Gaussian, JointStrategy2D, Mixture, Tabulated

__all__ = [
    "AuctionConfig",
    "Dirac",
    "Gaussian",
    "JointStrategy2D",
    "MaxProfit",
    "Mixture",
    "ProfitResult",
    "Tabulated",
    "asymptotic_max_rho",
    "bidder_loss_intensity",
    "dominant_bidder_measure",
    "gumbel_cdf",
    "log_fit",
    "max_rho",
    "norming_constants",
    "profit_ratio",
    "rationality",
    "rho_bidder",
    "rho_limit_identity",
    "rho_seller",
    "transaction_density",
    "winner_measure_identical",
]
