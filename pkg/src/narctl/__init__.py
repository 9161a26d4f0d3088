"""Exact robust no-arbitrage checks for markets with proportional transaction costs."""

from .arbitrage import ArbitrageCertificate, build_arbitrage, certificate_violations
from .cones import PolyhedralCone
from .engine import (
    ConsistentPriceProcess,
    RecursionTrace,
    find_consistent_price_process,
    find_null_strategy,
    run_recursion,
    run_recursion_bank,
)
from .jsonio import load_model, load_report, save_model, save_report
from .market import BankAccountPrices, BidAskMatrix, MarketModel, bank_prices, validate_bid_ask
from .polytopes import Polytope
from .tree import Node, ScenarioTree

__version__ = "0.1.0"

__all__ = [
    "ArbitrageCertificate", "BankAccountPrices", "BidAskMatrix", "ConsistentPriceProcess", "MarketModel",
    "Node", "PolyhedralCone", "Polytope", "RecursionTrace", "ScenarioTree", "bank_prices", "build_arbitrage",
    "certificate_violations", "find_consistent_price_process", "find_null_strategy", "load_model",
    "load_report", "run_recursion", "run_recursion_bank", "save_model", "save_report", "validate_bid_ask",
]
