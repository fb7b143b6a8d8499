"""Collective choice markets without transfers.

Computation and verification of Lindahl equilibria with equal fiat
budgets, the equitable set of the associated bargaining problem, Nash
allocations, and the reductions to partner-matching markets and
discrete-goods exchange.
"""

from . import exchange, lp, matching, market, polytope, solutions, tolerances

__version__ = "0.1.0"

__all__ = [
    "exchange",
    "lp",
    "market",
    "matching",
    "polytope",
    "solutions",
    "tolerances",
    "__version__",
]
