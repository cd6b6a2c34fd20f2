"""Transversals in Latin arrays via coloured bipartite graphs.

Desk-scale library: constructions, exact and heuristic rainbow-matching
solvers, switcher machinery, expander extraction, pseudorandomness audits,
absorption gadgets, and a Steiner-triple-system matching pipeline.
"""

__version__ = "0.1.0"
