"""Deterministic in-process MapReduce lab.

Everything runs in one process with exact communication-cost counters, so
the distributed algorithms built on top (closed-itemset mining, probabilistic
query plans, cache simulation) can be checked against brute-force oracles.
"""

__version__ = "0.1.0"
