# trawlkit/__init__.py
#
# Simulation and moment-based inference for periodic trawl processes.

__version__ = "0.1.0"
