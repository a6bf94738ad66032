# trawlkit/core/__init__.py
# Settings, error types, random streams and quadrature shared by models and services.
