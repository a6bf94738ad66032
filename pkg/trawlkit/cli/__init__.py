# trawlkit/cli/__init__.py
# Command modules; each exposes register(subparsers) and is wired up in trawlkit.main.
