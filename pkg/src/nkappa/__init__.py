__all__ = [
    "config",
    "errors",
    "console",
    "ratfun",
    "indefinite",
    "kernel",
    "classify",
    "factorize",
    "colligation",
    "realize",
    "formats",
    "batch",
    "cli",
]
