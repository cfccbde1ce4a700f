"""tracelab: numeric verification of matrix trace inequalities for
completely monotone and Bernstein-class functions."""

from . import cli, explorer, funclass, ineq, matcore

__all__ = ["matcore", "funclass", "ineq", "explorer", "cli"]
__version__ = "0.1.0"
