"""Regularized greedy forest."""

from ._core import Forest, RgfError, boost, cross_validate, evaluate, synthesize, train

__all__ = ["Forest", "RgfError", "boost", "cross_validate", "evaluate", "synthesize", "train"]
