"""Exceptions shared across modules."""

from .channel_model import ChannelError


class ZeroCostCycleError(ValueError):
    """The channel has a cycle of total cost 0, so S* does not exist."""


class InfeasibleError(ValueError):
    """A target (entropy, average cost, expansion factor) cannot be met."""


class CostUniformError(ValueError):
    """The operation needs a cost-diverse graph."""


class ConvergenceError(ArithmeticError):
    pass


__all__ = ["ChannelError", "ZeroCostCycleError", "InfeasibleError", "CostUniformError", "ConvergenceError"]
