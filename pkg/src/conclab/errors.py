"""Shared exception types."""


class ResourceLimitError(RuntimeError):
    """An exact enumeration or DP would exceed its state budget."""
