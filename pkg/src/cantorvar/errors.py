"""Exceptions and desk-scale limits shared across the package."""

MAX_AXIS = 32  # d^(N+K) cells per axis
MAX_ORACLE_TERMS = 10**7  # summands allowed in a brute-force form oracle


class CapExceeded(ValueError):
    """An instance is larger than the configured desk-scale limits allow."""


def check_axis(n: int, cap: int | None = None):
    cap = MAX_AXIS if cap is None else cap
    if n > cap:
        raise CapExceeded(f"grid axis of {n} cells exceeds the cap of {cap}")
