"""Stable number formatting for text outputs (at most 6 fractional digits)."""


def num(value):
    """Round to 6 decimals; integral values come back as ``int``."""
    r = round(float(value), 6)
    if r == 0:
        return 0
    if r.is_integer() and abs(r) < 1e15:
        return int(r)
    return r


def fmt(value):
    return str(num(value))
