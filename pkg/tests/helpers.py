"""Shared independent oracles for the test suite."""

import numpy as np


def abs_pair_stat(x, m, y, p=2.0):
    """Second-difference statistic of t -> |t| into the real line."""
    half = (y - x) / 2.0
    gap = y - x
    d1 = np.abs(np.abs(x) - np.abs(m))
    d2 = np.abs(np.abs(m) - np.abs(y))
    d3 = np.abs(np.abs(x) - np.abs(y))
    return 0.5 * ((d1 / half) ** p + (d2 / half) ** p) - (d3 / gap) ** p


def riemann_alpha_abs(A, B, n=2000, p=2.0):
    """Brute-force double-Riemann value of the segment coefficient of
    t -> |t| over [A, B]: midpoint rule over ordered pairs x < y with
    exact midpoints, normalized by 2 span^2.  Chunked by rows to keep
    memory flat."""
    span = B - A
    edges = np.linspace(A, B, n + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    dx = span / n
    total = 0.0
    chunk = 256
    for s in range(0, n, chunk):
        x = mids[s:s + chunk][:, None]
        y = mids[None, :]
        m = 0.5 * (x + y)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = np.where(x < y, abs_pair_stat(x, m, y, p), 0.0)
        total += float(np.nan_to_num(vals).sum())
    return total * dx * dx / (2.0 * span * span)
