"""Locally weighted scatterplot smoothing (tricube weights, local linear
fits, one robustness iteration)."""

from __future__ import annotations

import numpy as np


def lowess(x, y, frac: float = 0.2, robust_iters: int = 1) -> np.ndarray:
    """Smoothed y estimates at the input x positions.

    frac is the neighborhood fraction; each local fit is linear with
    tricube weights, followed by `robust_iters` bisquare reweighting passes.
    Collinear input is reproduced exactly (up to float roundoff).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(x)
    if n == 0:
        return np.array([])
    if n == 1:
        return y.copy()
    k = max(2, int(np.ceil(frac * n)))
    k = min(k, n)

    delta = np.ones(n)
    fitted = np.empty(n)
    for _ in range(robust_iters + 1):
        for i in range(n):
            dist = np.abs(x - x[i])
            h = np.sort(dist)[k - 1]
            if h == 0:
                w = (dist == 0).astype(np.float64)
            else:
                w = np.clip(dist / h, 0.0, 1.0)
                w = (1 - w**3) ** 3
            w = w * delta
            sw = w.sum()
            if sw == 0:
                fitted[i] = y[i]
                continue
            xw = (w * x).sum() / sw
            yw = (w * y).sum() / sw
            var = (w * (x - xw) ** 2).sum()
            if var < 1e-12 * max(1.0, xw * xw):
                fitted[i] = yw
            else:
                beta = (w * (x - xw) * (y - yw)).sum() / var
                fitted[i] = yw + beta * (x[i] - xw)
        residuals = y - fitted
        s = np.median(np.abs(residuals))
        if s == 0:
            # a zero median means most points fit exactly; fall back to the
            # mean so isolated outliers are still downweighted
            s = np.mean(np.abs(residuals))
        if s == 0:
            break
        delta = np.clip(residuals / (6.0 * s), -1.0, 1.0)
        delta = (1 - delta**2) ** 2
    return fitted
