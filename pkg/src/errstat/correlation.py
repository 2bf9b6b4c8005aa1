"""Correlation between paired error or prediction sets.

Spearman rank correlation (on midranks) is the default everywhere:
benchmark sets routinely contain a few outliers, to which the plain
Pearson coefficient is notoriously sensitive.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["CorrMatrix", "pearson", "spearman", "midranks", "correlation_matrix"]


def pearson(x, y):
    """Product-moment correlation of two equal-length vectors (N >= 3)."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ValueError("inputs must be 1-d and the same length")
    if xv.size < 3:
        raise ValueError("need at least 3 points")
    dx = xv - xv.mean()
    dy = yv - yv.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise ValueError("undefined correlation: constant input")
    r = float(dx @ dy) / np.sqrt(sx * sy)
    return float(min(1.0, max(-1.0, r)))


def midranks(x):
    """Ranks 1..N with ties getting the average of their rank span."""
    xv = np.asarray(x, dtype=float)
    order = np.argsort(xv, kind="stable")
    ranks = np.empty(xv.size, dtype=float)
    i = 0
    while i < xv.size:
        j = i
        while j + 1 < xv.size and xv[order[j + 1]] == xv[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y):
    """Rank correlation: Pearson on the midranks of both inputs."""
    return pearson(midranks(x), midranks(y))


@dataclass(frozen=True)
class CorrMatrix:
    """Symmetric K x K correlation matrix with unit diagonal."""

    values: np.ndarray
    labels: list
    method: str

    def to_dict(self):
        return {
            "labels": list(self.labels),
            "method": self.method,
            "values": [[float(v) for v in row] for row in self.values],
        }


def correlation_matrix(data, method="spearman", labels=None):
    """Pairwise correlations of the columns of `data`.

    `data` is either an ErrorMatrix (its error columns are used) or an
    N x K array.  Any constant column makes the correlation undefined and
    raises, rather than silently contributing zeros to the display.
    """
    if hasattr(data, "errors"):
        values = data.errors
        labels = list(data.method_names)
    else:
        values = np.asarray(data, dtype=float)
        labels = list(labels) if labels is not None else [f"M{j + 1}" for j in range(values.shape[1])]
    if values.ndim != 2 or values.shape[1] < 2:
        raise ValueError("need at least 2 columns")
    corr = pearson if method == "pearson" else spearman
    if method not in ("pearson", "spearman"):
        raise ValueError(f"unknown correlation method {method!r}")
    k = values.shape[1]
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = corr(values[:, i], values[:, j])
    return CorrMatrix(values=out, labels=labels, method=method)
