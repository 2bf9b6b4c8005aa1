"""System-wise comparison of absolute errors.

The systematic improvement probability SIP(i, j) is the fraction of
systems whose absolute error strictly decreases when switching from
method j to method i.  Together with the mean gain (MG, the average
improvement on those systems) and the mean loss (ML, the average
degradation on the others) it decomposes any MUE difference into a
balance of gains and losses:

    MUE(i) - MUE(j) = SIP(i,j) * MG(i,j) + SIP(j,i) * ML(i,j)

so a better MUE never certifies improvement on every system.
"""

from dataclasses import dataclass

import numpy as np

from . import inference

__all__ = [
    "SipReport",
    "DeltaEcdfReport",
    "ScalarWithCI",
    "abs_error_deltas",
    "sip_pair",
    "sip_matrix",
    "mue_decomposition",
    "delta_ecdf",
]


def abs_error_deltas(e1, e2):
    """Per-system differences of absolute errors |e1_k| - |e2_k|."""
    a = np.asarray(e1, dtype=float)
    b = np.asarray(e2, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired error sets must be 1-d and the same length")
    return np.abs(a) - np.abs(b)


def sip_pair(e1, e2):
    """(SIP, tie count) for one ordered method pair: strict improvements only."""
    deltas = abs_error_deltas(e1, e2)
    return float((deltas < 0).mean()), int((deltas == 0).sum())


def _mean_gain(deltas):
    neg = deltas[deltas < 0]
    return float(neg.mean()) if neg.size else None


@dataclass(frozen=True)
class SipReport:
    """All pairwise SIP/MG/ML values plus the MSIP ranking.

    Undefined entries (MG where SIP is zero and the diagonal) are NaN.
    MSIP is the row mean of the SIP matrix over all K methods including
    the zero diagonal, i.e. the sum over opponents divided by K.
    `order` lists method indices by decreasing MSIP.
    """

    sip: np.ndarray
    mg: np.ndarray
    ml: np.ndarray
    ties: np.ndarray
    msip: np.ndarray
    order: list
    labels: list
    n_systems: int

    def to_dict(self):
        def grid(m):
            return [[None if np.isnan(v) else float(v) for v in row] for row in m]

        return {
            "labels": list(self.labels),
            "n_systems": self.n_systems,
            "sip": grid(self.sip),
            "mg": grid(self.mg),
            "ml": grid(self.ml),
            "ties": [[int(v) for v in row] for row in self.ties],
            "msip": [float(v) for v in self.msip],
            "order": list(self.order),
        }


def sip_matrix(matrix):
    """Pairwise SIP/MG/ML report for an ErrorMatrix (K >= 2 methods)."""
    errors = matrix.errors
    k = matrix.n_methods
    if k < 2:
        raise ValueError("need at least 2 methods")
    n = matrix.n_systems
    sip = np.zeros((k, k))
    mg = np.full((k, k), np.nan)
    ties = np.zeros((k, k), dtype=int)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            deltas = abs_error_deltas(errors[:, i], errors[:, j])
            sip[i, j] = float((deltas < 0).mean())
            ties[i, j] = int((deltas == 0).sum())
            gain = _mean_gain(deltas)
            if gain is not None:
                mg[i, j] = gain
    ml = -mg.T
    msip = sip.sum(axis=1) / k
    order = list(np.argsort(-msip, kind="stable"))
    return SipReport(
        sip=sip,
        mg=mg,
        ml=ml,
        ties=ties,
        msip=msip,
        order=[int(i) for i in order],
        labels=list(matrix.method_names),
        n_systems=n,
    )


def mue_decomposition(e1, e2):
    """MUE difference and its reconstruction from SIP, MG and ML.

    Returns (delta_mue, reconstructed); the two agree to machine
    precision, terms with zero SIP contribute nothing.
    """
    deltas = abs_error_deltas(e1, e2)
    delta_mue = float(np.abs(np.asarray(e1, dtype=float)).mean() - np.abs(np.asarray(e2, dtype=float)).mean())
    sip_12 = float((deltas < 0).mean())
    sip_21 = float((deltas > 0).mean())
    gain = _mean_gain(deltas)
    loss = _mean_gain(-deltas)  # ML(1,2) = -MG(2,1)
    reconstructed = 0.0
    if sip_12 > 0:
        reconstructed += sip_12 * gain
    if sip_21 > 0:
        reconstructed += sip_21 * -loss
    return delta_mue, reconstructed


@dataclass(frozen=True)
class ScalarWithCI:
    """A point value with a 95% bootstrap percentile interval."""

    value: float | None
    lo: float | None
    hi: float | None

    def to_dict(self):
        return {"value": self.value, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class DeltaEcdfReport:
    """ECDF of the absolute-error differences with 95% bootstrap bands.

    `deltas` are sorted; `ecdf[i]` is the fraction of systems at or below
    `deltas[i]` (tied values share the same height).  The band is the
    pointwise 95% percentile interval of the resampled ECDF at each
    original delta.  `uncertainty_bar` is a user-supplied dataset
    uncertainty level for display, never computed.
    """

    labels: tuple
    deltas: np.ndarray
    ecdf: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    system_ids: list | None
    sip: ScalarWithCI
    mg: ScalarWithCI
    ml: ScalarWithCI
    delta_mue: ScalarWithCI
    ties: int
    uncertainty_bar: float | None = None

    def to_dict(self):
        return {
            "labels": list(self.labels),
            "deltas": [float(v) for v in self.deltas],
            "ecdf": [float(v) for v in self.ecdf],
            "band_lo": [float(v) for v in self.band_lo],
            "band_hi": [float(v) for v in self.band_hi],
            "system_ids": self.system_ids,
            "sip": self.sip.to_dict(),
            "mg": self.mg.to_dict(),
            "ml": self.ml.to_dict(),
            "delta_mue": self.delta_mue.to_dict(),
            "ties": self.ties,
            "uncertainty_bar": self.uncertainty_bar,
        }

    def rows(self):
        """One (system_id, delta, ecdf, band_lo, band_hi) row per system."""
        ids = self.system_ids or [str(i) for i in range(len(self.deltas))]
        for i in range(len(self.deltas)):
            yield ids[i], float(self.deltas[i]), float(self.ecdf[i]), float(
                self.band_lo[i]
            ), float(self.band_hi[i])


def _conditional_row_means(matrix, mask):
    counts = mask.sum(axis=1)
    sums = np.where(mask, matrix, 0.0).sum(axis=1)
    return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def _percentile_ci(values):
    vals = np.asarray(values, dtype=float)
    vals = vals[~np.isnan(vals)]
    if vals.size == 0:
        return None, None
    lo, hi = np.percentile(vals, [2.5, 97.5])
    return float(lo), float(hi)


def delta_ecdf(e1, e2, plan, labels=("M1", "M2"), system_ids=None, uncertainty_bar=None):
    """Delta-ECDF report for one method pair under a bootstrap plan.

    The same paired resamples provide the pointwise ECDF band and the
    percentile intervals of the annotated scalars (SIP, MG, ML, MUE
    difference).  Replicates where MG or ML is undefined (no strict gain
    or loss) are skipped in the corresponding interval.
    """
    deltas = abs_error_deltas(e1, e2)
    n = deltas.size
    if n < 2:
        raise ValueError("need at least 2 systems")
    order = np.argsort(deltas, kind="stable")
    sorted_deltas = deltas[order]
    # Height of the ECDF at each sorted point; ties share their maximum.
    ecdf = np.searchsorted(sorted_deltas, sorted_deltas, side="right") / n

    idx = inference.index_matrix(plan, n)
    boot = deltas[idx]  # (B, n') resampled delta rows
    band = np.empty((plan.B, n))
    boot_sorted = np.sort(boot, axis=1)
    for b in range(plan.B):
        band[b] = np.searchsorted(boot_sorted[b], sorted_deltas, side="right") / boot.shape[1]
    band_lo, band_hi = np.percentile(band, [2.5, 97.5], axis=0)

    sip_val = float((deltas < 0).mean())
    sip_boot = (boot < 0).mean(axis=1)
    # Replicates with no strict gain (or loss) leave MG (or ML) undefined: NaN.
    mg_boot = _conditional_row_means(boot, boot < 0)
    ml_boot = _conditional_row_means(boot, boot > 0)
    dmue_boot = boot.mean(axis=1)

    mg_val = _mean_gain(deltas)
    ml_neg = _mean_gain(-deltas)
    ml_val = None if ml_neg is None else -ml_neg
    dmue_val, _ = mue_decomposition(e1, e2)
    ordered_ids = None
    if system_ids is not None:
        ordered_ids = [system_ids[i] for i in order]
    return DeltaEcdfReport(
        labels=tuple(labels),
        deltas=sorted_deltas,
        ecdf=ecdf,
        band_lo=band_lo,
        band_hi=band_hi,
        system_ids=ordered_ids,
        sip=ScalarWithCI(sip_val, *_percentile_ci(sip_boot)),
        mg=ScalarWithCI(mg_val, *_percentile_ci(mg_boot)),
        ml=ScalarWithCI(ml_val, *_percentile_ci(ml_boot)),
        delta_mue=ScalarWithCI(dmue_val, *_percentile_ci(dmue_boot)),
        ties=int((deltas == 0).sum()),
        uncertainty_bar=uncertainty_bar,
    )
