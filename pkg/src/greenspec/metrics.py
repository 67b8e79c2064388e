"""Pole matching and the amplitude-weighted reconstruction error.

The error functional compares a true spectrum {(c_l, w_l)} against an
estimate {(c_hat_m, w_hat_m)} after pairing poles by a minimum-cost
assignment on frequency distance:

    eps = [ sum_pairs |c_l| |w_l - w_hat_l| + |c_l - c_hat_l| ] / D,
    D   = sum_true |c_j| |w_j| + |c_j|.

Each unmatched true pole contributes as if estimated by nothing (its full
denominator weight enters the numerator); each unmatched estimated pole
contributes its own magnitude.  The functional is zero exactly for a perfect
full matching and invariant under joint amplitude rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .spectrum import LineSpectrum


@dataclass(frozen=True)
class MatchReport:
    """Pairing between true and estimated poles plus the resulting error."""

    pairs: tuple[tuple[int, int], ...]
    unmatched_true: tuple[int, ...]
    unmatched_est: tuple[int, ...]
    epsilon: float

    def to_json(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "unmatched_true": list(self.unmatched_true),
            "unmatched_est": list(self.unmatched_est),
            "epsilon": self.epsilon,
        }


def match_poles(
    truth: LineSpectrum,
    estimate: LineSpectrum,
    max_distance: float | None = None,
) -> MatchReport:
    """Minimum-cost assignment of estimated poles to true poles.

    Cost is |w_l - w_hat_m|; assignments farther apart than ``max_distance``
    (default: a quarter of the joint frequency span) are rejected to the
    unmatched lists.
    """
    if truth.domain != estimate.domain:
        raise ValueError("spectra must share a domain")
    wt = truth.frequencies()
    we = estimate.frequencies()
    if len(wt) == 0 or len(we) == 0:
        return MatchReport(
            pairs=(),
            unmatched_true=tuple(range(len(wt))),
            unmatched_est=tuple(range(len(we))),
            epsilon=_epsilon(truth, estimate, ()),
        )
    if max_distance is None:
        allfreq = np.concatenate([wt, we])
        span = float(allfreq.max() - allfreq.min())
        max_distance = np.inf if span == 0.0 else span / 4.0
    cost = np.abs(wt[:, None] - we[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairs = tuple(
        (int(r), int(c)) for r, c in zip(rows, cols) if cost[r, c] <= max_distance
    )
    return MatchReport(
        pairs=pairs,
        unmatched_true=tuple(i for i in range(len(wt)) if i not in {p[0] for p in pairs}),
        unmatched_est=tuple(j for j in range(len(we)) if j not in {p[1] for p in pairs}),
        epsilon=_epsilon(truth, estimate, pairs),
    )


def _epsilon(truth: LineSpectrum, estimate: LineSpectrum, pairs) -> float:
    matched_true = {p[0] for p in pairs}
    matched_est = {p[1] for p in pairs}
    numer = 0.0
    for l, m in pairs:
        pt, pe = truth.poles[l], estimate.poles[m]
        numer += abs(pt.amplitude) * abs(pt.frequency - pe.frequency)
        numer += abs(pt.amplitude - pe.amplitude)
    for l, pt in enumerate(truth.poles):
        if l not in matched_true:
            numer += abs(pt.amplitude) * abs(pt.frequency) + abs(pt.amplitude)
    for m, pe in enumerate(estimate.poles):
        if m not in matched_est:
            numer += abs(pe.amplitude)
    denom = sum(abs(p.amplitude) * abs(p.frequency) + abs(p.amplitude) for p in truth.poles)
    if denom == 0.0:
        raise ValueError("true spectrum has zero total weight")
    return numer / denom


def reconstruction_error(truth: LineSpectrum, estimate: LineSpectrum) -> float:
    """Amplitude-weighted frequency-and-amplitude error of the estimate."""
    if len(truth.poles) == 0:
        raise ValueError("true spectrum is empty")
    return match_poles(truth, estimate).epsilon
