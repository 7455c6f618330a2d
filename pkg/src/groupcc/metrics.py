"""Decomposition accuracy scoring against ground truth.

Three percentages over unordered off-diagonal pairs: recall of true
interactions (missing-linkage view), recall of true non-interactions
(false-linkage view), and overall agreement.  Normalizing each sum over
unordered pairs makes perfect agreement come out at exactly 100.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .interaction import InteractionMatrix


@dataclass(frozen=True)
class AccuracyScores:
    """rho1/rho2 are None when their denominator has no pairs to count."""

    rho1: Optional[float]
    rho2: Optional[float]
    rho3: float

    def as_dict(self) -> dict:
        return {"rho1": self.rho1, "rho2": self.rho2, "rho3": self.rho3}


def score(theta: InteractionMatrix, theta_star: InteractionMatrix) -> AccuracyScores:
    """Score a discovered matrix against the ideal one.

    rho1 is undefined for a fully separable ideal (no true links to find);
    rho2 is undefined for a fully non-separable ideal (no true non-links).
    """
    if theta.n != theta_star.n:
        raise ValidationError("matrices must have the same dimension")
    n = theta.n
    iu = np.triu_indices(n, k=1)
    got = theta.bits[iu]
    ideal = theta_star.bits[iu]

    true_links = int(ideal.sum())
    true_nonlinks = int((~ideal).sum())
    rho1 = (
        None
        if true_links == 0
        else 100.0 * int((got & ideal).sum()) / true_links
    )
    rho2 = (
        None
        if true_nonlinks == 0
        else 100.0 * int((~got & ~ideal).sum()) / true_nonlinks
    )
    total = n * (n - 1) // 2
    rho3 = 100.0 * int((got == ideal).sum()) / total
    return AccuracyScores(rho1=rho1, rho2=rho2, rho3=rho3)
