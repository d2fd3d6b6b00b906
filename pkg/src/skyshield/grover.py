"""Closed-form Grover search statistics as an eavesdropping monitor.

Treats the sifted key as a database of N entries of which M are marked
(errored) and evaluates the textbook amplitude-amplification success curve
P(k) = sin^2((2k+1) arcsin(sqrt(M/N))) for k = 0..7 iterations. Nothing is
executed on quantum hardware; the curve is an analytic diagnostic of how
fast an adversary could amplify the observed error pattern.

For (N, M) = (100, 15) the curve evaluates to 0.864 at k = 1 exactly
(algebraically 0.15 * (3 - 0.6)^2) and 0.8047340427 at k = 6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

CURVE_POINTS = 8

TRUSTED = "trusted"
SUSPECT = "suspect"
COMPROMISED = "compromised"


def marked_count(qber: float, n: int) -> int:
    """Round-half-up qber * n, clamped to [0, n]."""
    if n < 0:
        raise ValueError("n must be non-negative")
    m = math.floor(qber * n + 0.5)
    return min(n, max(0, m))


def success_probability(n: int, m: int, k: int) -> float:
    """P(success) after k Grover iterations with m marked of n entries.

    Exactly 0.0 when m == 0 (nothing to find, no false alarm) and 1.0 in
    the degenerate m == n case.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= m <= n:
        raise ValueError("m must be in [0, n]")
    if k < 0:
        raise ValueError("k must be non-negative")
    if m == 0:
        return 0.0
    theta = math.asin(math.sqrt(m / n))
    return math.sin((2 * k + 1) * theta) ** 2


def detection_curve(n: int, m: int) -> list[float]:
    """Success probabilities for k = 0..7."""
    return [success_probability(n, m, k) for k in range(CURVE_POINTS)]


def first_local_max(curve: list[float]) -> int | None:
    """Smallest k with curve[k] >= curve[k+1]; 7 if nondecreasing.

    None for an all-zero curve (no marked entries, peak undefined).
    """
    if all(p == 0.0 for p in curve):
        return None
    for k in range(len(curve) - 1):
        if curve[k] >= curve[k + 1]:
            return k
    return len(curve) - 1


def expected_queries(n: int, m: int) -> float | None:
    """Optimal-iteration scaling (pi/4) sqrt(n/m); None when m == 0."""
    if n <= 0:
        raise ValueError("n must be positive")
    if m == 0:
        return None
    return (math.pi / 4.0) * math.sqrt(n / m)


@dataclass(frozen=True)
class GroverReport:
    """Analytic amplification profile for one sifted key."""

    n: int
    m: int
    theta: float
    probs: tuple[float, ...]
    k_star: int | None
    p_max: float
    expected_queries: float | None

    @classmethod
    def from_counts(cls, n: int, m: int) -> "GroverReport":
        curve = detection_curve(n, m)
        k_star = first_local_max(curve)
        return cls(
            n=n,
            m=m,
            theta=0.0 if m == 0 else math.asin(math.sqrt(m / n)),
            probs=tuple(curve),
            k_star=k_star,
            p_max=0.0 if k_star is None else curve[k_star],
            expected_queries=expected_queries(n, m),
        )

    @classmethod
    def from_qber(cls, qber: float, n: int) -> "GroverReport":
        return cls.from_counts(n, marked_count(qber, n))

    @property
    def detection_p1(self) -> float:
        """Success probability after a single iteration."""
        return self.probs[1]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "theta": self.theta,
            "probs": list(self.probs),
            "k_star": self.k_star,
            "p_max": self.p_max,
            "expected_queries": self.expected_queries,
        }


@dataclass(frozen=True)
class TrustVerdict:
    """Channel trust classification from the QBER estimate."""

    level: str
    detection_p1: float


def trust_verdict(qber: float, report: GroverReport,
                  threshold: float) -> TrustVerdict:
    """trusted at zero error, suspect up to the gate, compromised above it."""
    if qber == 0.0:
        level = TRUSTED
    elif qber <= threshold:
        level = SUSPECT
    else:
        level = COMPROMISED
    return TrustVerdict(level, report.detection_p1)
