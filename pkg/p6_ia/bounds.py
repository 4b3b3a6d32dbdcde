"""Closed-form DoF inner and outer bounds for the K-user MIMO interference channel."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from p6_ia.enums import InnerScheme, Regime


@dataclass(slots=True, frozen=True)
class DofBounds:
    """Inner and outer bound on the total DoF, as exact rationals."""

    inner: Fraction
    outer: Fraction
    tight: bool
    R: int
    regime: Regime

    def __post_init__(self) -> None:
        """Validate bound ordering and the tightness flag."""
        if self.inner > self.outer:
            raise ValueError(f"inner bound {self.inner} exceeds outer bound {self.outer}")
        if self.tight != (self.inner == self.outer):
            raise ValueError("tight must hold exactly when inner equals outer")

    @property
    def exact(self) -> Optional[Fraction]:
        """Return the DoF when the bounds meet, otherwise None."""
        return self.inner if self.tight else None


def _require_positive(**values: int) -> None:
    for label, value in values.items():
        if value < 1:
            raise ValueError(f"{label} must be at least 1, got {value}")


def ratio(M: int, N: int) -> int:
    """Return R = floor(max(M, N) / min(M, N))."""
    _require_positive(M=M, N=N)
    return max(M, N) // min(M, N)


def two_user_mimo_dof(M1: int, N1: int, M2: int, N2: int) -> Fraction:
    """Return the DoF of the two-user MIMO interference channel."""
    _require_positive(M1=M1, N1=N1, M2=M2, N2=N2)
    return Fraction(min(M1 + M2, N1 + N2, max(M1, N2), max(M2, N1)))


def outerbound(K: int, M: int, N: int) -> Fraction:
    """Return K*min(M, N) when K <= R, else K*max(M, N)/(R + 1)."""
    _require_positive(K=K, M=M, N=N)
    R = ratio(M, N)
    if K <= R:
        return Fraction(K * min(M, N))
    return Fraction(K * max(M, N), R + 1)


def innerbound(K: int, M: int, N: int) -> Fraction:
    """Return K*min(M, N) when K <= R, else K*min(M, N)*R/(R + 1)."""
    _require_positive(K=K, M=M, N=N)
    R = ratio(M, N)
    if K <= R:
        return Fraction(K * min(M, N))
    return Fraction(K * min(M, N) * R, R + 1)


def innerbound_scheme(K: int, M: int, N: int) -> InnerScheme:
    """Name the achievability argument that attains innerbound(K, M, N)."""
    _require_positive(K=K, M=M, N=N)
    R = ratio(M, N)
    if K <= R:
        return InnerScheme.ZERO_FORCING
    if K == R + 1:
        return InnerScheme.DISCARD_ONE_USER
    return InnerScheme.SIMO_REDUCTION


def characterize(K: int, M: int, N: int) -> DofBounds:
    """Bundle both bounds; tight when K <= R or min(M, N) divides max(M, N)."""
    R = ratio(M, N)
    inner = innerbound(K, M, N)
    outer = outerbound(K, M, N)
    tight = K <= R or max(M, N) % min(M, N) == 0
    return DofBounds(
        inner=inner,
        outer=outer,
        tight=tight,
        R=R,
        regime=Regime.K_LE_R if K <= R else Regime.K_GT_R,
    )
