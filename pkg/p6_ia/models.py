"""Precoder sets and the block index maps used by the constant-channel schemes."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from p6_ia.channel import ExtendedChannel
from p6_ia.enums import Scheme


@dataclass(slots=True, frozen=True, eq=False)
class PrecoderSet:
    """Per-user precoders V[i] over a (possibly extended) channel.

    ``precoders[i - 1]`` has ``channel.cols`` rows and ``allocation[i - 1]``
    columns. Users with a zero allocation stay silent.
    """

    precoders: Tuple[np.ndarray, ...]
    allocation: Tuple[int, ...]
    scheme: Scheme
    channel: ExtendedChannel
    flags: Tuple[str, ...] = ()
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate user count, matrix shapes and entries.

        Over an extension every entry must be nonzero, otherwise a stream
        would skip some symbols and the block-diagonal separability argument
        no longer applies. Column rank is left to the receiver checks.
        """
        if len(self.precoders) != len(self.allocation):
            raise ValueError("precoders and allocation must have the same length")
        if len(self.allocation) != self.channel.K:
            raise ValueError(f"expected {self.channel.K} users, got {len(self.allocation)}")
        for user, (matrix, streams) in enumerate(zip(self.precoders, self.allocation), start=1):
            if streams < 0:
                raise ValueError(f"user {user} has a negative allocation")
            if matrix.shape != (self.channel.cols, streams):
                raise ValueError(
                    f"user {user} precoder must be {(self.channel.cols, streams)}, got {matrix.shape}"
                )
            if not np.all(np.isfinite(matrix)):
                raise ValueError(f"user {user} precoder has non-finite entries")
            if self.channel.mu > 1 and not np.all(matrix != 0):
                raise ValueError(f"user {user} precoder has a zero entry over a {self.channel.mu}-symbol extension")

    @property
    def K(self) -> int:
        """Return the number of users."""
        return len(self.allocation)

    @property
    def extension(self) -> int:
        """Return the symbol extension length (1 means no extension)."""
        return self.channel.mu

    @property
    def total_streams(self) -> int:
        """Return the total number of streams over the extension."""
        return sum(self.allocation)

    @property
    def total_dof(self) -> Fraction:
        """Return total streams per channel use."""
        return Fraction(self.total_streams, self.extension)

    def precoder(self, user: int) -> np.ndarray:
        """Return V[user] (1-based)."""
        return self.precoders[user - 1]

    def on_channel(self, channel: ExtendedChannel) -> PrecoderSet:
        """Return the same precoders paired with another channel of identical shape."""
        if (channel.K, channel.rows, channel.cols) != (self.channel.K, self.channel.rows, self.channel.cols):
            raise ValueError("replacement channel must have the same dimensions")
        return replace(self, channel=channel)


@dataclass(slots=True, frozen=True)
class IndexMap:
    """Block index n(i, j) chosen for user i's precoder at receiver j."""

    scheme: Scheme
    R: int
    table: Mapping[Tuple[int, int], int]

    def __call__(self, i: int, j: int) -> int:
        """Return n(i, j)."""
        try:
            return self.table[(i, j)]
        except KeyError as exc:
            raise KeyError(f"n({i}, {j}) is not defined for {self.scheme.value} with R={self.R}") from exc


def theorem4_index_map(R: int) -> IndexMap:
    """Index map for receivers 3..R+1, where receiver j aligns user j-1."""
    table: Dict[Tuple[int, int], int] = {}
    for j in range(3, R + 2):
        for i in range(1, R + 3):
            if i in (j, j - 1):
                continue
            if i in (1, R + 1, R + 2):
                table[(i, j)] = j - 1
            elif j > i + 1:
                table[(i, j)] = j - 2
            else:
                table[(i, j)] = j
    return IndexMap(scheme=Scheme.THEOREM4, R=R, table=table)


def theorem5_index_map(R: int) -> IndexMap:
    """Index map for receivers 2..R+1, where receiver j aligns user j+1."""
    table: Dict[Tuple[int, int], int] = {}
    for j in range(2, R + 2):
        for i in range(1, R + 3):
            if i in (j, j + 1):
                continue
            if i in (1, 2):
                table[(i, j)] = j - 1
            elif j < i - 1:
                table[(i, j)] = j
            else:
                table[(i, j)] = j - 2
    return IndexMap(scheme=Scheme.THEOREM5, R=R, table=table)


@dataclass(slots=True, frozen=True)
class JobResult:
    """Outcome of one verification job in a batch run."""

    name: str
    passed: bool
    status: str
    details: Mapping[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
