"""Symbolic exponent tuples and the product-of-powers sets they index.

A precoder column built as prod_s T_s ** alpha_s applied to the all-ones
vector is identified by its exponent tuple alpha. The column sets used by the
SIMO construction are unions of boxes: every slot ranges over one interval.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

Slot = Tuple[int, int, int]

ENUMERATION_LIMIT = 1_000_000


@dataclass(slots=True, frozen=True, order=True)
class ExponentTuple:
    """Exponents over the ordered slots (k, j, i) of the alignment index set."""

    values: Tuple[int, ...]

    def __post_init__(self) -> None:
        """Validate exponents are non-negative."""
        if any(value < 0 for value in self.values):
            raise ValueError(f"exponents must be non-negative, got {self.values}")

    def incremented(self, position: int, by: int = 1) -> ExponentTuple:
        """Return the tuple with one slot raised by ``by``."""
        values = list(self.values)
        values[position] += by
        return ExponentTuple(tuple(values))

    def as_mapping(self, slots: Sequence[Slot]) -> Dict[Slot, int]:
        """Return the exponents keyed by slot."""
        if len(slots) != len(self.values):
            raise ValueError(f"expected {len(self.values)} slots, got {len(slots)}")
        return dict(zip(slots, self.values))


@dataclass(slots=True, frozen=True)
class ExponentBox:
    """All tuples whose slot s lies in [lows[s], highs[s]]."""

    lows: Tuple[int, ...]
    highs: Tuple[int, ...]

    def __post_init__(self) -> None:
        """Validate the interval bounds."""
        if len(self.lows) != len(self.highs):
            raise ValueError("lows and highs must have the same length")
        for low, high in zip(self.lows, self.highs):
            if low < 0 or low > high:
                raise ValueError(f"invalid exponent interval [{low}, {high}]")

    @classmethod
    def uniform(cls, slots: int, low: int, high: int) -> ExponentBox:
        """Return the box with the same interval in every slot."""
        return cls(lows=(low,) * slots, highs=(high,) * slots)

    @property
    def slots(self) -> int:
        """Return the number of slots."""
        return len(self.lows)

    @property
    def cardinality(self) -> int:
        """Return the number of tuples in the box."""
        count = 1
        for low, high in zip(self.lows, self.highs):
            count *= high - low + 1
        return count

    def contains(self, exponents: ExponentTuple) -> bool:
        """Return True when every slot lies inside its interval."""
        return all(low <= value <= high for low, value, high in zip(self.lows, exponents.values, self.highs))

    def contains_box(self, other: ExponentBox) -> bool:
        """Return True when ``other`` lies entirely inside this box."""
        return all(
            low <= other_low and other_high <= high
            for low, high, other_low, other_high in zip(self.lows, self.highs, other.lows, other.highs)
        )

    def shifted(self, position: int, by: int = 1) -> ExponentBox:
        """Return the image of the box under incrementing one slot."""
        lows = list(self.lows)
        highs = list(self.highs)
        lows[position] += by
        highs[position] += by
        return ExponentBox(tuple(lows), tuple(highs))

    def with_interval(self, position: int, low: int, high: int) -> ExponentBox:
        """Return a copy with one slot's interval replaced."""
        lows = list(self.lows)
        highs = list(self.highs)
        lows[position] = low
        highs[position] = high
        return ExponentBox(tuple(lows), tuple(highs))

    def tuples(self) -> Iterator[ExponentTuple]:
        """Yield tuples in lexicographic order."""
        ranges = [range(low, high + 1) for low, high in zip(self.lows, self.highs)]
        for values in itertools.product(*ranges):
            yield ExponentTuple(tuple(values))


@dataclass(slots=True, frozen=True)
class ExponentFamily:
    """A union of boxes; column order follows box order then lexicographic order."""

    boxes: Tuple[ExponentBox, ...]

    @property
    def cardinality(self) -> int:
        """Return the number of tuples, assuming the boxes are disjoint."""
        return sum(box.cardinality for box in self.boxes)

    def contains(self, exponents: ExponentTuple) -> bool:
        """Return True when some box holds the tuple."""
        return any(box.contains(exponents) for box in self.boxes)

    def tuples(self) -> Iterator[ExponentTuple]:
        """Yield every tuple of every box."""
        for box in self.boxes:
            yield from box.tuples()

    def find_uncovered(self, box: ExponentBox) -> Optional[ExponentTuple]:
        """Return a tuple of ``box`` outside the family, or None when the family covers it.

        A box inside a single member is covered outright. Otherwise the low
        corner, and then the corner moved along one slot at a time, are tried;
        when member intervals are disjoint slot by slot one of those points is
        always uncovered. Anything else falls back to enumeration.
        """
        if any(member.contains_box(box) for member in self.boxes):
            return None
        corner = ExponentTuple(box.lows)
        if not self.contains(corner):
            return corner
        for member in self.boxes:
            if not member.contains(corner):
                continue
            for position, (low, high) in enumerate(zip(box.lows, box.highs)):
                for value in (low, high):
                    if member.lows[position] <= value <= member.highs[position]:
                        continue
                    candidate = corner.incremented(position, value - low)
                    if not self.contains(candidate):
                        return candidate
        if box.cardinality > ENUMERATION_LIMIT:
            raise ValueError(f"cannot decide containment of a box with {box.cardinality} tuples")
        for candidate in box.tuples():
            if not self.contains(candidate):
                return candidate
        return None


def v1_family(gamma: int, R: int, n: int) -> ExponentFamily:
    """Return the column tags of the larger precoder: block m spans [m(n+1)+1, m(n+1)+n+1]."""
    return ExponentFamily(
        tuple(ExponentBox.uniform(gamma, m * (n + 1) + 1, m * (n + 1) + n + 1) for m in range(R))
    )


def v2_family(gamma: int, R: int, n: int) -> ExponentFamily:
    """Return the column tags of the smaller precoder: block m spans [m(n+1)+1, m(n+1)+n]."""
    return ExponentFamily(tuple(ExponentBox.uniform(gamma, m * (n + 1) + 1, m * (n + 1) + n) for m in range(R)))
