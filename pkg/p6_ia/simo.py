"""Symbol-extension alignment for the K-user SIMO channel with R receive antennas.

Users 1..R+1 send the larger precoder V1, users R+2..K the smaller V2. Both
are sets of products of diagonal T matrices applied to the all-ones vector,
chosen so that every T V2 column is a column of V1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from p6_ia.channel import ExtendedChannel, SystemConfig
from p6_ia.enums import Scheme
from p6_ia.errors import CapExceededError, ConfigError, ResampleAdvisedError
from p6_ia.exponents import ExponentFamily, ExponentTuple, Slot, v1_family, v2_family
from p6_ia.field import FIELD_PRIME, field_rank, field_solve, pivot_columns, sample_field_channels
from p6_ia.linalg import DEFAULT_RANK_TOLERANCE, collinearity_residual, unit_columns
from p6_ia.models import PrecoderSet
from p6_ia.verify import AlignmentReport, ReceiverReport, verify_precoders

LOGGER = logging.getLogger(__name__)

DEFAULT_MU_CAP = 4096
DEFAULT_CONDITION_LIMIT = 1e8
_ZERO_FLOOR = 1e-14


def _require_simo_shape(K: int, R: int, n: Optional[int] = None) -> None:
    if R < 1:
        raise ConfigError(f"R must be at least 1, got {R}")
    if K <= R + 1:
        raise ConfigError(f"SIMO alignment needs K > R + 1, got K={K}, R={R}")
    if n is not None and n < 1:
        raise ConfigError(f"n must be at least 1, got {n}")


def gamma_mu(K: int, R: int, n: int, mu_cap: Optional[int] = DEFAULT_MU_CAP) -> Tuple[int, int]:
    """Return (gamma, mu) = (KR(K-R-1), (R+1)(n+1)**gamma); refuse mu above ``mu_cap``."""
    _require_simo_shape(K, R, n)
    gamma = K * R * (K - R - 1)
    mu = (R + 1) * (n + 1) ** gamma
    if mu_cap is not None and mu > mu_cap:
        raise CapExceededError(mu, mu_cap)
    return gamma, mu


def achieved_dof(K: int, R: int, n: int) -> Fraction:
    """Return total DoF per channel use reached with extension order n."""
    gamma, _ = gamma_mu(K, R, n, mu_cap=None)
    numerator = (R + 1) * R * (n + 1) ** gamma + (K - R - 1) * R * n**gamma
    return Fraction(numerator, (R + 1) * (n + 1) ** gamma)


def per_user_dof(K: int, R: int, n: int) -> Tuple[int, ...]:
    """Return per-user stream counts over the extension."""
    gamma, _ = gamma_mu(K, R, n, mu_cap=None)
    large = R * (n + 1) ** gamma
    small = R * n**gamma
    return tuple(large if user <= R + 1 else small for user in range(1, K + 1))


def epsilon_n(K: int, R: int, n: int) -> Fraction:
    """Return the per-user shortfall of users R+2..K below R/(R+1) per channel use."""
    gamma, _ = gamma_mu(K, R, n, mu_cap=None)
    return Fraction(R * ((n + 1) ** gamma - n**gamma), (R + 1) * (n + 1) ** gamma)


@dataclass(slots=True, frozen=True)
class AlignmentIndexSet:
    """Pairs (k, j) whose T matrices generate the precoders."""

    K: int
    R: int
    pairs: Tuple[Tuple[int, int], ...]
    gamma: int

    def __post_init__(self) -> None:
        """Validate the pair count against gamma."""
        if len(self.pairs) * self.R != self.gamma:
            raise ValueError(f"{len(self.pairs)} pairs with R={self.R} cannot give gamma={self.gamma}")

    @property
    def slots(self) -> Tuple[Slot, ...]:
        """Return the ordered exponent slots (k, j, i)."""
        return tuple((k, j, i) for k, j in self.pairs for i in range(1, self.R + 1))

    def reference_users(self, receiver: int) -> Tuple[int, ...]:
        """Return the R transmitters whose stacked channels are inverted at ``receiver``."""
        if receiver <= self.R + 1:
            return tuple(user for user in range(1, self.R + 2) if user != receiver)
        return tuple(range(1, self.R + 1))


def build_index_set(K: int, R: int) -> AlignmentIndexSet:
    """Enumerate {1..R+1} x {R+2..K} then {(k, j) in {R+2..K} x {R+1..K}, k != j}."""
    _require_simo_shape(K, R)
    pairs: List[Tuple[int, int]] = [(k, j) for k in range(1, R + 2) for j in range(R + 2, K + 1)]
    pairs.extend((k, j) for k in range(R + 2, K + 1) for j in range(R + 1, K + 1) if k != j)
    return AlignmentIndexSet(K=K, R=R, pairs=tuple(pairs), gamma=K * R * (K - R - 1))


@dataclass(slots=True, frozen=True, eq=False)
class TMatrixFamily:
    """Diagonals of every T[k, j]_i, one row per slot in index-set order."""

    mu: int
    slots: Tuple[Slot, ...]
    diagonals: np.ndarray
    max_condition: float

    def position(self, slot: Slot) -> int:
        """Return the row holding ``slot``."""
        return self.slots.index(slot)

    def diagonal(self, k: int, j: int, i: int) -> np.ndarray:
        """Return the diagonal of T[k, j]_i."""
        return self.diagonals[self.position((k, j, i))]


def _assemble_rows(
    coefficients: Dict[Tuple[int, int], np.ndarray],
    idx: AlignmentIndexSet,
    multiply: Callable[[np.ndarray, np.ndarray], np.ndarray],
) -> np.ndarray:
    """Stack one row per slot; T[k, R+1] rows for k >= R+2 take the anchor T[1, R+2]_1."""
    anchor = coefficients[(1, idx.R + 2)][:, 0]
    rows = []
    for k, j, i in idx.slots:
        row = coefficients[(k, j)][:, i - 1]
        if k >= idx.R + 2 and j == idx.R + 1:
            row = multiply(row, anchor)
        rows.append(row)
    return np.array(rows)


def build_t_family(
    ext: ExtendedChannel,
    idx: AlignmentIndexSet,
    condition_limit: float = DEFAULT_CONDITION_LIMIT,
) -> TMatrixFamily:
    """Compute every T diagonal slot by slot from R x R inversions.

    T[k, R+1] for k >= R+2 carries the extra right factor T[1, R+2]_1.
    """
    cfg = ext.base.config
    if cfg.M != 1 or cfg.N != idx.R or cfg.K != idx.K:
        raise ConfigError(f"expected a {idx.K}-user SIMO channel with {idx.R} receive antennas")
    channel = ext.blocks[..., 0]
    coefficients: Dict[Tuple[int, int], np.ndarray] = {}
    worst = 0.0
    for receiver in sorted({k for k, _ in idx.pairs}):
        refs = idx.reference_users(receiver)
        stack = np.stack([channel[receiver - 1, user - 1] for user in refs], axis=2)
        condition = float(np.max(np.linalg.cond(stack)))
        worst = max(worst, condition)
        if condition > condition_limit:
            raise ResampleAdvisedError(
                f"receiver {receiver} stack has condition number {condition:.3e} above {condition_limit:.1e}"
            )
        for k, j in idx.pairs:
            if k == receiver:
                rhs = channel[receiver - 1, j - 1][..., np.newaxis]
                coefficients[(k, j)] = np.linalg.solve(stack, rhs)[..., 0]
    diagonals = _assemble_rows(coefficients, idx, np.multiply)
    smallest = float(np.min(np.abs(diagonals)))
    if smallest < _ZERO_FLOOR:
        raise ResampleAdvisedError(f"T diagonal entry {smallest:.3e} is numerically zero")
    diagonals.setflags(write=False)
    LOGGER.debug("Built T family", extra={"mu": ext.mu, "slots": len(idx.slots), "max_condition": worst})
    return TMatrixFamily(mu=ext.mu, slots=idx.slots, diagonals=diagonals, max_condition=worst)


@dataclass(slots=True, frozen=True, eq=False)
class SimoPrecoders:
    """The two precoder matrices with one exponent tag per column."""

    n: int
    mu: int
    V1: np.ndarray
    V2: np.ndarray
    V1_tags: Tuple[ExponentTuple, ...]
    V2_tags: Tuple[ExponentTuple, ...]
    epsilon_n: Fraction
    index_set: AlignmentIndexSet

    def __post_init__(self) -> None:
        """Validate column counts against the tag lists and the defining cardinalities."""
        R, gamma = self.index_set.R, self.index_set.gamma
        if self.V1.shape != (self.mu, R * (self.n + 1) ** gamma) or len(self.V1_tags) != self.V1.shape[1]:
            raise ValueError(f"V1 must have {R * (self.n + 1) ** gamma} tagged columns of length {self.mu}")
        if self.V2.shape != (self.mu, R * self.n**gamma) or len(self.V2_tags) != self.V2.shape[1]:
            raise ValueError(f"V2 must have {R * self.n ** gamma} tagged columns of length {self.mu}")

    def as_precoder_set(self, ext: ExtendedChannel) -> PrecoderSet:
        """Assign V1 to users 1..R+1 and V2 to the rest."""
        if ext.mu != self.mu:
            raise ValueError(f"channel extension {ext.mu} does not match precoder length {self.mu}")
        R, K = self.index_set.R, self.index_set.K
        matrices = tuple(self.V1 if user <= R + 1 else self.V2 for user in range(1, K + 1))
        return PrecoderSet(
            precoders=matrices,
            allocation=tuple(matrix.shape[1] for matrix in matrices),
            scheme=Scheme.SIMO,
            channel=ext,
        )


def _power_products(t: TMatrixFamily, tags: Tuple[ExponentTuple, ...]) -> np.ndarray:
    exponents = np.array([tag.values for tag in tags], dtype=np.float64)
    logs = exponents @ np.log(t.diagonals)
    logs -= logs.real.max(axis=1, keepdims=True)
    return unit_columns(np.exp(logs).T)


def build_precoders(t: TMatrixFamily, idx: AlignmentIndexSet, n: int) -> SimoPrecoders:
    """Build V1 and V2 as normalized power products of the T diagonals."""
    gamma, mu = gamma_mu(idx.K, idx.R, n, mu_cap=None)
    if t.mu != mu:
        raise ConfigError(f"T family has length {t.mu}, extension order n={n} needs {mu}")
    v1_tags = tuple(v1_family(gamma, idx.R, n).tuples())
    v2_tags = tuple(v2_family(gamma, idx.R, n).tuples())
    V1 = _power_products(t, v1_tags)
    V2 = _power_products(t, v2_tags)
    smallest = min(float(np.min(np.abs(V1))), float(np.min(np.abs(V2))))
    if smallest <= 0.0:
        raise ResampleAdvisedError("a precoder entry underflowed to zero")
    LOGGER.debug("Built SIMO precoders", extra={"mu": mu, "v1_columns": len(v1_tags), "v2_columns": len(v2_tags)})
    return SimoPrecoders(
        n=n,
        mu=mu,
        V1=V1,
        V2=V2,
        V1_tags=v1_tags,
        V2_tags=v2_tags,
        epsilon_n=epsilon_n(idx.K, idx.R, n),
        index_set=idx,
    )


@dataclass(slots=True, frozen=True)
class SymbolicCertificate:
    """Outcome of the exponent-level containment check.

    ``v1_u_slot`` records which slot's image of V2 is taken as the V1 columns
    that also align at receivers R+2..K from transmitter R+1.
    """

    K: int
    R: int
    n: int
    passed: bool
    increments_checked: int
    v1_u_slot: Slot
    slot: Optional[Slot] = None
    violating: Optional[ExponentTuple] = None
    source: Optional[ExponentTuple] = None


def alignment_certificate(
    v1: ExponentFamily,
    v2: ExponentFamily,
    idx: AlignmentIndexSet,
    n: int,
) -> SymbolicCertificate:
    """Check that raising any one slot of any V2 tag lands in the V1 family."""
    slots = idx.slots
    v1_u_slot: Slot = (1, idx.R + 2, 1)
    checked = 0
    for box in v2.boxes:
        for position, slot in enumerate(slots):
            violating = v1.find_uncovered(box.shifted(position))
            if violating is not None:
                LOGGER.info("Symbolic alignment failed", extra={"slot": slot, "violating": violating.values})
                return SymbolicCertificate(
                    K=idx.K,
                    R=idx.R,
                    n=n,
                    passed=False,
                    increments_checked=checked,
                    v1_u_slot=v1_u_slot,
                    slot=slot,
                    violating=violating,
                    source=violating.incremented(position, -1),
                )
            checked += box.cardinality
    return SymbolicCertificate(K=idx.K, R=idx.R, n=n, passed=True, increments_checked=checked, v1_u_slot=v1_u_slot)


def verify_alignment_symbolic(K: int, R: int, n: int) -> SymbolicCertificate:
    """Verify the containment property from exponent sets alone, for any (K, R, n)."""
    idx = build_index_set(K, R)
    gamma, _ = gamma_mu(K, R, n, mu_cap=None)
    return alignment_certificate(v1_family(gamma, R, n), v2_family(gamma, R, n), idx, n)


def column_match_residual(p: SimoPrecoders, t: TMatrixFamily) -> float:
    """Return the worst collinearity residual between T V2 columns and their V1 partners."""
    v1_index = {tag: column for column, tag in enumerate(p.V1_tags)}
    worst = 0.0
    for position, diagonal in enumerate(t.diagonals):
        for column, tag in enumerate(p.V2_tags):
            target = tag.incremented(position)
            if target not in v1_index:
                raise ValueError(f"shifted tag {target.values} has no V1 column")
            image = diagonal * p.V2[:, column]
            worst = max(worst, collinearity_residual(image, p.V1[:, v1_index[target]]))
    return worst


def verify_alignment_numeric(
    p: SimoPrecoders,
    ext: ExtendedChannel,
    tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> AlignmentReport:
    """Rank-check every receiver of the SIMO construction."""
    return verify_precoders(p.as_precoder_set(ext), tolerance)


def build_field_t_family(channel: np.ndarray, idx: AlignmentIndexSet, prime: int = FIELD_PRIME) -> np.ndarray:
    """Return every T diagonal as residues mod ``prime``, one row per slot in index-set order.

    ``channel`` holds H[k, j] per slot with shape (K, K, mu, R), the layout of
    ExtendedChannel.blocks without the transmit axis.
    """
    coefficients: Dict[Tuple[int, int], np.ndarray] = {}
    for receiver in sorted({k for k, _ in idx.pairs}):
        refs = idx.reference_users(receiver)
        targets = [j for k, j in idx.pairs if k == receiver]
        stack = np.stack([channel[receiver - 1, user - 1] for user in refs], axis=2)
        rhs = np.stack([channel[receiver - 1, j - 1] for j in targets], axis=2)
        solved = field_solve(stack, rhs, prime)
        for column, j in enumerate(targets):
            coefficients[(receiver, j)] = solved[:, :, column]
    diagonals = _assemble_rows(coefficients, idx, lambda row, anchor: row * anchor % prime)
    if not np.all(diagonals):
        raise ResampleAdvisedError(f"a T diagonal entry is zero modulo {prime}")
    return diagonals


def field_power_products(diagonals: np.ndarray, tags: Sequence[ExponentTuple], prime: int = FIELD_PRIME) -> np.ndarray:
    """Return the mu x len(tags) matrix whose column m is prod_s t_s ** tags[m][s] mod ``prime``."""
    exponents = np.array([tag.values for tag in tags], dtype=np.int64)
    slots, mu = diagonals.shape
    top = int(exponents.max()) if exponents.size else 0
    powers = np.empty((slots, top + 1, mu), dtype=np.int64)
    powers[:, 0] = 1
    for exponent in range(1, top + 1):
        powers[:, exponent] = powers[:, exponent - 1] * diagonals % prime
    columns = np.ones((exponents.shape[0], mu), dtype=np.int64)
    for slot in range(slots):
        columns = columns * powers[slot, exponents[:, slot]] % prime
    return columns.T


def field_alignment_report(
    channel: np.ndarray,
    precoders: Sequence[np.ndarray],
    prime: int = FIELD_PRIME,
) -> AlignmentReport:
    """Rank every receiver exactly: interference first, then the desired columns, in one elimination."""
    K, _, mu, R = channel.shape

    def received(receiver: int, user: int) -> np.ndarray:
        columns = precoders[user - 1]
        product = channel[receiver - 1, user - 1][:, :, np.newaxis] * columns[:, np.newaxis, :] % prime
        return product.reshape(mu * R, columns.shape[1])

    receivers = []
    for receiver in range(1, K + 1):
        streams = precoders[receiver - 1].shape[1]
        interference = np.hstack([received(receiver, user) for user in range(1, K + 1) if user != receiver])
        desired = received(receiver, receiver)
        pivots = pivot_columns(np.hstack([interference, desired]), prime)
        interference_rank = sum(1 for column in pivots if column < interference.shape[1])
        joint_rank = len(pivots)
        desired_rank = streams if joint_rank - interference_rank == streams else field_rank(desired, prime)
        receivers.append(
            ReceiverReport(
                receiver=receiver,
                streams=streams,
                interference_count=interference.shape[1],
                interference_rank=interference_rank,
                interference_bound=mu * R - streams,
                desired_rank=desired_rank,
                joint_rank=joint_rank,
            )
        )
        LOGGER.debug(
            "Receiver ranked exactly",
            extra={"receiver": receiver, "interference_rank": interference_rank, "joint_rank": joint_rank},
        )
    return AlignmentReport(scheme=Scheme.SIMO, receivers=tuple(receivers), tolerance=0.0)


def verify_alignment_exact(
    K: int,
    R: int,
    n: int,
    seed: int = 0,
    mu_cap: Optional[int] = DEFAULT_MU_CAP,
    prime: int = FIELD_PRIME,
) -> AlignmentReport:
    """Build the construction over the integers mod ``prime`` and rank every receiver without round-off.

    Channels are drawn uniformly from the nonzero residues. Every minor of
    the receiver matrices is a rational function of the channels with integer
    coefficients, so a full joint rank here proves the generic rank over the
    complex numbers; a shortfall has probability about degree / prime.
    """
    idx = build_index_set(K, R)
    gamma, mu = gamma_mu(K, R, n, mu_cap=mu_cap)
    entries = sample_field_channels(SystemConfig(K=K, M=1, N=R, seed=seed), mu, prime)
    channel = np.ascontiguousarray(np.transpose(entries[..., 0], (1, 2, 0, 3)))
    diagonals = build_field_t_family(channel, idx, prime)
    v1 = field_power_products(diagonals, tuple(v1_family(gamma, R, n).tuples()), prime)
    v2 = field_power_products(diagonals, tuple(v2_family(gamma, R, n).tuples()), prime)
    report = field_alignment_report(channel, [v1 if user <= R + 1 else v2 for user in range(1, K + 1)], prime)
    LOGGER.info(
        "Exact alignment check finished",
        extra={"K": K, "R": R, "n": n, "mu": mu, "prime": prime, "passed": report.passed},
    )
    return report
