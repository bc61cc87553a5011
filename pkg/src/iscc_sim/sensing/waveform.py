"""OFDM echo model: waveform parameters, spectrum masks, target sets, snapshots."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from iscc_sim.errors import InvalidInputError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class WaveformConfig:
    """Subcarrier grid of the sensing waveform.

    ``num_subcarriers`` is the full span, including any blanked block.
    """

    carrier_frequency: float = 24e9
    subcarrier_spacing: float = 120e3
    num_subcarriers: int = 512
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.subcarrier_spacing > 0:
            raise InvalidInputError("subcarrier_spacing must be positive")
        if self.num_subcarriers < 4:
            raise InvalidInputError("num_subcarriers must be at least 4")

    @property
    def unambiguous_range(self) -> float:
        return self.speed_of_light / (2.0 * self.subcarrier_spacing)

    @property
    def bandwidth(self) -> float:
        return self.subcarrier_spacing * self.num_subcarriers

    @property
    def phase_per_meter(self) -> float:
        """Phase decrement between adjacent subcarriers per metre of range."""
        return 4.0 * np.pi * self.subcarrier_spacing / self.speed_of_light

    def pole_for_range(self, range_m):
        return np.exp(-1j * self.phase_per_meter * np.asarray(range_m, dtype=float))


@dataclass(frozen=True, eq=False)
class SpectrumMask:
    """Boolean occupancy per subcarrier (True = observed)."""

    occupied: np.ndarray

    def __post_init__(self):
        occ = np.asarray(self.occupied, dtype=bool).copy()
        if occ.ndim != 1:
            raise InvalidInputError("mask must be one-dimensional")
        if not occ.any():
            raise InvalidInputError("mask has no occupied subcarriers")
        occ.setflags(write=False)
        object.__setattr__(self, "occupied", occ)

    def __len__(self):
        return self.occupied.size

    def __eq__(self, other):
        return isinstance(other, SpectrumMask) and np.array_equal(self.occupied, other.occupied)

    @property
    def num_occupied(self) -> int:
        return int(self.occupied.sum())

    @property
    def is_full(self) -> bool:
        return bool(self.occupied.all())

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.occupied)

    @classmethod
    def full(cls, num_subcarriers: int) -> "SpectrumMask":
        return cls(np.ones(num_subcarriers, dtype=bool))

    @classmethod
    def with_gap(cls, num_subcarriers: int, gap_subcarriers: int, position="center") -> "SpectrumMask":
        """Blank one contiguous block.

        ``position`` is ``"center"`` or the integer index of the first blanked
        subcarrier.
        """
        if not 0 <= gap_subcarriers < num_subcarriers:
            raise InvalidInputError("gap must leave at least one occupied subcarrier")
        if position == "center":
            start = (num_subcarriers - gap_subcarriers) // 2
        else:
            start = int(position)
        if start < 0 or start + gap_subcarriers > num_subcarriers:
            raise InvalidInputError("gap does not fit inside the subcarrier span")
        occ = np.ones(num_subcarriers, dtype=bool)
        occ[start:start + gap_subcarriers] = False
        return cls(occ)

    def runs(self):
        """Yield ``(start, stop)`` of every contiguous occupied run."""
        occ = np.concatenate(([False], self.occupied, [False])).astype(np.int8)
        edges = np.flatnonzero(np.diff(occ))
        return list(zip(edges[::2], edges[1::2]))


def default_mask(config: WaveformConfig, gap_hz: float = 30.72e6) -> SpectrumMask:
    """Central blank block of ``gap_hz`` (rounded to whole subcarriers)."""
    gap = int(round(gap_hz / config.subcarrier_spacing))
    return SpectrumMask.with_gap(config.num_subcarriers, gap)


@dataclass(frozen=True, eq=False)
class TargetSet:
    ranges: np.ndarray = field(default_factory=lambda: np.zeros(0))
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.ranges, dtype=float))
        b = np.atleast_1d(np.asarray(self.amplitudes, dtype=complex))
        if r.shape != b.shape:
            raise InvalidInputError("ranges and amplitudes differ in length")
        object.__setattr__(self, "ranges", r)
        object.__setattr__(self, "amplitudes", b)

    def __len__(self):
        return self.ranges.size

    def validate(self, config: WaveformConfig, min_separation: float = 0.0):
        if np.any(self.ranges <= 0) or np.any(self.ranges >= config.unambiguous_range):
            raise InvalidInputError(
                f"target ranges must lie in (0, {config.unambiguous_range:.3f}) m")
        if len(self) > 1:
            gaps = np.diff(np.sort(self.ranges))
            if gaps.min() < max(min_separation, 0.0) or gaps.min() == 0:
                raise InvalidInputError("targets closer than the minimum separation")

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def draw_targets(rng, count=3, low=200.0, high=1000.0, min_separation=5.0, amplitude=1.0):
    """Uniform ranges in ``[low, high]`` with unit-modulus random-phase amplitudes.

    Draws are rejected until every pair is at least ``min_separation`` apart.
    """
    for _ in range(10_000):
        ranges = np.sort(rng.uniform(low, high, count))
        if count < 2 or np.diff(ranges).min() >= min_separation:
            break
    else:
        raise InvalidInputError("could not place targets with the requested separation")
    phases = rng.uniform(0.0, 2.0 * np.pi, count)
    return TargetSet(ranges, amplitude * np.exp(1j * phases))


@dataclass(frozen=True, eq=False)
class FrequencySnapshot:
    """Complex echo per subcarrier; blanked indices hold exact zeros."""

    samples: np.ndarray
    mask: SpectrumMask
    noise_power: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=complex).copy()
        if x.ndim != 1 or x.size != len(self.mask):
            raise InvalidInputError("samples and mask lengths differ")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size


def steering(config: WaveformConfig, ranges, indices=None):
    """Matrix of shape (subcarriers, targets) with entries exp(-j k n r)."""
    n = np.arange(config.num_subcarriers) if indices is None else np.asarray(indices)
    return np.exp(-1j * config.phase_per_meter * np.outer(n, np.atleast_1d(ranges)))


def noise_variance(targets: TargetSet, snr_db) -> float:
    """Per-sample noise variance giving ``snr_db`` against total target power."""
    if snr_db is None or np.isinf(snr_db):
        return 0.0
    return targets.total_power / 10.0 ** (snr_db / 10.0)


def synthesize_echo(targets: TargetSet, config: WaveformConfig, snr_db=None, seed=None,
                    min_separation=0.0) -> FrequencySnapshot:
    """Multi-target echo over the full subcarrier span.

    ``snr_db=None`` (or ``inf``) disables noise. The noise variance is the
    total target power divided by the linear SNR.
    """
    targets.validate(config, min_separation)
    clean = steering(config, targets.ranges) @ targets.amplitudes
    sigma2 = noise_variance(targets, snr_db)
    if sigma2 > 0:
        rng = np.random.default_rng(seed)
        n = config.num_subcarriers
        clean = clean + np.sqrt(sigma2 / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return FrequencySnapshot(clean, SpectrumMask.full(config.num_subcarriers), sigma2)


def apply_mask(snapshot: FrequencySnapshot, mask: SpectrumMask) -> FrequencySnapshot:
    if not isinstance(mask, SpectrumMask):
        mask = SpectrumMask(mask)
    if len(mask) != len(snapshot):
        raise InvalidInputError("mask length does not match snapshot length")
    return FrequencySnapshot(np.where(mask.occupied, snapshot.samples, 0.0), mask,
                             snapshot.noise_power)
