"""All-pole (sum of undamped exponentials) modelling of a gapped echo spectrum.

Poles come from a matrix pencil on a rank-truncated Hankel matrix;
amplitudes are fitted on observed subcarriers only. Blank-band recovery
alternates between fitting the model and rewriting the blanks from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from iscc_sim.errors import DegenerateSignalError, InvalidInputError
from iscc_sim.sensing.waveform import FrequencySnapshot, SpectrumMask, WaveformConfig


@dataclass(frozen=True, eq=False)
class AllPoleEstimate:
    """Fitted exponential model.

    ``poles`` are projected onto the unit circle (targets are undamped);
    the unprojected eigenvalues are kept in ``raw_poles`` for diagnostics.
    """

    poles: np.ndarray
    amplitudes: np.ndarray
    raw_poles: np.ndarray = field(default=None)
    singular_values: np.ndarray = field(default=None)
    converged: bool = True
    iterations: int = 0

    def __post_init__(self):
        if self.raw_poles is None:
            object.__setattr__(self, "raw_poles", np.asarray(self.poles))
        if len(self.poles) != len(self.amplitudes):
            raise InvalidInputError("poles and amplitudes differ in length")

    @property
    def model_order(self) -> int:
        return len(self.poles)

    def evaluate(self, indices) -> np.ndarray:
        """Model samples at the given subcarrier indices."""
        n = np.asarray(indices)
        return _vandermonde(self.poles, n) @ self.amplitudes


@dataclass(frozen=True)
class RangeProfile:
    ranges: np.ndarray
    magnitudes: np.ndarray

    def __len__(self):
        return len(self.ranges)

    @classmethod
    def from_unsorted(cls, ranges, magnitudes):
        ranges = np.asarray(ranges, dtype=float)
        order = np.argsort(ranges, kind="stable")
        return cls(ranges[order], np.asarray(magnitudes, dtype=float)[order])

    @classmethod
    def empty(cls):
        return cls(np.zeros(0), np.zeros(0))


def _vandermonde(poles, n):
    # exp/log form avoids repeated powers drifting for |p| = 1
    return np.exp(np.outer(n, np.log(np.asarray(poles, dtype=complex))))


def _to_unit_circle(poles):
    poles = np.asarray(poles, dtype=complex)
    mag = np.abs(poles)
    return np.where(mag > 0, poles / np.where(mag > 0, mag, 1.0), 1.0 + 0j)


def _hankel(samples, pencil):
    return np.lib.stride_tricks.sliding_window_view(samples, pencil + 1)


def _observed_hankel(samples, observed, pencil):
    """Hankel rows restricted to windows lying wholly inside observed runs."""
    windows = np.lib.stride_tricks.sliding_window_view(observed, pencil + 1).all(axis=1)
    return _hankel(samples, pencil)[windows]


def _pencil_poles(hankel, model_order):
    """Matrix-pencil poles from the rank-``model_order`` row space."""
    _, s, vh = np.linalg.svd(hankel, full_matrices=False)
    tol = s[0] * max(hankel.shape) * np.finfo(float).eps if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > tol)) if s.size and s[0] > 0 else 0
    if rank < model_order:
        raise DegenerateSignalError(
            f"Hankel rank {rank} is below model order {model_order}", achieved_rank=rank)
    # rows of vh[:M] conjugated-transposed span the signal row space; shift invariance
    # along the lag axis gives the poles as eigenvalues
    w = vh[:model_order].T
    shift = np.linalg.lstsq(w[:-1], w[1:], rcond=None)[0]
    return np.linalg.eigvals(shift), s


def _fit_amplitudes(poles, samples, observed_idx):
    v = _vandermonde(poles, observed_idx)
    amps, *_ = np.linalg.lstsq(v, samples[observed_idx], rcond=None)
    return amps


def _check_order(model_order, usable):
    if int(model_order) < 1:
        raise InvalidInputError("model_order must be at least 1")
    if 2 * model_order > usable:
        raise InvalidInputError(
            f"model_order {model_order} needs at least {2 * model_order} usable samples")


def default_pencil(length: int) -> int:
    return max(1, length // 3)


def estimate_all_pole(snapshot: FrequencySnapshot, model_order: int, pencil_parameter=None,
                      observed=None) -> AllPoleEstimate:
    """Fit ``model_order`` exponentials to a (filled) snapshot.

    Poles are taken from the full sample sequence; amplitudes are solved by
    least squares over ``observed`` indices, which default to the snapshot's
    occupied mask.
    """
    x = snapshot.samples
    n = x.size
    _check_order(model_order, n)
    pencil = default_pencil(n) if pencil_parameter is None else int(pencil_parameter)
    if not model_order <= pencil <= n - model_order:
        raise InvalidInputError("pencil parameter must lie in [model_order, N - model_order]")
    occ = snapshot.mask.occupied if observed is None else np.asarray(observed, dtype=bool)
    raw, s = _pencil_poles(_hankel(x, pencil), model_order)
    poles = _to_unit_circle(raw)
    amps = _fit_amplitudes(poles, x, np.flatnonzero(occ))
    return AllPoleEstimate(poles, amps, raw_poles=raw, singular_values=s)


def _seed_poles(x, mask: SpectrumMask, model_order, pencil):
    """Initial poles from observed runs only, or ``None`` if they are too short."""
    longest = max(stop - start for start, stop in mask.runs())
    seed_pencil = min(pencil, longest // 3)
    if seed_pencil < model_order:
        return None
    h = _observed_hankel(x, mask.occupied, seed_pencil)
    if h.shape[0] < model_order:
        return None
    try:
        raw, _ = _pencil_poles(h, model_order)
    except DegenerateSignalError:
        return None
    return raw


def recover_blank_band(snapshot: FrequencySnapshot, model_order: int, max_iterations: int = 50,
                       tolerance: float = 1e-6, pencil_parameter=None):
    """Iteratively reconstruct blanked subcarriers from the all-pole model.

    Blanks start at zero. The first pole estimate uses only Hankel windows
    inside observed runs, which keeps the two-band aperture from locking the
    fit onto a grating-lobe solution; later iterations use the full filled
    sequence. Iteration stops once the relative change of the blank samples
    drops below ``tolerance``.

    Returns ``(recovered_snapshot, estimate)``. The recovered snapshot is
    fully occupied and holds the model on every subcarrier, so observed
    samples come back denoised. ``estimate.converged`` is False when the
    iteration budget ran out; the iterate with the smallest observed-sample
    residual is returned in that case.
    """
    mask = snapshot.mask
    n = len(snapshot)
    obs_idx = mask.indices
    _check_order(model_order, obs_idx.size)
    pencil = default_pencil(n) if pencil_parameter is None else int(pencil_parameter)
    x_obs = snapshot.samples[obs_idx]
    full_mask = SpectrumMask.full(n)

    if mask.is_full:
        est = estimate_all_pole(snapshot, model_order, pencil)
        est = replace(est, converged=True, iterations=0)
        return FrequencySnapshot(est.evaluate(np.arange(n)), full_mask, snapshot.noise_power), est

    blank_idx = np.flatnonzero(~mask.occupied)
    y = np.where(mask.occupied, snapshot.samples, 0.0).astype(complex)
    seed = _seed_poles(y, mask, model_order, pencil)
    best_resid, best = np.inf, None
    converged = False
    for it in range(1, max_iterations + 1):
        if seed is not None:
            raw, s, seed = seed, None, None
        else:
            raw, s = _pencil_poles(_hankel(y, pencil), model_order)
        poles = _to_unit_circle(raw)
        amps = _fit_amplitudes(poles, y, obs_idx)
        est = AllPoleEstimate(poles, amps, raw_poles=raw, singular_values=s)
        resid = np.linalg.norm(_vandermonde(poles, obs_idx) @ amps - x_obs)
        if resid < best_resid:
            best_resid, best = resid, est
        fill = _vandermonde(poles, blank_idx) @ amps
        denom = np.linalg.norm(fill)
        change = np.linalg.norm(fill - y[blank_idx]) / denom if denom > 0 else 0.0
        y[blank_idx] = fill
        if change < tolerance:
            converged = True
            break

    final = replace(est if converged else best, converged=converged, iterations=it)
    recovered = FrequencySnapshot(final.evaluate(np.arange(n)), full_mask, snapshot.noise_power)
    return recovered, final


def ranges_from_poles(estimate: AllPoleEstimate, config: WaveformConfig) -> RangeProfile:
    phase = np.mod(-np.angle(estimate.poles), 2.0 * np.pi)
    ranges = phase / config.phase_per_meter
    # wrap values that round up to the unambiguous range back to zero
    ranges = np.where(ranges >= config.unambiguous_range, 0.0, ranges)
    return RangeProfile.from_unsorted(ranges, np.abs(estimate.amplitudes))
