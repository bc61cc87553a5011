"""Reference range estimators: zero-padded FFT and orthogonal matching pursuit.

The FFT variant (x8 zero padding plus parabolic log-magnitude peak
interpolation) and the on-grid OMP with local least-squares refinement are
strong standard stand-ins for the benchmark methods.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from iscc_sim.errors import InvalidInputError
from iscc_sim.sensing.allpole import RangeProfile
from iscc_sim.sensing.waveform import FrequencySnapshot, WaveformConfig, steering


def local_maxima(mag):
    """Indices of circular local maxima (strict on the left, weak on the right)."""
    left = np.roll(mag, 1)
    right = np.roll(mag, -1)
    return np.flatnonzero((mag > left) & (mag >= right) & (mag > 0))


def range_spectrum(snapshot: FrequencySnapshot, oversample_factor: int = 8):
    """Zero-padded IDFT of the masked samples, one bin per R_max / K metres."""
    x = np.where(snapshot.mask.occupied, snapshot.samples, 0.0)
    k = oversample_factor * x.size
    return np.fft.ifft(x, k) * k


def fft_range_baseline(snapshot: FrequencySnapshot, config: WaveformConfig,
                       oversample_factor: int = 8, num_peaks: int = 3) -> RangeProfile:
    if oversample_factor < 1:
        raise InvalidInputError("oversample_factor must be >= 1")
    spec = range_spectrum(snapshot, oversample_factor)
    mag = np.abs(spec)
    nbins = mag.size
    peaks = local_maxima(mag)
    if peaks.size == 0:
        return RangeProfile.empty()
    peaks = peaks[np.argsort(mag[peaks], kind="stable")[::-1][:num_peaks]]

    tiny = np.finfo(float).tiny
    a = np.log(np.maximum(mag[(peaks - 1) % nbins], tiny))
    b = np.log(mag[peaks])
    c = np.log(np.maximum(mag[(peaks + 1) % nbins], tiny))
    denom = a - 2.0 * b + c
    safe = np.where(denom != 0, denom, 1.0)
    delta = np.where(denom != 0, 0.5 * (a - c) / safe, 0.0)
    delta = np.clip(delta, -0.5, 0.5)

    bin_m = config.unambiguous_range / nbins
    ranges = np.mod((peaks + delta) * bin_m, config.unambiguous_range)
    return RangeProfile.from_unsorted(ranges, mag[peaks] / snapshot.mask.num_occupied)


@lru_cache(maxsize=8)
def _dictionary(config: WaveformConfig, occupied_key: bytes, grid_spacing: float):
    occupied = np.frombuffer(occupied_key, dtype=bool)
    idx = np.flatnonzero(occupied)
    grid = np.arange(grid_spacing, config.unambiguous_range, grid_spacing)
    atoms = steering(config, grid, idx) / np.sqrt(idx.size)
    atoms.setflags(write=False)
    return idx, grid, atoms


def _residual_norm(config, idx, y, ranges):
    a = steering(config, ranges, idx)
    amps, *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(np.linalg.norm(y - a @ amps)), amps


def omp_range_baseline(snapshot: FrequencySnapshot, config: WaveformConfig,
                       grid_spacing: float = 0.5, sparsity: int = 3) -> RangeProfile:
    """Orthogonal matching pursuit on a range grid using observed subcarriers only.

    Each selected grid point is then refined once by a bounded 1-D search
    within one grid step, holding the other atoms fixed; a refinement is kept
    only if it lowers the least-squares residual.
    """
    if not grid_spacing > 0:
        raise InvalidInputError("grid_spacing must be positive")
    if sparsity < 1:
        raise InvalidInputError("sparsity must be at least 1")
    idx, grid, atoms = _dictionary(config, snapshot.mask.occupied.tobytes(), float(grid_spacing))
    y = snapshot.samples[idx]
    if not np.any(y):
        return RangeProfile.empty()

    chosen = []
    residual = y.copy()
    for _ in range(min(sparsity, grid.size)):
        corr = np.abs(atoms.conj().T @ residual)
        corr[chosen] = -1.0
        chosen.append(int(np.argmax(corr)))
        sub = atoms[:, chosen]
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        residual = y - sub @ coef
        if np.linalg.norm(residual) <= 1e-12 * np.linalg.norm(y):
            break

    ranges = grid[chosen].astype(float)
    best, amps = _residual_norm(config, idx, y, ranges)
    for i in range(ranges.size):
        def cost(r, i=i):
            trial = ranges.copy()
            trial[i] = r
            return _residual_norm(config, idx, y, trial)[0]

        lo, hi = ranges[i] - grid_spacing, ranges[i] + grid_spacing
        res = minimize_scalar(cost, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-6 * grid_spacing})
        if res.fun < best:
            ranges[i] = res.x
            best = res.fun
    _, amps = _residual_norm(config, idx, y, ranges)
    ranges = np.mod(ranges, config.unambiguous_range)
    return RangeProfile.from_unsorted(ranges, np.abs(amps))
