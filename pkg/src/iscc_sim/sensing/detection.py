"""Constant-threshold target detection on the oversampled range periodogram."""

import numpy as np

from iscc_sim.errors import InvalidInputError
from iscc_sim.sensing.baselines import local_maxima, range_spectrum


def range_periodogram(snapshot, config, oversample_factor=8):
    """Return ``(ranges, statistic)`` with statistic ``|sum x_n e^{+jknr}|^2 / N_occ``.

    On complex white noise of variance sigma^2 every bin is exponentially
    distributed with mean sigma^2; a noiseless on-bin target of amplitude b
    gives ``N_occ * |b|^2``.
    """
    spec = range_spectrum(snapshot, oversample_factor)
    stat = np.abs(spec) ** 2 / snapshot.mask.num_occupied
    ranges = np.arange(stat.size) * (config.unambiguous_range / stat.size)
    return ranges, stat


def detection_threshold(noise_power, false_alarm_target):
    if not 0.0 < false_alarm_target < 1.0:
        raise InvalidInputError("false_alarm_target must lie in (0, 1)")
    return -noise_power * np.log(false_alarm_target)


def detect_targets(snapshot, config, false_alarm_target, oversample_factor=8):
    """Peaks of the periodogram above the P_fa-calibrated threshold.

    Returns a list of ``(range_m, statistic)`` sorted by range.
    """
    thr = detection_threshold(snapshot.noise_power, false_alarm_target)
    ranges, stat = range_periodogram(snapshot, config, oversample_factor)
    peaks = local_maxima(stat)
    peaks = peaks[stat[peaks] > thr]
    return [(float(ranges[p]), float(stat[p])) for p in peaks]
