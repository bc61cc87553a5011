"""Range-estimation accuracy metrics and the Cramer-Rao bound."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from iscc_sim.errors import InvalidInputError, UnidentifiableError
from iscc_sim.sensing.waveform import SpectrumMask, TargetSet, WaveformConfig, noise_variance


def matched_errors(true_ranges, estimated_ranges, miss_penalty=100.0):
    """Per-target absolute error under the minimum-total-error assignment.

    At most one estimate is assigned per target; targets left without an
    estimate (more truths than estimates) get ``miss_penalty``.
    """
    truth = np.asarray(true_ranges, dtype=float).ravel()
    est = np.asarray(estimated_ranges, dtype=float).ravel()
    if truth.size == 0:
        raise InvalidInputError("true_ranges must be non-empty")
    errors = np.full(truth.size, float(miss_penalty))
    if est.size:
        cost = np.abs(truth[:, None] - est[None, :])
        rows, cols = linear_sum_assignment(cost)
        errors[rows] = cost[rows, cols]
    return errors


def armse(true_ranges, estimated_ranges, miss_penalty=100.0):
    """Single-trial ARMSE: mean over targets of the matched absolute error."""
    return float(matched_errors(true_ranges, estimated_ranges, miss_penalty).mean())


def armse_over_trials(per_trial_errors):
    """ARMSE over Monte Carlo trials, root taken per target before averaging.

    ``per_trial_errors`` has shape (trials, targets).
    """
    e = np.asarray(per_trial_errors, dtype=float)
    return float(np.sqrt(np.mean(e ** 2, axis=0)).mean())


def fisher_information(config: WaveformConfig, mask: SpectrumMask, targets: TargetSet, noise_power):
    """FIM for parameters ordered (r_1, Re b_1, Im b_1, r_2, ...)."""
    n = mask.indices.astype(float)
    k = config.phase_per_meter
    cols = []
    for r, b in zip(targets.ranges, targets.amplitudes):
        e = np.exp(-1j * k * n * r)
        cols += [-1j * k * n * b * e, e, 1j * e]
    jac = np.stack(cols, axis=1)
    return 2.0 / noise_power * np.real(jac.conj().T @ jac)


def range_crlb(config: WaveformConfig, mask: SpectrumMask, snr_db, targets: TargetSet):
    """Per-target standard-deviation bound on range (metres)."""
    if len(targets) == 0:
        raise InvalidInputError("at least one target required")
    if mask.num_occupied < 2 * len(targets):
        raise UnidentifiableError("too few occupied subcarriers for the target count")
    sigma2 = noise_variance(targets, snr_db)
    if sigma2 <= 0:
        raise InvalidInputError("CRLB needs finite SNR")
    fim = fisher_information(config, mask, targets, sigma2)
    cond = np.linalg.cond(fim)
    if not np.isfinite(cond) or cond > 1e15:
        raise UnidentifiableError(f"Fisher information is singular (condition {cond:.3g})")
    cov = np.linalg.inv(fim)
    return np.sqrt(np.diag(cov)[0::3])
