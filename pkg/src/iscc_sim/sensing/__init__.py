"""Gapped-spectrum OFDM multi-target range estimation."""

from iscc_sim.sensing.allpole import (AllPoleEstimate, RangeProfile, estimate_all_pole,
                                     ranges_from_poles, recover_blank_band)
from iscc_sim.sensing.baselines import fft_range_baseline, omp_range_baseline
from iscc_sim.sensing.detection import detect_targets, range_periodogram
from iscc_sim.sensing.experiment import SensingSettings, run_sensing_experiment
from iscc_sim.sensing.metrics import armse, armse_over_trials, matched_errors, range_crlb
from iscc_sim.sensing.waveform import (FrequencySnapshot, SpectrumMask, TargetSet,
                                       WaveformConfig, apply_mask, default_mask, draw_targets,
                                       synthesize_echo)

__all__ = [
    "AllPoleEstimate", "FrequencySnapshot", "RangeProfile", "SensingSettings", "SpectrumMask",
    "TargetSet", "WaveformConfig", "apply_mask", "armse", "armse_over_trials", "default_mask",
    "detect_targets", "draw_targets", "estimate_all_pole", "fft_range_baseline",
    "matched_errors", "omp_range_baseline", "range_crlb", "range_periodogram",
    "ranges_from_poles", "recover_blank_band", "run_sensing_experiment", "synthesize_echo",
]
