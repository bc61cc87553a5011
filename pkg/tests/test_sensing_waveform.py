import numpy as np
import pytest

from iscc_sim.errors import InvalidInputError
from iscc_sim.sensing import (SpectrumMask, TargetSet, WaveformConfig, apply_mask, default_mask,
                              synthesize_echo)


def test_unambiguous_range_for_default_grid(cfg):
    assert cfg.unambiguous_range == pytest.approx(299792458 / 240000, rel=1e-12)
    assert cfg.unambiguous_range == pytest.approx(1249.1, abs=0.05)
    assert cfg.bandwidth == pytest.approx(61.44e6)


@pytest.mark.parametrize("kwargs", [dict(subcarrier_spacing=0), dict(num_subcarriers=3)])
def test_waveform_rejects_bad_grid(kwargs):
    with pytest.raises(InvalidInputError):
        WaveformConfig(**kwargs)


def test_empty_target_set_is_silent(cfg):
    snap = synthesize_echo(TargetSet(), cfg, snr_db=None)
    assert np.all(snap.samples == 0)
    assert snap.mask.is_full


def test_single_target_phase_slope(cfg):
    r = 437.25
    snap = synthesize_echo(TargetSet([r], [2.0]), cfg)
    dphi = np.angle(snap.samples[1:] * np.conj(snap.samples[:-1]))
    expected = -2 * np.pi * cfg.subcarrier_spacing * 2 * r / cfg.speed_of_light
    expected = np.angle(np.exp(1j * expected))
    np.testing.assert_allclose(dphi, expected, atol=1e-9)


def test_range_beyond_ambiguity_rejected(cfg):
    with pytest.raises(InvalidInputError):
        synthesize_echo(TargetSet([cfg.unambiguous_range + 1.0], [1.0]), cfg)


def test_noise_variance_realizes_snr():
    cfg = WaveformConfig(num_subcarriers=200_000)
    targets = TargetSet([100.0, 300.0], [1.0, 1.0j])
    snap = synthesize_echo(targets, cfg, snr_db=3.0, seed=4)
    clean = synthesize_echo(targets, cfg)
    noise = snap.samples - clean.samples
    assert snap.noise_power == pytest.approx(2.0 / 10 ** 0.3)
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(snap.noise_power, rel=0.02)


def test_full_mask_is_identity(cfg, three_targets):
    snap = synthesize_echo(three_targets, cfg, snr_db=10, seed=1)
    out = apply_mask(snap, SpectrumMask.full(cfg.num_subcarriers))
    np.testing.assert_array_equal(out.samples, snap.samples)


def test_default_mask_blanks_256_central(cfg, three_targets):
    mask = default_mask(cfg)
    assert 30.72e6 / 120e3 == 256
    out = apply_mask(synthesize_echo(three_targets, cfg), mask)
    zeroed = np.flatnonzero(out.samples == 0)
    np.testing.assert_array_equal(zeroed, np.arange(128, 384))
    assert mask.runs() == [(0, 128), (384, 512)]


def test_all_blank_mask_rejected():
    with pytest.raises(InvalidInputError):
        SpectrumMask(np.zeros(16, dtype=bool))


def test_mask_length_mismatch_rejected(cfg, three_targets):
    with pytest.raises(InvalidInputError):
        apply_mask(synthesize_echo(three_targets, cfg), SpectrumMask.full(100))


def test_targets_too_close_rejected(cfg):
    with pytest.raises(InvalidInputError):
        synthesize_echo(TargetSet([300.0, 301.0], [1, 1]), cfg, min_separation=5.0)
