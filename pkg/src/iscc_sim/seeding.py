"""Deterministic per-trial seed derivation.

A trial seed is a hash of ``(global seed, experiment id, parameter tuple,
trial index)`` so that any single trial can be reproduced without running
the sweep that contains it.
"""

import hashlib

import numpy as np


def derive_seed(global_seed, experiment, params=(), trial=0):
    """Return a 63-bit integer seed for one trial."""
    text = repr((int(global_seed), str(experiment), tuple(params), int(trial)))
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def trial_rng(global_seed, experiment, params=(), trial=0):
    return np.random.default_rng(derive_seed(global_seed, experiment, params, trial))
