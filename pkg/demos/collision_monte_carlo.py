"""Collision probability with and without avoidance, for a few sensing accuracies."""

from iscc_sim.control import FlightScenario, collision_probability

sc = FlightScenario()
for std in (0.5, 2.0, 5.0):
    on = collision_probability(True, sc, sensing_std=std, trials=50, seed=2)
    off = collision_probability(False, sc, sensing_std=std, trials=50, seed=2)
    print(f"sensing std {std:3.1f} m: avoidance on {on.probability:.3f} "
          f"[{on.ci_low:.3f}, {on.ci_high:.3f}]  off {off.probability:.3f}")
