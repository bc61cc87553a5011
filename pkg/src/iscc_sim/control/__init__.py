"""Tracking, collision avoidance, planning and energy for a single UAV."""

from iscc_sim.control.avoidance import (Breach, Clear, EmergencyPacket, Maneuver, maneuver_positions,
                                        min_safe_separation, plan_avoidance, predict_collision,
                                        yaw_candidates)
from iscc_sim.control.dynamics import (EquivalentSphere, PowerModelParams, UavDynamics, inflation,
                                       path_energy, path_length, propulsion_power)
from iscc_sim.control.experiment import ControlScenario, run_control_experiment, run_replanning_trial
from iscc_sim.control.flight import (CollisionEstimate, FlightScenario, collision_probability,
                                     deterministic_encounter, random_obstacles, simulate_flight)
from iscc_sim.control.planning import (Environment3d, Obstacle, PlanTree, ReplanResult, replan_with_reuse,
                                       rrt_star, segment_segment_distance, shortcut_path)
from iscc_sim.control.tracking import (EncounterClassification, KinematicTrack, classify_detection,
                                       ekf_predict, ekf_update, fuse_shared_measurements, process_noise)

__all__ = [
    "Breach", "Clear", "EmergencyPacket", "Maneuver", "maneuver_positions", "min_safe_separation",
    "plan_avoidance", "predict_collision", "yaw_candidates", "EquivalentSphere", "PowerModelParams",
    "UavDynamics", "inflation", "path_energy", "path_length", "propulsion_power", "ControlScenario",
    "run_control_experiment", "run_replanning_trial", "CollisionEstimate", "FlightScenario",
    "collision_probability", "deterministic_encounter", "random_obstacles", "simulate_flight",
    "Environment3d", "Obstacle", "PlanTree", "ReplanResult", "replan_with_reuse", "rrt_star",
    "segment_segment_distance", "shortcut_path", "EncounterClassification", "KinematicTrack",
    "classify_detection", "ekf_predict", "ekf_update", "fuse_shared_measurements", "process_noise",
]
