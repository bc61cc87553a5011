"""Integrated sensing, communication and control simulation for UAV swarms.

Three experiment families are provided:

* :mod:`iscc_sim.sensing` -- gapped-spectrum OFDM range estimation with
  iterative all-pole blank-band recovery, FFT and OMP baselines, CRLB.
* :mod:`iscc_sim.network` -- random-waypoint swarm with sensing-triggered
  and hello-based neighbor discovery and link-state routing.
* :mod:`iscc_sim.control` -- EKF collision prediction, safe-separation
  avoidance and RRT* planning with tree-reuse replanning.

:mod:`iscc_sim.runner` ties them to a config file and the ``iscc-sim`` CLI.
"""

__version__ = "0.1.0"
