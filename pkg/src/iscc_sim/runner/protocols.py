"""Protocol list entries: ``label[:param[:param]]``."""

from iscc_sim.network.protocols import (AdaptiveHello, FixedBeacon, OnDemandDiscovery, PeriodicHello,
                                        SensingTriggered)


def parse_protocol(spec):
    name, *params = [p.strip() for p in spec.split(":")]
    try:
        nums = [float(p) for p in params]
    except ValueError:
        raise ValueError(f"non-numeric parameter in protocol '{spec}'") from None
    kind = name.split("@")[0]

    def need(lo, hi):
        if not lo <= len(nums) <= hi:
            raise ValueError(f"protocol '{name}' takes {lo}-{hi} parameters")

    if kind == "sensing-triggered":
        need(0, 0)
        return SensingTriggered(label=name)
    if kind == "fixed-beacon":
        need(0, 1)
        return FixedBeacon(*nums, label=name)
    if kind == "olsr":
        need(0, 1)
        return PeriodicHello(*nums, topology_flooding=True, label=name)
    if kind == "aodv":
        need(0, 1)
        return OnDemandDiscovery(*nums, label=name)
    if kind in ("ee-hello", "adaptive-hello", "adaptive-hello-fast"):
        need(0, 3)
        if kind == "adaptive-hello-fast" and not nums:
            nums = [0.25, 1.0]
        return AdaptiveHello(*nums, label=name)
    raise ValueError(f"unknown protocol '{name}'")
