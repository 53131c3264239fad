"""Shared memory map and the round-robin arbiter that serializes miss traffic.

Each core's memory segment is a separate bank behind the fabric, so two cores
working in their own segments never stall each other; requests that do target
the same region (the on-chip buffer, or one segment) are serialized round-robin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

FAULT = -1
ONCHIP = "onchip"


def segment_region(core_id: int) -> str:
    return f"segment{core_id}"


@dataclass(frozen=True)
class MemoryMap:
    """Per-core (base, size) segments plus the on-chip buffer window."""

    segments: tuple          # ((base, size), ...) one per core
    onchip_buffer: tuple     # (base, size)
    main_memory_size: int

    def __post_init__(self):
        ranges = list(self.segments) + [self.onchip_buffer]
        for base, size in ranges:
            if base < 0 or size <= 0:
                raise ConfigError(f"bad memory range ({base:#x}, {size})")
        spans = sorted((b, b + s) for b, s in ranges)
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            if lo < hi:
                raise ConfigError("memory regions overlap")

    def resolve(self, address: int):
        """Map a byte address to its region id: a core segment, onchip, or FAULT."""
        for k, (base, size) in enumerate(self.segments):
            if base <= address < base + size:
                return segment_region(k)
        base, size = self.onchip_buffer
        if base <= address < base + size:
            return ONCHIP
        return FAULT


def resolve(memory_map: MemoryMap, address: int):
    return memory_map.resolve(address)


@dataclass
class LatencyModel:
    main_memory_latency: int = 40   # cycles per line fill
    onchip_latency: int = 1

    def __post_init__(self):
        if self.main_memory_latency < 1 or self.onchip_latency < 1:
            raise ConfigError("latencies must be >= 1 cycle")

    def region_latency(self, region) -> int:
        return self.onchip_latency if region == ONCHIP else self.main_memory_latency


@dataclass
class Interconnect:
    """Timing-only fabric: per-region busy tracking plus one round-robin pointer.

    No data is stored; only completion times matter.
    """

    latency: LatencyModel
    n_cores: int
    rr_next: int = 0                       # core with current top arbitration priority
    busy_until: dict = field(default_factory=dict)   # region -> cycle it frees up
    total_latency_charged: int = 0

    def request(self, core_id: int, region, issue_cycle: int) -> int:
        """Serve one line fill; returns the completion cycle.

        Requests already queued on the region push this one back; the region
        then stays busy until the new completion.
        """
        lat = self.latency.region_latency(region)
        start = max(issue_cycle, self.busy_until.get(region, 0))
        done = start + lat
        self.busy_until[region] = done
        self.total_latency_charged += done - issue_cycle
        return done

    def service(self, requests, issue_cycle: int = 0) -> dict:
        """Arbitrate a set of (core_id, region) requests issued the same cycle.

        Same-region requests serialize in round-robin order starting at the
        arbiter pointer; disjoint regions proceed in parallel. The pointer
        moves past the batch's arbitration winner, so the first grant rotates
        across repeated conflicts. Returns {core_id: completion latency
        relative to issue_cycle}.
        """
        order = sorted(requests, key=lambda r: (r[0] - self.rr_next) % self.n_cores)
        out = {}
        for core_id, region in order:
            out[core_id] = self.request(core_id, region, issue_cycle) - issue_cycle
        if order:
            self.rr_next = (order[0][0] + 1) % self.n_cores
        return out
