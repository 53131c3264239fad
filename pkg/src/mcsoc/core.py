"""Per-core timing model: base CPI plus additive cache-miss stalls.

Cycle arithmetic is integer micro-cycles (1 cycle = 100 micro-cycles) so a
fractional calibrated CPI stays exact and results are identical across
platforms. This module is the contract-level reference path; the batch
engines in engine_py/_kernel implement the same arithmetic over packed
arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cache import CacheState
from .errors import ConfigError, SegmentationFault
from .workload import AbstractInstruction

UCYCLES_PER_CYCLE = 100

DEFAULT_CLOCK_HZ = 66_500_000


@dataclass(frozen=True)
class CoreConfig:
    clock_hz: int = DEFAULT_CLOCK_HZ
    base_cpi_ucycles: int = UCYCLES_PER_CYCLE   # 1.0 cycles/instruction
    pipeline_depth: int = 6                     # informational

    def __post_init__(self):
        if self.clock_hz <= 0:
            raise ConfigError("clock_hz must be positive")
        if self.base_cpi_ucycles < 1:
            raise ConfigError("base_cpi must be at least one micro-cycle")


@dataclass
class CoreStats:
    instructions_retired: int = 0
    ucycles: int = 0
    ic_accesses: int = 0
    ic_misses: int = 0
    dc_accesses: int = 0
    dc_misses: int = 0
    dc_writebacks: int = 0

    @property
    def cycles(self) -> Fraction:
        return Fraction(self.ucycles, UCYCLES_PER_CYCLE)

    def seconds(self, clock_hz: int) -> Fraction:
        return Fraction(self.ucycles, UCYCLES_PER_CYCLE * clock_hz)

    def merge(self, other: "CoreStats") -> "CoreStats":
        return CoreStats(
            self.instructions_retired + other.instructions_retired,
            self.ucycles + other.ucycles,
            self.ic_accesses + other.ic_accesses,
            self.ic_misses + other.ic_misses,
            self.dc_accesses + other.dc_accesses,
            self.dc_misses + other.dc_misses,
            self.dc_writebacks + other.dc_writebacks,
        )


@dataclass
class MemoryPort:
    """A core's private view of memory: its own segment bank.

    Line fills complete a fixed latency after issue because no other core
    shares the bank; the shared on-chip region is only reached through the
    mailbox layer, never through trace references.
    """

    segment_size: int
    fill_latency_ucycles: int

    def check(self, rel_address: int):
        if not 0 <= rel_address < self.segment_size:
            raise SegmentationFault(
                f"reference {rel_address:#x} outside segment (size {self.segment_size:#x})"
            )

    def fill(self, issue_ucycle: int) -> int:
        return issue_ucycle + self.fill_latency_ucycles


def step(
    config: CoreConfig,
    stats: CoreStats,
    instr: AbstractInstruction,
    ic: CacheState,
    dc: CacheState,
    port: MemoryPort,
    now_ucycles: int = 0,
) -> int:
    """Execute one abstract instruction; returns micro-cycles consumed.

    Consumed time is base CPI plus one stall per missing cache access; each
    stall is the port's fill latency (0 on hit). Stats accumulate in place.
    """
    t = now_ucycles
    stats.ic_accesses += 1
    if not ic.access(instr.fetch_address).hit:
        stats.ic_misses += 1
        t = port.fill(t)
    for addr, write in instr.data_refs:
        port.check(addr)
        stats.dc_accesses += 1
        res = dc.access(addr, write)
        if not res.hit:
            stats.dc_misses += 1
            if res.writeback_required:
                stats.dc_writebacks += 1
            t = port.fill(t)
    t += config.base_cpi_ucycles
    stats.instructions_retired += 1
    consumed = t - now_ucycles
    stats.ucycles += consumed
    return consumed


def run_trace(config, trace, ic: CacheState, dc: CacheState, port: MemoryPort) -> CoreStats:
    """Replay a whole trace through one core; deterministic in all inputs."""
    stats = CoreStats()
    t = 0
    for index, instr in enumerate(trace.instructions() if hasattr(trace, "instructions") else trace):
        try:
            t += step(config, stats, instr, ic, dc, port, t)
        except SegmentationFault as exc:
            raise SegmentationFault(f"trace index {index}: {exc}") from exc
    return stats
