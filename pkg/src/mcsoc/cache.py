"""Direct-mapped cache model with a degenerate "no cache" (capacity 0) case.

Instruction caches are read-only; data caches are write-back/write-allocate.
Miss fill time is not modeled here -- latency is owned by the interconnect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import CacheUsageError, ConfigError

INSTRUCTION = "instruction"
DATA = "data"

DEFAULT_LINE_BYTES = 32


WRITE_BACK = "write-back"


@dataclass(frozen=True)
class CacheGeometry:
    capacity_bytes: int
    line_bytes: int = DEFAULT_LINE_BYTES
    kind: str = DATA
    associativity: int = 1          # only direct-mapped is modeled
    write_policy: str = WRITE_BACK  # write-back + write-allocate (data side)

    def __post_init__(self):
        if self.line_bytes <= 0 or self.line_bytes & (self.line_bytes - 1):
            raise ConfigError(f"line_bytes must be a power of two, got {self.line_bytes}")
        if self.capacity_bytes < 0:
            raise ConfigError("capacity_bytes must be >= 0")
        if self.capacity_bytes:
            if self.capacity_bytes & (self.capacity_bytes - 1):
                raise ConfigError(f"capacity_bytes must be 0 or a power of two, got {self.capacity_bytes}")
            if self.capacity_bytes < self.line_bytes:
                raise ConfigError("capacity_bytes must be >= line_bytes")
        if self.kind not in (INSTRUCTION, DATA):
            raise ConfigError(f"unknown cache kind {self.kind!r}")
        if self.associativity != 1:
            raise ConfigError("only associativity 1 (direct-mapped) is supported")
        if self.write_policy != WRITE_BACK:
            raise ConfigError(f"unsupported write policy {self.write_policy!r}")

    @property
    def num_lines(self) -> int:
        return self.capacity_bytes // self.line_bytes


class AccessResult(NamedTuple):
    hit: bool
    writeback_required: bool


@dataclass
class CacheStats:
    accesses: int = 0
    hits: int = 0
    misses: int = 0
    writebacks: int = 0


@dataclass
class CacheState:
    """Tag/valid/dirty state of one direct-mapped cache plus its counters."""

    geometry: CacheGeometry
    tags: list = field(init=False)      # line address, or -1 when invalid
    dirty: list = field(init=False)
    stats: CacheStats = field(default_factory=CacheStats)

    def __post_init__(self):
        n = self.geometry.num_lines
        self.tags = [-1] * n
        self.dirty = [False] * n

    def access(self, address: int, write: bool = False) -> AccessResult:
        """Look up one byte address; fill on miss (write-allocate).

        Capacity 0 always misses and never holds state, so it never writes back.
        """
        geo = self.geometry
        if write and geo.kind == INSTRUCTION:
            raise CacheUsageError("write access on an instruction cache")
        st = self.stats
        st.accesses += 1

        n = geo.num_lines
        if n == 0:
            st.misses += 1
            return AccessResult(False, False)

        line_addr = address // geo.line_bytes
        index = line_addr % n
        if self.tags[index] == line_addr:
            st.hits += 1
            if write:
                self.dirty[index] = True
            return AccessResult(True, False)

        st.misses += 1
        writeback = self.dirty[index]
        if writeback:
            st.writebacks += 1
        self.tags[index] = line_addr
        self.dirty[index] = write
        return AccessResult(False, writeback)

    def flush(self) -> int:
        """Invalidate every line; return how many dirty lines were written back."""
        count = sum(1 for i, t in enumerate(self.tags) if t != -1 and self.dirty[i])
        n = self.geometry.num_lines
        self.tags = [-1] * n
        self.dirty = [False] * n
        self.stats.writebacks += count
        return count

    @property
    def miss_rate(self) -> float:
        return self.stats.misses / self.stats.accesses if self.stats.accesses else 0.0
