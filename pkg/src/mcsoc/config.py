"""Whole-system configuration: one design point plus its workload binding.

Also owns the flat INI-style config file format used by the CLI; files
written by `write_config` re-parse to an equal in-memory bundle.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .cache import DATA, INSTRUCTION, CacheGeometry
from .core import DEFAULT_CLOCK_HZ, CoreConfig
from .errors import ConfigError
from .interconnect import LatencyModel, MemoryMap
from .workload import WorkloadProfile, default_profile

DEFAULT_SEGMENT_BYTES = 128 * 1024
DEFAULT_ONCHIP_BYTES = 1024
ONCHIP_BASE = 0x0800_0000
MAILBOX_NAME = "/dev/message_buffer_mailbox"
MAILBOX_NODE_BYTES = 8  # linked-list node: 4-byte payload + 4-byte next link

# Frozen timing calibration (see bench.calibrate_timing); paired with the
# fitted working-set/code-footprint defaults in workload.py.
DEFAULT_BASE_CPI_UCYCLES = 635
DEFAULT_MAIN_MEMORY_LATENCY = 32


@dataclass(frozen=True)
class SystemConfig:
    n_cpus: int
    core: CoreConfig
    ic: CacheGeometry
    dc: CacheGeometry
    memory_map: MemoryMap
    latency: LatencyModel
    mailboxes: dict = field(default_factory=dict)   # name -> capacity (messages)

    def __post_init__(self):
        if self.n_cpus < 1:
            raise ConfigError("n_cpus must be >= 1")
        if len(self.memory_map.segments) != self.n_cpus:
            raise ConfigError("memory map must define one segment per core")
        if self.ic.kind != INSTRUCTION or self.dc.kind != DATA:
            raise ConfigError("ic/dc geometry kinds are swapped")

    @property
    def segment_size(self) -> int:
        return self.memory_map.segments[0][1]


def make_system(
    n_cpus: int,
    ic_kb: int,
    dc_kb: int,
    base_cpi_ucycles: int = 100,
    main_memory_latency: int = 40,
    onchip_latency: int = 1,
    clock_hz: int = DEFAULT_CLOCK_HZ,
    segment_bytes: int = DEFAULT_SEGMENT_BYTES,
    onchip_bytes: int = DEFAULT_ONCHIP_BYTES,
    line_bytes: int = 32,
) -> SystemConfig:
    """Assemble a design point; cache sizes in KB (0 means no cache)."""
    segments = tuple((k * segment_bytes, segment_bytes) for k in range(n_cpus))
    mem = MemoryMap(
        segments=segments,
        onchip_buffer=(ONCHIP_BASE, onchip_bytes),
        main_memory_size=n_cpus * segment_bytes,
    )
    return SystemConfig(
        n_cpus=n_cpus,
        core=CoreConfig(clock_hz=clock_hz, base_cpi_ucycles=base_cpi_ucycles),
        ic=CacheGeometry(ic_kb * 1024, line_bytes, kind=INSTRUCTION),
        dc=CacheGeometry(dc_kb * 1024, line_bytes, kind=DATA),
        memory_map=mem,
        latency=LatencyModel(main_memory_latency, onchip_latency),
        mailboxes={MAILBOX_NAME: onchip_bytes // MAILBOX_NODE_BYTES},
    )


@dataclass(frozen=True)
class ResourceBudget:
    logic_elements: int = 24_624
    registers: int = 25_629
    labs: int = 1_539
    m9k_blocks: int = 66
    io_pins: int = 216

    @property
    def block_memory_bits(self) -> int:
        return self.m9k_blocks * 9_216


@dataclass(frozen=True)
class SweepSpace:
    """Ordered (n_cpus, ic_kb, dc_kb) rows, mirroring the published table layout."""

    rows: tuple

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)


def experiment1_space() -> SweepSpace:
    return SweepSpace(tuple((n, ic, 0) for n in (1, 2) for ic in (2, 4, 8, 16)))


def experiment2_space() -> SweepSpace:
    rows = [(1, 8, dc) for dc in (4, 8, 16, 32)] + [(2, 8, dc) for dc in (4, 8)]
    return SweepSpace(tuple(rows))


def paper_space() -> SweepSpace:
    return SweepSpace(experiment1_space().rows + experiment2_space().rows)


@dataclass(frozen=True)
class RunBundle:
    """Everything a CLI run needs: system knobs, workload, sweep space, budget."""

    n_cpus: int = 2
    clock_hz: int = DEFAULT_CLOCK_HZ
    base_cpi_ucycles: int = DEFAULT_BASE_CPI_UCYCLES
    pipeline_depth: int = 6
    ic_capacity_bytes: int = 8192
    dc_capacity_bytes: int = 8192
    line_bytes: int = 32
    segment_bytes: int = DEFAULT_SEGMENT_BYTES
    onchip_bytes: int = DEFAULT_ONCHIP_BYTES
    main_memory_latency: int = DEFAULT_MAIN_MEMORY_LATENCY
    onchip_latency: int = 1
    profile: WorkloadProfile = field(default_factory=default_profile)
    sweep: SweepSpace = field(default_factory=paper_space)
    budget: ResourceBudget = field(default_factory=ResourceBudget)

    def system(self, n_cpus=None, ic_kb=None, dc_kb=None) -> SystemConfig:
        return make_system(
            n_cpus if n_cpus is not None else self.n_cpus,
            (ic_kb * 1024 if ic_kb is not None else self.ic_capacity_bytes) // 1024,
            (dc_kb * 1024 if dc_kb is not None else self.dc_capacity_bytes) // 1024,
            base_cpi_ucycles=self.base_cpi_ucycles,
            main_memory_latency=self.main_memory_latency,
            onchip_latency=self.onchip_latency,
            clock_hz=self.clock_hz,
            segment_bytes=self.segment_bytes,
            onchip_bytes=self.onchip_bytes,
            line_bytes=self.line_bytes,
        )


# -- config file format ------------------------------------------------------

_MIX_SECTIONS = (
    ("statement", "statement_mix"),
    ("operator", "operator_mix"),
    ("operand", "operand_type_mix"),
    ("locality", "locality_mix"),
)


def write_config(bundle: RunBundle, fp) -> None:
    cp = configparser.ConfigParser()
    cp["system"] = {"n_cpus": str(bundle.n_cpus), "clock_hz": str(bundle.clock_hz)}
    cp["core"] = {
        "base_cpi_ucycles": str(bundle.base_cpi_ucycles),
        "pipeline_depth": str(bundle.pipeline_depth),
    }
    cp["cache.ic"] = {
        "capacity_bytes": str(bundle.ic_capacity_bytes),
        "line_bytes": str(bundle.line_bytes),
    }
    cp["cache.dc"] = {
        "capacity_bytes": str(bundle.dc_capacity_bytes),
        "line_bytes": str(bundle.line_bytes),
    }
    cp["memory"] = {
        "segment_bytes": str(bundle.segment_bytes),
        "onchip_buffer_bytes": str(bundle.onchip_bytes),
        "main_memory_latency": str(bundle.main_memory_latency),
        "onchip_latency": str(bundle.onchip_latency),
    }
    prof = bundle.profile
    wl = {
        "statements_per_iteration": str(prof.statements_per_iteration),
        "avg_call_params": repr(prof.avg_call_params),
        "working_set_bytes": str(prof.working_set_bytes),
        "code_footprint_bytes": str(prof.code_footprint_bytes),
    }
    for prefix, attr in _MIX_SECTIONS:
        for key, val in getattr(prof, attr).items():
            wl[f"{prefix}.{key}"] = repr(val)
    cp["workload"] = wl
    cp["sweep"] = {
        "rows": "; ".join(f"{n},{ic},{dc}" for n, ic, dc in bundle.sweep.rows),
    }
    b = bundle.budget
    cp["budget"] = {
        "logic_elements": str(b.logic_elements),
        "registers": str(b.registers),
        "labs": str(b.labs),
        "m9k_blocks": str(b.m9k_blocks),
        "io_pins": str(b.io_pins),
    }
    cp.write(fp)


def read_config(fp) -> RunBundle:
    cp = configparser.ConfigParser()
    try:
        cp.read_file(fp)
    except configparser.Error as exc:
        raise ConfigError(f"bad config file: {exc}") from exc
    try:
        mixes = {attr: {} for _, attr in _MIX_SECTIONS}
        wl = cp["workload"]
        for key, val in wl.items():
            for prefix, attr in _MIX_SECTIONS:
                if key.startswith(prefix + "."):
                    mixes[attr][key[len(prefix) + 1 :]] = float(val)
        profile = WorkloadProfile(
            statement_mix=mixes["statement_mix"],
            operator_mix=mixes["operator_mix"],
            operand_type_mix=mixes["operand_type_mix"],
            locality_mix=mixes["locality_mix"],
            avg_call_params=float(wl["avg_call_params"]),
            statements_per_iteration=int(wl["statements_per_iteration"]),
            working_set_bytes=int(wl["working_set_bytes"]),
            code_footprint_bytes=int(wl["code_footprint_bytes"]),
        )
        rows = []
        raw = cp["sweep"]["rows"].strip()
        if raw:
            for part in raw.split(";"):
                n, ic, dc = (int(x) for x in part.strip().split(","))
                rows.append((n, ic, dc))
        return RunBundle(
            n_cpus=cp.getint("system", "n_cpus"),
            clock_hz=cp.getint("system", "clock_hz"),
            base_cpi_ucycles=cp.getint("core", "base_cpi_ucycles"),
            pipeline_depth=cp.getint("core", "pipeline_depth"),
            ic_capacity_bytes=cp.getint("cache.ic", "capacity_bytes"),
            dc_capacity_bytes=cp.getint("cache.dc", "capacity_bytes"),
            line_bytes=cp.getint("cache.ic", "line_bytes"),
            segment_bytes=cp.getint("memory", "segment_bytes"),
            onchip_bytes=cp.getint("memory", "onchip_buffer_bytes"),
            main_memory_latency=cp.getint("memory", "main_memory_latency"),
            onchip_latency=cp.getint("memory", "onchip_latency"),
            profile=profile,
            sweep=SweepSpace(tuple(rows)),
            budget=ResourceBudget(
                logic_elements=cp.getint("budget", "logic_elements"),
                registers=cp.getint("budget", "registers"),
                labs=cp.getint("budget", "labs"),
                m9k_blocks=cp.getint("budget", "m9k_blocks"),
                io_pins=cp.getint("budget", "io_pins"),
            ),
        )
    except (KeyError, ValueError, configparser.Error) as exc:
        raise ConfigError(f"bad config file: {exc}") from exc


def dumps_config(bundle: RunBundle) -> str:
    buf = io.StringIO()
    write_config(bundle, buf)
    return buf.getvalue()


def loads_config(text: str) -> RunBundle:
    return read_config(io.StringIO(text))
