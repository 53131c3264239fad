"""Batch simulation engine: packs traces to arrays and runs a replay backend.

The compiled Cython kernel is preferred; the pure-Python backend is selected
automatically when the extension is unavailable (or when MCSOC_FORCE_PYTHON
is set). Both produce bit-identical results.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .core import UCYCLES_PER_CYCLE, CoreStats
from .errors import ConfigError, SegmentationFault


def _select_backend():
    if not os.environ.get("MCSOC_FORCE_PYTHON"):
        try:
            from . import _kernel

            return _kernel
        except ImportError:
            pass
    from . import engine_py

    return engine_py


_backend = _select_backend()


def backend_name() -> str:
    return _backend.BACKEND_NAME


def get_backend(name: str):
    """Fetch a backend by name ("compiled" or "python"); used by benchmarks."""
    if name == "python":
        from . import engine_py

        return engine_py
    if name == "compiled":
        from . import _kernel

        return _kernel
    raise ConfigError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class PackedTrace:
    fetch: np.ndarray
    ref_ptr: np.ndarray
    ref_addr: np.ndarray
    ref_write: np.ndarray

    @property
    def n_instructions(self) -> int:
        return len(self.fetch)


def pack_body(body) -> PackedTrace:
    L = len(body)
    fetch = np.empty(L, dtype=np.int64)
    ref_ptr = np.zeros(L + 1, dtype=np.int64)
    total_refs = sum(len(ins.data_refs) for ins in body)
    ref_addr = np.empty(total_refs, dtype=np.int64)
    ref_write = np.empty(total_refs, dtype=np.uint8)
    pos = 0
    for i, ins in enumerate(body):
        if ins.fetch_address < 0:
            raise ConfigError(f"negative fetch address at body index {i}")
        fetch[i] = ins.fetch_address
        for addr, write in ins.data_refs:
            ref_addr[pos] = addr
            ref_write[pos] = 1 if write else 0
            pos += 1
        ref_ptr[i + 1] = pos
    return PackedTrace(fetch, ref_ptr, ref_addr, ref_write)


class CoreCaches:
    """Mutable tag arrays for one core's I and D caches; state carries across runs."""

    def __init__(self, ic_geometry, dc_geometry):
        if ic_geometry.line_bytes != dc_geometry.line_bytes:
            raise ConfigError("engine requires matching I/D cache line sizes")
        self.ic_tags = np.full(ic_geometry.num_lines, -1, dtype=np.int64)
        self.dc_tags = np.full(dc_geometry.num_lines, -1, dtype=np.int64)
        self.dc_dirty = np.zeros(dc_geometry.num_lines, dtype=np.uint8)
        self.line_bytes = ic_geometry.line_bytes


def run_core(
    packed: PackedTrace,
    iterations: int,
    system,
    caches: CoreCaches,
    iter_ucycles: np.ndarray | None = None,
    backend=None,
) -> CoreStats:
    """Replay `iterations` passes of the packed body through one core.

    Cache state mutates in place, so consecutive calls compose (warm-up then
    measurement). Raises SegmentationFault if a reference leaves the segment.
    """
    be = backend or _backend
    fill_u = system.latency.main_memory_latency * UCYCLES_PER_CYCLE
    res = be.replay(
        packed.fetch,
        packed.ref_ptr,
        packed.ref_addr,
        packed.ref_write,
        iterations,
        system.core.base_cpi_ucycles,
        fill_u,
        system.segment_size,
        caches.line_bytes,
        caches.ic_tags,
        caches.dc_tags,
        caches.dc_dirty,
        iter_ucycles,
    )
    ucycles, instrs, ic_acc, ic_miss, dc_acc, dc_miss, dc_wb, fault = res
    if fault >= 0:
        raise SegmentationFault(f"trace index {fault}: reference outside core segment")
    return CoreStats(
        instructions_retired=int(instrs),
        ucycles=int(ucycles),
        ic_accesses=int(ic_acc),
        ic_misses=int(ic_miss),
        dc_accesses=int(dc_acc),
        dc_misses=int(dc_miss),
        dc_writebacks=int(dc_wb),
    )
