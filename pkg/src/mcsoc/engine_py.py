"""Pure-Python batch replay backend (fallback when the compiled kernel is absent).

Mirrors _kernel.replay exactly: same packed-array interface, same integer
arithmetic, bit-identical results.
"""

from __future__ import annotations

BACKEND_NAME = "python"


def replay(
    fetch,          # int64[L] segment-relative fetch addresses
    ref_ptr,        # int64[L+1] per-instruction ref slices
    ref_addr,       # int64[R]
    ref_write,      # uint8[R]
    iterations,
    base_cpi_u,
    fill_u,         # line-fill latency in micro-cycles
    segment_size,
    line_bytes,
    ic_tags,        # int64[ic_lines] (-1 invalid), may be length 0
    dc_tags,        # int64[dc_lines]
    dc_dirty,       # uint8[dc_lines]
    iter_ucycles=None,   # optional int64[iterations] out: ucycles per iteration
):
    L = len(fetch)
    ic_lines = len(ic_tags)
    dc_lines = len(dc_tags)
    t = 0
    instructions = 0
    ic_acc = ic_miss = 0
    dc_acc = dc_miss = dc_wb = 0

    for it in range(iterations):
        t0 = t
        for i in range(L):
            ic_acc += 1
            line = fetch[i] // line_bytes
            if ic_lines:
                idx = line % ic_lines
                if ic_tags[idx] != line:
                    ic_tags[idx] = line
                    ic_miss += 1
                    t += fill_u
            else:
                ic_miss += 1
                t += fill_u
            for r in range(ref_ptr[i], ref_ptr[i + 1]):
                addr = ref_addr[r]
                if addr < 0 or addr >= segment_size:
                    return (
                        int(t), instructions, ic_acc, ic_miss,
                        dc_acc, dc_miss, dc_wb, i,
                    )
                dc_acc += 1
                w = ref_write[r]
                line = addr // line_bytes
                if dc_lines:
                    idx = line % dc_lines
                    if dc_tags[idx] == line:
                        if w:
                            dc_dirty[idx] = 1
                    else:
                        dc_miss += 1
                        if dc_dirty[idx]:
                            dc_wb += 1
                        dc_tags[idx] = line
                        dc_dirty[idx] = 1 if w else 0
                        t += fill_u
                else:
                    dc_miss += 1
                    t += fill_u
            t += base_cpi_u
            instructions += 1
        if iter_ucycles is not None:
            iter_ucycles[it] = t - t0

    return (int(t), instructions, ic_acc, ic_miss, dc_acc, dc_miss, dc_wb, -1)
