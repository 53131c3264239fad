# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled batch replay kernel. Semantics identical to engine_py.replay."""

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "compiled"


def replay(
    cnp.int64_t[::1] fetch,
    cnp.int64_t[::1] ref_ptr,
    cnp.int64_t[::1] ref_addr,
    cnp.uint8_t[::1] ref_write,
    long long iterations,
    long long base_cpi_u,
    long long fill_u,
    long long segment_size,
    long long line_bytes,
    cnp.int64_t[::1] ic_tags,
    cnp.int64_t[::1] dc_tags,
    cnp.uint8_t[::1] dc_dirty,
    iter_ucycles=None,
):
    cdef Py_ssize_t L = fetch.shape[0]
    cdef Py_ssize_t ic_lines = ic_tags.shape[0]
    cdef Py_ssize_t dc_lines = dc_tags.shape[0]
    cdef cnp.int64_t[::1] iter_out
    cdef bint want_iters = iter_ucycles is not None
    if want_iters:
        iter_out = iter_ucycles

    cdef long long t = 0, t0
    cdef long long instructions = 0
    cdef long long ic_acc = 0, ic_miss = 0
    cdef long long dc_acc = 0, dc_miss = 0, dc_wb = 0
    cdef long long it, i, r, addr, line, idx
    cdef int w

    for it in range(iterations):
        t0 = t
        for i in range(L):
            ic_acc += 1
            line = fetch[i] / line_bytes
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
                    return (t, instructions, ic_acc, ic_miss,
                            dc_acc, dc_miss, dc_wb, i)
                dc_acc += 1
                w = ref_write[r]
                line = addr / line_bytes
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
        if want_iters:
            iter_out[it] = t - t0

    return (t, instructions, ic_acc, ic_miss, dc_acc, dc_miss, dc_wb, -1)
