"""Mailbox message channel guarded by a hardware-mutex model.

The queue is a bounded FIFO living in the on-chip buffer (capacity =
buffer bytes / 8-byte linked-list node). Both post and get are non-blocking:
they acquire the mutex, touch the queue, release, and return a status
instead of ever suspending the caller. The dual-driver replays the
two-core protocol where one core posts its per-iteration benchmark result
and the other polls for it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .core import UCYCLES_PER_CYCLE
from .errors import ConfigError, MailboxOpenError
from .workload import synthesize

OK = 0
EMPTY = 1

# One on-chip access per mutex or queue touch: acquire + queue op + release.
TOUCHES_PER_OP = 3


@dataclass
class MailboxStats:
    posts: int = 0
    gets: int = 0
    posts_accepted: int = 0
    gets_successful: int = 0
    full_rejections: int = 0
    empty_rejections: int = 0


class Mailbox:
    """Bounded FIFO of 32-bit words with a single-owner mutex."""

    def __init__(self, name: str, capacity: int):
        if capacity < 1:
            raise ConfigError("mailbox capacity must be >= 1")
        self.name = name
        self.capacity = capacity
        self.queue: deque = deque()
        self.mutex_owner = None
        self.stats = MailboxStats()

    def __len__(self):
        return len(self.queue)

    def _acquire(self, core_id):
        assert self.mutex_owner is None, "mutex already held"
        self.mutex_owner = core_id

    def _release(self, core_id):
        assert self.mutex_owner == core_id
        self.mutex_owner = None

    def post(self, value: int, core_id: int) -> bool:
        """Append one word; returns False (Full) without blocking if at capacity."""
        self.stats.posts += 1
        self._acquire(core_id)
        try:
            if len(self.queue) >= self.capacity:
                self.stats.full_rejections += 1
                return False
            self.queue.append(value & 0xFFFF_FFFF)
            self.stats.posts_accepted += 1
            return True
        finally:
            self._release(core_id)

    def get(self, core_id: int):
        """Dequeue the head; returns (None, EMPTY) without blocking when empty."""
        self.stats.gets += 1
        self._acquire(core_id)
        try:
            if not self.queue:
                self.stats.empty_rejections += 1
                return None, EMPTY
            self.stats.gets_successful += 1
            return self.queue.popleft(), OK
        finally:
            self._release(core_id)


class MailboxRegistry:
    """Named mailboxes from the system config; repeated opens share one instance."""

    def __init__(self, names: dict):
        self._defs = dict(names)
        self._open: dict = {}

    def open(self, name: str) -> Mailbox:
        if name not in self._defs:
            raise MailboxOpenError(name)
        if name not in self._open:
            self._open[name] = Mailbox(name, self._defs[name])
        return self._open[name]


@dataclass
class MutexEvent:
    ucycle: int
    core_id: int
    kind: str       # "acquire" | "release"


@dataclass
class MailboxTimeline:
    """Serializes timed mailbox operations through the shared on-chip region.

    An op costs TOUCHES_PER_OP on-chip accesses once the mutex is free; a
    core arriving while the peer holds the mutex spins (retrying each cycle)
    until the release, so its wait is bounded by one op duration.
    """

    onchip_latency_ucycles: int = UCYCLES_PER_CYCLE
    events: list = field(default_factory=list)
    _mutex_free_at: int = 0

    def run_op(self, core_id: int, at_ucycle: int, op):
        start = max(at_ucycle, self._mutex_free_at)
        self.events.append(MutexEvent(start, core_id, "acquire"))
        done = start + TOUCHES_PER_OP * self.onchip_latency_ucycles
        result = op()
        self.events.append(MutexEvent(done, core_id, "release"))
        self._mutex_free_at = done
        return result, done


@dataclass(frozen=True)
class TranscriptRow:
    iteration: int
    poster_value: int
    poster_accepted: bool
    getter_value: int | None       # None when the get saw an empty mailbox


@dataclass
class DriverTranscript:
    rows: list
    stats: MailboxStats
    events: list
    final_queue_len: int

    def lines(self):
        for r in self.rows:
            got = "EMPTY" if r.getter_value is None else str(r.getter_value)
            yield f"{r.iteration},{r.poster_value},{got}"

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n" if self.rows else ""


def run_dual_driver(
    system,
    profile,
    iterations: int,
    seed: int,
    traces=None,
    mailbox_name=None,
) -> DriverTranscript:
    """Replay the two-core driver loop: core 1 posts each result, core 0 polls.

    Iteration compute times come from the engine; mailbox operations are
    merged on the shared on-chip region in global time order, so the
    transcript is a pure function of (system, profile, iterations, seed).
    """
    if system.n_cpus != 2:
        raise ConfigError("dual driver requires exactly 2 cores")
    if iterations < 0:
        raise ConfigError("iterations must be >= 0")

    if traces is None:
        trace = synthesize(profile, 1, seed)
        traces = (trace, trace)
    getter_trace, poster_trace = traces

    iter_u = []
    for trace in (getter_trace, poster_trace):
        packed = engine.pack_body(trace.body)
        caches = engine.CoreCaches(system.ic, system.dc)
        out = np.zeros(iterations, dtype=np.int64)
        if iterations:
            engine.run_core(packed, iterations, system, caches, iter_ucycles=out)
        iter_u.append(out)

    registry = MailboxRegistry(system.mailboxes)
    name = mailbox_name or next(iter(system.mailboxes))
    box_getter = registry.open(name)
    box_poster = registry.open(name)   # same underlying mailbox
    timeline = MailboxTimeline(system.latency.onchip_latency * UCYCLES_PER_CYCLE)

    clock_u = system.core.clock_hz * UCYCLES_PER_CYCLE

    t = [0, 0]            # running clock per core (getter, poster)
    k = [0, 0]            # next iteration index per core
    posted: dict = {}
    gotten: dict = {}
    grant_next = 0        # round-robin tie-break between simultaneous ops

    while k[0] < iterations or k[1] < iterations:
        ready = []
        for c in (0, 1):
            if k[c] < iterations:
                ready.append((t[c] + int(iter_u[c][k[c]]), (c - grant_next) % 2, c))
        at, _, c = min(ready)
        if c == 1:
            value = clock_u // int(iter_u[1][k[1]]) if iter_u[1][k[1]] else 0
            accepted, done = timeline.run_op(1, at, lambda: box_poster.post(value, 1))
            posted[k[1]] = (value, accepted)
        else:
            (value, code), done = timeline.run_op(0, at, lambda: box_getter.get(0))
            gotten[k[0]] = value if code == OK else None
        t[c] = done
        k[c] += 1
        grant_next = (c + 1) % 2

    rows = [
        TranscriptRow(
            iteration=i,
            poster_value=posted.get(i, (0, False))[0],
            poster_accepted=posted.get(i, (0, False))[1],
            getter_value=gotten.get(i),
        )
        for i in range(iterations)
    ]
    return DriverTranscript(
        rows=rows,
        stats=box_poster.stats,
        events=list(timeline.events),
        final_queue_len=len(box_poster),
    )
