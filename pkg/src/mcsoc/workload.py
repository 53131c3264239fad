"""Synthetic integer-benchmark workload generation.

One loop body of `statements_per_iteration` statements is built from the
profile's statement/operator/operand distributions and lowered to abstract
instructions; the trace replays that fixed body. Apportionment of classes is
done by largest-remainder quota so every mix lands within a fraction of a
percentage point of the profile for any seed; the seed only controls
arrangement and address placement.

Lowering rules:
  assignment -> loads for memory-resident sources + 1 alu + store if the
                destination is memory-resident (locals/constants stay in
                registers)
  control    -> 1 alu (the comparison) + 1 branch
  call       -> round(avg_call_params) parameter stores + 2 call-overhead
                instructions, and the code stream continues at a fresh
                callee region inside the code footprint

Memory-resident means locality global or by-reference parameter, or an
aggregate type (string/array/record). Parameters and locals live in a small
hot (stack) region near the top of the segment; globals and aggregates are
spread over `working_set_bytes` placed just after the code footprint.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .errors import ConfigError

# op classes
ALU = "alu"
LOAD = "load"
STORE = "store"
BRANCH = "branch"
CALL_OVERHEAD = "call_overhead"

OP_CLASSES = (ALU, LOAD, STORE, BRANCH, CALL_OVERHEAD)

WORD = 4

# Words touched per aggregate operand reference. Strings model block
# copy/compare over two short buffers; arrays/records touch a pair of fields.
STRING_WORDS = 12
AGGREGATE_WORDS = 2

# Stack-like hot region: fixed window near the top of a 128 KiB segment.
HOT_BASE = 0x1F000
HOT_BYTES = 256

# Profile densities per 103 statements (operator and operand-reference
# totals of the reference workload); scaled for other statement counts.
OPERATORS_PER_BODY = 63
STATEMENTS_REFERENCE = 103

# Share of parameters passed by reference (9.1 of 18.6 points).
PARAM_SPLIT = {"value": 9.5, "reference": 9.1}

# Defaults fitted so the calibrated system reproduces the published
# instruction-cache and data-cache sweep ratios (see bench.calibrate_timing).
DEFAULT_WORKING_SET_BYTES = 7168
DEFAULT_CODE_FOOTPRINT_BYTES = 9216


@dataclass(frozen=True)
class WorkloadProfile:
    statement_mix: dict
    operator_mix: dict
    operand_type_mix: dict
    locality_mix: dict
    avg_call_params: float = 1.82
    statements_per_iteration: int = 103
    working_set_bytes: int = DEFAULT_WORKING_SET_BYTES
    code_footprint_bytes: int = DEFAULT_CODE_FOOTPRINT_BYTES

    def __post_init__(self):
        for name, mix in (
            ("statement_mix", self.statement_mix),
            ("operator_mix", self.operator_mix),
            ("operand_type_mix", self.operand_type_mix),
            ("locality_mix", self.locality_mix),
        ):
            total = sum(mix.values())
            if abs(total - 100.0) > 0.2:
                raise ConfigError(f"{name} sums to {total}, expected 100 +/- 0.2")
        if self.statements_per_iteration <= 0:
            raise ConfigError("statements_per_iteration must be positive")
        if self.working_set_bytes < 32:
            raise ConfigError("working_set_bytes smaller than one cache line")
        if self.code_footprint_bytes < 32:
            raise ConfigError("code_footprint_bytes smaller than one cache line")


def default_profile(**overrides) -> WorkloadProfile:
    """The published Dhrystone 2.1 statement/operator/operand profile."""
    prof = WorkloadProfile(
        statement_mix={"assignment": 51.0, "control": 32.4, "call": 16.7},
        operator_mix={"arithmetic": 50.8, "comparison": 42.8, "logic": 6.3},
        operand_type_mix={
            "integer": 72.3,
            "character": 18.6,
            "pointer": 5.0,
            "string": 2.5,
            "array": 0.8,
            "record": 0.8,
        },
        locality_mix={
            "local": 47.1,
            "global": 9.1,
            "parameter": 18.6,
            "function_result": 2.5,
            "constant": 22.7,
        },
    )
    return replace(prof, **overrides) if overrides else prof


def largest_remainder(n: int, weights: dict) -> dict:
    """Apportion n items to classes proportionally, deterministically."""
    total = sum(weights.values())
    if total <= 0:
        raise ConfigError("mix weights sum to zero")
    shares = {k: n * w / total for k, w in weights.items()}
    counts = {k: int(s) for k, s in shares.items()}
    leftover = n - sum(counts.values())
    by_frac = sorted(weights, key=lambda k: shares[k] - counts[k], reverse=True)
    for k in by_frac[:leftover]:
        counts[k] += 1
    return counts


@dataclass(frozen=True)
class AbstractInstruction:
    fetch_address: int                 # segment-relative byte address
    op_class: str
    data_refs: tuple = ()              # ((addr, is_write), ...)
    stmt: str | None = None            # statement class, tagged on its first instruction
    operator: str | None = None
    operands: tuple = ()               # ((type, locality), ...)

    def __post_init__(self):
        if self.op_class in (LOAD, STORE) and not self.data_refs:
            raise ConfigError(f"{self.op_class} instruction carries no data refs")
        if self.op_class in (ALU, BRANCH) and self.data_refs:
            raise ConfigError(f"{self.op_class} instruction carries data refs")


@dataclass(frozen=True)
class Trace:
    """A fixed loop body replayed `iterations` times."""

    body: tuple
    iterations: int
    profile: WorkloadProfile
    seed: int

    def __len__(self):
        return len(self.body) * self.iterations

    def instructions(self):
        """Iterate the full replayed stream (body repeated in order)."""
        for _ in range(self.iterations):
            yield from self.body


class _Pool:
    """Pre-apportioned, shuffled draw pool with deterministic constraint swaps."""

    def __init__(self, items, rng):
        self.items = list(items)
        rng.shuffle(self.items)
        self.pos = 0

    def draw(self, disallow=None):
        i = self.pos
        items = self.items
        if disallow is not None and i < len(items) and items[i] == disallow:
            for j in range(i + 1, len(items)):
                if items[j] != disallow:
                    items[i], items[j] = items[j], items[i]
                    break
        if i >= len(items):
            return None
        self.pos += 1
        return items[i]


def _memory_resident(operand_type, locality):
    return locality in ("global", "parameter_reference") or operand_type in (
        "string",
        "array",
        "record",
    )


def _operand_words(operand_type, region_bytes):
    if operand_type == "string":
        words = STRING_WORDS
    elif operand_type in ("array", "record"):
        words = AGGREGATE_WORDS
    else:
        words = 1
    return max(1, min(words, region_bytes // WORD))


class _BodyBuilder:
    def __init__(self, profile: WorkloadProfile, rng: random.Random):
        self.profile = profile
        self.rng = rng
        self.instrs = []
        self.cursor = 0
        self.footprint = profile.code_footprint_bytes
        self.pending_stmt = None

        n = profile.statements_per_iteration
        stmt_counts = largest_remainder(n, profile.statement_mix)
        self.n_assign = stmt_counts.get("assignment", 0)
        self.n_control = stmt_counts.get("control", 0)
        self.n_call = stmt_counts.get("call", 0)

        statements = (
            ["assignment"] * self.n_assign
            + ["control"] * self.n_control
            + ["call"] * self.n_call
        )
        rng.shuffle(statements)
        self.statements = statements

        ops_total = round(n * OPERATORS_PER_BODY / STATEMENTS_REFERENCE)
        self.n_two_src = max(0, min(ops_total - self.n_control, self.n_assign))
        two_src = set(rng.sample(range(self.n_assign), self.n_two_src))
        self.two_src_flags = two_src

        self.params_per_call = round(profile.avg_call_params)
        # Reference-workload ratio of value-returning calls to all calls.
        self.n_func_calls = round(self.n_call * 6 / 17)
        func_calls = set(rng.sample(range(self.n_call), min(self.n_func_calls, self.n_call)))
        self.func_call_flags = func_calls

        operand_total = (
            self.n_call * self.params_per_call
            + len(func_calls)
            + self.n_assign * 2
            + self.n_two_src
            + self.n_control * 2
        )

        loc_counts = largest_remainder(operand_total, profile.locality_mix)
        n_param = loc_counts.pop("parameter", 0)
        param_split = largest_remainder(n_param, PARAM_SPLIT)
        localities = []
        for k, c in loc_counts.items():
            localities += [k] * c
        localities += ["parameter_value"] * param_split.get("value", 0)
        localities += ["parameter_reference"] * param_split.get("reference", 0)

        # Call-site parameter stores and call results consume their own
        # locality classes; pull them out before building the general pool.
        reserved_params = []
        need = self.n_call * self.params_per_call
        rng.shuffle(localities)
        rest = []
        for loc in localities:
            if need and loc.startswith("parameter_"):
                reserved_params.append(loc)
                need -= 1
            else:
                rest.append(loc)
        n_res = len(func_calls)
        rest2 = []
        for loc in rest:
            if n_res and loc == "function_result":
                n_res -= 1
            else:
                rest2.append(loc)
        self.reserved_params = reserved_params
        self.loc_pool = _Pool(rest2, rng)
        self.type_pool = _Pool(
            sum(([k] * c for k, c in largest_remainder(operand_total, profile.operand_type_mix).items()), []),
            rng,
        )

        op_counts = largest_remainder(ops_total, profile.operator_mix)
        self.op_pool = _Pool(sum(([k] * c for k, c in op_counts.items()), []), rng)

    # -- address helpers ----------------------------------------------------

    def _global_addr(self, words):
        ws = self.profile.working_set_bytes
        span = max(WORD, ws - (words - 1) * WORD)
        return self.footprint + self.rng.randrange(0, span, WORD)

    def _hot_addr(self, words):
        span = max(WORD, HOT_BYTES - (words - 1) * WORD)
        return HOT_BASE + self.rng.randrange(0, span, WORD)

    def _operand_addr(self, operand_type, locality):
        if locality in ("local", "parameter_value", "parameter_reference"):
            words = _operand_words(operand_type, HOT_BYTES)
            return self._hot_addr(words), words
        words = _operand_words(operand_type, self.profile.working_set_bytes)
        return self._global_addr(words), words

    # -- emission -----------------------------------------------------------

    def emit(self, op_class, refs=(), operator=None, operands=()):
        stmt = self.pending_stmt
        self.pending_stmt = None
        self.instrs.append(
            AbstractInstruction(
                fetch_address=self.cursor % self.footprint,
                op_class=op_class,
                data_refs=tuple(refs),
                stmt=stmt,
                operator=operator,
                operands=tuple(operands),
            )
        )
        self.cursor += WORD

    def _draw_operand(self, no_constant=False):
        loc = self.loc_pool.draw(disallow="constant" if no_constant else None)
        typ = self.type_pool.draw()
        if loc is None:
            loc = "local"
        if typ is None:
            typ = "integer"
        return typ, loc

    def _refs_for(self, typ, loc, write):
        addr, words = self._operand_addr(typ, loc)
        return tuple((addr + WORD * w, write) for w in range(words))

    def _assignment(self, two_src):
        operator = self.op_pool.draw() if two_src else None
        srcs = [self._draw_operand() for _ in range(2 if two_src else 1)]
        dest = self._draw_operand(no_constant=True)
        reg_operands = []
        for typ, loc in srcs:
            if _memory_resident(typ, loc):
                self.emit(LOAD, self._refs_for(typ, loc, False), operands=[(typ, loc)])
            else:
                reg_operands.append((typ, loc))
        d_typ, d_loc = dest
        if _memory_resident(d_typ, d_loc):
            self.emit(ALU, operator=operator, operands=reg_operands)
            self.emit(STORE, self._refs_for(d_typ, d_loc, True), operands=[dest])
        else:
            self.emit(ALU, operator=operator, operands=reg_operands + [dest])

    def _control(self):
        operator = self.op_pool.draw()
        reg_operands = []
        for _ in range(2):
            typ, loc = self._draw_operand()
            if _memory_resident(typ, loc):
                self.emit(LOAD, self._refs_for(typ, loc, False), operands=[(typ, loc)])
            else:
                reg_operands.append((typ, loc))
        self.emit(ALU, operator=operator, operands=reg_operands)
        self.emit(BRANCH)

    def _call(self, is_func):
        for _ in range(self.params_per_call):
            loc = self.reserved_params.pop() if self.reserved_params else self.loc_pool.draw() or "parameter_value"
            typ = self.type_pool.draw() or "integer"
            words = _operand_words(typ, HOT_BYTES)
            addr = self._hot_addr(words)
            refs = tuple((addr + WORD * w, True) for w in range(words))
            self.emit(STORE, refs, operands=[(typ, loc)])
        self.emit(CALL_OVERHEAD)
        # control transfers to the callee's code region
        self.cursor = self.rng.randrange(0, self.footprint, WORD)
        if is_func:
            typ = self.type_pool.draw() or "integer"
            self.emit(CALL_OVERHEAD, operands=[(typ, "function_result")])
        else:
            self.emit(CALL_OVERHEAD)

    def build(self):
        call_idx = 0
        assign_idx = 0
        for stmt in self.statements:
            self.pending_stmt = stmt
            if stmt == "assignment":
                self._assignment(assign_idx in self.two_src_flags)
                assign_idx += 1
            elif stmt == "control":
                self._control()
            else:
                self._call(call_idx in self.func_call_flags)
                call_idx += 1
        return tuple(self.instrs)


def synthesize(profile: WorkloadProfile, iterations: int, seed: int) -> Trace:
    """Generate the fixed loop body once from the seed; replay it `iterations` times."""
    if iterations < 0:
        raise ConfigError("iterations must be >= 0")
    if profile.code_footprint_bytes + profile.working_set_bytes > HOT_BASE:
        raise ConfigError("code footprint + working set would overlap the hot region")
    rng = random.Random(seed)
    body = _BodyBuilder(profile, rng).build()
    return Trace(body=body, iterations=iterations, profile=profile, seed=seed)


def _percentages(counts: dict) -> dict:
    total = sum(counts.values())
    return {k: 100.0 * v / total for k, v in counts.items()} if total else {}


def measure_mixes(trace: Trace) -> dict:
    """Count statement/operator/operand annotations over the trace body."""
    stmt_counts: dict = {}
    op_counts: dict = {}
    type_counts: dict = {}
    loc_counts: dict = {}
    for ins in trace.body:
        if ins.stmt:
            stmt_counts[ins.stmt] = stmt_counts.get(ins.stmt, 0) + 1
        if ins.operator:
            op_counts[ins.operator] = op_counts.get(ins.operator, 0) + 1
        for typ, loc in ins.operands:
            type_counts[typ] = type_counts.get(typ, 0) + 1
            loc = "parameter" if loc.startswith("parameter") else loc
            loc_counts[loc] = loc_counts.get(loc, 0) + 1
    return {
        "statement_mix": _percentages(stmt_counts),
        "operator_mix": _percentages(op_counts),
        "operand_type_mix": _percentages(type_counts),
        "locality_mix": _percentages(loc_counts),
    }


def validate(trace: Trace, profile: WorkloadProfile) -> dict:
    """Max absolute deviation (percentage points) of each mix vs the profile."""
    if not trace.body:
        raise ConfigError("cannot validate an empty trace")
    measured = measure_mixes(trace)
    deviations = {}
    for mix_name, expected in (
        ("statement_mix", profile.statement_mix),
        ("operator_mix", profile.operator_mix),
        ("operand_type_mix", profile.operand_type_mix),
        ("locality_mix", profile.locality_mix),
    ):
        if not expected or sum(expected.values()) <= 0:
            raise ConfigError(f"degenerate profile mix {mix_name}")
        got = measured[mix_name]
        keys = set(expected) | set(got)
        deviations[mix_name] = max(abs(got.get(k, 0.0) - expected.get(k, 0.0)) for k in keys)
    return deviations


# -- text trace format (line per instruction: fetch op [R|W addr]*) ---------

def format_instruction(ins: AbstractInstruction) -> str:
    parts = [f"{ins.fetch_address:#010x}", ins.op_class]
    for addr, write in ins.data_refs:
        parts.append("W" if write else "R")
        parts.append(f"{addr:#010x}")
    return " ".join(parts)


def export_trace(trace: Trace, fp) -> None:
    for ins in trace.instructions():
        fp.write(format_instruction(ins) + "\n")


def parse_trace_line(line: str) -> AbstractInstruction:
    tok = line.split()
    fetch = int(tok[0], 16)
    op = tok[1]
    refs = []
    for i in range(2, len(tok), 2):
        refs.append((int(tok[i + 1], 16), tok[i] == "W"))
    return AbstractInstruction(fetch_address=fetch, op_class=op, data_refs=tuple(refs))
