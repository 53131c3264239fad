"""Command-line interface.

Commands: simulate | sweep | fit | calibrate | gen-workload | dual-driver | report.
Any command that synthesizes a workload requires --seed; output with a fixed
seed and config is byte-identical across runs. Exit codes: 0 success (and
`fit` when the design fits), 1 `fit` when it does not, 2 usage errors,
3 I/O or config errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace

from . import bench, refdata
from .config import (
    RunBundle,
    dumps_config,
    read_config,
)
from .errors import ConfigError, ResourceFitRefusal
from .mailbox import run_dual_driver
from .resources import (
    DesignPoint,
    calibrate_costs,
    default_coefficients,
    estimate,
    write_coefficients,
)
from .workload import export_trace, synthesize

CONFIG_DIR_ENV = "MCSOC_CONFIG_DIR"

SEEDED_COMMANDS = {"simulate", "sweep", "calibrate", "gen-workload", "dual-driver", "report"}
FORMATS = ("csv", "markdown", "plot-data")


@dataclass(frozen=True)
class RunSpec:
    command: str
    config_path: str | None
    seed: int | None
    fmt: str
    out: str | None
    iterations: int
    cpus: int | None = None
    ic_kb: int | None = None
    dc_kb: int | None = None
    trace_out: str | None = None
    residuals_out: str | None = None
    coefficients_out: str | None = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcsoc",
        description="Multi-core soft-SoC simulator, resource fitter, and DSE sweep",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded=True):
        p.add_argument("--config", help="config file (relative paths resolve against $MCSOC_CONFIG_DIR)")
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--iterations", type=int, default=10_000)
        if seeded:
            p.add_argument("--seed", type=int, help="workload PRNG seed (required)")

    common(sub.add_parser("simulate", help="simulate one design point"))
    common(sub.add_parser("sweep", help="simulate every config in the sweep space"))

    p_fit = sub.add_parser("fit", help="resource-fit check (exit 0 fits, 1 does not)")
    p_fit.add_argument("--config")
    p_fit.add_argument("--cpus", type=int)
    p_fit.add_argument("--ic-kb", type=int)
    p_fit.add_argument("--dc-kb", type=int)
    p_fit.add_argument("--format", choices=FORMATS, default="csv")
    p_fit.add_argument("--out")

    p_cal = sub.add_parser("calibrate", help="fit timing parameters to the anchor rows")
    common(p_cal)
    p_cal.add_argument("--residuals-out", help="write calibration residuals CSV here")
    p_cal.add_argument("--coefficients-out", help="write fitted resource coefficients here")

    p_gen = sub.add_parser("gen-workload", help="emit a workload profile config and optional trace")
    common(p_gen)
    p_gen.add_argument("--trace-out", help="also export the synthesized trace text")

    p_dd = sub.add_parser("dual-driver", help="run the two-core mailbox driver protocol")
    common(p_dd)

    common(sub.add_parser("report", help="render the sweep plus reference score tables"))
    return parser


def parse_args(argv) -> RunSpec:
    parser = build_parser()
    ns = parser.parse_args(argv)
    seed = getattr(ns, "seed", None)
    if ns.command in SEEDED_COMMANDS and seed is None:
        parser.error(f"--seed is required for {ns.command} (deterministic outputs)")
    if ns.command == "fit":
        inline = (ns.cpus, ns.ic_kb, ns.dc_kb)
        if ns.config is None and any(v is None for v in inline):
            parser.error("fit needs --config or all of --cpus/--ic-kb/--dc-kb")
    if getattr(ns, "iterations", 1) < 1:
        parser.error("--iterations must be >= 1")
    return RunSpec(
        command=ns.command,
        config_path=ns.config,
        seed=seed,
        fmt=getattr(ns, "format", "csv"),
        out=ns.out,
        iterations=getattr(ns, "iterations", 10_000),
        cpus=getattr(ns, "cpus", None),
        ic_kb=getattr(ns, "ic_kb", None),
        dc_kb=getattr(ns, "dc_kb", None),
        trace_out=getattr(ns, "trace_out", None),
        residuals_out=getattr(ns, "residuals_out", None),
        coefficients_out=getattr(ns, "coefficients_out", None),
    )


def _resolve_config_path(path: str) -> str:
    if os.path.isabs(path) or os.path.exists(path):
        return path
    base = os.environ.get(CONFIG_DIR_ENV)
    if base:
        candidate = os.path.join(base, path)
        if os.path.exists(candidate):
            return candidate
    return path


def _load_bundle(spec: RunSpec) -> RunBundle:
    if spec.config_path is None:
        return RunBundle()
    path = _resolve_config_path(spec.config_path)
    try:
        with open(path) as fp:
            return read_config(fp)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _timing_from(bundle: RunBundle) -> bench.TimingParams:
    return bench.TimingParams(
        base_cpi_ucycles=bundle.base_cpi_ucycles,
        main_memory_latency=bundle.main_memory_latency,
        working_set_bytes=bundle.profile.working_set_bytes,
        code_footprint_bytes=bundle.profile.code_footprint_bytes,
    )


def _system_overrides(bundle: RunBundle) -> dict:
    return {
        "segment_bytes": bundle.segment_bytes,
        "onchip_bytes": bundle.onchip_bytes,
        "onchip_latency": bundle.onchip_latency,
        "line_bytes": bundle.line_bytes,
    }


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)


def _render_table(table: bench.SweepTable, fmt: str) -> str:
    if fmt == "csv":
        return table.to_csv()
    if fmt == "markdown":
        return table.to_markdown()
    return table.to_plot_data()


def execute(spec: RunSpec) -> int:
    bundle = _load_bundle(spec)
    timing = _timing_from(bundle)

    if spec.command == "simulate":
        point = DesignPoint(
            bundle.n_cpus, bundle.ic_capacity_bytes // 1024, bundle.dc_capacity_bytes // 1024
        )
        res = bench.run_benchmark(
            point, bundle.profile, spec.iterations, spec.seed,
            timing=timing, budget=bundle.budget, clock_hz=bundle.clock_hz,
            system_overrides=_system_overrides(bundle),
        )
        row = bench.SweepRow(
            point.n_cpus, point.ic_kb, point.dc_kb,
            res.dhrystones_per_sec, res.m9k_used, res.fits,
        )
        _emit(_render_table(bench.SweepTable((row,)), spec.fmt), spec.out)
        return 0

    if spec.command == "sweep":
        table = bench.sweep(
            bundle.sweep, bundle.profile, spec.seed,
            timing=timing, budget=bundle.budget, iterations=spec.iterations,
            clock_hz=bundle.clock_hz, system_overrides=_system_overrides(bundle),
        )
        _emit(_render_table(table, spec.fmt), spec.out)
        return 0

    if spec.command == "fit":
        if spec.cpus is not None:
            point = DesignPoint(spec.cpus, spec.ic_kb, spec.dc_kb)
        else:
            point = DesignPoint(
                bundle.n_cpus,
                bundle.ic_capacity_bytes // 1024,
                bundle.dc_capacity_bytes // 1024,
            )
        est = estimate(point, default_coefficients(), bundle.budget)
        lines = [
            f"config: {point.n_cpus} CPU(s), IC {point.ic_kb} KB, DC {point.dc_kb} KB",
            f"m9k: {est.m9k_used} / {bundle.budget.m9k_blocks}",
            f"logic_elements: {est.logic_elements_used} / {bundle.budget.logic_elements}",
            f"registers: {est.registers_used} / {bundle.budget.registers}",
            f"fits: {'yes' if est.fits else 'no'}",
        ]
        _emit("\n".join(lines) + "\n", spec.out)
        return 0 if est.fits else 1

    if spec.command == "calibrate":
        result = bench.calibrate_timing(seed=spec.seed, profile=bundle.profile)
        fitted = replace(
            bundle,
            base_cpi_ucycles=result.timing.base_cpi_ucycles,
            main_memory_latency=result.timing.main_memory_latency,
            profile=replace(
                bundle.profile,
                working_set_bytes=result.timing.working_set_bytes,
                code_footprint_bytes=result.timing.code_footprint_bytes,
            ),
        )
        _emit(dumps_config(fitted), spec.out)
        if spec.residuals_out:
            with open(spec.residuals_out, "w", newline="\n") as fp:
                fp.write(bench.residuals_csv(result))
        if spec.coefficients_out:
            coeffs, _ = calibrate_costs()
            with open(spec.coefficients_out, "w", newline="\n") as fp:
                write_coefficients(coeffs, fp)
        return 0

    if spec.command == "gen-workload":
        _emit(dumps_config(bundle), spec.out)
        if spec.trace_out:
            trace = synthesize(bundle.profile, spec.iterations, spec.seed)
            with open(spec.trace_out, "w", newline="\n") as fp:
                export_trace(trace, fp)
        return 0

    if spec.command == "dual-driver":
        system = bundle.system(n_cpus=2)
        transcript = run_dual_driver(system, bundle.profile, spec.iterations, spec.seed)
        _emit(transcript.text(), spec.out)
        return 0

    if spec.command == "report":
        table = bench.sweep(
            bundle.sweep, bundle.profile, spec.seed,
            timing=timing, budget=bundle.budget, iterations=spec.iterations,
            clock_hz=bundle.clock_hz, system_overrides=_system_overrides(bundle),
        )
        parts = ["# Design-space sweep", "", table.to_markdown()]
        for title, rows in (
            ("Reference VAX MIPS 1.1 scores (published)", refdata.PC_RESULTS_V11),
            ("Reference VAX MIPS 2.1 scores (published)", refdata.PC_RESULTS_V21),
        ):
            parts += [f"## {title}", "", "| CPU | MHz | VAX MIPS |", "|-----|-----|----------|"]
            parts += [f"| {name} | {mhz} | {score} |" for name, mhz, score in rows]
            parts.append("")
        _emit("\n".join(parts), spec.out)
        return 0

    raise AssertionError(f"unhandled command {spec.command}")


def main(argv=None) -> int:
    try:
        spec = parse_args(argv if argv is not None else sys.argv[1:])
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return execute(spec)
    except ResourceFitRefusal as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
