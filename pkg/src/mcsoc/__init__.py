"""Trace-driven multi-core soft-SoC simulator, FPGA resource model, and DSE engine."""

__version__ = "0.1.0"
