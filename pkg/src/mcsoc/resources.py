"""Affine FPGA resource model calibrated against published fitter reports.

Each resource (M9K blocks, logic elements, registers) is modeled as
fixed + per-CPU + per-KB-of-instruction-cache + per-KB-of-data-cache, fit by
non-negative least squares on relative residuals. Separate I/D cache
coefficients let the three published anchors be reproduced exactly; a weak
physical prior (one M9K holds roughly 1 KB of cache data plus tags) pins the
direction the anchors alone leave free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .config import ResourceBudget
from .errors import CalibrationError

M9K_BITS = 9_216

# Weak prior weight: pulls unidentified coefficient directions toward prior
# values without visibly disturbing the anchor fit.
PRIOR_WEIGHT = 1e-6

# blocks per KB of cache: 8192 data bits + ~1024 tag/valid/dirty bits ~= 1 M9K
M9K_PER_CACHE_KB_PRIOR = 1.0


@dataclass(frozen=True)
class DesignPoint:
    """(cores, per-core IC KB, per-core DC KB) — the DSE coordinate."""

    n_cpus: int
    ic_kb: int
    dc_kb: int


@dataclass(frozen=True)
class ResourceUsage:
    m9k: int
    logic_elements: int
    registers: int


# Published fitter reports used as calibration anchors.
PAPER_ANCHORS = (
    (DesignPoint(2, 16, 0), ResourceUsage(51, 9_718, 5_460)),
    (DesignPoint(1, 8, 32), ResourceUsage(53, 8_937, 5_492)),
    (DesignPoint(2, 8, 8), ResourceUsage(55, 11_813, 6_631)),
)

_RESOURCES = ("m9k", "logic_elements", "registers")


@dataclass(frozen=True)
class CostCoefficients:
    """Per-resource (fixed, per_cpu, per_ic_kb, per_dc_kb) tuples."""

    m9k: tuple
    logic_elements: tuple
    registers: tuple

    def as_dict(self):
        return {name: getattr(self, name) for name in _RESOURCES}


@dataclass(frozen=True)
class ResourceEstimate:
    point: DesignPoint
    m9k_used: int
    logic_elements_used: int
    registers_used: int
    fits: bool
    breakdown: dict


def _design_row(point: DesignPoint):
    return (1.0, float(point.n_cpus), float(point.n_cpus * point.ic_kb), float(point.n_cpus * point.dc_kb))


def calibrate_costs(anchors=PAPER_ANCHORS):
    """Fit the affine cost model; returns (coefficients, residual report).

    Raises CalibrationError when the anchor set cannot pin the model
    (duplicate or collinear configurations).
    """
    anchors = list(anchors)
    A = np.array([_design_row(p) for p, _ in anchors])
    if len({(p.n_cpus, p.ic_kb, p.dc_kb) for p, _ in anchors}) < len(anchors):
        raise CalibrationError("rank-deficient anchor set: duplicate configurations")
    rank = np.linalg.matrix_rank(A)
    if rank < min(len(anchors), A.shape[1]):
        raise CalibrationError(
            f"rank-deficient anchor set: design rank {rank} < {min(len(anchors), A.shape[1])}"
        )

    priors = {
        "m9k": (0.0, 0.0, M9K_PER_CACHE_KB_PRIOR, M9K_PER_CACHE_KB_PRIOR),
        "logic_elements": (0.0, 0.0, 0.0, 0.0),
        "registers": (0.0, 0.0, 0.0, 0.0),
    }
    fitted = {}
    residuals = []
    for name in _RESOURCES:
        targets = np.array([float(getattr(u, name)) for _, u in anchors])
        # relative weighting: each anchor contributes its fractional error
        rows = A / targets[:, None]
        # normalize columns so the weak prior penalizes comparable magnitudes
        scale = np.linalg.norm(rows, axis=0)
        scale[scale == 0] = 1.0
        prior = np.array(priors[name]) * scale
        aug = np.vstack([rows / scale, PRIOR_WEIGHT * np.eye(4)])
        rhs = np.concatenate([np.ones(len(anchors)), PRIOR_WEIGHT * prior])
        coef, _ = nnls(aug, rhs)
        fitted[name] = tuple(float(c / s) for c, s in zip(coef, scale))
    coeffs = CostCoefficients(**fitted)
    for point, usage in anchors:
        pred = {name: _predict(point, fitted[name]) for name in _RESOURCES}
        residuals.append(
            {
                "point": point,
                "observed": usage,
                "predicted": {k: round(v, 3) for k, v in pred.items()},
                "rel_error": {
                    k: round(pred[k] / getattr(usage, k) - 1.0, 6) for k in _RESOURCES
                },
            }
        )
    return coeffs, residuals


def _predict(point: DesignPoint, coef) -> float:
    fixed, per_cpu, per_ic, per_dc = coef
    cache_term = point.n_cpus * (point.ic_kb * per_ic + point.dc_kb * per_dc)
    # the epsilon absorbs least-squares noise so near-integer terms don't round up
    return fixed + point.n_cpus * per_cpu + math.ceil(cache_term - 1e-6)


def estimate(point: DesignPoint, coeffs: CostCoefficients, budget: ResourceBudget = ResourceBudget()) -> ResourceEstimate:
    """Predict resource usage for one design point and test it against the budget."""
    pred = {name: _predict(point, getattr(coeffs, name)) for name in _RESOURCES}
    # resources are physical integers; the fit predicate works on whole blocks
    used = {name: int(round(v)) for name, v in pred.items()}
    fits = (
        used["m9k"] <= budget.m9k_blocks
        and used["logic_elements"] <= budget.logic_elements
        and used["registers"] <= budget.registers
    )
    return ResourceEstimate(
        point=point,
        m9k_used=used["m9k"],
        logic_elements_used=used["logic_elements"],
        registers_used=used["registers"],
        fits=fits,
        breakdown={name: round(v, 3) for name, v in pred.items()},
    )


def feasible_frontier(coeffs: CostCoefficients, budget: ResourceBudget, space) -> list:
    """Fitting configs whose every single-step enlargement no longer fits.

    Steps follow the sweep space's own axis values: the next larger IC size,
    the next larger DC size, or one more CPU.
    """
    rows = list(space)
    cpu_axis = sorted({n for n, _, _ in rows})
    ic_axis = sorted({ic for _, ic, _ in rows})
    dc_axis = sorted({dc for _, _, dc in rows})

    def next_up(axis, value):
        larger = [v for v in axis if v > value]
        return larger[0] if larger else None

    frontier = []
    for n, ic, dc in rows:
        if not estimate(DesignPoint(n, ic, dc), coeffs, budget).fits:
            continue
        steps = []
        nxt = next_up(cpu_axis, n)
        if nxt is not None:
            steps.append(DesignPoint(nxt, ic, dc))
        nxt = next_up(ic_axis, ic)
        if nxt is not None:
            steps.append(DesignPoint(n, nxt, dc))
        nxt = next_up(dc_axis, dc)
        if nxt is not None:
            steps.append(DesignPoint(n, ic, nxt))
        if all(not estimate(s, coeffs, budget).fits for s in steps):
            frontier.append(DesignPoint(n, ic, dc))
    return frontier


_default_coeffs_cache = None


def default_coefficients() -> CostCoefficients:
    """Coefficients calibrated from the published anchors (cached)."""
    global _default_coeffs_cache
    if _default_coeffs_cache is None:
        _default_coeffs_cache, _ = calibrate_costs(PAPER_ANCHORS)
    return _default_coeffs_cache


# -- config-text serialization -------------------------------------------------

_COEF_KEYS = ("fixed", "per_cpu", "per_ic_kb", "per_dc_kb")


def write_coefficients(coeffs: CostCoefficients, fp) -> None:
    """Write coefficients in the same INI config-text format; round-trips exactly."""
    import configparser

    cp = configparser.ConfigParser()
    for name in _RESOURCES:
        cp[f"costs.{name}"] = {
            key: repr(value)
            for key, value in zip(_COEF_KEYS, getattr(coeffs, name))
        }
    cp.write(fp)


def read_coefficients(fp) -> CostCoefficients:
    import configparser

    cp = configparser.ConfigParser()
    cp.read_file(fp)
    fields = {}
    for name in _RESOURCES:
        section = cp[f"costs.{name}"]
        fields[name] = tuple(float(section[key]) for key in _COEF_KEYS)
    return CostCoefficients(**fields)
