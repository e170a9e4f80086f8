"""Compute carbon intensity: grams CO2e per 10^18 utilized FLOPs.

The denominator is always a quantity of work (ExaFLOPs executed), never a
rate. Intensity splits into an embodied component, spreading a chip's
cradle-to-grave footprint over the work it performs in its lifetime, and
an operational component driven by measured energy per unit of work under
a chosen electricity accounting standard. Energy per ExaFLOP is defined
PUE-inclusive throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ComputationError
from .lca import EmbodiedBreakdown, MachineInventory, per_chip_embodied
from .telemetry import FleetWindow, PlatformSpec

EXA = 1e18
_JOULES_PER_KWH = 3.6e6


@dataclass(frozen=True)
class CciReport:
    """Carbon intensity of one platform under one accounting standard."""

    platform_id: str
    standard: str
    energy_kwh_per_exaflop: float  # PUE-inclusive
    embodied_cci: float  # gCO2e per 10^18 FLOPs
    operational_cci: float
    lifetime_exaflops_per_chip: float

    @property
    def total_cci(self) -> float:
        return self.embodied_cci + self.operational_cci


@dataclass(frozen=True)
class WorkloadEstimate:
    """Ballpark emissions for a job of known FLOP count."""

    flops: float
    embodied_g: float
    operational_g: float

    @property
    def total_g(self) -> float:
        return self.embodied_g + self.operational_g


def energy_per_exaflop(window: FleetWindow, pue: float) -> float:
    """Measured kWh consumed per 10^18 utilized FLOPs, including overhead."""
    if window.total_flops <= 0:
        raise ComputationError(f"no utilized compute in window for {window.platform_id!r}")
    return window.total_energy_kwh * pue / (window.total_flops / EXA)


def operational_cci(energy_kwh_per_exaflop: float, factor_g_per_kwh: float) -> float:
    if energy_kwh_per_exaflop < 0 or factor_g_per_kwh < 0:
        raise ValueError("inputs must be non-negative")
    return energy_kwh_per_exaflop * factor_g_per_kwh


def embodied_cci(embodied_g_per_chip: float, lifetime_exaflops_per_chip: float) -> float:
    if lifetime_exaflops_per_chip <= 0:
        raise ComputationError("zero lifetime compute; embodied intensity undefined")
    return embodied_g_per_chip / lifetime_exaflops_per_chip


def lifetime_exaflops(window: FleetWindow, spec: PlatformSpec) -> float:
    """Measured utilized FLOP rate per chip extrapolated over the lifetime.

    Uses the observed rate rather than peak throughput times an assumed
    utilization, so idle and underused machines weigh the figure down.
    """
    chip_seconds = window.machine_seconds * spec.chips_per_machine
    rate = window.total_flops / chip_seconds
    return rate * spec.lifetime_seconds / EXA


def build_report(
    window: FleetWindow,
    spec: PlatformSpec,
    inventory: MachineInventory,
    factor_g_per_kwh: float,
    pue: float,
    standard: str,
    breakdown: EmbodiedBreakdown | None = None,
) -> CciReport:
    """Assemble the full carbon-intensity report for one platform."""
    if breakdown is None:
        breakdown = per_chip_embodied(inventory, spec)
    epf = energy_per_exaflop(window, pue)
    lef = lifetime_exaflops(window, spec)
    return CciReport(
        platform_id=spec.platform_id,
        standard=standard,
        energy_kwh_per_exaflop=epf,
        embodied_cci=embodied_cci(breakdown.total * 1000.0, lef),
        operational_cci=operational_cci(epf, factor_g_per_kwh),
        lifetime_exaflops_per_chip=lef,
    )


def estimate_workload(flops_total: float, report: CciReport) -> WorkloadEstimate:
    """Emissions for a job, split by the report's component intensities."""
    if flops_total < 0:
        raise ValueError("flops_total must be non-negative")
    exaflops = flops_total / EXA
    return WorkloadEstimate(
        flops=flops_total,
        embodied_g=exaflops * report.embodied_cci,
        operational_g=exaflops * report.operational_cci,
    )


def flops_per_joule(energy_kwh_per_exaflop: float) -> float:
    """Utilized performance per watt implied by an energy intensity."""
    if energy_kwh_per_exaflop <= 0:
        raise ValueError("energy intensity must be positive")
    return EXA / (energy_kwh_per_exaflop * _JOULES_PER_KWH)
