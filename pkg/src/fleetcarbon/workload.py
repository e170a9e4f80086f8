"""Per-step emissions for benchmark runs on multi-machine pods.

Interval power during a run only reflects the job while every machine in
the pod is actually busy, so intervals where any assigned machine falls
below the duty-cycle threshold are filtered out before averaging power.
The per-step figure combines that on-duty power with the measured step
time and an embodied-emissions rate derived from the machine's
manufacturing-plus-transport footprint spread over its service life.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ComputationError, ConfigError, IngestError
from .lca import MachineInventory, machine_manufacturing, machine_transport
from .telemetry import PlatformSpec, parse_rfc3339

DEFAULT_DUTY_THRESHOLD = 0.8
_JOULES_PER_KWH = 3.6e6


@dataclass(frozen=True)
class RunInterval:
    """Power and duty readings for every pod machine in one interval."""

    timestamp: str
    power_w: dict[str, float]
    duty_cycle: dict[str, float]


@dataclass(frozen=True)
class WorkloadRun:
    run_id: str
    workload: str
    platform_id: str
    machines: tuple[str, ...]
    intervals: tuple[RunInterval, ...]
    step_time_s: float
    complete: bool = True
    flops_per_step: float | None = None

    def __post_init__(self) -> None:
        if not self.machines:
            raise ValueError(f"run {self.run_id}: machine set is empty")
        if self.step_time_s <= 0:
            raise ValueError(f"run {self.run_id}: step_time must be > 0")


@dataclass(frozen=True)
class OnDutyPower:
    """Average machine power over fully-on-duty intervals."""

    power_w: float
    included_intervals: int
    excluded_intervals: int


@dataclass(frozen=True)
class StepEmissions:
    """Grams CO2e per machine per workload step."""

    run_id: str
    operational_g: float
    embodied_g: float
    on_duty: OnDutyPower

    @property
    def total_g(self) -> float:
        return self.operational_g + self.embodied_g


@dataclass(frozen=True)
class RunPolicy:
    """Manual-validation verdicts for incomplete runs.

    Incomplete runs still yield valid per-step numbers for the steps they
    did complete, but their measured power is hand-checked; this records
    the outcome. Runs in neither list are processed but flagged.
    """

    accept: frozenset[str] = field(default_factory=frozenset)
    reject: frozenset[str] = field(default_factory=frozenset)

    def verdict(self, run: WorkloadRun) -> str:
        if run.run_id in self.reject:
            return "rejected"
        if run.complete or run.run_id in self.accept:
            return "accepted"
        return "needs-validation"


def on_duty_power(run: WorkloadRun, threshold: float = DEFAULT_DUTY_THRESHOLD) -> OnDutyPower:
    """Mean power across machines and intervals where the whole pod is busy.

    An interval counts only if every machine assigned to the run reports a
    duty cycle at or above the threshold; one straggler excludes the
    interval for all machines.
    """
    if not run.intervals:
        raise ComputationError(f"run {run.run_id}: no interval samples")
    included: list[float] = []
    excluded = 0
    for interval in run.intervals:
        on_duty = all(
            interval.duty_cycle.get(machine, 0.0) >= threshold for machine in run.machines
        )
        if not on_duty:
            excluded += 1
            continue
        included.extend(interval.power_w[machine] for machine in run.machines)
    if not included:
        raise ComputationError(f"run {run.run_id}: no on-duty intervals at threshold {threshold}")
    return OnDutyPower(
        power_w=math.fsum(included) / len(included),
        included_intervals=len(run.intervals) - excluded,
        excluded_intervals=excluded,
    )


def embodied_rate_g_per_s(inventory: MachineInventory, spec: PlatformSpec) -> float:
    """Manufacturing + transport per machine, in grams per service second.

    Construction allocations are excluded: a pod borrows the building for
    the step, it does not consume it.
    """
    mt_kg = machine_manufacturing(inventory) + machine_transport(inventory)
    return mt_kg * 1000.0 / spec.lifetime_seconds


def emissions_per_step(
    run: WorkloadRun,
    factor_g_per_kwh: float,
    inventory: MachineInventory,
    spec: PlatformSpec,
    pue: float = 1.0,
    threshold: float = DEFAULT_DUTY_THRESHOLD,
) -> StepEmissions:
    """Operational plus embodied grams per machine-step.

    Pass pue=1.0 (the default) to account at the machine meter; a real PUE
    folds cooling overhead into the per-step figure.
    """
    if inventory is None:
        raise ConfigError(f"run {run.run_id}: no inventory for {run.platform_id!r}")
    duty = on_duty_power(run, threshold)
    operational = duty.power_w * run.step_time_s * pue * factor_g_per_kwh / _JOULES_PER_KWH
    embodied = embodied_rate_g_per_s(inventory, spec) * run.step_time_s
    return StepEmissions(
        run_id=run.run_id,
        operational_g=operational,
        embodied_g=embodied,
        on_duty=duty,
    )


def workload_cci(step_total_g: float, flops_per_step: float) -> float:
    """Carbon intensity of the workload itself, g per 10^18 FLOPs."""
    if flops_per_step <= 0:
        raise ValueError("flops_per_step must be > 0")
    return step_total_g / (flops_per_step / 1e18)


def read_runs(manifest_path: str | Path, intervals_path: str | Path) -> tuple[WorkloadRun, ...]:
    """Load workload runs: a JSON manifest plus JSON-lines interval records.

    Interval records carry run_id, machine_id, interval_start, power_w and
    duty_cycle; records for unknown runs are ignored so one interval file
    can back several manifests.
    """
    try:
        manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError(f"cannot read run manifest {manifest_path}: {exc}") from None

    runs_cfg = manifest["runs"] if isinstance(manifest, dict) else manifest
    wanted = {str(r["run_id"]) for r in runs_cfg}
    per_run: dict[str, dict[str, dict[str, dict[str, float]]]] = {
        run_id: {} for run_id in wanted
    }
    try:
        with Path(intervals_path).open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    run_id = str(rec["run_id"])
                    if run_id not in wanted:
                        continue
                    ts = parse_rfc3339(str(rec["interval_start"])).isoformat()
                    slot = per_run[run_id].setdefault(ts, {"power": {}, "duty": {}})
                    machine = str(rec["machine_id"])
                    slot["power"][machine] = float(rec["power_w"])
                    slot["duty"][machine] = float(rec["duty_cycle"])
                except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                    raise IngestError(
                        f"{intervals_path}: bad interval record at line {line_no}: {exc}"
                    ) from None
    except OSError as exc:
        raise IngestError(f"cannot read run intervals {intervals_path}: {exc}") from None

    runs = []
    for cfg in runs_cfg:
        run_id = str(cfg["run_id"])
        intervals = tuple(
            RunInterval(timestamp=ts, power_w=slot["power"], duty_cycle=slot["duty"])
            for ts, slot in sorted(per_run[run_id].items())
        )
        runs.append(
            WorkloadRun(
                run_id=run_id,
                workload=str(cfg.get("workload", "")),
                platform_id=str(cfg["platform_id"]),
                machines=tuple(str(m) for m in cfg["machines"]),
                intervals=intervals,
                step_time_s=float(cfg["step_time_s"]),
                complete=bool(cfg.get("complete", True)),
                flops_per_step=(
                    float(cfg["flops_per_step"]) if "flops_per_step" in cfg else None
                ),
            )
        )
    return tuple(runs)
