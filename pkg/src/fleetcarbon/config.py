"""Run configuration: one JSON file naming every input the CLI needs.

Relative paths in the file resolve against the file's own directory, so a
config can travel with its data. A bundled demo config (and the fixture
catalog, inventories, factor sets, telemetry, hourly series, and workload
runs it points to) ships inside the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .factors import EmissionFactorSet, ScenarioSpec, read_factor_sets, read_scenarios
from .lca import GwpTable, MachineInventory, read_inventories
from .telemetry import PlatformSpec, read_catalog_mapping

DEFAULT_PUE = 1.10
STANDARD_NAMES = ("location", "market", "hourly247")


@dataclass(frozen=True)
class RunConfig:
    telemetry: Path
    platforms: Path
    inventories: Path
    factors: Path
    hourly_series: Path | None = None
    run_manifest: Path | None = None
    run_intervals: Path | None = None
    gwp_table: Path | None = None
    standard: str = "market"
    pue: float = DEFAULT_PUE
    buckets: int = 10
    output_format: str = "csv"
    workload_factor_g_per_kwh: float | None = None
    workload_pue: float = 1.0  # per-step accounting at the machine meter
    incomplete_accept: tuple[str, ...] = ()
    incomplete_reject: tuple[str, ...] = ()

    def validate(self) -> None:
        for label, path in (
            ("telemetry", self.telemetry),
            ("platforms", self.platforms),
            ("inventories", self.inventories),
            ("factors", self.factors),
        ):
            if not path.exists():
                raise ConfigError(f"{label} file does not exist: {path}")
        if not (
            self.standard in STANDARD_NAMES or self.standard.startswith("scenario:")
        ):
            raise ConfigError(
                f"unknown accounting standard {self.standard!r}; "
                f"expected one of {', '.join(STANDARD_NAMES)} or scenario:<name>"
            )
        if self.pue < 1.0:
            raise ConfigError(f"pue {self.pue} must be >= 1")
        if self.output_format not in ("csv", "json", "md"):
            raise ConfigError(f"unknown output format {self.output_format!r}")


def bundled_data_dir() -> Path:
    """Directory holding the fixtures shipped with the package."""
    return Path(resources.files("fleetcarbon") / "data")


def bundled_config_path() -> Path:
    return bundled_data_dir() / "config.json"


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Read a config file (the bundled demo config when none is given).

    Keyword overrides win over file values, mirroring CLI flags.
    """
    cfg_path = Path(path) if path is not None else bundled_config_path()
    try:
        raw = json.loads(cfg_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {cfg_path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {cfg_path} is not valid JSON: {exc}") from None
    base = cfg_path.parent

    def _path(key: str) -> Path | None:
        value = raw.get(key)
        return (base / value) if value else None

    required = {}
    for key in ("telemetry", "platforms", "inventories", "factors"):
        p = _path(key)
        if p is None:
            raise ConfigError(f"config {cfg_path} is missing {key!r}")
        required[key] = p

    incomplete = raw.get("incomplete_runs", {})
    config = RunConfig(
        telemetry=required["telemetry"],
        platforms=required["platforms"],
        inventories=required["inventories"],
        factors=required["factors"],
        hourly_series=_path("hourly_series"),
        run_manifest=_path("run_manifest"),
        run_intervals=_path("run_intervals"),
        gwp_table=_path("gwp_table"),
        standard=str(raw.get("standard", "market")),
        pue=float(raw.get("pue", DEFAULT_PUE)),
        buckets=int(raw.get("buckets", 10)),
        output_format=str(raw.get("format", "csv")),
        workload_factor_g_per_kwh=(
            float(raw["workload_factor_g_per_kwh"])
            if "workload_factor_g_per_kwh" in raw
            else None
        ),
        workload_pue=float(raw.get("workload_pue", 1.0)),
        incomplete_accept=tuple(incomplete.get("accept", ())),
        incomplete_reject=tuple(incomplete.get("reject", ())),
    )
    clean = {k: v for k, v in overrides.items() if v is not None}
    if clean:
        config = replace(config, **clean)
    config.validate()
    return config


def _load_json(path: Path, what: str) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load {what} {path}: {exc}") from None


def load_platforms(path: str | Path) -> dict[str, PlatformSpec]:
    raw = _load_json(Path(path), "platform catalog")
    # synth manifests carry their catalog under a "platforms" key
    mapping = raw.get("platforms", raw) if isinstance(raw, dict) else raw
    try:
        return read_catalog_mapping(mapping)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad platform catalog {path}: {exc}") from None


def load_inventories(path: str | Path) -> dict[str, MachineInventory]:
    return read_inventories(_load_json(Path(path), "inventories"))


@dataclass(frozen=True)
class FactorConfig:
    year: int
    standards: dict[str, EmissionFactorSet]
    scenarios: dict[str, ScenarioSpec] = field(default_factory=dict)

    def factor_for(self, standard: str) -> float:
        """Effective g/kWh for a standard name or scenario:<name>."""
        if standard.startswith("scenario:"):
            name = standard.split(":", 1)[1]
            if name not in self.scenarios:
                raise ConfigError(f"unknown scenario {name!r}")
            return self.scenarios[name].operations_factor_g_per_kwh
        if standard not in self.standards:
            raise ConfigError(f"unknown accounting standard {standard!r}")
        return self.standards[standard].mb_factor


def load_factors(path: str | Path) -> FactorConfig:
    raw = _load_json(Path(path), "factor sets")
    year = int(raw.get("year", 0))
    return FactorConfig(
        year=year,
        standards=read_factor_sets(raw.get("standards", {}), year=year),
        scenarios=read_scenarios(raw.get("scenarios", {})),
    )


def load_bundled_gwp_table() -> GwpTable:
    from .lca import load_gwp_table

    return load_gwp_table(bundled_data_dir() / "gwp_ar5.json")
