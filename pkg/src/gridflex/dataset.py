"""Input data handling: hourly building load, weather, and solar series, the
per-building device attribute document, and the state/action configuration.

All series files are CSV with a fixed header and one row per hour; the
attribute and state/action documents are JSON. File paths are resolved
relative to ``data_path``.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# Full ordered state vocabulary. Central mode deduplicates the shared
# (district-wide) states; per-building states repeat per building.
STATE_NAMES = [
    "month",
    "day",
    "hour",
    "daylight_savings_status",
    "t_out",
    "t_out_pred_6h",
    "t_out_pred_12h",
    "t_out_pred_24h",
    "rh_out",
    "rh_out_pred_6h",
    "rh_out_pred_12h",
    "rh_out_pred_24h",
    "diffuse_solar_rad",
    "diffuse_solar_rad_pred_6h",
    "diffuse_solar_rad_pred_12h",
    "diffuse_solar_rad_pred_24h",
    "direct_solar_rad",
    "direct_solar_rad_pred_6h",
    "direct_solar_rad_pred_12h",
    "direct_solar_rad_pred_24h",
    "t_in",
    "avg_unmet_setpoint",
    "rh_in",
    "non_shiftable_load",
    "solar_gen",
    "cooling_storage_soc",
    "dhw_storage_soc",
    "net_electricity_consumption",
]

SHARED_STATES = frozenset(STATE_NAMES[:20])

ACTION_NAMES = ["cooling_storage", "dhw_storage", "battery_storage"]

LOAD_COLUMNS = [
    "month",
    "hour",
    "day_type",
    "daylight_savings_status",
    "indoor_temp",
    "avg_unmet_setpoint",
    "indoor_rh",
    "equipment_electric_power",
    "dhw_heating",
    "cooling_load",
]

WEATHER_COLUMNS = ["t_out", "rh_out", "diffuse_solar", "direct_solar"]

SOLAR_COLUMNS = ["generation_per_kw"]

ATTRIBUTES_FILE = "building_attributes.json"
STATE_ACTION_FILE = "state_action_config.json"
WEATHER_FILE = "weather.csv"
SOLAR_FILE = "solar.csv"

# Forecast accuracy bands per lead time: absolute degrees C for temperature,
# relative fraction of the true value for humidity and solar radiation.
TEMPERATURE_BANDS = {6: 0.3, 12: 0.65, 24: 1.35}
RELATIVE_BANDS = {6: 0.025, 12: 0.05, 24: 0.10}

_DAYS_PER_MONTH = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


class DatasetError(ValueError):
    """Raised when input files are missing, misaligned, or internally inconsistent."""


@dataclass
class BuildingLoadSeries:
    building_id: str
    month: np.ndarray
    hour: np.ndarray
    day_type: np.ndarray
    daylight_savings_status: np.ndarray
    indoor_temp: np.ndarray
    avg_unmet_setpoint: np.ndarray
    indoor_rh: np.ndarray
    equipment_electric_power: np.ndarray
    dhw_heating: np.ndarray
    cooling_load: np.ndarray

    def __len__(self) -> int:
        return len(self.cooling_load)

    @property
    def peak_cooling(self) -> float:
        return float(np.max(self.cooling_load))

    @property
    def peak_dhw(self) -> float:
        return float(np.max(self.dhw_heating))

    def validate(self, horizon: int) -> None:
        for name in LOAD_COLUMNS:
            if len(getattr(self, _FIELD_BY_COLUMN[name])) != horizon:
                raise DatasetError(
                    f"{self.building_id}: column {name} has "
                    f"{len(getattr(self, _FIELD_BY_COLUMN[name]))} rows, expected {horizon}"
                )
        for name in ("equipment_electric_power", "dhw_heating", "cooling_load"):
            if np.any(getattr(self, name) < 0):
                raise DatasetError(f"{self.building_id}: negative values in {name}")
        if np.any((self.month < 1) | (self.month > 12)):
            raise DatasetError(f"{self.building_id}: month out of range 1..12")
        if np.any((self.hour < 1) | (self.hour > 24)):
            raise DatasetError(f"{self.building_id}: hour out of range 1..24")
        if np.any((self.day_type < 1) | (self.day_type > 8)):
            raise DatasetError(f"{self.building_id}: day_type out of range 1..8")
        if np.any((self.daylight_savings_status != 0) & (self.daylight_savings_status != 1)):
            raise DatasetError(f"{self.building_id}: daylight_savings_status must be 0 or 1")


_FIELD_BY_COLUMN = {
    "month": "month",
    "hour": "hour",
    "day_type": "day_type",
    "daylight_savings_status": "daylight_savings_status",
    "indoor_temp": "indoor_temp",
    "avg_unmet_setpoint": "avg_unmet_setpoint",
    "indoor_rh": "indoor_rh",
    "equipment_electric_power": "equipment_electric_power",
    "dhw_heating": "dhw_heating",
    "cooling_load": "cooling_load",
}


@dataclass
class WeatherSeries:
    t_out: np.ndarray
    rh_out: np.ndarray
    diffuse_solar: np.ndarray
    direct_solar: np.ndarray

    def __len__(self) -> int:
        return len(self.t_out)

    def validate(self, horizon: int) -> None:
        for name in WEATHER_COLUMNS:
            if len(getattr(self, name)) != horizon:
                raise DatasetError(f"weather column {name} length mismatch")
        if np.any((self.rh_out < 0) | (self.rh_out > 100)):
            raise DatasetError("rh_out outside [0, 100]")
        if np.any(self.diffuse_solar < 0) or np.any(self.direct_solar < 0):
            raise DatasetError("negative solar radiation")


@dataclass
class SolarProfile:
    generation_per_kw: np.ndarray

    def __len__(self) -> int:
        return len(self.generation_per_kw)

    def validate(self, horizon: int) -> None:
        if len(self.generation_per_kw) != horizon:
            raise DatasetError("solar profile length mismatch")
        if np.any(self.generation_per_kw < 0):
            raise DatasetError("negative solar generation profile")


@dataclass
class HeatPumpAttributes:
    eta_tech: float
    t_target_cooling: float
    t_target_heating: float


@dataclass
class ElectricHeaterAttributes:
    efficiency: float


@dataclass
class TankAttributes:
    capacity_multiple: float
    loss_coef: float = 0.0
    round_trip_eff: float = 1.0


@dataclass
class BatteryAttributes:
    capacity_kwh: float
    nominal_power: float
    c_loss: float = 0.0
    loss_coef: float = 0.0
    capacity_power_curve: Optional[List[List[float]]] = None
    power_efficiency_curve: Optional[List[List[float]]] = None
    efficiency: float = 1.0


@dataclass
class PVAttributes:
    capacity_kw: float


@dataclass
class BuildingAttributes:
    heat_pump: HeatPumpAttributes
    electric_heater: Optional[ElectricHeaterAttributes] = None
    cooling_tank: Optional[TankAttributes] = None
    dhw_tank: Optional[TankAttributes] = None
    battery: Optional[BatteryAttributes] = None
    pv: Optional[PVAttributes] = None

    def validate(self, building_id: str) -> None:
        hp = self.heat_pump
        if not 0.0 < hp.eta_tech <= 1.0:
            raise DatasetError(f"{building_id}: heat pump eta_tech must be in (0, 1]")
        if self.electric_heater is not None:
            if not 0.0 < self.electric_heater.efficiency <= 1.0:
                raise DatasetError(f"{building_id}: heater efficiency must be in (0, 1]")
        for label, tank in (("cooling_tank", self.cooling_tank), ("dhw_tank", self.dhw_tank)):
            if tank is None:
                continue
            if tank.capacity_multiple < 0:
                raise DatasetError(f"{building_id}: {label} capacity multiple must be >= 0")
            if not 0.0 <= tank.loss_coef < 1.0:
                raise DatasetError(f"{building_id}: {label} loss_coef must be in [0, 1)")
            if not 0.0 < tank.round_trip_eff <= 1.0:
                raise DatasetError(f"{building_id}: {label} round_trip_eff must be in (0, 1]")
        if self.battery is not None:
            b = self.battery
            if b.capacity_kwh < 0:
                raise DatasetError(f"{building_id}: battery capacity must be >= 0")
            for label, curve in (
                ("capacity_power_curve", b.capacity_power_curve),
                ("power_efficiency_curve", b.power_efficiency_curve),
            ):
                if curve is None:
                    continue
                xs = [p[0] for p in curve]
                if any(x1 < x0 for x0, x1 in zip(xs, xs[1:])):
                    raise DatasetError(f"{building_id}: {label} x-coordinates must be non-decreasing")
                if xs and (xs[0] < 0.0 or xs[-1] > 1.0):
                    raise DatasetError(f"{building_id}: {label} x-coordinates must be in [0, 1]")
        if self.pv is not None and self.pv.capacity_kw < 0:
            raise DatasetError(f"{building_id}: pv capacity must be >= 0")


@dataclass
class BuildingStateActionConfig:
    enabled_states: List[str]
    enabled_actions: List[str]

    def validate(self, building_id: str, attributes: BuildingAttributes) -> None:
        for s in self.enabled_states:
            if s not in STATE_NAMES:
                raise DatasetError(f"{building_id}: unknown state name {s!r}")
        for a in self.enabled_actions:
            if a not in ACTION_NAMES:
                raise DatasetError(f"{building_id}: unknown action name {a!r}")
        device_by_action = {
            "cooling_storage": attributes.cooling_tank,
            "dhw_storage": attributes.dhw_tank,
            "battery_storage": attributes.battery,
        }
        for a in self.enabled_actions:
            if device_by_action[a] is None:
                raise DatasetError(f"{building_id}: action {a!r} enabled without the device")


@dataclass
class SimulationConfig:
    data_path: str
    building_ids: List[str] = field(default_factory=list)
    simulation_period: Optional[Tuple[int, int]] = None
    cost_functions: List[str] = field(default_factory=list)
    central_agent: bool = False
    verbose: int = 0
    seed: int = 0


@dataclass
class BuildingDataset:
    building_ids: List[str]
    loads: Dict[str, BuildingLoadSeries]
    weather: WeatherSeries
    solar: SolarProfile
    attributes: Dict[str, BuildingAttributes]
    state_action: Dict[str, BuildingStateActionConfig]

    @property
    def horizon(self) -> int:
        return len(self.weather)

    def validate(self) -> None:
        if not self.building_ids:
            raise DatasetError("building_ids is empty")
        horizon = self.horizon
        self.weather.validate(horizon)
        self.solar.validate(horizon)
        for bid in self.building_ids:
            if bid not in self.loads:
                raise DatasetError(f"missing load series for {bid}")
            if bid not in self.attributes:
                raise DatasetError(f"attributes file does not list {bid}")
            if bid not in self.state_action:
                raise DatasetError(f"state/action config does not list {bid}")
            self.loads[bid].validate(horizon)
            self.attributes[bid].validate(bid)
            self.state_action[bid].validate(bid, self.attributes[bid])
            attrs = self.attributes[bid]
            if (
                attrs.electric_heater is None
                and attrs.heat_pump.t_target_heating is None
                and self.loads[bid].peak_dhw > 0
            ):
                raise DatasetError(f"{bid}: DHW demand present but no heating device configured")


def _read_csv(path: Path, columns: Sequence[str]) -> Dict[str, np.ndarray]:
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != list(columns):
            raise DatasetError(f"{path}: expected header {list(columns)}, got {header}")
        rows = [row for row in reader if row]
    data = {}
    for i, name in enumerate(columns):
        try:
            data[name] = np.array([float(row[i]) for row in rows], dtype=float)
        except (ValueError, IndexError) as exc:
            raise DatasetError(f"{path}: bad value in column {name}: {exc}") from exc
    return data


def _write_csv(path: Path, columns: Sequence[str], data: Dict[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        n = len(data[columns[0]])
        for i in range(n):
            writer.writerow([repr(float(data[c][i])) for c in columns])


def _attributes_from_dict(doc: dict) -> BuildingAttributes:
    hp = doc.get("heat_pump")
    if hp is None:
        raise DatasetError("building attributes missing heat_pump")
    attrs = BuildingAttributes(heat_pump=HeatPumpAttributes(**hp))
    if doc.get("electric_heater") is not None:
        attrs.electric_heater = ElectricHeaterAttributes(**doc["electric_heater"])
    if doc.get("cooling_tank") is not None:
        attrs.cooling_tank = TankAttributes(**doc["cooling_tank"])
    if doc.get("dhw_tank") is not None:
        attrs.dhw_tank = TankAttributes(**doc["dhw_tank"])
    if doc.get("battery") is not None:
        attrs.battery = BatteryAttributes(**doc["battery"])
    if doc.get("pv") is not None:
        attrs.pv = PVAttributes(**doc["pv"])
    return attrs


def _attributes_to_dict(attrs: BuildingAttributes) -> dict:
    doc: dict = {"heat_pump": vars(attrs.heat_pump).copy()}
    if attrs.electric_heater is not None:
        doc["electric_heater"] = vars(attrs.electric_heater).copy()
    if attrs.cooling_tank is not None:
        doc["cooling_tank"] = vars(attrs.cooling_tank).copy()
    if attrs.dhw_tank is not None:
        doc["dhw_tank"] = vars(attrs.dhw_tank).copy()
    if attrs.battery is not None:
        doc["battery"] = vars(attrs.battery).copy()
    if attrs.pv is not None:
        doc["pv"] = vars(attrs.pv).copy()
    return doc


def load_dataset(config: SimulationConfig) -> BuildingDataset:
    """Read and validate all input files referenced by ``config``."""
    root = Path(config.data_path)
    attr_path = root / ATTRIBUTES_FILE
    sa_path = root / STATE_ACTION_FILE
    for p in (attr_path, sa_path):
        if not p.is_file():
            raise DatasetError(f"missing file: {p}")
    with open(attr_path) as f:
        attr_doc = json.load(f)
    with open(sa_path) as f:
        sa_doc = json.load(f)

    building_ids = list(config.building_ids) or list(attr_doc.keys())
    loads = {}
    attributes = {}
    state_action = {}
    for bid in building_ids:
        if bid not in attr_doc:
            raise DatasetError(f"attributes file does not list {bid}")
        if bid not in sa_doc:
            raise DatasetError(f"state/action config does not list {bid}")
        data = _read_csv(root / f"{bid}.csv", LOAD_COLUMNS)
        loads[bid] = BuildingLoadSeries(
            building_id=bid, **{_FIELD_BY_COLUMN[c]: data[c] for c in LOAD_COLUMNS}
        )
        attributes[bid] = _attributes_from_dict(attr_doc[bid])
        state_action[bid] = BuildingStateActionConfig(
            enabled_states=list(sa_doc[bid]["states"]),
            enabled_actions=list(sa_doc[bid]["actions"]),
        )

    weather = WeatherSeries(**_read_csv(root / WEATHER_FILE, WEATHER_COLUMNS))
    solar = SolarProfile(**_read_csv(root / SOLAR_FILE, SOLAR_COLUMNS))
    dataset = BuildingDataset(
        building_ids=building_ids,
        loads=loads,
        weather=weather,
        solar=solar,
        attributes=attributes,
        state_action=state_action,
    )
    dataset.validate()
    if config.simulation_period is not None:
        start, end = config.simulation_period
        if not 0 <= start <= end <= dataset.horizon - 1:
            raise DatasetError(
                f"simulation_period {config.simulation_period} outside horizon {dataset.horizon}"
            )
    return dataset


def save_dataset(dataset: BuildingDataset, path: str) -> List[str]:
    """Write a dataset back to disk in the load_dataset file layout.

    Returns the list of files written. Floats are written with ``repr`` so a
    load/save/load round trip is exact.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for bid in dataset.building_ids:
        series = dataset.loads[bid]
        p = root / f"{bid}.csv"
        _write_csv(p, LOAD_COLUMNS, {c: getattr(series, _FIELD_BY_COLUMN[c]) for c in LOAD_COLUMNS})
        written.append(str(p))
    p = root / WEATHER_FILE
    _write_csv(p, WEATHER_COLUMNS, {c: getattr(dataset.weather, c) for c in WEATHER_COLUMNS})
    written.append(str(p))
    p = root / SOLAR_FILE
    _write_csv(p, SOLAR_COLUMNS, {"generation_per_kw": dataset.solar.generation_per_kw})
    written.append(str(p))
    p = root / ATTRIBUTES_FILE
    with open(p, "w") as f:
        json.dump({bid: _attributes_to_dict(dataset.attributes[bid]) for bid in dataset.building_ids}, f, indent=2)
        f.write("\n")
    written.append(str(p))
    p = root / STATE_ACTION_FILE
    with open(p, "w") as f:
        json.dump(
            {
                bid: {
                    "states": dataset.state_action[bid].enabled_states,
                    "actions": dataset.state_action[bid].enabled_actions,
                }
                for bid in dataset.building_ids
            },
            f,
            indent=2,
        )
        f.write("\n")
    written.append(str(p))
    return written


DEFAULT_SYNTHETIC_STATES = [
    "month",
    "day",
    "hour",
    "t_out",
    "t_out_pred_6h",
    "rh_out",
    "diffuse_solar_rad",
    "direct_solar_rad",
    "non_shiftable_load",
    "solar_gen",
    "cooling_storage_soc",
    "dhw_storage_soc",
    "net_electricity_consumption",
]


def _calendar_series(horizon: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(month, hour, day_type) arrays for a generic non-leap year repeated as needed."""
    month_of_day = np.concatenate(
        [np.full(n, m + 1, dtype=float) for m, n in enumerate(_DAYS_PER_MONTH)]
    )
    day_idx = np.arange(horizon) // 24
    month = month_of_day[day_idx % 365]
    hour = (np.arange(horizon) % 24 + 1).astype(float)
    day_type = (day_idx % 7 + 1).astype(float)
    return month, hour, day_type


def generate_synthetic_dataset(n_buildings: int, horizon: int, seed: int) -> BuildingDataset:
    """Deterministic sinusoidal-plus-noise fixture dataset.

    Identical (n_buildings, horizon, seed) calls produce identical datasets.
    """
    if n_buildings < 1:
        raise DatasetError("n_buildings must be >= 1")
    if horizon < 24:
        raise DatasetError("horizon must be >= 24")
    rng = np.random.default_rng(seed)
    month, hour, day_type = _calendar_series(horizon)
    h = np.arange(horizon, dtype=float)

    season = np.sin(2 * np.pi * (h / 24.0 - 30.0) / 365.0)
    diurnal = np.sin(2 * np.pi * (hour - 14.0) / 24.0)
    t_out = 16.0 + 8.0 * season + 6.0 * diurnal + rng.normal(0.0, 0.8, horizon)
    rh_out = np.clip(60.0 - 15.0 * diurnal + rng.normal(0.0, 5.0, horizon), 5.0, 100.0)
    sun = np.clip(np.sin(np.pi * (hour - 6.0) / 12.0), 0.0, None)
    direct = np.clip(sun * (650.0 + 150.0 * season) + rng.normal(0.0, 30.0, horizon), 0.0, None)
    diffuse = np.clip(sun * 180.0 + rng.normal(0.0, 15.0, horizon), 0.0, None)
    weather = WeatherSeries(t_out=t_out, rh_out=rh_out, diffuse_solar=diffuse, direct_solar=direct)
    solar = SolarProfile(generation_per_kw=np.clip(sun * 0.75 + rng.normal(0.0, 0.01, horizon), 0.0, None))

    loads = {}
    attributes = {}
    state_action = {}
    building_ids = [f"Building_{i + 1}" for i in range(n_buildings)]
    for bid in building_ids:
        scale = 0.8 + 0.4 * rng.random()
        cooling = np.clip(
            scale * (3.0 + 2.5 * diurnal + 1.5 * season) + rng.normal(0.0, 0.3, horizon), 0.0, None
        )
        dhw = np.clip(
            scale * (1.0 + 0.6 * np.sin(2 * np.pi * (hour - 8.0) / 24.0))
            + rng.normal(0.0, 0.1, horizon),
            0.0,
            None,
        )
        appliances = np.clip(
            scale * (1.5 + 0.8 * np.sin(2 * np.pi * (hour - 19.0) / 24.0))
            + rng.normal(0.0, 0.15, horizon),
            0.0,
            None,
        )
        loads[bid] = BuildingLoadSeries(
            building_id=bid,
            month=month.copy(),
            hour=hour.copy(),
            day_type=day_type.copy(),
            daylight_savings_status=np.zeros(horizon),
            indoor_temp=np.full(horizon, 22.5) + rng.normal(0.0, 0.2, horizon),
            avg_unmet_setpoint=np.clip(rng.normal(0.0, 0.05, horizon), 0.0, None),
            indoor_rh=np.clip(45.0 + rng.normal(0.0, 3.0, horizon), 0.0, 100.0),
            equipment_electric_power=appliances,
            dhw_heating=dhw,
            cooling_load=cooling,
        )
        attributes[bid] = BuildingAttributes(
            heat_pump=HeatPumpAttributes(eta_tech=0.22, t_target_cooling=8.0, t_target_heating=45.0),
            electric_heater=ElectricHeaterAttributes(efficiency=0.9),
            cooling_tank=TankAttributes(capacity_multiple=2.0, loss_coef=0.006, round_trip_eff=1.0),
            dhw_tank=TankAttributes(capacity_multiple=2.0, loss_coef=0.008, round_trip_eff=0.9),
            battery=BatteryAttributes(
                capacity_kwh=30.0 * scale,
                nominal_power=15.0 * scale,
                c_loss=1e-5,
                loss_coef=0.0,
                capacity_power_curve=[[0.0, 1.0], [0.8, 1.0], [1.0, 0.2]],
                power_efficiency_curve=[[0.0, 0.83], [0.3, 0.83], [0.7, 0.9], [0.8, 0.9], [1.0, 0.85]],
            ),
            pv=PVAttributes(capacity_kw=4.0 * scale),
        )
        state_action[bid] = BuildingStateActionConfig(
            enabled_states=list(DEFAULT_SYNTHETIC_STATES),
            enabled_actions=list(ACTION_NAMES),
        )

    dataset = BuildingDataset(
        building_ids=building_ids,
        loads=loads,
        weather=weather,
        solar=solar,
        attributes=attributes,
        state_action=state_action,
    )
    dataset.validate()
    return dataset


class WeatherForecaster:
    """Bounded-noise forecasts of the weather series.

    The noise for a given (seed, t, lead, variable) is fixed: each
    (variable, lead) pair owns a deterministic uniform noise series in
    [-1, 1] scaled by the accuracy band. Temperature bands are absolute,
    humidity and solar bands are relative to the true value. Lookups past
    the end of the horizon clamp to the last hour.
    """

    VARIABLES = ("t_out", "rh_out", "diffuse_solar", "direct_solar")

    def __init__(self, weather: WeatherSeries, seed: int, noise_scale: float = 1.0):
        self.weather = weather
        self.seed = seed
        self.noise_scale = noise_scale
        self._noise: Dict[Tuple[str, int], np.ndarray] = {}

    def _noise_series(self, variable: str, lead: int) -> np.ndarray:
        key = (variable, lead)
        if key not in self._noise:
            var_idx = self.VARIABLES.index(variable)
            rng = np.random.default_rng([self.seed, lead, var_idx])
            self._noise[key] = rng.uniform(-1.0, 1.0, len(self.weather))
        return self._noise[key]

    def forecast(self, variable: str, t: int, lead: int) -> float:
        if lead not in TEMPERATURE_BANDS:
            raise ValueError(f"unsupported forecast lead {lead}; expected one of 6, 12, 24")
        series = getattr(self.weather, variable)
        true_value = float(series[min(t + lead, len(series) - 1)])
        if self.noise_scale == 0.0:
            return true_value
        if variable == "t_out":
            band = TEMPERATURE_BANDS[lead]
        else:
            band = RELATIVE_BANDS[lead] * abs(true_value)
        u = float(self._noise_series(variable, lead)[t])
        return true_value + self.noise_scale * band * u
