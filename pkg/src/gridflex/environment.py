"""Episode state machine over a district of buildings.

Supports a decentralized mode (per-building state lists and rewards) and a
central mode (one flat deduplicated state list, one reward). District net
electricity is the signed sum of building nets, so battery export can push
it negative; the metric layer clips at zero.
"""

import csv
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .building import Building
from .dataset import SHARED_STATES, BuildingDataset, WeatherForecaster

TRACKER_COLUMNS = [
    "net_electric_consumption",
    "net_electric_consumption_no_storage",
    "net_electric_consumption_no_pv_no_storage",
    "electric_consumption_cooling_storage",
    "electric_consumption_dhw_storage",
    "electric_consumption_cooling",
    "electric_consumption_dhw",
    "electric_consumption_appliances",
    "electric_generation",
]


@dataclass
class TrackerSeries:
    net_electric_consumption: List[float] = field(default_factory=list)
    net_electric_consumption_no_storage: List[float] = field(default_factory=list)
    net_electric_consumption_no_pv_no_storage: List[float] = field(default_factory=list)
    electric_consumption_cooling_storage: List[float] = field(default_factory=list)
    electric_consumption_dhw_storage: List[float] = field(default_factory=list)
    electric_consumption_cooling: List[float] = field(default_factory=list)
    electric_consumption_dhw: List[float] = field(default_factory=list)
    electric_consumption_appliances: List[float] = field(default_factory=list)
    electric_generation: List[float] = field(default_factory=list)

    def clear(self) -> None:
        for name in TRACKER_COLUMNS:
            getattr(self, name).clear()

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(TRACKER_COLUMNS)
            for row in zip(*(getattr(self, name) for name in TRACKER_COLUMNS)):
                writer.writerow([repr(v) for v in row])


States = Union[List[float], List[List[float]]]
Actions = Union[Sequence[float], Sequence[Sequence[float]]]
RewardFunction = Callable[[List[float]], Union[float, List[float]]]


def default_reward_decentralized(e_net: List[float]) -> List[float]:
    return [-max(0.0, e) for e in e_net]


def default_reward_central(e_net: List[float]) -> float:
    return -max(0.0, sum(e_net))


@dataclass
class StepResult:
    states: States
    rewards: Union[float, List[float]]
    done: bool
    info: List[Dict[str, float]]


class Environment:
    """Hourly multi-building episode with guaranteed thermal demand satisfaction."""

    def __init__(
        self,
        dataset: BuildingDataset,
        simulation_period: Optional[Tuple[int, int]] = None,
        central_agent: bool = False,
        reward_fn: Optional[RewardFunction] = None,
        seed: int = 0,
        forecast_noise_scale: float = 1.0,
    ):
        dataset.validate()
        self.dataset = dataset
        if simulation_period is None:
            simulation_period = (0, dataset.horizon - 1)
        start, end = simulation_period
        if not 0 <= start <= end <= dataset.horizon - 1:
            raise ValueError(f"simulation_period {simulation_period} outside horizon")
        self.period = (start, end)
        self.central_agent = central_agent
        self.seed = seed
        if reward_fn is None:
            reward_fn = default_reward_central if central_agent else default_reward_decentralized
        self.reward_fn = reward_fn

        forecaster = WeatherForecaster(dataset.weather, seed, noise_scale=forecast_noise_scale)
        self.forecaster = forecaster
        self.buildings = [
            Building(
                load_series=dataset.loads[bid],
                attributes=dataset.attributes[bid],
                state_action=dataset.state_action[bid],
                weather=dataset.weather,
                solar=dataset.solar,
                forecaster=forecaster,
            )
            for bid in dataset.building_ids
        ]
        self.trackers = TrackerSeries()
        self.clock = start
        self.terminal = False
        self._action_dims = [len(b.enabled_actions) for b in self.buildings]

        # District counterfactual and baseline series are action-independent.
        horizon = dataset.horizon
        self._district_no_storage = [
            sum(b.e_net_without_storage(t) for b in self.buildings) for t in range(horizon)
        ]
        self._district_no_pv_no_storage = [
            sum(b.e_net_without_pv_storage(t) for b in self.buildings) for t in range(horizon)
        ]
        self._district_base_cooling = [
            sum(b.baseline_cooling_electricity(t) for b in self.buildings) for t in range(horizon)
        ]
        self._district_base_dhw = [
            sum(b.baseline_dhw_electricity(t) for b in self.buildings) for t in range(horizon)
        ]

    @property
    def action_dims(self) -> List[int]:
        return self._action_dims

    def reset(self) -> States:
        self.clock = self.period[0]
        self.terminal = False
        self.trackers.clear()
        for b in self.buildings:
            b.reset()
        return self._states(self.clock)

    def _states(self, t: int) -> States:
        if not self.central_agent:
            return [b.assemble_state(t) for b in self.buildings]
        flat: List[float] = []
        seen_shared = set()
        for b in self.buildings:
            for name in b.enabled_states:
                if name in SHARED_STATES:
                    if name in seen_shared:
                        continue
                    seen_shared.add(name)
                flat.append(b.state_value(name, t))
        return flat

    def _split_actions(self, actions: Actions) -> List[List[float]]:
        dims = self.action_dims
        if self.central_agent:
            flat = list(actions)
            if any(isinstance(a, (list, tuple)) for a in flat):
                raise ValueError("central mode expects a flat action list")
            if len(flat) != sum(dims):
                raise ValueError(f"expected {sum(dims)} actions, got {len(flat)}")
            per_building = []
            i = 0
            for d in dims:
                per_building.append(flat[i : i + d])
                i += d
        else:
            per_building = [list(a) for a in actions]
            if len(per_building) != len(self.buildings):
                raise ValueError(
                    f"expected {len(self.buildings)} action lists, got {len(per_building)}"
                )
            for b, acts, d in zip(self.buildings, per_building, dims):
                if len(acts) != d:
                    raise ValueError(f"{b.id}: expected {d} actions, got {len(acts)}")
        return per_building

    def step(self, actions: Actions) -> StepResult:
        if self.terminal:
            raise RuntimeError("step() called after the episode ended")
        action_maps = self._split_actions(actions)
        t = self.clock

        e_net = []
        info = []
        tr = self.trackers
        cooling_e = 0.0
        dhw_e = 0.0
        appliances_e = 0.0
        generation = 0.0
        for b, acts in zip(self.buildings, action_maps):
            res = b.step(t, acts)
            e_net.append(res.e_net)
            cooling_e += res.e_cooling
            dhw_e += res.e_dhw
            appliances_e += res.e_appliances
            generation += res.pv_gen
            info.append(
                {
                    "building_id": b.id,
                    "e_net": res.e_net,
                    "e_cooling": res.e_cooling,
                    "e_dhw": res.e_dhw,
                    "e_appliances": res.e_appliances,
                    "e_battery_grid_side": res.e_battery_grid_side,
                    "pv_gen": res.pv_gen,
                    "executed_actions": res.executed_actions,
                }
            )

        district_net = sum(e_net)
        tr.net_electric_consumption.append(district_net)
        tr.net_electric_consumption_no_storage.append(self._district_no_storage[t])
        tr.net_electric_consumption_no_pv_no_storage.append(self._district_no_pv_no_storage[t])
        tr.electric_consumption_cooling_storage.append(cooling_e - self._district_base_cooling[t])
        tr.electric_consumption_dhw_storage.append(dhw_e - self._district_base_dhw[t])
        tr.electric_consumption_cooling.append(cooling_e)
        tr.electric_consumption_dhw.append(dhw_e)
        tr.electric_consumption_appliances.append(appliances_e)
        tr.electric_generation.append(generation)

        rewards = self.reward_fn(e_net)
        if not self.central_agent and len(rewards) != len(self.buildings):
            raise ValueError("reward function returned wrong number of rewards")

        self.clock = t + 1
        done = self.clock > self.period[1]
        self.terminal = done
        states = self._states(min(self.clock, self.period[1]))
        return StepResult(states=states, rewards=rewards, done=done, info=info)

    def get_state_action_spaces(self):
        """Per-dimension [low, high] bounds for states and actions.

        Decentralized mode returns one record per building; central mode
        returns a single flattened record matching the central state order.
        """
        per_building = [self._building_space(b) for b in self.buildings]
        if not self.central_agent:
            return per_building
        names: List[str] = []
        low: List[float] = []
        high: List[float] = []
        seen_shared = set()
        for space in per_building:
            for n, lo, hi in zip(space["state_names"], space["state_low"], space["state_high"]):
                if n in SHARED_STATES:
                    if n in seen_shared:
                        continue
                    seen_shared.add(n)
                names.append(n)
                low.append(lo)
                high.append(hi)
        action_names = [n for space in per_building for n in space["action_names"]]
        return {
            "state_names": names,
            "state_low": low,
            "state_high": high,
            "action_names": action_names,
            "action_low": [-1.0] * len(action_names),
            "action_high": [1.0] * len(action_names),
        }

    def _building_space(self, b: Building):
        weather = self.dataset.weather
        series = b.load_series
        pv_peak = (
            b.pv.capacity_kw * float(np.max(self.dataset.solar.generation_per_kw))
            if b.pv is not None
            else 0.0
        )
        battery_power = b.battery.nominal_power if b.battery is not None else 0.0
        base_peak = max(b.e_net_without_pv_storage(t) for t in range(self.dataset.horizon))
        charge_headroom = series.peak_cooling + series.peak_dhw
        bounds: Dict[str, Tuple[float, float]] = {
            "month": (1.0, 12.0),
            "day": (1.0, 8.0),
            "hour": (1.0, 24.0),
            "daylight_savings_status": (0.0, 1.0),
            "t_in": (float(np.min(series.indoor_temp)), float(np.max(series.indoor_temp))),
            "avg_unmet_setpoint": (
                float(np.min(series.avg_unmet_setpoint)),
                float(np.max(series.avg_unmet_setpoint)),
            ),
            "rh_in": (float(np.min(series.indoor_rh)), float(np.max(series.indoor_rh))),
            "non_shiftable_load": (0.0, float(np.max(series.equipment_electric_power))),
            "solar_gen": (0.0, pv_peak),
            "cooling_storage_soc": (0.0, 1.0),
            "dhw_storage_soc": (0.0, 1.0),
            "net_electricity_consumption": (
                -(pv_peak + battery_power),
                base_peak + battery_power + charge_headroom,
            ),
        }
        weather_bounds = {
            "t_out": (float(np.min(weather.t_out)), float(np.max(weather.t_out))),
            "rh_out": (float(np.min(weather.rh_out)), float(np.max(weather.rh_out))),
            "diffuse_solar": (float(np.min(weather.diffuse_solar)), float(np.max(weather.diffuse_solar))),
            "direct_solar": (float(np.min(weather.direct_solar)), float(np.max(weather.direct_solar))),
        }
        from .dataset import RELATIVE_BANDS, TEMPERATURE_BANDS

        for var, (lo, hi) in weather_bounds.items():
            name = {"diffuse_solar": "diffuse_solar_rad", "direct_solar": "direct_solar_rad"}.get(var, var)
            bounds[name] = (lo, hi)
            for lead in (6, 12, 24):
                if var == "t_out":
                    band_lo, band_hi = TEMPERATURE_BANDS[lead], TEMPERATURE_BANDS[lead]
                else:
                    rel = RELATIVE_BANDS[lead]
                    band_lo = rel * max(abs(lo), abs(hi))
                    band_hi = rel * max(abs(lo), abs(hi))
                bounds[f"{name}_pred_{lead}h"] = (lo - band_lo, hi + band_hi)

        names = list(b.enabled_states)
        return {
            "state_names": names,
            "state_low": [bounds[n][0] for n in names],
            "state_high": [bounds[n][1] for n in names],
            "action_names": list(b.enabled_actions),
            "action_low": [-1.0] * len(b.enabled_actions),
            "action_high": [1.0] * len(b.enabled_actions),
        }

    def get_building_information(self):
        """Static per-building attributes plus demand-profile correlations."""
        profiles = {
            b.id: np.array([b.e_net_without_pv_storage(t) for t in range(self.dataset.horizon)])
            for b in self.buildings
        }
        result = {}
        for b in self.buildings:
            correlations = {}
            for other in self.buildings:
                if other.id == b.id:
                    continue
                x, y = profiles[b.id], profiles[other.id]
                if np.std(x) == 0 or np.std(y) == 0:
                    correlations[other.id] = 0.0
                else:
                    correlations[other.id] = float(np.corrcoef(x, y)[0, 1])
            result[b.id] = {
                "battery_capacity": b.battery.capacity_kwh if b.battery is not None else 0.0,
                "battery_nominal_power": b.battery.nominal_power if b.battery is not None else 0.0,
                "cooling_tank_capacity": b.cooling_tank.capacity_kwh if b.cooling_tank is not None else 0.0,
                "dhw_tank_capacity": b.dhw_tank.capacity_kwh if b.dhw_tank is not None else 0.0,
                "pv_capacity": b.pv.capacity_kw if b.pv is not None else 0.0,
                "peak_cooling_load": b.load_series.peak_cooling,
                "peak_dhw_load": b.load_series.peak_dhw,
                "correlations": correlations,
            }
        return result
