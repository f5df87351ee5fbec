"""A building couples its pre-simulated loads with supply and storage devices.

The backup override lives here: agent actions are clamped so the cooling and
DHW demands are met exactly at every hour, whatever the controller requests.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .dataset import (
    ACTION_NAMES,
    STATE_NAMES,
    BuildingAttributes,
    BuildingLoadSeries,
    BuildingStateActionConfig,
    SolarProfile,
    WeatherForecaster,
    WeatherSeries,
)
from .devices import Battery, ElectricHeater, HeatPump, PVArray, ThermalTank


@dataclass(slots=True)
class BuildingStepResult:
    e_net: float
    e_cooling: float
    e_dhw: float
    e_appliances: float
    e_battery_grid_side: float
    pv_gen: float
    executed_actions: Dict[str, float]


class Building:
    """One building: loads, sized devices, and the per-hour dispatch logic."""

    def __init__(
        self,
        load_series: BuildingLoadSeries,
        attributes: BuildingAttributes,
        state_action: BuildingStateActionConfig,
        weather: WeatherSeries,
        solar: SolarProfile,
        forecaster: WeatherForecaster,
    ):
        self.id = load_series.building_id
        self.load_series = load_series
        self.weather = weather
        self.solar = solar
        self.forecaster = forecaster
        # Fixed vocabulary order regardless of how the config lists them.
        enabled = set(state_action.enabled_states)
        self.enabled_states = [s for s in STATE_NAMES if s in enabled]
        self.enabled_actions = [a for a in ACTION_NAMES if a in set(state_action.enabled_actions)]

        peak_cooling = load_series.peak_cooling
        peak_dhw = load_series.peak_dhw

        hp = attributes.heat_pump
        self.heat_pump = HeatPump(
            eta_tech=hp.eta_tech,
            t_target_cooling=hp.t_target_cooling,
            t_target_heating=hp.t_target_heating,
            nominal_thermal_power_cooling=peak_cooling,
            nominal_thermal_power_heating=peak_dhw,
        )

        self.electric_heater: Optional[ElectricHeater] = None
        if attributes.electric_heater is not None:
            self.electric_heater = ElectricHeater(
                efficiency=attributes.electric_heater.efficiency, nominal_power=peak_dhw
            )

        self.cooling_tank: Optional[ThermalTank] = None
        if attributes.cooling_tank is not None:
            t = attributes.cooling_tank
            self.cooling_tank = ThermalTank(
                capacity_kwh=t.capacity_multiple * peak_cooling,
                loss_coef=t.loss_coef,
                round_trip_eff=t.round_trip_eff,
            )

        self.dhw_tank: Optional[ThermalTank] = None
        if attributes.dhw_tank is not None:
            t = attributes.dhw_tank
            self.dhw_tank = ThermalTank(
                capacity_kwh=t.capacity_multiple * peak_dhw,
                loss_coef=t.loss_coef,
                round_trip_eff=t.round_trip_eff,
            )

        self.battery: Optional[Battery] = None
        if attributes.battery is not None:
            b = attributes.battery
            self.battery = Battery(
                capacity_kwh=b.capacity_kwh,
                nominal_power=b.nominal_power,
                c_loss=b.c_loss,
                loss_coef=b.loss_coef,
                capacity_power_curve=[tuple(p) for p in b.capacity_power_curve]
                if b.capacity_power_curve
                else None,
                power_efficiency_curve=[tuple(p) for p in b.power_efficiency_curve]
                if b.power_efficiency_curve
                else None,
                efficiency=b.efficiency,
            )

        self.pv: Optional[PVArray] = None
        if attributes.pv is not None:
            self.pv = PVArray(capacity_kw=attributes.pv.capacity_kw)

        # Everything that is a pure function of the hour index is precomputed
        # once as plain float lists so the per-step loop stays cheap.
        self._cop_cooling = self.heat_pump.cop_cooling_series(weather.t_out).tolist()
        self._cop_heating = self.heat_pump.cop_heating_series(weather.t_out).tolist()
        self._cooling_load = load_series.cooling_load.tolist()
        self._dhw_load = load_series.dhw_heating.tolist()
        self._appliances = load_series.equipment_electric_power.tolist()
        self._solar_profile = solar.generation_per_kw.tolist()

        pv_kw = self.pv.capacity_kw if self.pv is not None else 0.0
        pv_gen = pv_kw * solar.generation_per_kw
        cop_c = np.asarray(self._cop_cooling)
        if self.electric_heater is not None:
            dhw_base = load_series.dhw_heating / self.electric_heater.efficiency
        else:
            dhw_base = load_series.dhw_heating / np.asarray(self._cop_heating)
        base = load_series.cooling_load / cop_c + dhw_base + load_series.equipment_electric_power
        self._baseline_cooling_e = (load_series.cooling_load / cop_c).tolist()
        self._baseline_dhw_e = dhw_base.tolist()
        self._e_no_pv_no_storage = base.tolist()
        self._e_no_storage = (base - pv_gen).tolist()
        self._pv_gen = pv_gen.tolist()

        self._static_states: Dict[str, List[float]] = {}
        for name in self.enabled_states:
            if name in ("cooling_storage_soc", "dhw_storage_soc", "net_electricity_consumption"):
                continue
            self._static_states[name] = [
                self._compute_state(name, t) for t in range(len(load_series))
            ]
        # Per-hour state rows with zero placeholders at the dynamic slots;
        # assemble_state copies a row and patches the dynamic entries.
        dynamic = ("cooling_storage_soc", "dhw_storage_soc", "net_electricity_consumption")
        self._dynamic_slots = [
            (i, name) for i, name in enumerate(self.enabled_states) if name in dynamic
        ]
        self._state_rows = [
            [
                0.0 if name in dynamic else self._static_states[name][t]
                for name in self.enabled_states
            ]
            for t in range(len(load_series))
        ]

        self._cop_cooling_inv = (1.0 / cop_c).tolist()
        if self.electric_heater is not None:
            self._dhw_inv = [1.0 / self.electric_heater.efficiency] * len(load_series)
        else:
            self._dhw_inv = (1.0 / np.asarray(self._cop_heating)).tolist()

        self._action_index = {name: i for i, name in enumerate(self.enabled_actions)}
        self._cooling_action_slot = self._action_index.get("cooling_storage")
        self._dhw_action_slot = self._action_index.get("dhw_storage")
        self._battery_action_slot = self._action_index.get("battery_storage")
        self._cooling_supply_max = self.heat_pump.nominal_thermal_power_cooling
        self._dhw_supply_max = (
            self.electric_heater.nominal_power
            if self.electric_heater is not None
            else self.heat_pump.nominal_thermal_power_heating
        )
        self.previous_e_net = 0.0

    def reset(self) -> None:
        for device in (self.cooling_tank, self.dhw_tank, self.battery):
            if device is not None:
                device.reset()
        self.previous_e_net = 0.0

    def e_net_without_storage(self, t: int) -> float:
        """Net electricity at hour t if all storage stayed idle (PV still active)."""
        return self._e_no_storage[t]

    def e_net_without_pv_storage(self, t: int) -> float:
        """Net electricity at hour t with no storage and no PV."""
        return self._e_no_pv_no_storage[t]

    def baseline_cooling_electricity(self, t: int) -> float:
        """Cooling electricity at hour t with an idle cooling tank."""
        return self._baseline_cooling_e[t]

    def baseline_dhw_electricity(self, t: int) -> float:
        """DHW electricity at hour t with an idle DHW tank."""
        return self._baseline_dhw_e[t]

    def _dhw_electricity(self, q_thermal: float, t: int) -> float:
        if self.electric_heater is not None:
            return q_thermal / self.electric_heater.efficiency
        return q_thermal / self._cop_heating[t]

    def step(self, t: int, actions: Sequence[float]) -> BuildingStepResult:
        """Advance one hour. ``actions`` aligns with ``enabled_actions``, values in [-1, 1]."""
        executed: Dict[str, float] = {}

        cooling_load = self._cooling_load[t]
        q_hp_cooling = cooling_load
        if self.cooling_tank is not None:
            i = self._cooling_action_slot
            action = actions[i] if i is not None else 0.0
            res = self.cooling_tank.step(action, cooling_load, self._cooling_supply_max)
            q_hp_cooling = cooling_load - res.q_to_building + res.q_supply_charge
            if i is not None:
                executed["cooling_storage"] = res.executed_action
        e_cooling = q_hp_cooling * self._cop_cooling_inv[t]

        dhw_load = self._dhw_load[t]
        q_dhw_supply = dhw_load
        if self.dhw_tank is not None:
            i = self._dhw_action_slot
            action = actions[i] if i is not None else 0.0
            res = self.dhw_tank.step(action, dhw_load, self._dhw_supply_max)
            q_dhw_supply = dhw_load - res.q_to_building + res.q_supply_charge
            if i is not None:
                executed["dhw_storage"] = res.executed_action
        e_dhw = q_dhw_supply * self._dhw_inv[t]

        e_battery = 0.0
        if self.battery is not None:
            i = self._battery_action_slot
            action = actions[i] if i is not None else 0.0
            bres = self.battery.step(action)
            e_battery = bres.grid_side_energy
            if i is not None:
                executed["battery_storage"] = bres.executed_action

        e_appliances = self._appliances[t]
        pv_gen = self._pv_gen[t]

        e_net = e_cooling + e_dhw + e_appliances + e_battery - pv_gen
        self.previous_e_net = e_net
        return BuildingStepResult(
            e_net=e_net,
            e_cooling=e_cooling,
            e_dhw=e_dhw,
            e_appliances=e_appliances,
            e_battery_grid_side=e_battery,
            pv_gen=pv_gen,
            executed_actions=executed,
        )

    def state_value(self, name: str, t: int) -> float:
        """Value of one named state at hour t.

        Forecast states draw from the shared seeded forecaster;
        net_electricity_consumption reports the previous step's value.
        """
        if name == "cooling_storage_soc":
            return self.cooling_tank.soc if self.cooling_tank is not None else 0.0
        if name == "dhw_storage_soc":
            return self.dhw_tank.soc if self.dhw_tank is not None else 0.0
        if name == "net_electricity_consumption":
            return self.previous_e_net
        cached = self._static_states.get(name)
        if cached is not None:
            return cached[t]
        return self._compute_state(name, t)

    def _compute_state(self, name: str, t: int) -> float:
        series = self.load_series
        if name == "month":
            return float(series.month[t])
        if name == "day":
            return float(series.day_type[t])
        if name == "hour":
            return float(series.hour[t])
        if name == "daylight_savings_status":
            return float(series.daylight_savings_status[t])
        if name == "t_in":
            return float(series.indoor_temp[t])
        if name == "avg_unmet_setpoint":
            return float(series.avg_unmet_setpoint[t])
        if name == "rh_in":
            return float(series.indoor_rh[t])
        if name == "non_shiftable_load":
            return self._appliances[t]
        if name == "solar_gen":
            return self.pv.generation(self._solar_profile[t]) if self.pv is not None else 0.0
        if name == "cooling_storage_soc":
            return self.cooling_tank.soc if self.cooling_tank is not None else 0.0
        if name == "dhw_storage_soc":
            return self.dhw_tank.soc if self.dhw_tank is not None else 0.0
        if name == "net_electricity_consumption":
            return self.previous_e_net
        if name in ("t_out", "rh_out"):
            return float(getattr(self.weather, name)[t])
        if name == "diffuse_solar_rad":
            return float(self.weather.diffuse_solar[t])
        if name == "direct_solar_rad":
            return float(self.weather.direct_solar[t])
        if name.endswith(("_pred_6h", "_pred_12h", "_pred_24h")):
            base, _, tail = name.rpartition("_pred_")
            lead = int(tail[:-1])
            variable = {"diffuse_solar_rad": "diffuse_solar", "direct_solar_rad": "direct_solar"}.get(
                base, base
            )
            return self.forecaster.forecast(variable, t, lead)
        raise KeyError(f"unknown state name {name!r}")

    def assemble_state(self, t: int) -> List[float]:
        """The enabled states at hour t, in the fixed vocabulary order."""
        row = self._state_rows[t].copy()
        ct = self.cooling_tank
        dt = self.dhw_tank
        for i, name in self._dynamic_slots:
            if name == "cooling_storage_soc":
                row[i] = ct.stored_energy / ct.capacity_kwh if ct is not None and ct.capacity_kwh > 0.0 else 0.0
            elif name == "dhw_storage_soc":
                row[i] = dt.stored_energy / dt.capacity_kwh if dt is not None and dt.capacity_kwh > 0.0 else 0.0
            else:
                row[i] = self.previous_e_net
        return row
