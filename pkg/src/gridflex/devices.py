"""Energy device models: heat pump, electric heater, thermal tank, battery, PV.

All devices operate on an hourly timestep. Energy quantities are kWh,
power in kW, temperatures in degrees Celsius unless noted.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

KELVIN_OFFSET = 273.15
COP_MIN = 1.0
COP_MAX = 20.0


def _interp(curve: List[Tuple[float, float]], x: float) -> float:
    """Piecewise-linear interpolation on a monotone-x curve, clamped at the ends."""
    if x <= curve[0][0]:
        return curve[0][1]
    if x >= curve[-1][0]:
        return curve[-1][1]
    for (x0, y0), (x1, y1) in zip(curve, curve[1:]):
        if x <= x1:
            if x1 == x0:
                return y1
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    return curve[-1][1]


@dataclass
class HeatPump:
    """Air-to-water heat pump with Carnot-limited COP.

    Nominal thermal powers are sized at dataset load time to the peak hourly
    load each mode serves, so the building demand is always satisfiable.
    """

    eta_tech: float
    t_target_cooling: float
    t_target_heating: float
    nominal_thermal_power_cooling: float = 0.0
    nominal_thermal_power_heating: float = 0.0

    def cop_cooling(self, t_out: float) -> float:
        target_k = self.t_target_cooling + KELVIN_OFFSET
        denom = (t_out + KELVIN_OFFSET) - target_k
        if denom <= 0.0:
            return COP_MAX
        return min(max(self.eta_tech * target_k / denom, COP_MIN), COP_MAX)

    def cop_heating(self, t_out: float) -> float:
        target_k = self.t_target_heating + KELVIN_OFFSET
        denom = target_k - (t_out + KELVIN_OFFSET)
        if denom <= 0.0:
            return COP_MAX
        return min(max(self.eta_tech * target_k / denom, COP_MIN), COP_MAX)

    def cop_cooling_series(self, t_out):
        import numpy as np

        target_k = self.t_target_cooling + KELVIN_OFFSET
        denom = np.asarray(t_out, dtype=float) - self.t_target_cooling
        with np.errstate(divide="ignore", invalid="ignore"):
            cop = np.clip(self.eta_tech * target_k / denom, COP_MIN, COP_MAX)
        return np.where(denom <= 0.0, COP_MAX, cop)

    def cop_heating_series(self, t_out):
        import numpy as np

        target_k = self.t_target_heating + KELVIN_OFFSET
        denom = self.t_target_heating - np.asarray(t_out, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            cop = np.clip(self.eta_tech * target_k / denom, COP_MIN, COP_MAX)
        return np.where(denom <= 0.0, COP_MAX, cop)


def heat_pump_electricity(q_thermal: float, cop: float) -> float:
    """Grid electricity drawn to deliver ``q_thermal`` at the given COP."""
    return q_thermal / cop


def heater_electricity(q_thermal: float, efficiency: float) -> float:
    """Grid electricity drawn by a resistive heater to deliver ``q_thermal``."""
    return q_thermal / efficiency


@dataclass
class ElectricHeater:
    efficiency: float
    nominal_power: float = 0.0


@dataclass(slots=True)
class TankStepResult:
    q_to_building: float    # thermal energy discharged into the building
    q_into_storage: float   # stored-side energy added this step
    q_supply_charge: float  # supply-device thermal energy spent on charging
    new_stored: float
    executed_action: float  # effective stored-energy change / capacity


@dataclass(slots=True)
class ThermalTank:
    """Chilled-water or DHW storage tank with standby loss and round-trip efficiency.

    The round-trip efficiency is split as sqrt(eta) per leg so a full
    charge/discharge cycle returns exactly ``round_trip_eff`` of the input.
    """

    capacity_kwh: float
    loss_coef: float = 0.0
    round_trip_eff: float = 1.0
    stored_energy: float = 0.0
    _sqrt_eta: float = field(init=False, repr=False, default=1.0)

    def __post_init__(self) -> None:
        self._sqrt_eta = self.round_trip_eff ** 0.5

    def reset(self) -> None:
        self.stored_energy = 0.0

    @property
    def soc(self) -> float:
        if self.capacity_kwh <= 0.0:
            return 0.0
        return self.stored_energy / self.capacity_kwh

    def step(self, action: float, q_demand: float, q_supply_max: float) -> TankStepResult:
        """Apply one hour: standby loss, then the clamped charge/discharge request.

        ``q_supply_max`` is the supply device's thermal headroom this hour; the
        building demand is always served before any charging.
        """
        sqrt_eta = self._sqrt_eta
        capacity = self.capacity_kwh
        carried = self.stored_energy * (1.0 - self.loss_coef)
        requested = action * capacity

        if requested >= 0.0:
            headroom = max(capacity - carried, 0.0)
            supply_margin = max(q_supply_max - q_demand, 0.0)
            gain = min(requested, supply_margin * sqrt_eta, headroom)
            supply_charge = gain / sqrt_eta if sqrt_eta > 0.0 else 0.0
            self.stored_energy = carried + gain
            executed = gain / capacity if capacity > 0.0 else 0.0
            return TankStepResult(0.0, gain, supply_charge, self.stored_energy, executed)

        deliverable = carried * sqrt_eta
        delivered = min(-requested * sqrt_eta, q_demand, deliverable)
        removed = delivered / sqrt_eta if sqrt_eta > 0.0 else 0.0
        self.stored_energy = carried - removed
        executed = -removed / capacity if capacity > 0.0 else 0.0
        return TankStepResult(delivered, 0.0, 0.0, self.stored_energy, executed)


@dataclass(slots=True)
class BatteryStepResult:
    grid_side_energy: float  # signed: > 0 draws from the grid, < 0 exports
    new_stored: float
    new_capacity: float
    executed_action: float


@dataclass(slots=True)
class Battery:
    """Electric battery with SoC-dependent power limit, rate-dependent efficiency,
    standby loss, and cycling capacity degradation."""

    capacity_kwh: float
    nominal_power: float
    c_loss: float = 0.0
    loss_coef: float = 0.0
    capacity_power_curve: Optional[List[Tuple[float, float]]] = None
    power_efficiency_curve: Optional[List[Tuple[float, float]]] = None
    efficiency: float = 1.0
    capacity_current: float = field(default=0.0)
    stored_energy: float = 0.0

    def __post_init__(self) -> None:
        if self.capacity_current == 0.0:
            self.capacity_current = self.capacity_kwh

    def reset(self) -> None:
        self.stored_energy = 0.0
        self.capacity_current = self.capacity_kwh

    @property
    def soc(self) -> float:
        if self.capacity_current <= 0.0:
            return 0.0
        return self.stored_energy / self.capacity_current

    def max_power(self, soc: float) -> float:
        if self.capacity_power_curve is None:
            return self.nominal_power
        return _interp(self.capacity_power_curve, soc) * self.nominal_power

    def efficiency_at(self, power_fraction: float) -> float:
        if self.power_efficiency_curve is None:
            return self.efficiency
        return _interp(self.power_efficiency_curve, power_fraction)

    def step(self, action: float, dt: float = 1.0) -> BatteryStepResult:
        """Apply one hour; the request is clamped by power limit, headroom, and
        available energy. The power limit uses the SoC at the start of the step."""
        cap = self.capacity_current
        nominal = self.nominal_power
        soc_start = self.stored_energy / cap if cap > 0.0 else 0.0
        carried = self.stored_energy * (1.0 - self.loss_coef)
        curve = self.capacity_power_curve
        p_max = nominal if curve is None else _interp(curve, soc_start) * nominal
        requested = action * cap
        requested = min(max(requested, -p_max * dt), p_max * dt)

        if requested >= 0.0:
            e_change = min(requested, max(cap - carried, 0.0))
        else:
            e_change = max(requested, -carried)

        power_fraction = 0.0
        if nominal > 0.0:
            power_fraction = min(abs(e_change) / (nominal * dt), 1.0)
        eff_curve = self.power_efficiency_curve
        eta = self.efficiency if eff_curve is None else _interp(eff_curve, power_fraction)
        sqrt_eta = eta ** 0.5

        if e_change >= 0.0:
            grid_side = e_change / sqrt_eta if sqrt_eta > 0.0 else 0.0
        else:
            grid_side = e_change * sqrt_eta

        stored = carried + e_change
        executed = e_change / cap if cap > 0.0 else 0.0

        if self.c_loss > 0.0 and cap > 0.0:
            delta_c = self.c_loss * self.capacity_kwh * abs(e_change) / (2.0 * cap)
            cap = max(cap - delta_c, 0.0)
            self.capacity_current = cap
            stored = min(stored, cap)
        self.stored_energy = stored

        return BatteryStepResult(grid_side, stored, cap, executed)

    def capacity_decrement(self, energy_moved: float) -> float:
        """Capacity lost when ``energy_moved`` kWh crosses the battery boundary."""
        if self.capacity_current <= 0.0:
            return 0.0
        return self.c_loss * self.capacity_kwh * abs(energy_moved) / (2.0 * self.capacity_current)


@dataclass
class PVArray:
    capacity_kw: float

    def generation(self, profile_value: float) -> float:
        """Hourly generation given the per-kW profile value for that hour."""
        return self.capacity_kw * profile_value
