"""Device physics against hand-computed oracles and invariants.

Every numeric constant below was derived by hand with exact rational
arithmetic before being frozen here; none comes from running the package.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridflex.devices import (
    Battery,
    ElectricHeater,
    HeatPump,
    PVArray,
    ThermalTank,
    _interp,
    heat_pump_electricity,
    heater_electricity,
)

TOL = 1e-12


# ---------------------------------------------------------------------------
# Heat pump COP
# ---------------------------------------------------------------------------


class TestHeatPumpCop:
    def make(self, eta=0.22):
        return HeatPump(eta_tech=eta, t_target_cooling=8.0, t_target_heating=45.0)

    def test_cooling_cop_moderate(self):
        # 0.22 * 281.15 / 22 with Kelvin target
        assert self.make().cop_cooling(30.0) == pytest.approx(2.8115, abs=TOL)

    def test_cooling_cop_hot(self):
        # 0.22 * 281.15 / 32
        assert self.make().cop_cooling(40.0) == pytest.approx(1.93290625, abs=TOL)

    def test_cooling_cop_clamped_high_when_outdoor_below_target(self):
        assert self.make().cop_cooling(5.0) == 20.0
        assert self.make().cop_cooling(8.0) == 20.0  # zero denominator

    def test_cooling_cop_clamped_low(self):
        assert self.make(eta=0.05).cop_cooling(35.0) == 1.0

    def test_heating_cop_moderate(self):
        # 0.22 * 318.15 / 35
        assert self.make().cop_heating(10.0) == pytest.approx(1.9998, abs=TOL)

    def test_heating_cop_cold(self):
        # 0.22 * 318.15 / 50
        assert self.make().cop_heating(-5.0) == pytest.approx(1.39986, abs=TOL)

    def test_heating_cop_clamped_high_when_outdoor_above_target(self):
        assert self.make().cop_heating(50.0) == 20.0

    def test_series_matches_scalar(self):
        hp = self.make()
        temps = [-10.0, 0.0, 8.0, 15.0, 30.0, 40.0, 45.0, 50.0]
        cool = hp.cop_cooling_series(temps)
        heat = hp.cop_heating_series(temps)
        for i, t in enumerate(temps):
            assert cool[i] == pytest.approx(hp.cop_cooling(t), abs=TOL)
            assert heat[i] == pytest.approx(hp.cop_heating(t), abs=TOL)

    @given(st.floats(min_value=-30.0, max_value=60.0), st.floats(min_value=-30.0, max_value=60.0))
    def test_cooling_cop_monotone_in_outdoor_temp(self, a, b):
        hp = self.make()
        lo, hi = min(a, b), max(a, b)
        # hotter outdoors never increases the cooling COP
        assert hp.cop_cooling(hi) <= hp.cop_cooling(lo) + TOL

    @given(st.floats(min_value=-30.0, max_value=60.0))
    def test_cop_always_in_clamp_range(self, t):
        hp = self.make()
        for cop in (hp.cop_cooling(t), hp.cop_heating(t)):
            assert 1.0 <= cop <= 20.0

    def test_electricity_conversions(self):
        assert heat_pump_electricity(10.0, 2.5) == pytest.approx(4.0, abs=TOL)
        assert heater_electricity(9.0, 0.9) == pytest.approx(10.0, abs=TOL)
        assert ElectricHeater(efficiency=0.9).efficiency == 0.9


# ---------------------------------------------------------------------------
# Piecewise-linear interpolation
# ---------------------------------------------------------------------------


class TestInterp:
    CURVE = [(0.0, 1.0), (0.8, 1.0), (1.0, 0.2)]
    EFF = [(0.0, 0.83), (0.3, 0.83), (0.7, 0.9), (0.8, 0.9), (1.0, 0.85)]

    def test_interior_point(self):
        # between (0.8, 1.0) and (1.0, 0.2): 1.0 - 0.8 * (0.1 / 0.2)
        assert _interp(self.CURVE, 0.9) == pytest.approx(0.6, abs=TOL)

    def test_efficiency_midpoint(self):
        # between (0.3, 0.83) and (0.7, 0.9)
        assert _interp(self.EFF, 0.5) == pytest.approx(0.865, abs=TOL)

    def test_knots_exact(self):
        for x, y in self.EFF:
            assert _interp(self.EFF, x) == pytest.approx(y, abs=TOL)

    def test_end_clamping(self):
        assert _interp(self.CURVE, -0.5) == 1.0
        assert _interp(self.CURVE, 1.5) == 0.2

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_within_segment_bounds(self, x):
        y = _interp(self.EFF, x)
        assert 0.2 <= y <= 1.0


# ---------------------------------------------------------------------------
# Thermal tank
# ---------------------------------------------------------------------------


def make_tank(stored=4.0):
    t = ThermalTank(capacity_kwh=10.0, loss_coef=0.01, round_trip_eff=0.81)
    t.stored_energy = stored
    return t


class TestThermalTank:
    def test_charge_clamped_by_supply_margin(self):
        # carried = 4 * 0.99 = 3.96; margin = (8 - 3) * 0.9 = 4.5 < requested 5
        tank = make_tank()
        res = tank.step(0.5, q_demand=3.0, q_supply_max=8.0)
        assert res.q_into_storage == pytest.approx(4.5, abs=TOL)
        assert res.q_supply_charge == pytest.approx(5.0, abs=TOL)
        assert res.new_stored == pytest.approx(8.46, abs=TOL)
        assert res.executed_action == pytest.approx(0.45, abs=TOL)
        assert res.q_to_building == 0.0

    def test_charge_clamped_by_headroom(self):
        tank = make_tank(stored=9.5)
        res = tank.step(1.0, q_demand=0.0, q_supply_max=100.0)
        # carried = 9.405, headroom = 0.595 binds
        assert res.q_into_storage == pytest.approx(0.595, abs=TOL)
        assert res.new_stored == pytest.approx(10.0, abs=TOL)

    def test_discharge_clamped_by_demand(self):
        tank = make_tank()
        res = tank.step(-0.5, q_demand=3.0, q_supply_max=8.0)
        # deliverable 3.564 and request 4.5 both exceed the 3.0 demand
        assert res.q_to_building == pytest.approx(3.0, abs=TOL)
        assert res.new_stored == pytest.approx(3.96 - 3.0 / 0.9, abs=TOL)
        assert res.executed_action == pytest.approx(-(3.0 / 0.9) / 10.0, abs=TOL)

    def test_discharge_clamped_by_stored_energy(self):
        tank = make_tank(stored=1.0)
        res = tank.step(-1.0, q_demand=50.0, q_supply_max=50.0)
        # carried 0.99, deliverable 0.891 binds
        assert res.q_to_building == pytest.approx(0.891, abs=TOL)
        assert res.new_stored == pytest.approx(0.0, abs=TOL)

    def test_standby_loss_applies_with_zero_action(self):
        tank = make_tank()
        res = tank.step(0.0, q_demand=5.0, q_supply_max=9.0)
        assert res.new_stored == pytest.approx(3.96, abs=TOL)
        assert res.q_to_building == 0.0
        assert res.q_into_storage == 0.0

    def test_round_trip_efficiency_exact(self):
        # lossless standby isolates the round-trip split: out/in == eta
        for eta in (1.0, 0.81):
            tank = ThermalTank(capacity_kwh=100.0, loss_coef=0.0, round_trip_eff=eta)
            charged = tank.step(0.1, q_demand=0.0, q_supply_max=1e9)
            discharged = tank.step(-1.0, q_demand=1e9, q_supply_max=1e9)
            ratio = discharged.q_to_building / charged.q_supply_charge
            assert ratio == pytest.approx(eta, abs=1e-12)
            assert tank.stored_energy == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=200)
    @given(
        action=st.floats(min_value=-1.0, max_value=1.0),
        stored=st.floats(min_value=0.0, max_value=10.0),
        demand=st.floats(min_value=0.0, max_value=20.0),
        supply=st.floats(min_value=0.0, max_value=30.0),
    )
    def test_soc_stays_in_bounds_and_discharge_respects_demand(
        self, action, stored, demand, supply
    ):
        tank = make_tank(stored=stored)
        res = tank.step(action, q_demand=demand, q_supply_max=max(supply, demand))
        assert -1e-12 <= tank.stored_energy <= 10.0 + 1e-12
        assert res.q_to_building <= demand + 1e-12
        assert res.q_to_building >= -1e-12


# ---------------------------------------------------------------------------
# Battery
# ---------------------------------------------------------------------------


CAP_CURVE = [(0.0, 1.0), (0.8, 1.0), (1.0, 0.2)]
EFF_CURVE = [(0.0, 0.83), (0.3, 0.83), (0.7, 0.9), (0.8, 0.9), (1.0, 0.85)]


def make_battery(stored=0.0, c_loss=0.0):
    b = Battery(
        capacity_kwh=40.0,
        nominal_power=10.0,
        c_loss=c_loss,
        loss_coef=0.0,
        capacity_power_curve=list(CAP_CURVE),
        power_efficiency_curve=list(EFF_CURVE),
    )
    b.stored_energy = stored
    return b


class TestBattery:
    def test_soc_dependent_power_limit_binds(self):
        # soc 0.9 -> p_max = 0.6 * 10 = 6; request 0.5 * 40 = 20 is clamped to 6,
        # then headroom 4 binds; power fraction 0.4 -> eta 0.8475
        b = make_battery(stored=36.0)
        res = b.step(0.5)
        assert res.new_stored == pytest.approx(40.0, abs=TOL)
        assert res.executed_action == pytest.approx(0.1, abs=TOL)
        assert res.grid_side_energy == pytest.approx(4.0 / math.sqrt(0.8475), abs=TOL)

    def test_discharge_exports_scaled_by_sqrt_eta(self):
        b = make_battery(stored=20.0)
        res = b.step(-0.1)  # 4 kWh out, pf 0.4
        assert res.new_stored == pytest.approx(16.0, abs=TOL)
        assert res.grid_side_energy == pytest.approx(-4.0 * math.sqrt(0.8475), abs=TOL)
        assert res.executed_action == pytest.approx(-0.1, abs=TOL)

    def test_capacity_degrades_per_throughput(self):
        # delta C = c_loss * C0 * |e| / (2 C) = 1e-5 * 40 * 4 / 80
        b = make_battery(stored=20.0, c_loss=1e-5)
        res = b.step(-0.1)
        assert res.new_capacity == pytest.approx(40.0 - 2e-5, abs=1e-15)
        assert b.capacity_current == res.new_capacity

    def test_zero_action_is_identity_without_standby_loss(self):
        b = make_battery(stored=12.0)
        res = b.step(0.0)
        assert res.grid_side_energy == 0.0
        assert res.new_stored == pytest.approx(12.0, abs=TOL)
        assert res.new_capacity == 40.0

    def test_standby_loss(self):
        b = make_battery(stored=10.0)
        b.loss_coef = 0.002
        res = b.step(0.0)
        assert res.new_stored == pytest.approx(9.98, abs=TOL)

    def test_round_trip_equals_efficiency_on_flat_curve(self):
        b = Battery(capacity_kwh=100.0, nominal_power=1000.0, efficiency=0.81)
        put = b.step(0.05)
        got = b.step(-1.0)
        assert -got.grid_side_energy / put.grid_side_energy == pytest.approx(0.81, abs=1e-12)

    def test_reset_restores_nameplate(self):
        b = make_battery(stored=20.0, c_loss=1e-3)
        b.step(0.5)
        b.reset()
        assert b.stored_energy == 0.0
        assert b.capacity_current == 40.0

    @settings(max_examples=200)
    @given(
        actions=st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=1, max_size=20),
        stored=st.floats(min_value=0.0, max_value=40.0),
    )
    def test_invariants_over_trajectories(self, actions, stored):
        b = make_battery(stored=stored, c_loss=1e-5)
        for a in actions:
            res = b.step(a)
            assert -1e-9 <= b.stored_energy <= b.capacity_current + 1e-9
            assert abs(res.new_stored - res.new_capacity * (res.new_stored / res.new_capacity)) < 1e-9
            # energy moved (executed fraction of current capacity) never exceeds
            # the nominal power limit over one hour
            assert abs(res.executed_action) * res.new_capacity <= 10.0 * (40.0 / res.new_capacity) + 1e-9
            assert -1.0 - 1e-9 <= res.executed_action <= 1.0 + 1e-9


def test_pv_generation_scales_with_capacity():
    assert PVArray(capacity_kw=4.0).generation(0.25) == pytest.approx(1.0, abs=TOL)
    assert PVArray(capacity_kw=0.0).generation(0.9) == 0.0
