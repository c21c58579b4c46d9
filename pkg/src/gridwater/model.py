"""Domain model: scenario data types, resource classification, net load, forecasts.

All simulation time is measured in integer minutes from the scenario
horizon start.  Profiles are normalized at load time so that sample 0
falls exactly on the horizon start; values between samples are linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum

import numpy as np


class ScenarioError(ValueError):
    """Invalid scenario data; message carries file/row context when known."""


class Mode(str, Enum):
    CONVENTIONAL = "conventional"
    FLEXIBLE = "flexible"


class Fuel(str, Enum):
    NUCLEAR = "nuclear"
    GAS = "gas"
    COAL = "coal"
    OIL = "oil"
    BIOMASS = "biomass"
    WIND = "wind"
    SOLAR = "solar"
    HYDRO_ROR = "hydro_ror"
    HYDRO_POND = "hydro_pond"
    PUMPED_STORAGE = "pumped_storage"
    TIELINE = "tieline"


THERMAL_FUELS = {Fuel.NUCLEAR, Fuel.GAS, Fuel.COAL, Fuel.OIL, Fuel.BIOMASS}


class BaseClass(str, Enum):
    DISPATCHABLE = "dispatchable"
    MUST_RUN = "must_run"
    VARIABLE = "variable"


class ResourceClass(str, Enum):
    DISPATCHABLE = "dispatchable"
    MUST_RUN = "must_run"
    SEMI_DISPATCHABLE = "semi_dispatchable"
    FIXED_INJECTION = "fixed_injection"


class CoolingTech(str, Enum):
    ONCE_THROUGH = "once_through"
    WET_TOWER = "wet_tower"
    DRY = "dry"


@dataclass(frozen=True)
class Zone:
    id: str
    name: str
    load_profile_id: str | None = None


@dataclass(frozen=True)
class Pipe:
    id: str
    from_zone: str
    to_zone: str
    limit_mw: float
    reactance_pu: float


@dataclass(frozen=True)
class CoolingSpec:
    technology: CoolingTech
    efficiency: float                 # electric conversion efficiency
    k_os: float                       # fuel heat lost to non-cooling sinks
    delta_t_k: float = 10.0           # once-through temperature rise
    k_latent: float = 0.9             # wet tower: share of heat removed by evaporation
    n_cc: float = 5.0                 # wet tower: cycles of concentration
    k_ot_evap: float = 0.01           # once-through: downstream evaporative fraction

    def check(self) -> None:
        if not 0.0 < self.efficiency < 1.0:
            raise ScenarioError(f"cooling efficiency {self.efficiency} outside (0, 1)")
        if self.k_os < 0.0 or self.efficiency + self.k_os >= 1.0:
            raise ScenarioError(f"k_os {self.k_os} makes efficiency + k_os leave (0, 1)")
        if self.technology is CoolingTech.ONCE_THROUGH:
            if self.delta_t_k <= 0.0:
                raise ScenarioError("once-through cooling needs delta_t_k > 0")
            if not 0.0 <= self.k_ot_evap <= 1.0:
                raise ScenarioError("k_ot_evap must be within [0, 1]")
        if self.technology is CoolingTech.WET_TOWER:
            if not 0.0 <= self.k_latent <= 1.0:
                raise ScenarioError("k_latent must be within [0, 1]")
            if self.n_cc <= 1.0:
                raise ScenarioError("cycles of concentration must exceed 1")


@dataclass(frozen=True)
class Generator:
    id: str
    zone: str
    fuel: Fuel
    base_class: BaseClass
    p_min: float
    p_max: float
    ramp_mw_per_min: float
    min_up_h: int
    min_down_h: int
    startup_cost: float
    no_load_cost: float
    marginal_cost: float
    fast_start: bool = False
    curtail_price: float = 0.0
    profile_id: str | None = None
    cooling: CoolingSpec | None = None
    emission_factor: float = 0.0      # kg CO2 per MWh of fuel heat

    def check(self) -> None:
        if not 0.0 <= self.p_min <= self.p_max:
            raise ScenarioError(f"generator {self.id}: requires 0 <= p_min <= p_max")
        if self.ramp_mw_per_min < 0:
            raise ScenarioError(f"generator {self.id}: negative ramp")
        if self.min_up_h < 0 or self.min_down_h < 0:
            raise ScenarioError(f"generator {self.id}: negative min up/down time")
        if self.fast_start and not (self.min_up_h == self.min_down_h and self.min_up_h <= 1):
            raise ScenarioError(f"generator {self.id}: fast start requires min_up = min_down <= 1")
        if self.base_class is BaseClass.MUST_RUN and self.p_min != self.p_max:
            raise ScenarioError(f"generator {self.id}: must-run requires p_min = p_max")
        if self.base_class is BaseClass.VARIABLE and not self.profile_id:
            raise ScenarioError(f"generator {self.id}: variable resource needs a profile_id")
        if self.fuel in THERMAL_FUELS and self.cooling is None:
            raise ScenarioError(f"generator {self.id}: thermal unit is missing a cooling spec")
        if self.cooling is not None:
            try:
                self.cooling.check()
            except ScenarioError as exc:
                raise ScenarioError(f"generator {self.id}: {exc}") from None


@dataclass(frozen=True)
class StorageUnit:
    id: str
    zone: str
    p_max_gen: float
    p_max_pump: float
    energy_cap_mwh: float
    round_trip_eff: float
    initial_energy_mwh: float

    def check(self) -> None:
        if self.p_max_gen < 0 or self.p_max_pump < 0 or self.energy_cap_mwh < 0:
            raise ScenarioError(f"storage {self.id}: negative capacity")
        if not 0.0 < self.round_trip_eff <= 1.0:
            raise ScenarioError(f"storage {self.id}: round-trip efficiency outside (0, 1]")
        if not 0.0 <= self.initial_energy_mwh <= self.energy_cap_mwh:
            raise ScenarioError(f"storage {self.id}: initial energy outside [0, capacity]")


@dataclass(frozen=True)
class WaterLoad:
    id: str
    zone: str
    profile_id: str
    sheddable_fraction: float
    shed_price: float

    def check(self) -> None:
        if not 0.0 <= self.sheddable_fraction <= 1.0:
            raise ScenarioError(f"water load {self.id}: sheddable fraction outside [0, 1]")
        if self.shed_price < 0:
            raise ScenarioError(f"water load {self.id}: negative shed price")


VALID_STEPS = (1, 15, 60)


@dataclass(eq=False)
class TimeSeries:
    """Uniformly sampled MW series; sample i sits at start + i*step minutes."""

    id: str
    start: datetime
    step_minutes: int
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)

    def check(self) -> None:
        if self.step_minutes not in VALID_STEPS:
            raise ScenarioError(f"series {self.id}: step {self.step_minutes} not in {VALID_STEPS}")
        if len(self.values) == 0 or not np.all(np.isfinite(self.values)):
            raise ScenarioError(f"series {self.id}: values must be finite and nonempty")

    @property
    def end_minute(self) -> int:
        return (len(self.values) - 1) * self.step_minutes

    def at(self, minute) -> np.ndarray | float:
        """Linearly interpolated value(s) at minute offsets from the series start."""
        pos = np.asarray(minute, dtype=np.float64) / self.step_minutes
        if np.any(pos < -1e-9) or np.any(pos > len(self.values) - 1 + 1e-9):
            raise ScenarioError(f"series {self.id}: sample outside covered range")
        out = np.interp(pos, np.arange(len(self.values)), self.values)
        return float(out) if np.isscalar(minute) else out

    def __eq__(self, other) -> bool:
        return (isinstance(other, TimeSeries)
                and self.id == other.id
                and self.start == other.start
                and self.step_minutes == other.step_minutes
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class ReservePolicy:
    lfr_peak_fraction: float = 0.02   # share of horizon peak load
    lfr_vre_fraction: float = 0.05    # share of committed VRE forecast
    ramp_up_mw_per_min: float = 0.0
    ramp_down_mw_per_min: float = 0.0


@dataclass(frozen=True)
class ForecastModel:
    ar1_phi: float = 0.8
    sigma_pct: float = 0.0
    rt_sigma_scale: float = 0.5       # real-time forecasts are this much tighter

    def check(self) -> None:
        if not 0.0 <= self.ar1_phi < 1.0:
            raise ScenarioError(f"ar1_phi {self.ar1_phi} outside [0, 1)")
        if self.sigma_pct < 0:
            raise ScenarioError("sigma_pct must be nonnegative")
        if self.rt_sigma_scale < 0:
            raise ScenarioError("rt_sigma_scale must be nonnegative")


@dataclass(frozen=True)
class OperationsConfig:
    storage_end_drawdown_mwh: float = 0.0
    storage_envelope_frac: float = 0.10
    storage_dispatch_cost: float = 2.0        # discourages simultaneous charge/discharge
    sced_penalty: float = 1e4                 # $/MWh on balance slack
    rtuc_reserve_penalty: float = 5000.0      # $/MWh on relaxed reserve rows
    mileage_mode: str = "energy"              # "energy" or "travel"


@dataclass(eq=False)
class Scenario:
    """Immutable world description; safe for concurrent reads once loaded."""

    id: str
    zones: list[Zone]
    pipes: list[Pipe]
    generators: list[Generator]
    storage_units: list[StorageUnit]
    water_loads: list[WaterLoad]
    profiles: dict[str, TimeSeries]
    swing_zone: str
    regulation_capacity_mw: float
    reserve_policy: ReservePolicy
    horizon_start: datetime
    horizon_minutes: int
    forecast: ForecastModel = field(default_factory=ForecastModel)
    default_seed: int = 0
    ops: OperationsConfig = field(default_factory=OperationsConfig)
    explicit_forecasts: dict[str, TimeSeries] = field(default_factory=dict)

    # ---- derived lookups ----------------------------------------------------

    def zone(self, zid: str) -> Zone:
        return next(z for z in self.zones if z.id == zid)

    def generator(self, gid: str) -> Generator:
        return next(g for g in self.generators if g.id == gid)

    @property
    def horizon_days(self) -> int:
        return self.horizon_minutes // 1440

    def profile(self, pid: str) -> TimeSeries:
        return self.profiles[pid]

    def zone_load(self, zone: Zone, minutes) -> np.ndarray:
        if zone.load_profile_id is None:
            return np.zeros_like(np.asarray(minutes, dtype=np.float64))
        return np.atleast_1d(self.profiles[zone.load_profile_id].at(minutes))

    def total_load(self, minutes) -> np.ndarray:
        """System load incl. water demand at the given minute offsets."""
        minutes = np.asarray(minutes, dtype=np.float64)
        total = np.zeros_like(minutes)
        for z in self.zones:
            total = total + self.zone_load(z, minutes)
        for wl in self.water_loads:
            total = total + self.profiles[wl.profile_id].at(minutes)
        return total

    def peak_load(self) -> float:
        """Horizon peak of system load plus water demand (reserve sizing basis)."""
        minutes = np.arange(0, self.horizon_minutes + 1, 15, dtype=np.float64)
        return float(np.max(self.total_load(minutes)))

    def variable_generators(self) -> list[Generator]:
        return [g for g in self.generators if g.base_class is BaseClass.VARIABLE]

    def check(self) -> None:
        ids = [z.id for z in self.zones]
        if len(set(ids)) != len(ids):
            raise ScenarioError("zone ids are not unique")
        for group in (self.pipes, self.generators, self.storage_units, self.water_loads):
            gids = [x.id for x in group]
            if len(set(gids)) != len(gids):
                raise ScenarioError("duplicate record ids within a file")
        zone_set = set(ids)
        for p in self.pipes:
            if p.from_zone == p.to_zone:
                raise ScenarioError(f"pipe {p.id}: from_zone equals to_zone")
            if p.from_zone not in zone_set or p.to_zone not in zone_set:
                raise ScenarioError(f"pipe {p.id}: references an unknown zone")
            if p.limit_mw <= 0:
                raise ScenarioError(f"pipe {p.id}: limit must be positive")
            if p.reactance_pu <= 0:
                raise ScenarioError(f"pipe {p.id}: reactance must be positive")
        if self.swing_zone not in zone_set:
            raise ScenarioError(f"swing zone {self.swing_zone!r} does not exist")
        if self.regulation_capacity_mw < 0:
            raise ScenarioError("regulation capacity must be nonnegative")
        if self.horizon_minutes <= 0 or self.horizon_minutes % 1440:
            raise ScenarioError("horizon must cover a whole positive number of days")
        self.forecast.check()

        for g in self.generators:
            g.check()
            if g.zone not in zone_set:
                raise ScenarioError(f"generator {g.id}: references unknown zone {g.zone}")
            if g.profile_id is not None and g.profile_id not in self.profiles:
                raise ScenarioError(f"generator {g.id}: dangling profile reference {g.profile_id!r}")
        for su in self.storage_units:
            su.check()
            if su.zone not in zone_set:
                raise ScenarioError(f"storage {su.id}: references unknown zone {su.zone}")
        for wl in self.water_loads:
            wl.check()
            if wl.zone not in zone_set:
                raise ScenarioError(f"water load {wl.id}: references unknown zone {wl.zone}")
            if wl.profile_id not in self.profiles:
                raise ScenarioError(f"water load {wl.id}: dangling profile reference {wl.profile_id!r}")
        for z in self.zones:
            if z.load_profile_id is not None and z.load_profile_id not in self.profiles:
                raise ScenarioError(f"zone {z.id}: dangling load profile {z.load_profile_id!r}")

        for ts in self.profiles.values():
            ts.check()
            if ts.start != self.horizon_start:
                raise ScenarioError(f"series {ts.id}: does not start at the horizon start")
            if ts.end_minute < self.horizon_minutes:
                raise ScenarioError(
                    f"series {ts.id}: covers {ts.end_minute} min but the horizon "
                    f"needs {self.horizon_minutes} min")
        for ts in self.explicit_forecasts.values():
            ts.check()

        if not _connected(zone_set, self.pipes):
            raise ScenarioError("zonal network is not connected")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (self.id, self.zones, self.pipes, self.generators, self.storage_units,
                self.water_loads, self.profiles, self.swing_zone,
                self.regulation_capacity_mw, self.reserve_policy, self.horizon_start,
                self.horizon_minutes, self.forecast, self.default_seed, self.ops) == \
               (other.id, other.zones, other.pipes, other.generators, other.storage_units,
                other.water_loads, other.profiles, other.swing_zone,
                other.regulation_capacity_mw, other.reserve_policy, other.horizon_start,
                other.horizon_minutes, other.forecast, other.default_seed, other.ops)


def _connected(zone_ids: set[str], pipes: list[Pipe]) -> bool:
    if len(zone_ids) <= 1:
        return True
    adj: dict[str, set[str]] = {z: set() for z in zone_ids}
    for p in pipes:
        adj[p.from_zone].add(p.to_zone)
        adj[p.to_zone].add(p.from_zone)
    seen = set()
    stack = [next(iter(zone_ids))]
    while stack:
        z = stack.pop()
        if z in seen:
            continue
        seen.add(z)
        stack.extend(adj[z] - seen)
    return seen == zone_ids


def classify_resources(s: Scenario, mode: Mode) -> dict[str, ResourceClass]:
    """Effective operating class per generator under the given mode.

    Wind, solar and tie-lines are curtailable (semi-dispatchable) in both
    modes; run-of-river and pond hydro are curtailable only in flexible
    mode and otherwise inject their profile untouched; nuclear is pinned
    at maximum output; everything else follows its declared base class.
    """
    out: dict[str, ResourceClass] = {}
    for g in s.generators:
        if g.fuel in (Fuel.WIND, Fuel.SOLAR, Fuel.TIELINE):
            cls = ResourceClass.SEMI_DISPATCHABLE
        elif g.fuel in (Fuel.HYDRO_ROR, Fuel.HYDRO_POND):
            cls = (ResourceClass.SEMI_DISPATCHABLE if mode is Mode.FLEXIBLE
                   else ResourceClass.FIXED_INJECTION)
        elif g.fuel is Fuel.NUCLEAR:
            cls = ResourceClass.MUST_RUN
        elif g.base_class is BaseClass.MUST_RUN:
            cls = ResourceClass.MUST_RUN
        else:
            cls = ResourceClass.DISPATCHABLE
        out[g.id] = cls
    return out


def effective_shed_fraction(wl: WaterLoad, mode: Mode) -> float:
    """Water loads are sheddable only in flexible mode."""
    return wl.sheddable_fraction if mode is Mode.FLEXIBLE else 0.0


def net_load(s: Scenario, t0: int, t1: int, resolution: int) -> TimeSeries:
    """System load plus water demand minus all uncurtailed variable injection.

    Losses are identically zero in this lossless model; the term is kept
    in the artifact column schema for traceability but never contributes.
    """
    if resolution not in VALID_STEPS:
        raise ScenarioError(f"resolution {resolution} not in {VALID_STEPS}")
    if t0 < 0 or t1 > s.horizon_minutes or t0 > t1:
        raise ScenarioError("net load window outside the scenario horizon")
    minutes = np.arange(t0, t1 + 1, resolution, dtype=np.float64)
    total = s.total_load(minutes)
    for g in s.variable_generators():
        total = total - s.profiles[g.profile_id].at(minutes)
    losses = np.zeros_like(total)     # lossless DC model
    start = _shift_minutes(s.horizon_start, t0)
    return TimeSeries(id="net_load", start=start, step_minutes=resolution,
                      values=total + losses)


def _shift_minutes(dt: datetime, minutes: int) -> datetime:
    from datetime import timedelta
    return dt + timedelta(minutes=int(minutes))


def synthesize_forecast(actual: TimeSeries, model: ForecastModel, seed,
                        clamp_lo: float = 0.0, clamp_hi: float = math.inf) -> TimeSeries:
    """Forecast = actual * (1 + e) with e a stationary AR(1) error process.

    The innovation variance is scaled so the stationary error std equals
    ``sigma_pct``; e(0) is drawn from the stationary distribution.  The
    result is clamped to [clamp_lo, clamp_hi] and is deterministic for a
    given seed (or reproducible RNG stream).
    """
    model.check()
    n = len(actual.values)
    if model.sigma_pct == 0.0:
        values = actual.values.copy()
    else:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        phi = model.ar1_phi
        innov_std = model.sigma_pct * math.sqrt(1.0 - phi * phi)
        shocks = rng.normal(0.0, 1.0, size=n)
        e = np.empty(n)
        e[0] = shocks[0] * model.sigma_pct
        for t in range(1, n):
            e[t] = phi * e[t - 1] + innov_std * shocks[t]
        values = actual.values * (1.0 + e)
    np.clip(values, clamp_lo, clamp_hi, out=values)
    return TimeSeries(id=f"{actual.id}.forecast", start=actual.start,
                      step_minutes=actual.step_minutes, values=values)


def scaled_forecast_model(model: ForecastModel, scale: float) -> ForecastModel:
    return replace(model, sigma_pct=model.sigma_pct * scale)
