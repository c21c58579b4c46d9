"""Scenario directory ingestion and the canonical writer.

A scenario directory holds ``zones.csv``, ``pipes.csv``, ``generators.csv``,
``storage.csv``, ``water_loads.csv``, ``profiles.csv``, an optional
``forecasts.csv`` (explicit forecasts override synthesis) and a
``scenario.toml``.  All CSVs are UTF-8, comma separated, with a mandatory
header row and '.' decimal separator.  Every parse error is reported with
its file and row.
"""

from __future__ import annotations

import csv
import json
import sys
from datetime import datetime, timedelta
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import (
    BaseClass,
    CoolingSpec,
    CoolingTech,
    ForecastModel,
    Fuel,
    Generator,
    OperationsConfig,
    Pipe,
    ReservePolicy,
    Scenario,
    ScenarioError,
    StorageUnit,
    THERMAL_FUELS,
    TimeSeries,
    WaterLoad,
    Zone,
)

ZONE_COLS = ["id", "name", "load_profile_id"]
PIPE_COLS = ["id", "from", "to", "limit_mw", "reactance_pu"]
GEN_COLS = [
    "id", "zone", "fuel", "base_class", "p_min_mw", "p_max_mw", "ramp_mw_per_min",
    "min_up_h", "min_down_h", "startup_cost_usd", "no_load_cost_usd_per_h",
    "marginal_cost_usd_per_mwh", "fast_start", "curtail_price_usd_per_mwh", "profile_id",
    "cooling_technology", "cooling_efficiency", "cooling_k_os", "cooling_delta_t_k",
    "cooling_k_latent", "cooling_n_cc", "cooling_k_ot_evap", "emission_factor_kg_per_mwh_th",
]
STORAGE_COLS = ["id", "zone", "p_max_gen_mw", "p_max_pump_mw", "energy_cap_mwh",
                "round_trip_eff", "initial_energy_mwh"]
WATER_COLS = ["id", "zone", "profile_id", "sheddable_fraction", "shed_price_usd_per_mwh"]
PROFILE_COLS = ["series_id", "timestamp_iso8601", "value_mw"]


def cooling_defaults() -> dict:
    with resources.files("gridwater").joinpath("data/cooling_defaults.json").open("rb") as fh:
        return json.load(fh)


def _fail(file: str, row: int | None, msg: str) -> None:
    where = f"{file}" if row is None else f"{file} row {row}"
    raise ScenarioError(f"{where}: {msg}")


def _read_rows(path: Path, cols: list[str]) -> list[tuple[int, dict[str, str]]]:
    if not path.exists():
        raise ScenarioError(f"{path.name}: missing file")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in cols if c not in header]
        if missing:
            _fail(path.name, 1, f"missing columns {missing}")
        out = []
        for i, row in enumerate(reader, start=2):
            out.append((i, {k: (v or "").strip() for k, v in row.items() if k is not None}))
    return out


def _num(raw: str, file: str, row: int, col: str, default: float | None = None) -> float:
    if raw == "":
        if default is None:
            _fail(file, row, f"column {col!r} is empty")
        return default
    try:
        return float(raw)
    except ValueError:
        _fail(file, row, f"column {col!r}: {raw!r} is not a number")


def _intval(raw: str, file: str, row: int, col: str) -> int:
    v = _num(raw, file, row, col)
    if v != int(v):
        _fail(file, row, f"column {col!r}: expected an integer, got {raw!r}")
    return int(v)


def _boolval(raw: str, file: str, row: int, col: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no", ""):
        return False
    _fail(file, row, f"column {col!r}: {raw!r} is not a boolean")


def _enum(cls, raw: str, file: str, row: int, col: str):
    try:
        return cls(raw)
    except ValueError:
        _fail(file, row, f"column {col!r}: {raw!r} is not one of "
                         f"{[m.value for m in cls]}")


def _parse_cooling(row: dict[str, str], fuel: Fuel, file: str, rownum: int) -> CoolingSpec | None:
    tech_raw = row.get("cooling_technology", "")
    if tech_raw == "":
        return None
    tech = _enum(CoolingTech, tech_raw, file, rownum, "cooling_technology")
    defaults = cooling_defaults()
    fuel_d = defaults.get(fuel.value, {})
    shared = defaults["shared"]
    return CoolingSpec(
        technology=tech,
        efficiency=_num(row.get("cooling_efficiency", ""), file, rownum,
                        "cooling_efficiency", fuel_d.get("efficiency")),
        k_os=_num(row.get("cooling_k_os", ""), file, rownum,
                  "cooling_k_os", fuel_d.get("k_os")),
        delta_t_k=_num(row.get("cooling_delta_t_k", ""), file, rownum,
                       "cooling_delta_t_k", shared["delta_t_k"]),
        k_latent=_num(row.get("cooling_k_latent", ""), file, rownum,
                      "cooling_k_latent", shared["k_latent"]),
        n_cc=_num(row.get("cooling_n_cc", ""), file, rownum,
                  "cooling_n_cc", shared["n_cc"]),
        k_ot_evap=_num(row.get("cooling_k_ot_evap", ""), file, rownum,
                       "cooling_k_ot_evap", shared["k_ot_evap"]),
    )


def _parse_timestamp(raw: str, file: str, row: int) -> datetime:
    try:
        return datetime.fromisoformat(raw)
    except ValueError:
        _fail(file, row, f"bad ISO-8601 timestamp {raw!r}")


def _load_profiles(path: Path, horizon_start: datetime, file: str,
                   require: bool = True) -> dict[str, TimeSeries]:
    if not path.exists():
        if require:
            raise ScenarioError(f"{file}: missing file")
        return {}
    rows = _read_rows(path, PROFILE_COLS)
    by_series: dict[str, list[tuple[int, datetime, float]]] = {}
    for rownum, row in rows:
        sid = row["series_id"]
        if not sid:
            _fail(file, rownum, "empty series_id")
        ts = _parse_timestamp(row["timestamp_iso8601"], file, rownum)
        val = _num(row["value_mw"], file, rownum, "value_mw")
        by_series.setdefault(sid, []).append((rownum, ts, val))

    out: dict[str, TimeSeries] = {}
    for sid, recs in by_series.items():
        recs.sort(key=lambda r: r[1])
        stamps = [r[1] for r in recs]
        if len(stamps) < 2:
            _fail(file, recs[0][0], f"series {sid!r} needs at least two samples")
        deltas = {int((b - a).total_seconds() // 60) for a, b in zip(stamps, stamps[1:])}
        if len(deltas) != 1:
            _fail(file, recs[0][0], f"series {sid!r} is not uniformly sampled")
        step = deltas.pop()
        if step not in (1, 15, 60):
            _fail(file, recs[0][0], f"series {sid!r} has step {step} min; must be 1, 15 or 60")
        offset = (horizon_start - stamps[0]).total_seconds() / 60.0
        if offset < 0:
            _fail(file, recs[0][0], f"series {sid!r} starts after the horizon start")
        if offset % step:
            _fail(file, recs[0][0],
                  f"series {sid!r} samples are not aligned with the horizon start")
        skip = int(offset // step)
        values = np.array([r[2] for r in recs[skip:]], dtype=np.float64)
        out[sid] = TimeSeries(id=sid, start=horizon_start, step_minutes=step, values=values)
    return out


def load_scenario(path: str | Path) -> Scenario:
    """Load, cross-link and validate a scenario directory."""
    root = Path(path)
    if not root.is_dir():
        raise ScenarioError(f"{root}: not a directory")

    cfg_path = root / "scenario.toml"
    if not cfg_path.exists():
        raise ScenarioError("scenario.toml: missing file")
    with cfg_path.open("rb") as fh:
        try:
            cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError(f"scenario.toml: {exc}") from None

    def cfg_get(key: str, default=None, required: bool = False):
        if key not in cfg:
            if required:
                raise ScenarioError(f"scenario.toml: missing key {key!r}")
            return default
        return cfg[key]

    def as_dt(value, key: str) -> datetime:
        if isinstance(value, datetime):
            return value
        return _parse_timestamp(str(value), "scenario.toml", 0)

    horizon_start = as_dt(cfg_get("horizon_start", required=True), "horizon_start")
    horizon_end = as_dt(cfg_get("horizon_end", required=True), "horizon_end")
    horizon_minutes = int((horizon_end - horizon_start).total_seconds() // 60)

    rp = cfg.get("reserve_policy", {})
    reserve_policy = ReservePolicy(
        lfr_peak_fraction=float(rp.get("lfr_peak_fraction", 0.02)),
        lfr_vre_fraction=float(rp.get("lfr_vre_fraction", 0.05)),
        ramp_up_mw_per_min=float(rp.get("ramp_up_mw_per_min", 0.0)),
        ramp_down_mw_per_min=float(rp.get("ramp_down_mw_per_min", 0.0)),
    )
    fc = cfg.get("forecast", {})
    forecast = ForecastModel(
        ar1_phi=float(fc.get("ar1_phi", 0.8)),
        sigma_pct=float(fc.get("sigma_pct", 0.0)),
        rt_sigma_scale=float(fc.get("rt_sigma_scale", 0.5)),
    )
    op = cfg.get("operations", {})
    ops = OperationsConfig(
        storage_end_drawdown_mwh=float(op.get("storage_end_drawdown_mwh", 0.0)),
        storage_envelope_frac=float(op.get("storage_envelope_frac", 0.10)),
        storage_dispatch_cost=float(op.get("storage_dispatch_cost", 2.0)),
        sced_penalty=float(op.get("sced_penalty", 1e4)),
        rtuc_reserve_penalty=float(op.get("rtuc_reserve_penalty", 5000.0)),
        mileage_mode=str(op.get("mileage_mode", "energy")),
    )
    if ops.mileage_mode not in ("energy", "travel"):
        raise ScenarioError("scenario.toml: mileage_mode must be 'energy' or 'travel'")

    zones = []
    for rownum, row in _read_rows(root / "zones.csv", ZONE_COLS[:2]):
        if not row["id"]:
            _fail("zones.csv", rownum, "empty zone id")
        zones.append(Zone(id=row["id"], name=row["name"],
                          load_profile_id=row.get("load_profile_id") or None))

    pipes = []
    for rownum, row in _read_rows(root / "pipes.csv", PIPE_COLS):
        pipes.append(Pipe(
            id=row["id"], from_zone=row["from"], to_zone=row["to"],
            limit_mw=_num(row["limit_mw"], "pipes.csv", rownum, "limit_mw"),
            reactance_pu=_num(row["reactance_pu"], "pipes.csv", rownum, "reactance_pu"),
        ))

    defaults = cooling_defaults()
    generators = []
    for rownum, row in _read_rows(root / "generators.csv", GEN_COLS[:13]):
        f = "generators.csv"
        fuel = _enum(Fuel, row["fuel"], f, rownum, "fuel")
        try:
            gen = Generator(
                id=row["id"], zone=row["zone"], fuel=fuel,
                base_class=_enum(BaseClass, row["base_class"], f, rownum, "base_class"),
                p_min=_num(row["p_min_mw"], f, rownum, "p_min_mw"),
                p_max=_num(row["p_max_mw"], f, rownum, "p_max_mw"),
                ramp_mw_per_min=_num(row["ramp_mw_per_min"], f, rownum, "ramp_mw_per_min"),
                min_up_h=_intval(row["min_up_h"], f, rownum, "min_up_h"),
                min_down_h=_intval(row["min_down_h"], f, rownum, "min_down_h"),
                startup_cost=_num(row["startup_cost_usd"], f, rownum, "startup_cost_usd"),
                no_load_cost=_num(row["no_load_cost_usd_per_h"], f, rownum,
                                  "no_load_cost_usd_per_h"),
                marginal_cost=_num(row["marginal_cost_usd_per_mwh"], f, rownum,
                                   "marginal_cost_usd_per_mwh"),
                fast_start=_boolval(row.get("fast_start", ""), f, rownum, "fast_start"),
                curtail_price=_num(row.get("curtail_price_usd_per_mwh", ""), f, rownum,
                                   "curtail_price_usd_per_mwh", 0.0),
                profile_id=row.get("profile_id") or None,
                cooling=_parse_cooling(row, fuel, f, rownum),
                emission_factor=_num(row.get("emission_factor_kg_per_mwh_th", ""), f, rownum,
                                     "emission_factor_kg_per_mwh_th",
                                     defaults.get(fuel.value, {}).get(
                                         "emission_factor", 0.0)),
            )
            gen.check()
        except ScenarioError as exc:
            _fail(f, rownum, str(exc))
        generators.append(gen)

    storage_units = []
    for rownum, row in _read_rows(root / "storage.csv", STORAGE_COLS):
        f = "storage.csv"
        su = StorageUnit(
            id=row["id"], zone=row["zone"],
            p_max_gen=_num(row["p_max_gen_mw"], f, rownum, "p_max_gen_mw"),
            p_max_pump=_num(row["p_max_pump_mw"], f, rownum, "p_max_pump_mw"),
            energy_cap_mwh=_num(row["energy_cap_mwh"], f, rownum, "energy_cap_mwh"),
            round_trip_eff=_num(row["round_trip_eff"], f, rownum, "round_trip_eff"),
            initial_energy_mwh=_num(row["initial_energy_mwh"], f, rownum, "initial_energy_mwh"),
        )
        try:
            su.check()
        except ScenarioError as exc:
            _fail(f, rownum, str(exc))
        storage_units.append(su)

    water_loads = []
    for rownum, row in _read_rows(root / "water_loads.csv", WATER_COLS):
        f = "water_loads.csv"
        wl = WaterLoad(
            id=row["id"], zone=row["zone"], profile_id=row["profile_id"],
            sheddable_fraction=_num(row["sheddable_fraction"], f, rownum, "sheddable_fraction"),
            shed_price=_num(row["shed_price_usd_per_mwh"], f, rownum, "shed_price_usd_per_mwh"),
        )
        try:
            wl.check()
        except ScenarioError as exc:
            _fail(f, rownum, str(exc))
        water_loads.append(wl)

    profiles = _load_profiles(root / "profiles.csv", horizon_start, "profiles.csv")
    explicit = _load_profiles(root / "forecasts.csv", horizon_start, "forecasts.csv",
                              require=False)

    scenario = Scenario(
        id=str(cfg_get("id", root.name)),
        zones=zones, pipes=pipes, generators=generators,
        storage_units=storage_units, water_loads=water_loads, profiles=profiles,
        swing_zone=str(cfg_get("swing_zone", required=True)),
        regulation_capacity_mw=float(cfg_get("regulation_capacity_mw", required=True)),
        reserve_policy=reserve_policy,
        horizon_start=horizon_start,
        horizon_minutes=horizon_minutes,
        forecast=forecast,
        default_seed=int(cfg_get("seed", 0)),
        ops=ops,
        explicit_forecasts=explicit,
    )
    scenario.check()
    return scenario


# ---------------------------------------------------------------------------
# canonical writer


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if v is not None else "" for v in row])


def write_scenario(s: Scenario, path: str | Path) -> None:
    """Write a scenario directory that ``load_scenario`` reads back identically."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    _write_csv(root / "zones.csv", ZONE_COLS,
               [[z.id, z.name, z.load_profile_id] for z in s.zones])
    _write_csv(root / "pipes.csv", PIPE_COLS,
               [[p.id, p.from_zone, p.to_zone, p.limit_mw, p.reactance_pu] for p in s.pipes])

    gen_rows = []
    for g in s.generators:
        cs = g.cooling
        gen_rows.append([
            g.id, g.zone, g.fuel.value, g.base_class.value, g.p_min, g.p_max,
            g.ramp_mw_per_min, g.min_up_h, g.min_down_h, g.startup_cost, g.no_load_cost,
            g.marginal_cost, "true" if g.fast_start else "false", g.curtail_price,
            g.profile_id,
            cs.technology.value if cs else None,
            cs.efficiency if cs else None,
            cs.k_os if cs else None,
            cs.delta_t_k if cs else None,
            cs.k_latent if cs else None,
            cs.n_cc if cs else None,
            cs.k_ot_evap if cs else None,
            g.emission_factor,
        ])
    _write_csv(root / "generators.csv", GEN_COLS, gen_rows)

    _write_csv(root / "storage.csv", STORAGE_COLS,
               [[u.id, u.zone, u.p_max_gen, u.p_max_pump, u.energy_cap_mwh,
                 u.round_trip_eff, u.initial_energy_mwh] for u in s.storage_units])
    _write_csv(root / "water_loads.csv", WATER_COLS,
               [[w.id, w.zone, w.profile_id, w.sheddable_fraction, w.shed_price]
                for w in s.water_loads])

    prof_rows = []
    for sid in sorted(s.profiles):
        ts = s.profiles[sid]
        for i, v in enumerate(ts.values):
            stamp = ts.start + timedelta(minutes=i * ts.step_minutes)
            prof_rows.append([sid, stamp.isoformat(), float(v)])
    _write_csv(root / "profiles.csv", PROFILE_COLS, prof_rows)

    if s.explicit_forecasts:
        fc_rows = []
        for sid in sorted(s.explicit_forecasts):
            ts = s.explicit_forecasts[sid]
            for i, v in enumerate(ts.values):
                stamp = ts.start + timedelta(minutes=i * ts.step_minutes)
                fc_rows.append([sid, stamp.isoformat(), float(v)])
        _write_csv(root / "forecasts.csv", PROFILE_COLS, fc_rows)

    end = s.horizon_start + timedelta(minutes=s.horizon_minutes)
    rp, fc, op = s.reserve_policy, s.forecast, s.ops
    lines = [
        f'id = "{s.id}"',
        f'swing_zone = "{s.swing_zone}"',
        f"regulation_capacity_mw = {_fmt(float(s.regulation_capacity_mw))}",
        f"horizon_start = {s.horizon_start.isoformat()}",
        f"horizon_end = {end.isoformat()}",
        f"seed = {s.default_seed}",
        "",
        "[reserve_policy]",
        f"lfr_peak_fraction = {_fmt(float(rp.lfr_peak_fraction))}",
        f"lfr_vre_fraction = {_fmt(float(rp.lfr_vre_fraction))}",
        f"ramp_up_mw_per_min = {_fmt(float(rp.ramp_up_mw_per_min))}",
        f"ramp_down_mw_per_min = {_fmt(float(rp.ramp_down_mw_per_min))}",
        "",
        "[forecast]",
        f"ar1_phi = {_fmt(float(fc.ar1_phi))}",
        f"sigma_pct = {_fmt(float(fc.sigma_pct))}",
        f"rt_sigma_scale = {_fmt(float(fc.rt_sigma_scale))}",
        "",
        "[operations]",
        f"storage_end_drawdown_mwh = {_fmt(float(op.storage_end_drawdown_mwh))}",
        f"storage_envelope_frac = {_fmt(float(op.storage_envelope_frac))}",
        f"storage_dispatch_cost = {_fmt(float(op.storage_dispatch_cost))}",
        f"sced_penalty = {_fmt(float(op.sced_penalty))}",
        f"rtuc_reserve_penalty = {_fmt(float(op.rtuc_reserve_penalty))}",
        f'mileage_mode = "{op.mileage_mode}"',
        "",
    ]
    (root / "scenario.toml").write_text("\n".join(lines), encoding="utf-8")
