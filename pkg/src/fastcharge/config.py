"""Scenario files: JSON schema, defaults and validation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .choice import ChoiceParams, PriceTermMode
from .demand import DemandParams, ODPeriodRate
from .domain import ConfigError, MobilityParams, Point, StationSpec, Zone
from .engine import Scenario
from .pricing import PricingScheme, SchemeKind, SchemeMode

TimeOfDay = Union[float, str]


def parse_time(value: TimeOfDay) -> float:
    """Minutes since midnight from a number or an "HH:MM" string."""
    if isinstance(value, (int, float)):
        return float(value)
    try:
        hh, mm = value.split(":")
        return int(hh) * 60.0 + float(mm)
    except ValueError:
        raise ValueError(f"expected minutes or 'HH:MM', got {value!r}") from None


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ZoneCfg(_Strict):
    id: str
    rect: tuple[float, float, float, float]

    @field_validator("rect")
    @classmethod
    def _nonempty(cls, v):
        if not (v[0] < v[2] and v[1] < v[3]):
            raise ValueError("rect must satisfy xmin < xmax and ymin < ymax")
        return v


class StationCfg(_Strict):
    id: str
    location: tuple[float, float]
    chargers: int = Field(ge=1)
    base_price: float = Field(5.0, gt=0)


class ODRateCfg(_Strict):
    origin: str
    dest: str
    period_start: float
    period_end: float
    rate: float = Field(ge=0)

    @field_validator("period_start", "period_end", mode="before")
    @classmethod
    def _time(cls, v):
        return parse_time(v)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.period_start < self.period_end:
            raise ValueError("period_start must precede period_end")
        return self


class MobilityCfg(_Strict):
    speed: float = Field(50.0, gt=0)
    range_full: float = Field(200.0, gt=0)
    charge_rate: float = Field(3.2, gt=0)
    detour_max: float = Field(10.0, gt=0)


class DemandCfg(_Strict):
    penetration_multiplier: float = Field(1.0, ge=0)
    soc_mean: float = 0.6
    soc_sd: float = Field(0.2, ge=0)
    threshold_mean: float = 0.5
    threshold_sd: float = Field(0.1, ge=0)


class ChoiceCfg(_Strict):
    beta_price: float = Field(-2.7, lt=0)
    beta_detour: float = Field(-3.2, lt=0)
    beta_wait: float = Field(-1.0, lt=0)
    no_charge_utility: float = -50.0
    price_term_mode: PriceTermMode = PriceTermMode.HOURLY_RATE
    extra_charge_mean: float = Field(10.0, ge=0)
    lost_value: float | None = None


class PricingCfg(_Strict):
    kind: SchemeKind = SchemeKind.NONE
    alpha: float | None = Field(None, ge=0)
    step_m: int = Field(3, ge=1)
    mode: SchemeMode = SchemeMode.STEP


class MetricsCfg(_Strict):
    peak_windows: list[tuple[TimeOfDay, TimeOfDay]] = [("06:00", "10:00"), ("15:00", "19:00")]
    bin_minutes: float = Field(10.0, gt=0)


class OutputCfg(_Strict):
    dir: str = "out"


class ScenarioConfig(_Strict):
    name: str = "scenario"
    seed: int = 0
    replications: int = Field(1, ge=1)
    sim_start: TimeOfDay = "06:00"
    sim_end: TimeOfDay = "19:00"
    zones: list[ZoneCfg] = Field(min_length=1)
    stations: list[StationCfg] = Field(min_length=1)
    od_rates: list[ODRateCfg] = []
    mobility: MobilityCfg = MobilityCfg()
    demand: DemandCfg = DemandCfg()
    choice: ChoiceCfg = ChoiceCfg()
    pricing: PricingCfg = PricingCfg()
    reroute_max: int = Field(1, ge=0)
    metrics: MetricsCfg = MetricsCfg()
    output: OutputCfg = OutputCfg()

    @model_validator(mode="after")
    def _references(self):
        if not parse_time(self.sim_start) < parse_time(self.sim_end):
            raise ValueError("sim_start must precede sim_end")
        zone_ids = [z.id for z in self.zones]
        if len(set(zone_ids)) != len(zone_ids):
            raise ValueError("zone ids must be unique")
        station_ids = [s.id for s in self.stations]
        if len(set(station_ids)) != len(station_ids):
            raise ValueError("station ids must be unique")
        known = set(zone_ids)
        for k, r in enumerate(self.od_rates):
            for fld in ("origin", "dest"):
                if getattr(r, fld) not in known:
                    raise ValueError(f"od_rates[{k}].{fld}: unknown zone id {getattr(r, fld)!r}")
        return self

    def to_scenario(self) -> Scenario:
        d, c, p = self.demand, self.choice, self.pricing
        return Scenario(
            zones={z.id: Zone(z.id, *z.rect) for z in self.zones},
            stations=[StationSpec(s.id, Point(*s.location), s.chargers, s.base_price) for s in self.stations],
            od_rates=[ODPeriodRate(r.period_start, r.period_end, r.origin, r.dest, r.rate) for r in self.od_rates],
            mobility=MobilityParams(**self.mobility.model_dump()),
            demand=DemandParams(
                penetration_multiplier=d.penetration_multiplier,
                soc_mean=d.soc_mean,
                soc_sd=d.soc_sd,
                threshold_mean=d.threshold_mean,
                threshold_sd=d.threshold_sd,
                sim_start=parse_time(self.sim_start),
                sim_end=parse_time(self.sim_end),
            ),
            choice=ChoiceParams(
                beta_price=c.beta_price,
                beta_detour=c.beta_detour,
                beta_wait=c.beta_wait,
                no_charge_utility=c.no_charge_utility,
                price_term_mode=c.price_term_mode,
                extra_charge_mean=c.extra_charge_mean,
            ),
            pricing=PricingScheme(p.kind, p.alpha, p.step_m, p.mode),
            reroute_max=self.reroute_max,
            peak_windows=tuple((parse_time(a), parse_time(b)) for a, b in self.metrics.peak_windows),
            bin_minutes=self.metrics.bin_minutes,
            lost_value=c.lost_value,
        )

    def with_updates(self, **sections) -> "ScenarioConfig":
        """Copy with nested fields replaced, e.g. with_updates(pricing={"kind": "linear"})."""
        data = self.model_dump(mode="json")
        for key, value in sections.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        return ScenarioConfig.model_validate(data)


def _format_loc(loc: tuple) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def validate_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            where = _format_loc(err["loc"]) or "<root>"
            lines.append(f"{where}: {err['msg']}")
        raise ConfigError("invalid scenario config:\n  " + "\n  ".join(lines)) from None


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from None
    return validate_config(data)


def dump_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.model_dump(mode="json"), indent=2) + "\n")
