import numpy as np
import pytest

from fastcharge.choice import ChoiceParams
from fastcharge.demand import DemandParams, ODPeriodRate
from fastcharge.domain import MobilityParams, Point, StationSpec, Zone
from fastcharge.engine import Scenario
from fastcharge.pricing import PricingScheme


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def line_scenario(rate=30.0, chargers=1, kind="none", **kwargs) -> Scenario:
    """Two zones 40 miles apart with stations on and beside the corridor."""
    zones = [Zone("a", 0, 0, 10, 10), Zone("b", 40, 0, 50, 10)]
    stations = [
        StationSpec("mid", Point(25, 5), chargers, 5.0),
        StationSpec("side", Point(25, 9), chargers, 5.0),
    ]
    od = [ODPeriodRate(360, 1140, "a", "b", rate), ODPeriodRate(360, 1140, "b", "a", rate)]
    return Scenario(
        zones=zones,
        stations=stations,
        od_rates=od,
        demand=DemandParams(soc_mean=0.4, soc_sd=0.15),
        pricing=PricingScheme(kind),
        **kwargs,
    )


@pytest.fixture
def scenario():
    return line_scenario()
