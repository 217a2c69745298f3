import pytest

from stockflow.cli import default_model_dir
from stockflow.core import compile_model
from stockflow.engine import RunSpec, simulate
from stockflow.language import parse_model

REFERENCE_PATH = default_model_dir() / "supply_demand.sdm"

# The thirteen quantities of the underlying market model, with the demand
# shock written as literal step arguments instead of rebindable constants.
PLAIN_MARKET_SOURCE = """\
aux Perceived_Price_for_Supply = smooth(Price, Time_for_Producers_to_React_to_Price_Changes) [dollar/unit]
aux Quantity_Supplied = lookup(Supply_Schedule, Perceived_Price_for_Supply) [unit/day]
aux Perceived_Price_for_Demand = smooth(Price, Time_for_Consumers_to_React_to_Price_Changes) [dollar/unit]
aux Quantity_Demanded = lookup(Demand_Schedule, Perceived_Price_for_Demand) + Shift_in_Demand [unit/day]
stock Price = integ(Price_Change, 25) [dollar/unit]
flow Price_Change = ((1 - Supply_Demand_Ratio) * Price) / Time_to_Adjust_Price [dollar/unit/day]
aux Supply_Demand_Ratio = Quantity_Supplied / Quantity_Demanded [dimensionless]
aux Shift_in_Demand = step(10, 10) [unit/day]
table Demand_Schedule bounds (0,0)-(50,100) points (0,100) (50,0) domain [dollar/unit] range [unit/day]
table Supply_Schedule bounds (0,0)-(50,100) points (0,0) (50,100) domain [dollar/unit] range [unit/day]
const Time_for_Producers_to_React_to_Price_Changes = 5 [day]
const Time_for_Consumers_to_React_to_Price_Changes = 2 [day]
const Time_to_Adjust_Price = 1 [day]
"""

FIRST_ORDER_SOURCE = """\
stock level = integ(adjustment, 0) [widget]
flow adjustment = (goal - level) / adjust_time [widget/day]
const goal = 10 [widget]
const adjust_time = 5 [day]
"""


@pytest.fixture(scope="session")
def reference_source() -> str:
    return REFERENCE_PATH.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def reference_model(reference_source):
    return parse_model(reference_source, name="supply_demand")


@pytest.fixture(scope="session")
def reference_compiled(reference_model):
    return compile_model(reference_model)


@pytest.fixture(scope="session")
def default_run(reference_compiled):
    """Shifted reference run at the default spec (euler, dt=0.0625)."""
    return simulate(reference_compiled, RunSpec())


@pytest.fixture(scope="session")
def noshift_run(reference_compiled):
    return simulate(reference_compiled, RunSpec(overrides={"Shift_Height": 0.0}))


@pytest.fixture(scope="session")
def fine_euler_run(reference_compiled):
    """Fine-step Euler run used for oracle tracking and method agreement."""
    return simulate(reference_compiled, RunSpec(dt=0.001))


@pytest.fixture(scope="session")
def oracle_price():
    """Independent high-accuracy trajectory: RK4 at dt=1e-3, sampled at 0.25."""
    from . import oracle

    return oracle.run("rk4", dt=0.001)
