"""Unit algebra, inference rules, and the mutation-rejection property."""

import random

import pytest

from stockflow.core import Bin, Element, Kind, ModelDefinition, Name, Num
from stockflow.errors import (
    AmbiguousTimeUnitError,
    NonTimeConstantError,
    UnitMismatchError,
)
from stockflow.language import parse_model
from stockflow.units import (
    DIMENSIONLESS,
    UnitExpr,
    check_units,
    parse_unit_expr,
    time_unit,
)
from stockflow.units import _infer  # inference internals exercised directly


def test_unitexpr_algebra():
    price = parse_unit_expr("dollar/unit")
    per_day = parse_unit_expr("dollar/unit/day")
    day = parse_unit_expr("day")
    assert per_day * day == price
    assert price / per_day == day
    assert price / price == DIMENSIONLESS
    assert (price * DIMENSIONLESS) == price
    assert UnitExpr({"day": 0}) == DIMENSIONLESS


@pytest.mark.parametrize("text", [
    "dollar/unit", "unit/day", "day", "dimensionless",
    "dollar/unit/day", "dollar*unit^-2", "widget^2/day^3", "day^-1",
])
def test_unit_text_round_trip(text):
    parsed = parse_unit_expr(text)
    assert parse_unit_expr(str(parsed)) == parsed


def test_single_symbol():
    assert parse_unit_expr("day").single_symbol() == "day"
    assert parse_unit_expr("day^2").single_symbol() is None
    assert parse_unit_expr("dollar/unit").single_symbol() is None
    assert DIMENSIONLESS.single_symbol() is None


def test_reference_model_units_pass(reference_model):
    report = check_units(reference_model)
    assert report.time_symbol == "day"
    by_element = {e.element: e.inferred for e in report.entries}
    assert by_element["Price_Change"] == parse_unit_expr("dollar/unit/day")
    assert by_element["Supply_Demand_Ratio"] == DIMENSIONLESS
    assert len(report.entries) == 13  # every non-table element


def test_incompatible_addition_rejected(reference_source):
    source = reference_source + "aux Bad = Price + Quantity_Supplied [dollar/unit]\n"
    with pytest.raises(UnitMismatchError) as excinfo:
        check_units(parse_model(source))
    assert excinfo.value.element == "Bad"
    assert excinfo.value.expected == parse_unit_expr("dollar/unit")
    assert excinfo.value.inferred == parse_unit_expr("unit/day")


def test_literal_added_to_dimensioned_term_rejected(reference_source):
    source = reference_source + "aux Bad = Price + 1 [dollar/unit]\n"
    with pytest.raises(UnitMismatchError) as excinfo:
        check_units(parse_model(source))
    assert excinfo.value.element == "Bad"


def test_time_unit_of_reference(reference_model):
    assert time_unit(reference_model) == "day"


def test_time_unit_forced_by_stock_flow_ratio():
    model = parse_model(
        "stock cash = integ(income, 0) [dollar]\n"
        "flow income = 5 [dollar/week]\n"
    )
    assert time_unit(model) == "week"


def test_mixed_time_units_ambiguous():
    model = parse_model(
        "stock cash = integ(income, 0) [dollar]\n"
        "flow income = 5 [dollar/week]\n"
        "stock grain = integ(harvest, 0) [bushel]\n"
        "flow harvest = 2 [bushel/day]\n"
    )
    with pytest.raises(AmbiguousTimeUnitError):
        time_unit(model)


def test_time_unit_requires_a_stock():
    with pytest.raises(AmbiguousTimeUnitError):
        time_unit(parse_model("aux a = 1 [day]"))


def test_smooth_delay_must_be_time(reference_source):
    mutated = reference_source.replace(
        "const Time_for_Producers_to_React_to_Price_Changes = 5 [day]",
        "const Time_for_Producers_to_React_to_Price_Changes = 5 [dollar]",
    )
    with pytest.raises(NonTimeConstantError) as excinfo:
        check_units(parse_model(mutated))
    assert excinfo.value.builtin == "smooth"
    assert excinfo.value.element == "Perceived_Price_for_Supply"


def test_step_start_must_be_time(reference_source):
    mutated = reference_source.replace(
        "const Shift_Start = 10 [day]",
        "const Shift_Start = 10 [dollar]",
    )
    with pytest.raises(NonTimeConstantError) as excinfo:
        check_units(parse_model(mutated))
    assert excinfo.value.builtin == "step"
    assert excinfo.value.element == "Shift_in_Demand"


def test_step_height_constant_must_match_declaration(reference_source):
    mutated = reference_source.replace(
        "const Shift_Height = 10 [unit/day]",
        "const Shift_Height = 10 [dollar]",
    )
    with pytest.raises(UnitMismatchError) as excinfo:
        check_units(parse_model(mutated))
    assert excinfo.value.element == "Shift_in_Demand"


def test_lookup_argument_must_match_domain(reference_source):
    mutated = reference_source.replace(
        "table Supply_Schedule bounds (0,0)-(50,100) points (0,0) (50,100) "
        "domain [dollar/unit] range [unit/day]",
        "table Supply_Schedule bounds (0,0)-(50,100) points (0,0) (50,100) "
        "domain [unit] range [unit/day]",
    )
    with pytest.raises(UnitMismatchError) as excinfo:
        check_units(parse_model(mutated))
    assert excinfo.value.element == "Quantity_Supplied"


def test_stock_initial_expression_units_checked():
    source = (
        "stock cash = integ(income, seed) [dollar]\n"
        "flow income = 5 [dollar/week]\n"
        "const seed = 3 [pebble]\n"
    )
    with pytest.raises(UnitMismatchError) as excinfo:
        check_units(parse_model(source))
    assert excinfo.value.element == "cash"


_ENV_UNITS = ["day", "dollar/unit", "unit/day", "dimensionless", "widget^2"]


def _random_expr(rng, names, depth=3):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Num(float(rng.randint(1, 9)))
        return Name(rng.choice(names))
    op = rng.choice("*/**")  # bias toward products; +/- rarely type-check
    if rng.random() < 0.15:
        op = rng.choice("+-")
    return Bin(op, _random_expr(rng, names, depth - 1), _random_expr(rng, names, depth - 1))


def _env_model(rng, names):
    elements = [
        Element(n, Kind.CONST, parse_unit_expr(rng.choice(_ENV_UNITS)), value=1.0)
        for n in names
    ]
    return ModelDefinition("env", elements)


def test_inference_is_compositional():
    """Inferring a subexpression, then substituting a reference with its
    units, gives the same result as inferring the whole expression."""
    rng = random.Random(7)
    names = ["a", "b", "c", "d"]
    checked = 0
    for _ in range(60):
        model = _env_model(rng, names)
        host = Element("host", Kind.AUX, DIMENSIONLESS, expression=Num(0.0))
        expr = Bin(rng.choice("+-*/"),
                   _random_expr(rng, names), _random_expr(rng, names))
        try:
            sub_units = _infer(expr.left, model, host, "day")
        except UnitMismatchError:
            continue
        stand_in = Element("sub", Kind.CONST, sub_units, value=1.0)
        extended = ModelDefinition("env2", model.elements + [stand_in])
        replaced = Bin(expr.op, Name("sub"), expr.right)
        try:
            whole = _infer(expr, model, host, "day")
        except UnitMismatchError:
            with pytest.raises(UnitMismatchError):
                _infer(replaced, extended, host, "day")
            continue
        assert _infer(replaced, extended, host, "day") == whole
        checked += 1
    assert checked >= 15


def test_dimensionless_literals_never_change_products():
    rng = random.Random(11)
    names = ["a", "b"]
    for _ in range(30):
        model = _env_model(rng, names)
        host = Element("host", Kind.AUX, DIMENSIONLESS, expression=Num(0.0))
        base = _random_expr(rng, names, depth=2)
        try:
            before = _infer(base, model, host, "day")
        except UnitMismatchError:
            continue
        wrapped = Bin("*", Num(float(rng.randint(1, 99))), base)
        assert _infer(wrapped, model, host, "day") == before
