"""Parser and renderer behavior, including source round-trips."""

import pytest

from stockflow.core import Bin, Kind, Lookup, Name, Num, Smooth, Step
from stockflow.errors import (
    BadTableError,
    BadUnitsError,
    DuplicateNameError,
    ParseError,
    UnknownReferenceError,
)
from stockflow.language import parse_model, render_model
from stockflow.units import UnitExpr, parse_unit_expr

from .conftest import PLAIN_MARKET_SOURCE
from .genmodels import random_model


def test_const_line():
    model = parse_model("const Time_to_Adjust_Price = 1 [day]")
    el = model.by_name["Time_to_Adjust_Price"]
    assert el.kind is Kind.CONST
    assert el.value == 1.0
    assert el.units == UnitExpr({"day": 1})


def test_table_line_points_and_ignored_bounds():
    model = parse_model(
        "table Demand_Schedule bounds (0,0)-(50,100) points (0,100) (50,0) "
        "domain [dollar/unit] range [unit/day]"
    )
    el = model.by_name["Demand_Schedule"]
    assert el.points == ((0.0, 100.0), (50.0, 0.0))
    assert el.bounds == ((0.0, 0.0), (50.0, 100.0))
    assert el.domain_units == parse_unit_expr("dollar/unit")
    assert el.units == parse_unit_expr("unit/day")


def test_unterminated_expression_reports_position():
    with pytest.raises(ParseError) as excinfo:
        parse_model("aux X = (1 +")
    assert excinfo.value.span.line == 1
    assert excinfo.value.span.column > 1


@pytest.mark.parametrize("source", [
    "aux = 1 [day]",
    "stock S = integ(1) [day]",
    "const C = [day]",
    "aux X 1 [day]",
    "table T bounds (0,0)-(1,1) points (0,0) domain [day]",
    "aux X = 1 + [day]",
    "aux X = lookup(3, 4) [day]",
    "widget W = 1 [day]",
])
def test_malformed_lines_raise_with_span(source):
    with pytest.raises(ParseError) as excinfo:
        parse_model(source)
    span = excinfo.value.span
    assert span.line == 1
    assert 1 <= span.column <= len(source) + 1


def test_expression_shapes():
    model = parse_model(
        "aux a = 1 + 2 * 3 [day]\n"
        "aux b = -a / (a - 2) [dimensionless]\n"
        "const c = 4 [day]\n"
        "aux d = smooth(a + 1, c) [day]\n"
        "aux e = step(-2.5, c) [day]\n"
        "table t bounds (0,0)-(1,1) points (0,0) (1,1) domain [day] range [day]\n"
        "aux f = lookup(t, a) [day]\n"
    )
    a = model.by_name["a"].expression
    assert a == Bin("+", Num(1.0), Bin("*", Num(2.0), Num(3.0)))
    d = model.by_name["d"].expression
    assert d == Smooth(Bin("+", Name("a"), Num(1.0)), Name("c"))
    e = model.by_name["e"].expression
    assert e == Step(Num(-2.5), Name("c"))
    f = model.by_name["f"].expression
    assert f == Lookup("t", Name("a"))


def test_comments_and_blank_lines_ignored():
    model = parse_model("\n# header\n\nconst c = 1 [day]  # trailing words\n\n")
    assert [el.name for el in model.elements] == ["c"]


def test_range_annotation_parsed_and_rendered():
    model = parse_model("const c = 10 [day] # range 0..20")
    assert model.by_name["c"].slider_range == (0.0, 20.0)
    assert "# range 0..20" in render_model(model)
    again = parse_model(render_model(model))
    assert again == model


def test_duplicate_name_has_span():
    with pytest.raises(DuplicateNameError) as excinfo:
        parse_model("const c = 1 [day]\nconst c = 2 [day]")
    assert excinfo.value.span.line == 2


def test_unknown_reference():
    with pytest.raises(UnknownReferenceError) as excinfo:
        parse_model("aux a = ghost + 1 [day]")
    assert excinfo.value.name == "ghost"


def test_non_increasing_table_rejected():
    with pytest.raises(BadTableError):
        parse_model("table t bounds (0,0)-(1,1) points (5,0) (5,1) domain [day] range [day]")


def test_single_point_table_rejected():
    with pytest.raises(BadTableError):
        parse_model("table t bounds (0,0)-(1,1) points (5,0) domain [day] range [day]")


@pytest.mark.parametrize("bracket", ["[]", "[day//unit]", "[3day]", "[day^x]", "[day*]"])
def test_bad_units_bracket(bracket):
    with pytest.raises(BadUnitsError):
        parse_model(f"const c = 1 {bracket}")


def test_reference_round_trip(reference_source, reference_model):
    rendered = render_model(reference_model)
    assert parse_model(rendered, name="supply_demand") == reference_model
    # parse . render . parse == parse, on the rendered text as well
    assert parse_model(render_model(parse_model(rendered, name="supply_demand")),
                       name="supply_demand") == reference_model


def test_empty_model_round_trip():
    model = parse_model("")
    assert model.elements == []
    assert render_model(model) == ""
    assert parse_model(render_model(model)) == model


def test_plain_market_model_renders_thirteen_lines():
    model = parse_model(PLAIN_MARKET_SOURCE)
    rendered = render_model(model)
    lines = [line for line in rendered.splitlines() if line.strip()]
    assert len(lines) == 13


def test_parse_is_deterministic(reference_source):
    first = parse_model(reference_source)
    second = parse_model(reference_source)
    assert first == second


@pytest.mark.parametrize("seed", range(40))
def test_generated_models_round_trip(seed):
    model = random_model(seed)
    rendered = render_model(model)
    reparsed = parse_model(rendered, name=model.name)
    assert reparsed == model
    assert render_model(reparsed) == rendered
