import json

import pytest

from rmoore import fixture_path, specfmt
from rmoore.core import Machine, Symbol
from rmoore.errors import SpecError, UnresolvedNameError
from rmoore.examples import make_counter
from rmoore.product import ProductDef, recursion_eval

FIXTURES = ["stack.json", "stack_corrupt.json", "ripple.json", "network.json", "counters.json"]


def text_of(name):
    return fixture_path(name).read_text(encoding="utf-8")


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_roundtrip_is_byte_exact(name):
    text = text_of(name)
    assert specfmt.render(specfmt.parse(text)) == text


def test_empty_document():
    doc = specfmt.parse("")
    assert doc.targets() == [] and specfmt.compile_document(doc) == {}


def test_table_machine_compiles():
    doc = specfmt.parse(text_of("counters.json"))
    objs = specfmt.compile_document(doc)
    t3 = objs["t3"]
    assert isinstance(t3, Machine) and t3.state_name(1) == "one"
    assert t3.output(t3.run(0, ["tick"] * 4)) is Symbol("1")


def test_products_and_references():
    _, objs = specfmt.load(fixture_path("ripple.json"))
    assert isinstance(objs["ripple3"], ProductDef)
    assert objs["ripple3"].reference == "t8"
    assert recursion_eval(objs["ripple3"], ["tick"] * 5) is Symbol("5")


def test_machine_to_spec_roundtrip():
    spec = specfmt.machine_to_spec(make_counter(3))
    doc = specfmt.SpecDocument(machines={"c": spec})
    text = specfmt.render(doc)
    again = specfmt.parse(text)
    assert specfmt.render(again) == text
    assert specfmt.compile_document(again)["c"].n_states == 3


def errors_of(text):
    with pytest.raises(SpecError) as info:
        specfmt.parse(text)
    return info.value.errors


def test_syntax_error_reports_line_and_column():
    (where, msg), = errors_of('{\n  "specfmt_version": 1,\n  oops\n}')
    assert where == "3:3" and "syntax error" in msg


def test_version_required():
    assert errors_of('{"machines": {}}')[0][0] == "specfmt_version"
    assert errors_of('{"specfmt_version": 2}')[0][0] == "specfmt_version"


def test_all_problems_collected():
    doc = {
        "specfmt_version": 1,
        "machines": {
            "a": {"alphabet": ["x"], "delta": "nope", "gamma": ["0"]},
            "b": {"alphabet": ["x"], "delta": [[0]], "gamma": ["0"], "colour": "red"},
        },
        "products": {"p": {"alphabet": ["x"], "factors": ["a"], "rules": [{"factor": ">i"}]}},
        "run": [{"word": "x"}],
    }
    where = [w for w, _ in errors_of(json.dumps(doc))]
    assert where == ["machines.a.delta", "machines.b", "products.p.rules[0]", "run[0]"]


def test_unresolved_names():
    base = {"specfmt_version": 1, "machines": {"t": {"builtin": "counter"}}}
    bad_factor = dict(base, products={"p": {"alphabet": ["tick"], "factors": ["ghost"]}})
    with pytest.raises(UnresolvedNameError) as info:
        specfmt.parse(json.dumps(bad_factor))
    assert info.value.name == "ghost"
    bad_alpha = dict(base, products={"p": {"alphabet": "letters", "factors": ["t"]}})
    with pytest.raises(UnresolvedNameError):
        specfmt.parse(json.dumps(bad_alpha))
    bad_run = dict(base, run=[{"target": "q"}])
    with pytest.raises(UnresolvedNameError):
        specfmt.parse(json.dumps(bad_run))


def test_product_cycle_detected():
    doc = {
        "specfmt_version": 1,
        "products": {
            "p": {"alphabet": ["x"], "factors": ["q"]},
            "q": {"alphabet": ["x"], "factors": ["p"]},
        },
    }
    with pytest.raises(SpecError, match="cycle"):
        specfmt.parse(json.dumps(doc))


def test_table_shape_errors():
    doc = {"specfmt_version": 1, "machines": {"m": {"alphabet": ["x", "y"], "delta": [[0]], "gamma": ["0"]}}}
    with pytest.raises(SpecError) as info:
        specfmt.parse(json.dumps(doc))
    assert info.value.errors[0][0] == "machines.m.delta[0]"


def test_builtin_parameter_errors():
    doc = {"specfmt_version": 1, "machines": {"m": {"builtin": "counter", "params": {"n": 0}}}}
    with pytest.raises(SpecError):
        specfmt.parse(json.dumps(doc))


def test_long_lines_fold():
    text = text_of("network.json")
    assert max(len(line) for line in text.splitlines()) <= 100
    assert text.endswith("}\n")
