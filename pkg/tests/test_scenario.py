import json

import numpy as np
import pytest

from qjplab.errors import ParseError, ValidationError
from qjplab.scenario import (
    CMScenario,
    UMScenario,
    build_operator,
    build_state,
    parse_complex,
    parse_scenario,
)

MINIMAL_UM = {"kind": "um", "system": {"A": "Z", "phi": "+"}, "sweep": {"g": [0, 1, 2]}}


def issues_of(raw):
    with pytest.raises(ValidationError) as info:
        parse_scenario(json.dumps(raw))
    return info.value.issues


def test_minimal_um_is_valid():
    sc = parse_scenario(json.dumps(MINIMAL_UM))
    assert isinstance(sc, UMScenario)
    assert sc.meter.n_points == 1024 and sc.meter.h == 1.0
    assert sc.sweep.g_values() == [0.0, 1.0, 2.0]


def test_range_sweep():
    raw = dict(MINIMAL_UM, sweep={"g": {"start": -1, "stop": 1, "num": 5}})
    assert parse_scenario(json.dumps(raw)).sweep.g_values() == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_dimension_mismatch_names_field():
    raw = dict(MINIMAL_UM, system={"A": "Z", "phi": [1, 0, 0]})
    paths = [p for p, _ in issues_of(raw)]
    assert paths == ["system.phi"]


def test_unknown_key_is_rejected():
    raw = dict(MINIMAL_UM, alpha_range=[0, 1])
    paths = [p for p, _ in issues_of(raw)]
    assert "alpha_range" in paths


def test_unknown_kind():
    assert [p for p, _ in issues_of({"kind": "bogus"})] == ["kind"]


def test_malformed_json_reports_position():
    with pytest.raises(ParseError) as info:
        parse_scenario('{\n  "kind": "um",\n  "system": }')
    assert info.value.line == 3
    assert info.value.column == 13


def test_non_hermitian_operator_rejected():
    raw = dict(MINIMAL_UM, system={"A": [[0, 1], [0, 0]], "phi": "0"})
    assert [p for p, _ in issues_of(raw)] == ["system.A"]


def test_aliasing_reach_rejected():
    raw = dict(MINIMAL_UM, sweep={"g": [30.0]})
    assert [p for p, _ in issues_of(raw)] == ["sweep.g"]


def test_cm_needs_conditioning_target():
    raw = {"kind": "cm", "system": {"A": "Z", "phi": "+"}, "sweep": {"g": [1.0]}}
    assert [p for p, _ in issues_of(raw)] == ["system.B"]
    raw["system"]["phi_f"] = "+i"
    assert isinstance(parse_scenario(json.dumps(raw)), CMScenario)


def test_geometry_alpha_must_be_real_unit():
    raw = {"kind": "geometry", "system": {"A": "Z", "B": "X", "phi": "0"}, "sweep": {"alpha": [0.5, "i", 2]}}
    assert [p for p, _ in issues_of(raw)] == ["sweep.alpha.1", "sweep.alpha.2"]


def test_parse_complex_forms():
    assert parse_complex("i") == 1j
    assert parse_complex("-0.5+2j") == -0.5 + 2j
    assert parse_complex([1.0, -2.0]) == 1 - 2j
    assert parse_complex(3) == 3
    with pytest.raises(ValueError):
        parse_complex("alpha")


def test_build_named_and_random():
    sc = parse_scenario(json.dumps({
        "kind": "qjp",
        "system": {"A": {"random": "hermitian", "dim": 3, "scale": 2.0}, "B": [[1, 0, 0], [0, 2, 0], [0, 0, 3]],
                   "phi": {"random": "state", "dim": 3}},
        "sweep": {"alpha": [0]},
    }))
    rng = np.random.default_rng(0)
    A = build_operator(sc.system.A, rng)
    assert np.allclose(A, A.conj().T)
    assert np.linalg.norm(A, 2) == pytest.approx(2.0)
    assert np.linalg.norm(build_state(sc.system.phi, rng).amplitudes) == pytest.approx(1.0)
    assert np.allclose(build_state("+i", rng).amplitudes, np.array([1, 1j]) / np.sqrt(2))
