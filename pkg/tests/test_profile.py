import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kronmimo import profile as prof
from kronmimo.errors import InvalidParams, ProfileError, RejectNegativeEntry, RejectZeroTrace, UnknownKind
from kronmimo.profile import VarianceProfile, family_trace, generate, validate


def test_identity_profile_is_valid():
    p = validate(VarianceProfile([1, 1], [1, 1]))
    assert p.c == 1.0
    assert p.big_n == 2 and p.n == 2


def test_negative_entry_rejected():
    with pytest.raises(RejectNegativeEntry):
        validate(VarianceProfile([1, -0.5], [1, 1]))
    with pytest.raises(RejectNegativeEntry):
        validate(VarianceProfile([1, 1], [1, np.nan]))


def test_zero_trace_rejected():
    with pytest.raises(RejectZeroTrace):
        validate(VarianceProfile([0, 0], [1]))
    with pytest.raises(RejectZeroTrace):
        validate(VarianceProfile([1], [0.0, 0.0]))


def test_declared_max_enforced():
    with pytest.raises(ProfileError):
        validate(VarianceProfile([1, 3], [1], d_max=2.0))
    p = validate(VarianceProfile([1, 1.5], [1], d_max=2.0))
    assert p.bound_d == 2.0
    assert p.bound_d_tilde == 1.0


def test_zero_entries_allowed():
    p = validate(VarianceProfile([0, 2], [1, 0, 1]))
    assert p.trace_d == pytest.approx(2 / 3)


def test_profile_is_immutable():
    p = validate(VarianceProfile([1, 2], [1]))
    with pytest.raises(ValueError):
        p.d[0] = 5.0


def test_generate_examples():
    p = generate("constant", 4, 4, (1,))
    assert p.d.tolist() == [1, 1, 1, 1] and p.d_tilde.tolist() == [1, 1, 1, 1]
    assert generate("linear-ramp", 3, 2, (0.5, 1.5)).d.tolist() == [0.5, 1.0, 1.5]
    assert generate("exponential-decay", 2, 3, (0.5,)).d_tilde.tolist() == [1, 0.5, 0.25]


def test_generate_errors():
    with pytest.raises(UnknownKind):
        generate("spiral", 2, 2, (1,))
    with pytest.raises(InvalidParams):
        generate("exponential-decay", 2, 2, (0.0,))
    with pytest.raises(InvalidParams):
        generate("linear-ramp", 2, 2, (1.0,))
    with pytest.raises(InvalidParams):
        generate("constant", 0, 2, (1.0,))


def test_parse_generator():
    assert prof.parse_generator("linear-ramp:0.5,1.5") == ("linear-ramp", (0.5, 1.5))
    with pytest.raises(UnknownKind):
        prof.parse_generator("nope:1")
    with pytest.raises(InvalidParams):
        prof.parse_generator("constant:x")


kinds = st.sampled_from(
    [
        ("constant", st.tuples(st.floats(0.01, 5))),
        ("linear-ramp", st.tuples(st.floats(0.01, 5), st.floats(0.01, 5))),
        ("exponential-decay", st.tuples(st.floats(0.05, 1.5))),
    ]
)


@given(data=st.data(), big_n=st.integers(1, 60), n=st.integers(1, 60))
def test_generated_profiles_validate_and_match_closed_form_traces(data, big_n, n):
    kind, params_st = data.draw(kinds)
    params = data.draw(params_st)
    p = validate(generate(kind, big_n, n, params))
    if kind == "linear-ramp" and big_n == 1:
        expected_d = 0.5 * sum(params)
    else:
        expected_d = family_trace(kind, big_n, params)
    if kind == "linear-ramp" and n == 1:
        expected_dt = 0.5 * sum(params)
    else:
        expected_dt = family_trace(kind, n, params)
    assert p.trace_d == pytest.approx(expected_d / n, rel=1e-12, abs=1e-12)
    assert p.trace_d_tilde == pytest.approx(expected_dt / n, rel=1e-12, abs=1e-12)


def test_json_round_trip(tmp_path):
    p = VarianceProfile([0.1, 1 / 3, 2.0], [np.pi / 4, 1e-7], d_max=2.5)
    path = tmp_path / "p.json"
    prof.save(p, path)
    doc = json.loads(path.read_text())
    assert doc["N"] == 3 and doc["n"] == 2
    assert prof.load(path) == p


def test_json_dimension_mismatch(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"n": 3, "N": 1, "d": [1.0], "d_tilde": [1.0]}))
    with pytest.raises(ProfileError):
        prof.load(path)
    path.write_text(json.dumps({"n": 1, "d": [1.0]}))
    with pytest.raises(ProfileError):
        prof.load(path)
