import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cmdbell.model import (
    ALL_PAIRS,
    NON_REFERENCE_PAIRS,
    STRATEGIES,
    Distribution,
    HVModel,
    InvalidModelError,
    ModelError,
    ModelFormatError,
    Setting,
    SettingPair,
    Strategy,
    XiVector,
    distribution_for,
    dumps_model,
    loads_model,
    model_from_dict,
    model_to_dict,
    outcome,
    validate,
    xi_from_distributions,
)
from cmdbell.constructors import random_distributions_model, signaling_cmd_witness, uniform_mi_model

from conftest import SIGN_TUPLES

F = Fraction


def test_outcome_reads_component():
    assert outcome(Strategy(1, -1, 1, -1), Setting.A2) == -1
    for s in Setting:
        assert outcome(Strategy(1, 1, 1, 1), s) == 1


def test_index_5_decodes():
    lam = Strategy.from_index(5)
    assert lam.signs() == (1, -1, 1, -1)
    assert outcome(lam, Setting.B2) == -1


def test_encoding_bijection():
    assert [s.signs() for s in STRATEGIES] == SIGN_TUPLES
    for k in range(16):
        assert Strategy.from_index(k).index == k
        assert Strategy(*Strategy.from_index(k).signs()) == STRATEGIES[k]


def test_settings_and_pairs_are_total():
    assert len(set(Setting)) == 4
    assert len(ALL_PAIRS) == 4
    assert {(p.i, p.j) for p in ALL_PAIRS} == {(1, 1), (1, 2), (2, 1), (2, 2)}
    assert SettingPair.parse("a2,b1") is SettingPair.A2B1
    with pytest.raises(ValueError):
        SettingPair.parse("A3B1")


def test_strategy_rejects_non_sign():
    with pytest.raises(ValueError):
        Strategy(1, 0, 1, 1)


def test_distribution_checks():
    with pytest.raises(ModelError):
        Distribution([F(1, 15)] * 16)
    with pytest.raises(ModelError):
        Distribution([F(1, 8)] * 8)
    with pytest.raises(ModelError):
        Distribution([F(1, 8)] * 8 + [F(-1, 16)] + [F(1, 56)] * 7)
    # float mode tolerates rounding at 1e-12
    Distribution([0.1] * 10 + [0.0] * 6)


def test_zero_xi_gives_reference_everywhere():
    m = uniform_mi_model()
    for pair in ALL_PAIRS:
        assert distribution_for(m, pair) == m.reference


def test_witness_distribution_for(sixteenth):
    m = signaling_cmd_witness(sixteenth)
    expected = [F(1, 8) if lam[0] == 1 else 0 for lam in SIGN_TUPLES]
    assert list(distribution_for(m, SettingPair.A1B2).p) == expected
    assert list(distribution_for(m, SettingPair.A1B1).p) == [sixteenth] * 16


def test_distribution_for_reports_location():
    m = signaling_cmd_witness(F(1, 16))
    bad = HVModel(m.reference, m.xi.scale(2))
    with pytest.raises(InvalidModelError) as info:
        distribution_for(bad, SettingPair.A1B2)
    assert info.value.pair is SettingPair.A1B2
    assert SIGN_TUPLES[info.value.index][0] == -1


def test_xi_from_uniform_copies_is_zero():
    u = Distribution.uniform()
    m = xi_from_distributions(u, u, u, u)
    assert m.xi == XiVector.zero()


def test_xi_from_witness_distribution(sixteenth):
    u = Distribution.uniform()
    d12 = Distribution([F(1, 8) if lam[0] == 1 else 0 for lam in SIGN_TUPLES])
    m = xi_from_distributions(u, d12, u, u)
    assert m == signaling_cmd_witness(sixteenth)
    assert m.xi.block(SettingPair.A1B2) == tuple(sixteenth * lam[0] for lam in SIGN_TUPLES)


def test_xi_from_distributions_rejects_unnormalized():
    u = Distribution.uniform()
    with pytest.raises(ModelError):
        xi_from_distributions(u, [F(1, 8)] * 16, u, u)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 3.0))
@settings(max_examples=50, deadline=None)
def test_round_trip_through_distributions(seed, conc):
    m = random_distributions_model(seed, conc)
    again = xi_from_distributions(*(distribution_for(m, p) for p in ALL_PAIRS))
    assert again.reference == m.reference
    assert max(abs(a - b) for a, b in zip(again.xi.flat(), m.xi.flat())) <= 1e-12


def test_round_trip_exact():
    ds = [Distribution([F(k + 1, 136) for k in range(16)]), Distribution.point(3),
          Distribution.uniform(), Distribution([F(1, 2)] + [F(1, 30)] * 15)]
    m = xi_from_distributions(*ds)
    assert xi_from_distributions(*(distribution_for(m, p) for p in ALL_PAIRS)) == m


def test_validate_examples():
    assert validate(uniform_mi_model()) == []
    w = signaling_cmd_witness(F(1, 16))
    wide = HVModel(w.reference, w.xi.scale(2))  # epsilon = 1/8
    report = validate(wide)
    assert {v.kind for v in report} == {"negative-probability"}
    assert {v.pair for v in report} == {SettingPair.A1B2}
    assert sorted(v.index for v in report) == [k for k, lam in enumerate(SIGN_TUPLES) if lam[0] == -1]
    assert all(v.value == F(-1, 16) for v in report)


def test_validate_block_sum_violation():
    m = random_distributions_model(7)
    blocks = list(m.xi.blocks)
    blocks[2] = tuple(1.1 * v + (0.01 if k == 0 else 0.0) for k, v in enumerate(blocks[2]))
    report = validate(HVModel(m.reference, XiVector(blocks)))
    assert any(v.kind == "block-sum" and v.pair is SettingPair.A2B2 for v in report)


def test_block_scaled_by_1_1_breaks_sum():
    ref = Distribution.uniform()
    block = tuple(F(1, 32) if k == 0 else (-F(1, 32) if k == 1 else 0) for k in range(16))
    xi = XiVector([block, (0,) * 16, (0,) * 16])
    assert validate(HVModel(ref, xi)) == []
    # scaling one entry pattern by 1.1 asymmetrically
    scaled = XiVector([tuple(v * F(11, 10) if v > 0 else v for v in block), (0,) * 16, (0,) * 16])
    kinds = [v.kind for v in validate(HVModel(ref, scaled))]
    assert kinds == ["block-sum"]


# -- JSON -----------------------------------------------------------------


def test_json_shape():
    doc = model_to_dict(signaling_cmd_witness())
    assert set(doc) == {"reference", "xi"}
    assert set(doc["xi"]) == {"A1B2", "A2B1", "A2B2"}
    assert all(len(v) == 16 for v in doc["xi"].values())
    assert doc["xi"]["A1B2"][0] == 0.0625


def test_json_float_round_trip_bit_exact():
    m = random_distributions_model(11)
    text = dumps_model(m)
    back = loads_model(text)
    assert back == m
    assert all(math.copysign(1, a) == math.copysign(1, b) for a, b in zip(back.xi.flat(), m.xi.flat()))
    assert dumps_model(back) == text


def test_json_exact_round_trip():
    m = signaling_cmd_witness(F(1, 48))
    assert loads_model(dumps_model(m, exact=True)) == m
    assert isinstance(loads_model(dumps_model(m, exact=True)).xi.blocks[0][0], Fraction)


@pytest.mark.parametrize("mutate", [
    lambda d: d["reference"].pop(),
    lambda d: d["xi"]["A2B1"].append(0),
    lambda d: d["xi"].pop("A2B2"),
    lambda d: d.update(xi=[0] * 48),
    lambda d: d["xi"].update(A1B1=[0] * 16),
    lambda d: d["xi"]["A1B2"].__setitem__(3, "abc"),
    lambda d: d["xi"]["A1B2"].__setitem__(3, True),
])
def test_parser_rejects_shapes(mutate):
    doc = model_to_dict(uniform_mi_model())
    mutate(doc)
    with pytest.raises(ModelFormatError):
        model_from_dict(doc)


@pytest.mark.parametrize("token", ["NaN", "Infinity", "-Infinity"])
def test_parser_rejects_non_finite(token):
    text = json.dumps(model_to_dict(uniform_mi_model())).replace("0.0625", token, 1)
    with pytest.raises(ModelFormatError):
        loads_model(text)


def test_parser_rejects_truncated():
    with pytest.raises(ModelFormatError):
        loads_model('{"reference": [0.0625, 0.0625')


def test_parser_unnormalized_reference_is_model_error():
    doc = model_to_dict(uniform_mi_model())
    doc["reference"][0] = 0.5
    with pytest.raises(ModelError):
        model_from_dict(doc)


def test_non_reference_pair_order():
    assert [p.name for p in NON_REFERENCE_PAIRS] == ["A1B2", "A2B1", "A2B2"]
