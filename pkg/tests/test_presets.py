"""Preset groups, spec serialization round-trips, file loading."""

import json
from fractions import Fraction

import pytest

from carnot.presets import (
    algebra_from_spec,
    algebra_preset,
    algebra_to_spec,
    load_group,
)
from carnot.scalars import QSqrt2

F = Fraction


def test_heisenberg_structure():
    alg = algebra_preset("heisenberg")
    assert alg.layer_dims == (2, 1)
    b = alg.bracket([F(1), F(0), F(0)], [F(0), F(1), F(0)])
    assert list(b) == [F(0), F(0), F(1)]


def test_engel_structure():
    alg = algebra_preset("engel")
    assert alg.layer_dims == (2, 1, 1)
    assert alg.step == 3
    e1 = [F(1), F(0), F(0), F(0)]
    e3 = [F(0), F(0), F(1), F(0)]
    assert list(alg.bracket(e1, e3)) == [F(0), F(0), F(0), F(1)]


def test_abelian_all_brackets_vanish():
    alg = algebra_preset("abelian:4")
    assert alg.layer_dims == (4,)
    g = [F(1), F(2), F(3), F(4)]
    h = [F(5), F(-1), F(0), F(2)]
    assert list(alg.multiply_exact(g, h)) == [x + y for x, y in zip(g, h)]


def test_example6_default_parameters():
    alg = algebra_preset("example6")
    assert alg.step == 6
    assert alg.layer_dims == (2, 1, 1, 1, 1, 1)


def test_example6_mixed_parameters_rejected():
    # the Jacobi completion forces all four structure scalars equal
    with pytest.raises(ValueError, match="equal"):
        algebra_preset("example6:2,2,2,sqrt2")


def test_example6_all_sqrt2_parameters():
    alg = algebra_preset("example6:sqrt2,sqrt2,sqrt2,sqrt2")
    assert alg.step == 6
    spec = algebra_to_spec(alg)
    clone = algebra_from_spec(spec)
    assert clone.layer_dims == alg.layer_dims
    assert clone._table == alg._table


def test_unknown_preset_raises():
    with pytest.raises(ValueError, match="heisenberg"):
        algebra_preset("nope")


@pytest.mark.parametrize("name", ["heisenberg", "engel", "abelian:2", "example6"])
def test_spec_round_trip(name):
    alg = algebra_preset(name)
    spec = algebra_to_spec(alg)
    clone = algebra_from_spec(json.loads(json.dumps(spec)))
    assert clone.layer_dims == alg.layer_dims
    assert clone.step == alg.step
    assert clone._table == alg._table


def test_spec_step_mismatch_raises():
    spec = algebra_to_spec(algebra_preset("heisenberg"))
    spec["step"] = 3
    with pytest.raises(ValueError, match="step"):
        algebra_from_spec(spec)


def test_load_group_from_file(tmp_path):
    spec = algebra_to_spec(algebra_preset("engel"))
    path = tmp_path / "group.json"
    path.write_text(json.dumps(spec))
    alg = load_group(str(path))
    assert alg.layer_dims == (2, 1, 1)
    assert alg._table == algebra_preset("engel")._table


def test_load_group_preset_name():
    assert load_group("heisenberg").layer_dims == (2, 1)
