import numpy as np
import pytest

from vqf.errors import BadShape, EvenInput, InfeasibleInstance, LengthMismatch, TooSmall
from vqf.validation import (check_params, check_positive_int, check_seed, check_target, check_targets,
                            parse_layer_policy, resolve_layers)


def test_check_target():
    assert check_target(91) == 91
    assert check_target(np.int32(25)) == 25
    assert check_target(35.0) == 35
    with pytest.raises(EvenInput):
        check_target(90)
    with pytest.raises(TooSmall):
        check_target(7)
    with pytest.raises(InfeasibleInstance):
        check_target(4)
    for bad in (True, 9.5, "91", None):
        with pytest.raises(TypeError):
            check_target(bad)


def test_check_targets_shapes():
    assert check_targets(91).tolist() == [91]
    assert check_targets([25, 49]).tolist() == [25, 49]
    assert check_targets(np.array([[25], [49]])).tolist() == [25, 49]
    with pytest.raises(BadShape):
        check_targets(np.ones((2, 2), dtype=int))
    with pytest.raises(BadShape):
        check_targets([])


def test_int_checks():
    assert check_positive_int("k", 3) == 3
    assert check_seed(0) == 0
    with pytest.raises(ValueError):
        check_positive_int("k", 0)
    with pytest.raises(ValueError):
        check_seed(-1)
    with pytest.raises(TypeError):
        check_positive_int("k", 2.0)


def test_check_params():
    assert check_params([[1, 2], [3, 4]], 4).tolist() == [1, 2, 3, 4]
    with pytest.raises(LengthMismatch):
        check_params([1, 2], 3)
    with pytest.raises(ValueError):
        check_params([1, np.nan], 2)


def test_layer_policies():
    assert resolve_layers("n", 7) == 7
    assert resolve_layers("N", 7) == 7
    assert resolve_layers(3, 7) == 3
    assert resolve_layers("4", 7) == 4
    assert parse_layer_policy("1:5") == [1, 2, 3, 4, 5]
    assert parse_layer_policy("0, 3 ,n") == [0, 3, "n"]
    assert parse_layer_policy("n") == ["n"]
    for bad in ("", "5:1", "x", "-1"):
        with pytest.raises(ValueError):
            parse_layer_policy(bad)
