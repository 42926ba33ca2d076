"""Tests for DecayFn/GrowthFn construction, parsing and evaluation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from attractor_lab.certificates.functions import DecayFn, GrowthFn
from attractor_lab.errors import ConfigurationError


class TestDecayFn:
    """beta(t) and alpha(t)."""

    def test_exp_floor_values(self):
        beta = DecayFn.parse("exp:2,1,0.5")
        assert beta(0.0) == pytest.approx(2.5)
        assert beta(2.0) == pytest.approx(2 * np.exp(-2) + 0.5)
        assert beta.at_infinity == 0.5
        assert beta.horizon == float("inf")

    def test_constant(self):
        beta = DecayFn.parse("const:0.5")
        assert_allclose(beta(np.array([0.0, 1.0, 100.0])), 0.5)
        assert beta.at_zero == 0.5

    def test_table_interpolates_and_holds(self):
        beta = DecayFn.parse("table:0=2;1=1;2=0.4|0.3")
        assert beta(0.5) == pytest.approx(1.5)
        assert beta(5.0) == pytest.approx(0.4)
        assert beta.at_infinity == 0.3
        assert beta.horizon == 2.0

    def test_table_limit_defaults_to_last_value(self):
        assert DecayFn.parse("table:0=1;3=0.25").at_infinity == 0.25

    @pytest.mark.parametrize(
        "text",
        [
            "exp:1,1",
            "exp:1,x,0",
            "exp:1,1,1.5",
            "exp:1,0,0",
            "table:0=1;2=0.5;1=0.2",
            "table:1=1;2=0.5",
            "table:0=0.5;1=0.8",
            "table:0=1;1=0.5|0.6",
            "poly:1,2",
        ],
    )
    def test_invalid_specs(self, text):
        with pytest.raises(ConfigurationError):
            DecayFn.parse(text)

    def test_dict_round_trip(self):
        beta = DecayFn.parse("table:0=2;1=1;2=0.4|0.3")
        assert DecayFn.from_dict(beta.to_dict()) == beta


class TestGrowthFn:
    """J(t)."""

    def test_affine(self):
        J = GrowthFn.parse("affine:1,1")
        assert J(2.0) == pytest.approx(3.0)
        assert J.at_infinity == float("inf")

    def test_constant(self):
        J = GrowthFn.parse("const:10")
        assert J(123.0) == 10.0
        assert J.at_infinity == 10.0

    def test_saturating(self):
        J = GrowthFn.parse("sat:2,1,0.5")
        assert J(0.0) == pytest.approx(0.5)
        assert J(np.log(2.0)) == pytest.approx(1.5)
        assert J.at_infinity == pytest.approx(2.5)

    def test_zero(self):
        assert GrowthFn.constant(0.0).is_zero
        assert not GrowthFn.parse("sat:1,1,0").is_zero

    def test_table(self):
        J = GrowthFn.parse("table:0=0;1=2;4=3")
        assert J(0.5) == pytest.approx(1.0)
        assert J(10.0) == pytest.approx(3.0)

    @pytest.mark.parametrize("text", ["affine:-1,0", "table:0=2;1=1", "sat:1,2", "const:"])
    def test_invalid_specs(self, text):
        with pytest.raises(ConfigurationError):
            GrowthFn.parse(text)

    def test_dict_round_trip(self):
        J = GrowthFn.saturating(2.0, 0.5, 1.0)
        assert GrowthFn.from_dict(J.to_dict()) == J
