import math

import pytest

from src.monotonicity import extended_pair, is_abs_monotonic, radius_r1, ssp_radius_scan, ssp_radius_single
from src.tableau import explicit_part, single_tableau
from src.tableaux import get_scheme, instantiate

R1_ANCHOR = 2 * (math.sqrt(5) - 1)


def test_origin_is_monotone_for_nonnegative_pair(asi432):
    result = is_abs_monotonic(asi432, 0.0, 0.0)
    assert result.monotonic
    assert not result.singular
    assert {c.name for c in result.conditions} == {"M⁻¹·A", "M⁻¹·B", "M⁻¹·1"}


def test_point_beyond_radius_reports_violation(asi432):
    result = is_abs_monotonic(asi432, 3.0, 0.0)
    assert not result.monotonic
    worst = min(c.worst for c in result.conditions)
    assert worst < 0
    assert result.to_dict()["monotonic"] is False


def test_negative_coordinates_rejected(asi432):
    with pytest.raises(ValueError):
        is_abs_monotonic(asi432, -0.1, 0.0)


def test_radius_r1_anchor(asi432):
    result = radius_r1(asi432)
    assert result.radius == pytest.approx(R1_ANCHOR, abs=1e-4)
    assert result.origin_monotonic and not result.reached_r_max


def test_radius_r1_family_endpoint():
    alpha = "(3+sqrt(5))/8"
    t = instantiate("(4,3,2)", {"alpha": alpha, "beta": f"3/4-{alpha}", "gamma": "1/4"})
    assert radius_r1(t).radius == pytest.approx(R1_ANCHOR, abs=1e-4)


def test_negative_entries_give_zero_radius():
    result = radius_r1(get_scheme("ASI-SSP(6,4,3)-axis"))
    assert result.radius == 0.0
    assert not result.origin_monotonic


def test_unbounded_radius_hits_r_max():
    result = radius_r1(get_scheme("backward-euler-chain"), r_max=5.0, samples=50)
    assert result.reached_r_max
    assert result.radius == 5.0


def test_extended_pair_standard_form_appends_weights():
    t = get_scheme("IMEX-SSP2(3,3,2)")
    A, B = extended_pair(t)
    assert A.shape == B.shape == (4, 4)
    assert A[3, :3].tolist() == pytest.approx([1 / 3, 1 / 3, 1 / 3])
    assert A[:, 3].tolist() == [0.0, 0.0, 0.0, 0.0]


def test_ssp_radius_ssp32(asi432):
    rk = explicit_part(asi432)
    r = ssp_radius_single(rk).radius
    assert r == pytest.approx(2.0, abs=1e-4)
    assert ssp_radius_scan(rk, r_max=2.5, step=1e-3) == pytest.approx(r, abs=2e-3)


def test_ssp_radius_explicit_euler():
    euler = single_tableau("explicit-euler", [[0]], [1])
    assert ssp_radius_single(euler).radius == pytest.approx(1.0, abs=1e-6)


def test_ssp_radius_of_first_order_implicit_part_is_unbounded():
    be = single_tableau("backward-euler", [[1]], [1])
    result = ssp_radius_single(be, r_max=20.0, samples=40)
    assert result.reached_r_max


def test_points_between_two_and_anchor_are_monotone(asi432):
    # the weight row of B stops the right-multiplied products at r = 2
    for r1 in (2.1, 2.3, R1_ANCHOR - 1e-4):
        assert is_abs_monotonic(asi432, r1, 0.0).monotonic
    assert not is_abs_monotonic(asi432, R1_ANCHOR + 1e-2, 0.0).monotonic


def test_radius_independent_of_search_bound(asi432):
    narrow = radius_r1(asi432, r_max=5.0)
    wide = radius_r1(asi432, r_max=10.0)
    assert wide.radius == pytest.approx(narrow.radius, abs=2e-6)
    assert not narrow.reached_r_max and not wide.reached_r_max
