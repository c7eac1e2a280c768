import pytest

from src.order_conditions import NonConvergentFitError, check_order, empirical_order
from src.problems import TestProblem
from src.tableaux import CATALOG_NAMES, get_scheme


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_catalog_attains_design_order(name):
    t = get_scheme(name)
    tol = 1e-9 if t.decimal else 1e-10
    report = check_order(t, tol)
    assert report.attained_order >= t.design_order
    assert report.coupling_failures() == []


@pytest.mark.parametrize("name", [n for n in CATALOG_NAMES if get_scheme(n).design_order == 2])
def test_second_order_schemes_miss_order_three(name):
    report = check_order(get_scheme(name))
    assert report.attained_order == 2
    assert report.max_residual(3) >= 1e-3


def test_condition_set_layout(asi432):
    report = check_order(asi432)
    assert len(report.records) == 20
    by_label = {r.label: r for r in report.records}
    assert by_label["w·e = 1"].kind == "classical"
    assert by_label["w·d = 1/2"].kind == "coupling"
    assert by_label["ω·(Bd) = 1/6"].kind == "classical"
    assert by_label["w·(c∘c) = 1/3"].reduced
    assert not by_label["w·(c∘d) = 1/3"].reduced


def test_reduced_order_never_below_full(third_order):
    report = check_order(third_order)
    assert report.reduced_attained_order >= report.attained_order == 3


def test_builtin_euler_pair_is_first_order():
    report = check_order(get_scheme("euler-imex"))
    assert report.attained_order == 1
    assert report.max_residual(2) == pytest.approx(0.5)


def test_perturbed_entry_drops_order(asi432):
    broken = asi432.with_entry("A", 3, 1, "1/100")
    report = check_order(broken)
    assert report.attained_order == 0
    assert report.failures()


def test_report_serializes(asi432):
    data = check_order(asi432).to_dict()
    assert data["attained_order"] == 2
    assert set(data["max_residual"]) == {"1", "2", "3"}
    assert len(data["conditions"]) == 20


def test_empirical_order_second_order(asi432):
    result = empirical_order(asi432)
    assert result.agrees_with(2)
    assert result.r2 >= 0.98


def test_empirical_order_third_order(third_order):
    result = empirical_order(third_order, dts=[0.1, 0.05, 0.025, 0.0125])
    assert result.agrees_with(3)


def test_empirical_order_van_der_pol(asi432):
    problem = TestProblem.of("vanderpol", "equilibrium")
    result = empirical_order(asi432, problem=problem, t_end=0.5)
    assert result.agrees_with(2)


def test_empirical_order_requires_nonstiff_eps(asi432):
    with pytest.raises(ValueError):
        empirical_order(asi432, eps=0.0)


def test_empirical_order_needs_distinct_steps(asi432):
    with pytest.raises(NonConvergentFitError):
        empirical_order(asi432, dts=[0.1, 0.1])
