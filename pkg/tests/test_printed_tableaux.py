import dataclasses

import pytest
import sympy as sp

from src.printed_tableaux import PRINTED_TABLES, compare_with_printed
from src.tableau import parse_coefficient
from src.tableaux import CATALOG_NAMES, get_scheme

R = sp.Rational


def test_printed_tables_cover_catalog_with_literal_tables():
    assert set(PRINTED_TABLES) <= set(CATALOG_NAMES)
    parametric_only = set(CATALOG_NAMES) - set(PRINTED_TABLES)
    assert parametric_only == {"ASI-SSP(6,4,3)-axis", "ASI-SSP(6,4,3)-area", "ASI-SSP(5',4,3)"}


@pytest.mark.parametrize("name", sorted(PRINTED_TABLES))
def test_catalog_matches_printed_entries(name):
    assert compare_with_printed(get_scheme(name)) == []


def test_area_variant_third_row_is_literal():
    t = get_scheme("ASI-SSP(3',3,2)-area")
    assert list(t.A.row(2)) == [0, R(23, 25), R(2, 25), 0]
    assert [parse_coefficient(x) for x in PRINTED_TABLES[t.name].A[2]] == [0, R(23, 25), R(2, 25), 0]


def test_erratum_location_compares_against_corrected_value():
    t = get_scheme("ASI-SSP(3',3',2)")
    assert PRINTED_TABLES[t.name].B[3][0] == "5/3"
    assert t.B[3, 0] == R(3, 5)
    assert compare_with_printed(t) == []


def test_altered_entry_is_reported():
    t = get_scheme("ASI-SSP(4,3,2)")
    A = t.A.as_mutable()
    A[3, 2] = R(1, 3)
    mismatches = compare_with_printed(dataclasses.replace(t, A=sp.ImmutableMatrix(A)))
    assert [m.location for m in mismatches] == ["A(4,3)"]
    assert mismatches[0].printed == "1/4"


def test_irrational_entries_compared_exactly():
    t = get_scheme("ASI-SSP(4,3',2)")
    assert compare_with_printed(t) == []
    assert sp.simplify(t.A[2, 0] - (391 - 36 * sp.sqrt(5)) / 840) == 0


def test_scheme_without_literal_table():
    with pytest.raises(KeyError):
        compare_with_printed(get_scheme("ASI-SSP(5',4,3)"))
