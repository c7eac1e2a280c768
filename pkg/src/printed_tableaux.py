"""
Katalog şemalarının basılı sayısal tabloları, girdi girdi karşılaştırma için.

Katalog aile formüllerinden üretildiği için aileyi katalogla karşılaştırmak
kendi kendini doğrular; buradaki tablolar formüllerden bağımsız olarak
basılı halleriyle yazılmıştır. (6,4,3) ve (5',4,3) şemaları yalnızca
parametrik biçimde basıldığından burada yer almaz.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import sympy as sp

from src.tableau import ButcherDoubleTableau, parse_coefficient

logger = logging.getLogger(__name__)

Rows = Sequence[Sequence[str]]


@dataclass(frozen=True)
class PrintedTable:
    A: Rows
    B: Rows


@dataclass
class EntryMismatch:
    matrix: str
    row: int  # 1 tabanlı
    col: int
    printed: str
    catalog: str

    @property
    def location(self) -> str:
        return f"{self.matrix}({self.row},{self.col})"

    def __str__(self) -> str:
        return f"{self.location}: basılı {self.printed}, katalog {self.catalog}"


_SSP32 = [
    ["0", "0", "0", "0"],
    ["1/2", "0", "0", "0"],
    ["1/2", "1/2", "0", "0"],
    ["1/3", "1/3", "1/3", "0"],
]

_SSP42 = [
    ["0", "0", "0", "0", "0"],
    ["1/3", "0", "0", "0", "0"],
    ["1/3", "1/3", "0", "0", "0"],
    ["1/3", "1/3", "1/3", "0", "0"],
    ["1/4", "1/4", "1/4", "1/4", "0"],
]

_G553 = "0.3772689153313681"

PRINTED_TABLES: Dict[str, PrintedTable] = {
    "ASI-SSP(4,3,2)": PrintedTable(
        A=[
            ["1/4", "0", "0", "0"],
            ["1/2", "1/4", "0", "0"],
            ["1/4", "0", "1/4", "0"],
            ["1/2", "0", "1/4", "1/4"],
        ],
        B=_SSP32,
    ),
    "ASI-SSP(3',3,2)-sd": PrintedTable(
        A=[
            ["0", "0", "0", "0"],
            ["0", "1/2", "0", "0"],
            ["0", "1/2", "1/2", "0"],
            ["0", "1", "-1/2", "1/2"],
        ],
        B=_SSP32,
    ),
    "ASI-SSP(3',3,2)-area": PrintedTable(
        A=[
            ["0", "0", "0", "0"],
            ["0", "1/2", "0", "0"],
            ["0", "23/25", "2/25", "0"],
            ["0", "1", "-3/8", "3/8"],
        ],
        B=_SSP32,
    ),
    "ASI-SSP(4,3',2)": PrintedTable(
        A=[
            ["1/4", "0", "0", "0"],
            ["5/24", "1/4", "0", "0"],
            ["(391-36*sqrt(5))/840", "3*(13+2*sqrt(5))/140", "1/4", "0"],
            ["9/20", "3/10", "0", "1/4"],
        ],
        B=[
            ["0", "0", "0", "0"],
            ["5/6", "0", "0", "0"],
            ["25/42", "25/42", "0", "0"],
            ["13/25", "1/5", "7/25", "0"],
        ],
    ),
    "ASI-SSP(3',3',2)": PrintedTable(
        A=[
            ["0", "0", "0", "0"],
            ["0", "5/6", "0", "0"],
            ["0", "5/6", "5/6", "0"],
            ["0", "11/15", "-17/30", "5/6"],
        ],
        B=[
            ["0", "0", "0", "0"],
            ["5/6", "0", "0", "0"],
            ["5/6", "5/6", "0", "0"],
            ["5/3", "1/5", "1/5", "0"],
        ],
    ),
    "ASI-SSP(4',4,2)-a": PrintedTable(
        A=[
            ["0", "0", "0", "0", "0"],
            ["0", "1/3", "0", "0", "0"],
            ["0", "1/3", "1/3", "0", "0"],
            ["0", "1/5", "7/15", "1/3", "0"],
            ["0", "1/2", "1/2", "-1/3", "1/3"],
        ],
        B=_SSP42,
    ),
    "ASI-SSP(4',4,2)-b": PrintedTable(
        A=[
            ["0", "0", "0", "0", "0"],
            ["0", "1/3", "0", "0", "0"],
            ["0", "1/3", "1/3", "0", "0"],
            ["0", "10/9", "-4/9", "1/3", "0"],
            ["0", "6/5", "-9/10", "11/30", "1/3"],
        ],
        B=_SSP42,
    ),
    "ASI-SSP(5',5,3)": PrintedTable(
        A=[
            ["0", "0", "0", "0", "0", "0"],
            ["0", _G553, "0", "0", "0", "0"],
            ["0", _G553, _G553, "0", "0", "0"],
            ["0", "0.7528071994958022", "-0.40109045321498277", _G553, "0", "0"],
            ["0", "0.9856691407902044", "-0.4137119201899029", "-0.25", _G553, "0"],
            ["0", "0.8630443729722925", "0.3335041845496738", "-1.7904209909531452", "1.216603518099811", _G553],
        ],
        B=[
            ["0", "0", "0", "0", "0", "0"],
            [_G553, "0", "0", "0", "0", "0"],
            [_G553, _G553, "0", "0", "0", "0"],
            ["0.24299522053739583", "0.24299522053739583", "0.24299522053739583", "0", "0", "0"],
            ["0.15358906769512654", "0.15358906769512654", "0.15358906769512654", "0.23845893284629002", "0", "0"],
            ["0.20673402086480455", "0.20673402086480455", "0.11709725184184275", "0.1818025601201412", "0.28763214630840694", "0"],
        ],
    ),
}


def _same(a: sp.Expr, b: sp.Expr) -> bool:
    return sp.simplify(a - b) == 0


def compare_with_printed(t: ButcherDoubleTableau) -> List[EntryMismatch]:
    """Katalog girdilerini basılı tabloyla karşılaştır.

    Düzeltme kaydı olan konumlarda basılı değer kaydın `printed` alanıyla,
    katalog değeri `used` alanıyla eşleşmelidir.
    """
    if t.name not in PRINTED_TABLES:
        raise KeyError(f"{t.name} için basılı tablo yok")
    printed = PRINTED_TABLES[t.name]
    errata = {e.location: e for e in t.errata}
    mismatches: List[EntryMismatch] = []
    for label, rows, matrix in (("A", printed.A, t.A), ("B", printed.B, t.B)):
        if len(rows) != matrix.rows or any(len(r) != matrix.cols for r in rows):
            mismatches.append(EntryMismatch(label, 0, 0, f"{len(rows)} satır", f"{matrix.rows}×{matrix.cols}"))
            continue
        for i, row in enumerate(rows):
            for j, text in enumerate(row):
                actual = matrix[i, j]
                location = f"{label}({i + 1},{j + 1})"
                if location in errata:
                    erratum = errata[location]
                    if text != erratum.printed or not _same(actual, parse_coefficient(erratum.used)):
                        mismatches.append(EntryMismatch(label, i + 1, j + 1, text, str(actual)))
                    continue
                if not _same(actual, parse_coefficient(text)):
                    mismatches.append(EntryMismatch(label, i + 1, j + 1, text, str(actual)))
    if mismatches:
        logger.warning(f"{t.name}: {len(mismatches)} girdi basılı tablodan farklı")
    return mismatches
