from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import sympy as sp

from utils.validators import CoefficientValidator

Coefficient = Union[sp.Expr, int, float, str, Fraction]


class TableauFormatError(ValueError):
    """Tablo verisi biçimsel olarak hatalı (boyut, bayrak veya katsayı metni)."""
    pass


def parse_coefficient(value: Coefficient) -> sp.Expr:
    """Bir katsayıyı kesin sympy ifadesine çevir.

    Ondalık metinler yazıldıkları haliyle kesin kesre dönüştürülür; float değerler
    repr() gösterimi üzerinden aynı yoldan geçer.
    """
    if isinstance(value, sp.Basic):
        return sp.sympify(value)
    if isinstance(value, bool):
        raise TableauFormatError(f"Katsayı mantıksal değer olamaz: {value!r}")
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise TableauFormatError(f"Sonlu olmayan katsayı: {value!r}")
        return sp.Rational(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if not CoefficientValidator.is_safe_expression(text):
            raise TableauFormatError(f"Geçersiz katsayı ifadesi: {value!r}")
        try:
            expr = sp.sympify(text, rational=True)
        except (sp.SympifyError, SyntaxError, TypeError) as e:
            raise TableauFormatError(f"Katsayı çözümlenemedi: {value!r}") from e
        if expr.free_symbols:
            raise TableauFormatError(f"Katsayı serbest sembol içeriyor: {value!r}")
        return expr
    raise TableauFormatError(f"Desteklenmeyen katsayı türü: {type(value).__name__}")


def _terminating_decimal(r: sp.Rational) -> Optional[str]:
    q = int(r.q)
    twos = fives = 0
    while q % 2 == 0:
        q //= 2
        twos += 1
    while q % 5 == 0:
        q //= 5
        fives += 1
    if q != 1:
        return None
    k = max(twos, fives)
    scaled = int(r.p) * 10**k // int(r.q)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    if k == 0:
        return f"{sign}{digits}"
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def format_coefficient(expr: sp.Expr, decimal: bool = False) -> str:
    """Katsayıyı JSON için metne çevir: kesirler "p/q", ondalık tablolar rakam dizisi."""
    expr = sp.sympify(expr)
    if isinstance(expr, sp.Rational):
        if decimal:
            text = _terminating_decimal(expr)
            if text is not None:
                return text
        return str(expr)
    if isinstance(expr, sp.Float):
        return format(float(expr), ".17g")
    return sp.sstr(expr)


def _as_matrix(rows: Sequence[Sequence[Coefficient]], s: int, label: str) -> sp.ImmutableMatrix:
    """Basamaklı (alt üçgen) satırları sıfırlarla doldurarak s×s matrise çevir."""
    if len(rows) != s:
        raise TableauFormatError(f"{label}: {s} satır bekleniyordu, {len(rows)} geldi")
    data = []
    for i, row in enumerate(rows):
        if len(row) > s:
            raise TableauFormatError(f"{label}: satır {i + 1} çok uzun ({len(row)} > {s})")
        parsed = [parse_coefficient(v) for v in row]
        data.append(parsed + [sp.Integer(0)] * (s - len(parsed)))
    return sp.ImmutableMatrix(data)


def _as_vector(values: Sequence[Coefficient], s: int, label: str) -> sp.ImmutableMatrix:
    if len(values) != s:
        raise TableauFormatError(f"{label}: uzunluk {s} bekleniyordu, {len(values)} geldi")
    return sp.ImmutableMatrix([parse_coefficient(v) for v in values])


def _to_float(m: sp.MatrixBase) -> np.ndarray:
    return np.array([[float(x) for x in m.row(i)] for i in range(m.rows)], dtype=float)


@dataclass(frozen=True)
class Erratum:
    """Basılı tablodan sapılan tek bir girdinin kaydı."""
    location: str
    printed: str
    used: str
    reason: str

    def to_dict(self) -> Dict[str, str]:
        return {"location": self.location, "printed": self.printed, "used": self.used, "reason": self.reason}

    @staticmethod
    def from_dict(data: Dict[str, str]) -> "Erratum":
        return Erratum(data["location"], data["printed"], data["used"], data["reason"])


@dataclass(frozen=True)
class TableauArrays:
    """Değerlendirme sınırında kullanılan kayan noktalı kopya."""
    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    d: np.ndarray
    w: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True)
class ButcherDoubleTableau:
    """IMEX Runge-Kutta çift Butcher tablosu.

    A örtük (alt üçgen), B açık (kesin alt üçgen) katsayılar; c ve d sırasıyla
    örtük ve açık alt zaman seviyeleri. ASI biçiminde ağırlık yoktur ve
    U^{n+1} son aşamanın değeridir.
    """
    name: str
    A: sp.ImmutableMatrix
    B: sp.ImmutableMatrix
    c: sp.ImmutableMatrix
    d: sp.ImmutableMatrix
    design_order: int
    is_asi: bool = True
    w: Optional[sp.ImmutableMatrix] = None
    omega: Optional[sp.ImmutableMatrix] = None
    decimal: bool = False
    errata: tuple = ()
    description: str = ""

    def __post_init__(self) -> None:
        s = self.A.rows
        if s < 1 or self.A.shape != (s, s) or self.B.shape != (s, s):
            raise TableauFormatError(f"{self.name}: A ve B aynı boyutlu kare matris olmalı")
        for label, vec in (("c", self.c), ("d", self.d), ("w", self.w), ("omega", self.omega)):
            if vec is not None and vec.shape != (s, 1):
                raise TableauFormatError(f"{self.name}: {label} uzunluğu {s} olmalı")
        if self.design_order not in (1, 2, 3):
            raise TableauFormatError(f"{self.name}: tasarım mertebesi 1, 2 veya 3 olmalı")
        if self.is_asi and (self.w is not None or self.omega is not None):
            raise TableauFormatError(f"{self.name}: ASI biçiminde ağırlık verilmez")
        if not self.is_asi and (self.w is None or self.omega is None):
            raise TableauFormatError(f"{self.name}: standart biçim w ve omega ister")

    @classmethod
    def build(
        cls,
        name: str,
        A: Sequence[Sequence[Coefficient]],
        B: Sequence[Sequence[Coefficient]],
        design_order: int,
        c: Optional[Sequence[Coefficient]] = None,
        d: Optional[Sequence[Coefficient]] = None,
        w: Optional[Sequence[Coefficient]] = None,
        omega: Optional[Sequence[Coefficient]] = None,
        decimal: bool = False,
        errata: Iterable[Erratum] = (),
        description: str = "",
    ) -> "ButcherDoubleTableau":
        """Basılı tablo düzeninde (satır başına baştaki girdiler) tablo kur.

        c veya d verilmezse satır toplamlarından hesaplanır.
        """
        s = len(A)
        A_m = _as_matrix(A, s, "A")
        B_m = _as_matrix(B, s, "B")
        c_m = _as_vector(c, s, "c") if c is not None else sp.ImmutableMatrix([sum(A_m.row(i)) for i in range(s)])
        d_m = _as_vector(d, s, "d") if d is not None else sp.ImmutableMatrix([sum(B_m.row(i)) for i in range(s)])
        return cls(
            name=name,
            A=A_m,
            B=B_m,
            c=c_m,
            d=d_m,
            design_order=design_order,
            is_asi=w is None and omega is None,
            w=_as_vector(w, s, "w") if w is not None else None,
            omega=_as_vector(omega, s, "omega") if omega is not None else None,
            decimal=decimal,
            errata=tuple(errata),
            description=description,
        )

    @property
    def s(self) -> int:
        return self.A.rows

    def weights(self) -> tuple:
        """Etkin ağırlıklar (w, omega); ASI için A ve B'nin son satırları."""
        if self.is_asi:
            return self.A.row(self.s - 1).T, self.B.row(self.s - 1).T
        return self.w, self.omega

    @cached_property
    def arrays(self) -> TableauArrays:
        w, omega = self.weights()
        return TableauArrays(
            A=_to_float(self.A),
            B=_to_float(self.B),
            c=_to_float(self.c).ravel(),
            d=_to_float(self.d).ravel(),
            w=_to_float(w).ravel(),
            omega=_to_float(omega).ravel(),
        )

    @property
    def has_explicit_first_stage(self) -> bool:
        return all(x == 0 for x in self.A.row(0))

    @property
    def is_singly_diagonal(self) -> bool:
        diag = [self.A[i, i] for i in range(self.s) if not (self.has_explicit_first_stage and i == 0)]
        return len(set(diag)) <= 1

    @property
    def is_stiffly_accurate(self) -> bool:
        if self.is_asi:
            return True
        w, omega = self.weights()
        return w == self.A.row(self.s - 1).T and omega == self.B.row(self.s - 1).T

    def with_entry(self, matrix: str, i: int, j: int, value: Coefficient) -> "ButcherDoubleTableau":
        """Tek bir girdisi değiştirilmiş kopya döndür (0 tabanlı indeksler)."""
        target = getattr(self, matrix)
        mutable = target.as_mutable()
        mutable[i, j] = parse_coefficient(value)
        return replace(self, **{matrix: sp.ImmutableMatrix(mutable)}, name=f"{self.name}*")

    def to_dict(self) -> Dict[str, Any]:
        fmt = lambda x: format_coefficient(x, self.decimal)  # noqa: E731
        data: Dict[str, Any] = {
            "name": self.name,
            "s": self.s,
            "c": [fmt(x) for x in self.c],
            "A": [[fmt(x) for x in self.A.row(i)] for i in range(self.s)],
            "d": [fmt(x) for x in self.d],
            "B": [[fmt(x) for x in self.B.row(i)] for i in range(self.s)],
            "design_order": self.design_order,
            "is_asi": self.is_asi,
            "coefficient_format": "decimal" if self.decimal else "exact",
        }
        if not self.is_asi:
            data["w"] = [fmt(x) for x in self.w]
            data["omega"] = [fmt(x) for x in self.omega]
        if self.errata:
            data["errata"] = [e.to_dict() for e in self.errata]
        if self.description:
            data["description"] = self.description
        return data

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "ButcherDoubleTableau":
        try:
            s = int(data["s"])
            is_asi = bool(data["is_asi"])
            tableau = ButcherDoubleTableau(
                name=str(data["name"]),
                A=_as_matrix(data["A"], s, "A"),
                B=_as_matrix(data["B"], s, "B"),
                c=_as_vector(data["c"], s, "c"),
                d=_as_vector(data["d"], s, "d"),
                design_order=int(data["design_order"]),
                is_asi=is_asi,
                w=None if is_asi else _as_vector(data["w"], s, "w"),
                omega=None if is_asi else _as_vector(data["omega"], s, "omega"),
                decimal=data.get("coefficient_format") == "decimal",
                errata=tuple(Erratum.from_dict(e) for e in data.get("errata", [])),
                description=data.get("description", ""),
            )
        except KeyError as e:
            raise TableauFormatError(f"Eksik alan: {e.args[0]}") from e
        return tableau

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    @staticmethod
    def load(path: Union[str, Path]) -> "ButcherDoubleTableau":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise TableauFormatError(f"{path}: geçersiz JSON ({e})") from e
        return ButcherDoubleTableau.from_dict(data)

    def fingerprint(self) -> str:
        """Katsayılardan türetilen kısa özet; önbellek anahtarlarında kullanılır."""
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.md5(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class RungeKuttaTableau:
    """Tek matrisli Runge-Kutta tablosu (K, b); SSP yarıçapı hesaplarında kullanılır."""
    name: str
    K: sp.ImmutableMatrix
    b: sp.ImmutableMatrix

    @property
    def s(self) -> int:
        return self.K.rows

    def extended(self) -> np.ndarray:
        """Genişletilmiş (s+1)×(s+1) tablo [[K, 0], [b^T, 0]]."""
        s = self.s
        ext = np.zeros((s + 1, s + 1))
        ext[:s, :s] = _to_float(self.K)
        ext[s, :s] = _to_float(self.b).ravel()
        return ext

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "K": [[str(x) for x in self.K.row(i)] for i in range(self.s)],
            "b": [str(x) for x in self.b],
        }


def explicit_part(t: ButcherDoubleTableau) -> RungeKuttaTableau:
    _, omega = t.weights()
    return RungeKuttaTableau(name=f"{t.name}:explicit", K=t.B, b=omega)


def implicit_part(t: ButcherDoubleTableau) -> RungeKuttaTableau:
    w, _ = t.weights()
    return RungeKuttaTableau(name=f"{t.name}:implicit", K=t.A, b=w)


def single_tableau(name: str, K: Sequence[Sequence[Coefficient]], b: Sequence[Coefficient]) -> RungeKuttaTableau:
    s = len(K)
    return RungeKuttaTableau(name=name, K=_as_matrix(K, s, "K"), b=_as_vector(b, s, "b"))


def as_double_tableau(rk: RungeKuttaTableau, design_order: int = 1) -> ButcherDoubleTableau:
    """Açık tek tabloyu, örtük kısmı sıfır olan standart biçimli çift tabloya sar."""
    s = rk.s
    zeros: List[List[Coefficient]] = [[0] * s for _ in range(s)]
    return ButcherDoubleTableau.build(
        name=rk.name,
        A=zeros,
        B=[list(rk.K.row(i)) for i in range(s)],
        w=[0] * s,
        omega=list(rk.b),
        design_order=design_order,
    )
