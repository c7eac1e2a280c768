"""
Katkılı Runge-Kutta mertebe koşulları (3. mertebeye kadar) ve ampirik mertebe kontrolü.

Koşullar etkin ağırlıklar w (örtük) ve ω (açık) ile yazılır; ASI tablolarda
bunlar A ve B'nin son satırlarıdır. Örtük ve açık kısımları karıştıran
koşullar "coupling" olarak etiketlenir ve ayrıca raporlanır.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import sympy as sp
from scipy import stats
from scipy.integrate import solve_ivp

from config.config import settings
from src.integrator import StepperConfig, integrate
from src.problems import TestProblem
from src.tableau import ButcherDoubleTableau

logger = logging.getLogger(__name__)


class NonConvergentFitError(RuntimeError):
    """log(hata) – log(Δt) doğrusal uyumu yetersiz."""

    def __init__(self, scheme: str, r2: float, threshold: float):
        self.scheme = scheme
        self.r2 = r2
        self.threshold = threshold
        super().__init__(f"{scheme}: ampirik mertebe uyumu yetersiz (R²={r2:.4f} < {threshold})")


@dataclass(frozen=True)
class ConditionRecord:
    label: str
    order: int
    target: sp.Expr
    computed: sp.Expr
    residual: float
    kind: str  # classical | coupling
    reduced: bool  # c = d altında kalan alt küme

    def passed(self, tol: float) -> bool:
        return self.residual <= tol

    def to_dict(self) -> Dict[str, object]:
        return {
            "label": self.label,
            "order": self.order,
            "target": str(self.target),
            "computed": float(self.computed),
            "residual": self.residual,
            "kind": self.kind,
            "reduced": self.reduced,
        }


@dataclass
class OrderReport:
    scheme: str
    design_order: int
    tol: float
    records: List[ConditionRecord] = field(default_factory=list)

    def max_residual(self, order: int, reduced_only: bool = False) -> float:
        values = [r.residual for r in self.records if r.order == order and (r.reduced or not reduced_only)]
        return max(values) if values else 0.0

    def _attained(self, reduced_only: bool) -> int:
        attained = 0
        for p in (1, 2, 3):
            if self.max_residual(p, reduced_only) <= self.tol:
                attained = p
            else:
                break
        return attained

    @property
    def attained_order(self) -> int:
        return self._attained(reduced_only=False)

    @property
    def reduced_attained_order(self) -> int:
        return self._attained(reduced_only=True)

    def failures(self) -> List[ConditionRecord]:
        return [r for r in self.records if not r.passed(self.tol)]

    def coupling_failures(self, up_to: Optional[int] = None) -> List[ConditionRecord]:
        up_to = up_to or self.design_order
        return [r for r in self.failures() if r.kind == "coupling" and r.order <= up_to]

    def to_dict(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme,
            "design_order": self.design_order,
            "tolerance": self.tol,
            "attained_order": self.attained_order,
            "reduced_attained_order": self.reduced_attained_order,
            "max_residual": {str(p): self.max_residual(p) for p in (1, 2, 3)},
            "coupling_failures": [r.label for r in self.coupling_failures()],
            "conditions": [r.to_dict() for r in self.records],
        }


def _residual(computed: sp.Expr, target: sp.Expr) -> float:
    return abs(float(sp.N(sp.expand(computed - target), 30)))


def _dot(u: sp.MatrixBase, v: sp.MatrixBase) -> sp.Expr:
    return sp.expand((u.T * v)[0, 0])


def check_order(t: ButcherDoubleTableau, tol: Optional[float] = None) -> OrderReport:
    """Tüm koşulların artıklarını hesapla ve ulaşılan mertebeyi belirle."""
    tol = settings.order_tolerance if tol is None else tol
    w, omega = t.weights()
    c, d = t.c, t.d
    e = sp.ones(t.s, 1)
    weights = {"w": (w, "implicit"), "ω": (omega, "explicit")}
    vectors = {"c": (c, "implicit"), "d": (d, "explicit")}
    matrices = {"A": (t.A, "implicit"), "B": (t.B, "explicit")}
    report = OrderReport(scheme=t.name, design_order=t.design_order, tol=tol)

    def add(label: str, order: int, target: sp.Expr, computed: sp.Expr, parts: Sequence[str], reduced: bool) -> None:
        kind = "classical" if len(set(parts)) == 1 else "coupling"
        report.records.append(
            ConditionRecord(label, order, target, computed, _residual(computed, target), kind, reduced)
        )

    for un, (u, up) in weights.items():
        add(f"{un}·e = 1", 1, sp.Integer(1), _dot(u, e), [up], True)
    for un, (u, up) in weights.items():
        for vn, (v, vp) in vectors.items():
            add(f"{un}·{vn} = 1/2", 2, sp.Rational(1, 2), _dot(u, v), [up, vp], vn == "c")
    for un, (u, up) in weights.items():
        for v1, v2 in (("c", "c"), ("c", "d"), ("d", "d")):
            prod = sp.Matrix(vectors[v1][0]).multiply_elementwise(sp.Matrix(vectors[v2][0]))
            add(
                f"{un}·({v1}∘{v2}) = 1/3", 3, sp.Rational(1, 3), _dot(u, prod),
                [up, vectors[v1][1], vectors[v2][1]], v1 == v2 == "c",
            )
        for mn, (M, mp) in matrices.items():
            for vn, (v, vp) in vectors.items():
                add(f"{un}·({mn}{vn}) = 1/6", 3, sp.Rational(1, 6), _dot(u, M * v), [up, mp, vp], vn == "c")

    coupling = report.coupling_failures()
    if coupling:
        logger.warning(f"{t.name}: {len(coupling)} bağlaşım koşulu sağlanmıyor: {[r.label for r in coupling]}")
    logger.info(f"{t.name}: ulaşılan mertebe {report.attained_order} (tasarım {t.design_order})")
    return report


@dataclass
class EmpiricalOrder:
    scheme: str
    dts: np.ndarray
    errors: np.ndarray
    slope: float
    r2: float

    def agrees_with(self, design_order: int, tol: float = 0.3) -> bool:
        return abs(self.slope - design_order) <= tol

    def to_dict(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme,
            "dts": self.dts.tolist(),
            "errors": self.errors.tolist(),
            "slope": self.slope,
            "r2": self.r2,
        }


def reference_solution(problem: TestProblem, eps: float, t_end: float) -> np.ndarray:
    """Ağır olmayan ε için yüksek doğruluklu DOP853 çözümü (son zamandaki durum)."""
    p = problem.build(eps)

    def rhs(_t: float, U: np.ndarray) -> np.ndarray:
        return p.flux(U) + p.relaxation(U) / eps

    sol = solve_ivp(rhs, (0.0, t_end), problem.initial_state(), method="DOP853", rtol=1e-13, atol=1e-14)
    if not sol.success:
        raise RuntimeError(f"Referans çözüm başarısız: {sol.message}")
    return sol.y[:, -1]


def empirical_order(
    t: ButcherDoubleTableau,
    problem: Optional[TestProblem] = None,
    eps: float = 1.0,
    t_end: float = 1.0,
    dts: Optional[Sequence[float]] = None,
    cfg: Optional[StepperConfig] = None,
    r2_threshold: Optional[float] = None,
) -> EmpiricalOrder:
    """Son zamandaki hatanın log-log eğiminden mertebe tahmini."""
    if eps <= 0:
        raise ValueError("Ampirik mertebe sert olmayan (ε > 0) bir değerde ölçülür")
    problem = problem or TestProblem.of("pareschi", "equilibrium")
    dts = np.asarray(dts if dts is not None else 0.1 * 2.0 ** -np.arange(5), dtype=float)
    r2_threshold = settings.fit_r2_threshold if r2_threshold is None else r2_threshold
    cfg = cfg or StepperConfig.from_settings()

    exact = reference_solution(problem, eps, t_end)
    p = problem.build(eps)
    errors = np.array([
        np.linalg.norm(integrate(t, p, problem.initial_state(), dt, t_end, cfg).final - exact)
        for dt in dts
    ])
    if np.unique(dts).size < 2 or np.any(errors <= 0):
        raise NonConvergentFitError(t.name, float("nan"), r2_threshold)
    fit = stats.linregress(np.log10(dts), np.log10(errors))
    r2 = float(fit.rvalue**2)
    if r2 < r2_threshold:
        raise NonConvergentFitError(t.name, r2, r2_threshold)
    logger.info(f"{t.name}: ampirik eğim {fit.slope:.3f} (R²={r2:.5f})")
    return EmpiricalOrder(scheme=t.name, dts=dts, errors=errors, slope=float(fit.slope), r2=r2)
