"""
Mutlak monotonluk: katkılı çift için (r₁, r₂) nokta sorgusu, r₁ ekseni
boyunca yarıçap araması ve tek tablo SSP (Kraaijevanger) yarıçapı.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from config.config import settings
from src.tableau import ButcherDoubleTableau, RungeKuttaTableau

logger = logging.getLogger(__name__)


def extended_pair(t: ButcherDoubleTableau) -> Tuple[np.ndarray, np.ndarray]:
    """Genişletilmiş (Ã, B̃). ASI tablolarda ağırlık satırı zaten son satırdır."""
    arr = t.arrays
    if t.is_asi:
        return arr.A.copy(), arr.B.copy()
    s = t.s
    A = np.zeros((s + 1, s + 1))
    B = np.zeros((s + 1, s + 1))
    A[:s, :s], A[s, :s] = arr.A, arr.w
    B[:s, :s], B[s, :s] = arr.B, arr.omega
    return A, B


@dataclass
class ConditionDiagnostic:
    name: str
    worst: float
    location: Optional[Tuple[int, ...]] = None  # 1 tabanlı

    def to_dict(self) -> Dict[str, object]:
        return {"name": self.name, "worst": self.worst, "location": list(self.location) if self.location else None}


@dataclass
class MonotonicityResult:
    r1: float
    r2: float
    monotonic: bool
    singular: bool = False
    conditions: List[ConditionDiagnostic] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "r1": self.r1,
            "r2": self.r2,
            "monotonic": self.monotonic,
            "singular": self.singular,
            "conditions": [c.to_dict() for c in self.conditions],
        }


def _worst(name: str, values: np.ndarray) -> ConditionDiagnostic:
    k = int(np.argmin(values))
    loc = tuple(int(i) + 1 for i in np.unravel_index(k, values.shape))
    return ConditionDiagnostic(name, float(values.flat[k]), loc)


def _check(matrices: Dict[str, np.ndarray], weights: Dict[str, float], tol: float) -> Tuple[bool, bool, List[ConditionDiagnostic]]:
    n = next(iter(matrices.values())).shape[0]
    M = np.eye(n)
    for name, K in matrices.items():
        M = M + weights[name] * K
    if np.any(np.diag(M) == 0):
        return False, True, []
    try:
        Minv = linalg.solve_triangular(M, np.eye(n), lower=True)
    except linalg.LinAlgError:
        return False, True, []
    if not np.all(np.isfinite(Minv)):
        return False, True, []
    diagnostics = [_worst(f"M⁻¹·{name}", Minv @ K) for name, K in matrices.items()]
    diagnostics.append(_worst("M⁻¹·1", Minv @ np.ones(n)))
    return all(d.worst >= -tol for d in diagnostics), False, diagnostics


def is_abs_monotonic(
    t: ButcherDoubleTableau, r1: float, r2: float, tol: Optional[float] = None
) -> MonotonicityResult:
    """M = I + r₁Ã + r₂B̃ için M⁻¹Ã ≥ 0, M⁻¹B̃ ≥ 0 ve M⁻¹·1 ≥ 0 koşulları (sol çözücü biçimi)."""
    if r1 < 0 or r2 < 0:
        raise ValueError(f"r₁ ve r₂ negatif olamaz: ({r1}, {r2})")
    tol = settings.monotonicity_tol if tol is None else tol
    A, B = extended_pair(t)
    ok, singular, diags = _check({"A": A, "B": B}, {"A": r1, "B": r2}, tol)
    return MonotonicityResult(r1=r1, r2=r2, monotonic=ok, singular=singular, conditions=diags)


@dataclass
class RadiusResult:
    scheme: str
    radius: float
    r2: float = 0.0
    origin_monotonic: bool = True
    reached_r_max: bool = False
    non_monotone_ray: bool = False

    def to_dict(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme,
            "radius": self.radius,
            "r2": self.r2,
            "origin_monotonic": self.origin_monotonic,
            "reached_r_max": self.reached_r_max,
            "non_monotone_ray": self.non_monotone_ray,
        }


def _bisect_radius(
    ok, name: str, r_max: float, tol: float, samples: int, r2: float = 0.0
) -> RadiusResult:
    """ok(r) doğru olan en büyük r'yi tarama ve ikiye bölme ile bul."""
    if not ok(0.0):
        return RadiusResult(name, 0.0, r2=r2, origin_monotonic=False)
    rs = np.linspace(0.0, r_max, samples + 1)
    verdict = np.array([ok(r) for r in rs])
    if verdict.all():
        logger.warning(f"{name}: yarıçap r_max={r_max} sınırına ulaştı")
        return RadiusResult(name, float(r_max), r2=r2, reached_r_max=True)
    first_bad = int(np.argmin(verdict))
    non_monotone = bool(verdict[first_bad:].any())
    if non_monotone:
        logger.warning(f"{name}: ışın üzerinde monoton olmayan → monoton geçiş gözlendi")
    lo, hi = rs[first_bad - 1], rs[first_bad]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return RadiusResult(name, float(lo), r2=r2, non_monotone_ray=non_monotone)


def radius_r1(
    t: ButcherDoubleTableau,
    r2: float = 0.0,
    r_max: Optional[float] = None,
    tol: Optional[float] = None,
    samples: Optional[int] = None,
) -> RadiusResult:
    """Sabit r₂ için monoton r₁ değerlerinin üst sınırı."""
    r_max = r_max or settings.radius_r_max
    tol = tol or settings.radius_tol
    samples = samples or settings.radius_samples
    if tol <= 0:
        raise ValueError("tol pozitif olmalı")
    result = _bisect_radius(lambda r: is_abs_monotonic(t, r, r2).monotonic, t.name, r_max, tol, samples, r2)
    if not result.origin_monotonic:
        logger.warning(f"{t.name}: (0, {r2}) noktasında monoton değil, yarıçap 0")
    logger.info(f"{t.name}: r₁ yarıçapı {result.radius:.7f} (r₂={r2})")
    return result


def _single_ok(K_ext: np.ndarray, r: float, tol: float) -> bool:
    ok, _, _ = _check({"K": K_ext}, {"K": r}, tol)
    return ok


def ssp_radius_single(
    rk: RungeKuttaTableau,
    r_max: Optional[float] = None,
    tol: Optional[float] = None,
    samples: Optional[int] = None,
) -> RadiusResult:
    """Tek tablonun genişletilmiş biçimi üzerinde Kraaijevanger yarıçapı."""
    r_max = r_max or settings.radius_r_max
    tol = tol or settings.radius_tol
    samples = samples or settings.radius_samples
    K_ext = rk.extended()
    mono_tol = settings.monotonicity_tol
    result = _bisect_radius(lambda r: _single_ok(K_ext, r, mono_tol), rk.name, r_max, tol, samples)
    logger.info(f"{rk.name}: SSP yarıçapı {result.radius:.7f}")
    return result


def ssp_radius_scan(rk: RungeKuttaTableau, r_max: float, step: float = 1e-4) -> float:
    """Kaba kuvvet tarama: ilk başarısız örnekten önceki son r."""
    K_ext = rk.extended()
    mono_tol = settings.monotonicity_tol
    last = 0.0
    for r in np.arange(0.0, r_max + step / 2, step):
        if not _single_ok(K_ext, float(r), mono_tol):
            return last
        last = float(r)
    return last

