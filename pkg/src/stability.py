"""
Bölünmüş doğrusal test problemi üzerinde büyütme çarpanı ve kararlılık bölgeleri.

IMEX bölgesi: z_E noktası, örneklenen tüm gerçel z_I ≤ 0 değerleri için
|R(z_I, z_E)| ≤ 1 ise kararlıdır. z_I = 0 örneği bölgeyi açık kısmın
bölgesine indirger, −1e8 örneği −∞ yerine geçer.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.config import settings
from src.services.contour import boundary_polylines
from src.tableau import ButcherDoubleTableau, RungeKuttaTableau, TableauArrays, as_double_tableau

logger = logging.getLogger(__name__)

Window = Tuple[float, float, float, float]
MINUS_INFINITY_PROXY = -1e8


class SingularAmplificationError(ZeroDivisionError):
    """I − z_I A − z_E B tekil: kararlılık fonksiyonunun kutbu."""

    def __init__(self, scheme: str, z_I: complex, z_E: complex):
        self.scheme = scheme
        self.z_I = z_I
        self.z_E = z_E
        super().__init__(f"{scheme}: (z_I={z_I}, z_E={z_E}) kararlılık fonksiyonunun kutbu")


def _double(t: Union[ButcherDoubleTableau, RungeKuttaTableau]) -> ButcherDoubleTableau:
    return as_double_tableau(t) if isinstance(t, RungeKuttaTableau) else t


def _amplify(arr: TableauArrays, is_asi: bool, z_I, z_E) -> np.ndarray:
    """İleri yerine koyma ile (I − z_I A − z_E B)^{-1} 1; yayın (broadcast) destekli.

    A alt üçgen, B kesin alt üçgen olduğundan sistem alt üçgendir.
    """
    z_I = np.asarray(z_I, dtype=complex)
    z_E = np.asarray(z_E, dtype=complex)
    shape = np.broadcast(z_I, z_E).shape
    s = arr.A.shape[0]
    x: List[np.ndarray] = []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for i in range(s):
            acc = np.ones(shape, dtype=complex)
            for j in range(i):
                if arr.A[i, j] != 0 or arr.B[i, j] != 0:
                    acc = acc + (z_I * arr.A[i, j] + z_E * arr.B[i, j]) * x[j]
            x.append(acc / (1.0 - z_I * arr.A[i, i]))
        if is_asi:
            return x[-1]
        out = np.ones(shape, dtype=complex)
        for i in range(s):
            out = out + (z_I * arr.w[i] + z_E * arr.omega[i]) * x[i]
        return out


def amplification(t: Union[ButcherDoubleTableau, RungeKuttaTableau], z_I: complex, z_E: complex) -> complex:
    """Tek noktada büyütme çarpanı U^{n+1}/U^n."""
    t = _double(t)
    arr = t.arrays
    if np.any(1.0 - z_I * np.diag(arr.A) == 0):
        raise SingularAmplificationError(t.name, z_I, z_E)
    value = complex(_amplify(arr, t.is_asi, z_I, z_E))
    if not np.isfinite(value):
        raise SingularAmplificationError(t.name, z_I, z_E)
    return value


def amplification_grid(t: Union[ButcherDoubleTableau, RungeKuttaTableau], z_I, z_E) -> np.ndarray:
    """Dizi girdiler için büyütme çarpanı; kutuplarda inf/nan döner."""
    t = _double(t)
    return _amplify(t.arrays, t.is_asi, z_I, z_E)


def default_zi_samples(per_decade: Optional[int] = None) -> np.ndarray:
    """{0} ∪ −logspace(1e-3, 1e6) ∪ {−1e8}; 0 ve −∞ vekili önce gelir."""
    per_decade = per_decade or settings.zi_per_decade
    magnitudes = np.logspace(-3, 6, 9 * per_decade + 1)
    return np.concatenate([[0.0, MINUS_INFINITY_PROXY], -magnitudes])


def _stable_mask(arr: TableauArrays, is_asi: bool, zi_samples: np.ndarray, slack: float, zE: np.ndarray) -> np.ndarray:
    """Her z_E için tüm z_I örneklerinde |R| ≤ 1 + slack."""
    flat = np.asarray(zE).reshape(-1)
    stable = np.ones(flat.shape, dtype=bool)
    for z_I in zi_samples:
        live = np.flatnonzero(stable)
        if live.size == 0:
            break
        values = _amplify(arr, is_asi, z_I, flat[live])
        ok = np.isfinite(values) & (np.abs(values) <= 1.0 + slack)
        stable[live[~ok]] = False
    return stable.reshape(np.shape(zE))


@dataclass
class RegionResult:
    scheme: str
    mode: str
    window: Window
    resolution: int
    re: np.ndarray
    im: np.ndarray
    stable: np.ndarray  # (len(im), len(re))
    area: float
    zi_samples: np.ndarray
    boundary: List[np.ndarray] = field(default_factory=list)
    axis_half_length: float = 0.0
    touches_window: bool = False

    @property
    def cell_area(self) -> float:
        return float((self.re[1] - self.re[0]) * (self.im[1] - self.im[0]))

    def to_dict(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme,
            "mode": self.mode,
            "window": list(self.window),
            "resolution": self.resolution,
            "area": self.area,
            "stable_cells": int(self.stable.sum()),
            "axis_half_length": self.axis_half_length,
            "touches_window": self.touches_window,
            "zi_samples": len(self.zi_samples),
            "boundary_polylines": len(self.boundary),
        }

    def rows(self):
        """CSV satırları (re, im, stable)."""
        for k, y in enumerate(self.im):
            for j, x in enumerate(self.re):
                yield x, y, int(self.stable[k, j])


def _axes(window: Window, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    re_min, re_max, im_min, im_max = window
    if not (re_min < 0 < re_max and im_min < 0 < im_max):
        raise ValueError(f"Pencere orijini içermeli: {window}")
    if resolution < 2:
        raise ValueError("Çözünürlük en az 2 olmalı")
    dx = (re_max - re_min) / resolution
    dy = (im_max - im_min) / resolution
    re = re_min + (np.arange(resolution) + 0.5) * dx
    im = im_min + (np.arange(resolution) + 0.5) * dy
    return re, im


def _scan(
    t: ButcherDoubleTableau,
    mode: str,
    window: Window,
    resolution: int,
    zi_samples: np.ndarray,
    workers: int,
    slack: float,
) -> RegionResult:
    re, im = _axes(window, resolution)
    arr = t.arrays
    chunks = np.array_split(im, max(1, workers))
    job = partial(_scan_rows, arr, t.is_asi, zi_samples, slack, re)
    if workers > 1:
        with mp.Pool(workers) as pool:
            parts = pool.map(job, chunks)
    else:
        parts = [job(c) for c in chunks]
    stable = np.vstack([p for p in parts if p.size])

    touches = bool(stable[0, :].any() or stable[-1, :].any() or stable[:, 0].any() or stable[:, -1].any())
    if touches:
        logger.warning(f"{t.name} ({mode}): kararlı hücreler pencere kenarına değiyor; pencere küçük olabilir")
    result = RegionResult(
        scheme=t.name,
        mode=mode,
        window=tuple(window),
        resolution=resolution,
        re=re,
        im=im,
        stable=stable,
        area=0.0,
        zi_samples=zi_samples,
        touches_window=touches,
    )
    result.area = float(stable.sum()) * result.cell_area
    result.boundary = boundary_polylines(stable, re, im)
    logger.info(f"{t.name} ({mode}): alan ≈ {result.area:.4f} ({resolution}² hücre)")
    return result


def _scan_rows(arr, is_asi, zi_samples, slack, re, im_rows) -> np.ndarray:
    zE = re[None, :] + 1j * im_rows[:, None]
    return _stable_mask(arr, is_asi, zi_samples, slack, zE)


def explicit_region(
    t: Union[ButcherDoubleTableau, RungeKuttaTableau],
    window: Optional[Window] = None,
    resolution: Optional[int] = None,
    workers: Optional[int] = None,
    slack: Optional[float] = None,
) -> RegionResult:
    """Açık kısmın bölgesi: |R(0, z_E)| ≤ 1."""
    t = _double(t)
    result = _scan(
        t,
        "explicit",
        window or settings.window(),
        resolution or settings.region_resolution,
        np.zeros(1),
        workers or settings.workers,
        settings.stability_slack if slack is None else slack,
    )
    result.axis_half_length = imaginary_axis_intersection(t, "explicit")
    return result


def imex_region(
    t: ButcherDoubleTableau,
    window: Optional[Window] = None,
    resolution: Optional[int] = None,
    zi_samples: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
    slack: Optional[float] = None,
) -> RegionResult:
    """IMEX bölgesi: tüm z_I örneklerinde kararlı z_E noktalarının kesişimi."""
    samples = default_zi_samples() if zi_samples is None else np.asarray(zi_samples)
    if np.iscomplexobj(samples):
        raise ValueError("z_I örnekleri gerçel olmalı")
    samples = samples.astype(float)
    if samples.size == 0 or np.any(samples > 0):
        raise ValueError("z_I örnekleri boş olmamalı ve z_I ≤ 0 olmalı")
    if 0.0 not in samples:
        logger.warning("z_I örneklerinde 0 yok; bölge açık kısmın bölgesini kapsamayabilir")
    result = _scan(
        t,
        "imex",
        window or settings.window(),
        resolution or settings.region_resolution,
        samples,
        workers or settings.workers,
        settings.stability_slack if slack is None else slack,
    )
    result.axis_half_length = imaginary_axis_intersection(t, "imex", zi_samples=samples)
    return result



def imaginary_axis_intersection(
    t: Union[ButcherDoubleTableau, RungeKuttaTableau],
    mode: str = "imex",
    y_max: Optional[float] = None,
    tol: Optional[float] = None,
    samples: Optional[int] = None,
    zi_samples: Optional[np.ndarray] = None,
) -> float:
    """[0, y] aralığındaki tüm iy' noktaları kararlı olacak şekilde en büyük y.

    Örnekleme adımından küçük aralıklar 0 olarak raporlanır.
    """
    if mode not in ("explicit", "imex"):
        raise ValueError(f"Geçersiz mod: {mode!r}")
    t = _double(t)
    y_max = y_max or settings.axis_y_max
    tol = tol or settings.axis_tol
    samples = samples or settings.axis_samples
    if y_max <= 0 or tol <= 0:
        raise ValueError("y_max ve tol pozitif olmalı")
    zis = np.zeros(1) if mode == "explicit" else (default_zi_samples() if zi_samples is None else zi_samples)
    arr, slack = t.arrays, settings.stability_slack

    def stable(ys: np.ndarray) -> np.ndarray:
        return _stable_mask(arr, t.is_asi, zis, slack, 1j * np.asarray(ys, dtype=float))

    ys = np.linspace(0.0, y_max, samples + 1)
    ok = stable(ys)
    if ok.all():
        logger.warning(f"{t.name}: eksen aralığı y_max={y_max} sınırına ulaştı")
        return float(y_max)
    first_bad = int(np.argmin(ok))
    if first_bad <= 1:
        return 0.0
    lo, hi = ys[first_bad - 1], ys[first_bad]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable(np.array([mid]))[0]:
            lo = mid
        else:
            hi = mid
    return float(lo)
