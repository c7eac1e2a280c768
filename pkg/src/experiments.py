"""
(ε, Δt) düzleminde yakınsama çalışmaları.

Referans çözüm aynı şemayla ince Δt_ref adımıyla hesaplanır ve yalnızca kaba
ızgaraların ihtiyaç duyduğu zamanlarda saklanır. Kaba Δt değerleri Δt_ref'in
tam katlarına yuvarlanır. Aynı Δt için tüm ε değerleri tek bir yığın olarak
ilerletilir; yığın başarısız olursa üyeler tek tek çözülür ve başarısız
hücreler rapora yazılır.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from config.config import settings
from src.integrator import StepError, StepperConfig, StiffLimitError, Trajectory, integrate
from src.problems import TestProblem
from src.services import plotting
from src.services.cache_manager import CacheManager, get_cache_manager
from src.tableau import ButcherDoubleTableau
from src.tableaux import FEATURED_SCHEMES, get_scheme
from utils.ui_helpers import write_csv, write_json
from utils.validators import GridSpecValidator

logger = logging.getLogger(__name__)

COMPONENTS = ("x", "y")
REFERENCE_BATCH = 8

FIGURES: Dict[str, Tuple[str, str]] = {
    "fig2": ("pareschi", "equilibrium"),
    "fig3": ("pareschi", "equilibrium"),
    "fig4": ("pareschi", "perturbed"),
    "fig5": ("vanderpol", "equilibrium"),
    "fig6": ("vanderpol", "perturbed"),
}
FIG2_SCHEMES = ("ASI-SSP(4,3,2)", "ASI-SSP(3',3,2)-sd")


class GridMismatchError(ValueError):
    """Kaba ızgara zamanları referans ızgarasında bulunamadı."""
    pass


@dataclass(frozen=True)
class CellFailure:
    eps: float
    dt: Optional[float]  # None: referans çözümü başarısız
    error: str
    message: str

    def to_dict(self) -> Dict[str, object]:
        return {"eps": self.eps, "dt": self.dt, "error": self.error, "message": self.message}


def l2_error(coarse: Trajectory, reference: Trajectory) -> np.ndarray:
    """Bileşen başına E = sqrt(Σ h_i |x^i − x(t_i)|²), kaba ızgara zamanlarında.

    Düzgün ızgarada h_i = Δt olduğundan sqrt(Δt Σ |·|²) ile aynıdır.
    """
    if coarse.is_batch or reference.is_batch:
        raise ValueError("l2_error tek yörüngeler ister; yığınlar için member() kullanın")
    t_c = coarse.times[1:]
    if t_c.size == 0:
        return np.zeros(coarse.states.shape[-1])
    scale = reference.dt if reference.dt > 0 else float(np.min(np.diff(reference.times)))
    tol = 1e-6 * scale
    idx = np.searchsorted(reference.times, t_c - tol)
    idx_c = np.minimum(idx, reference.times.size - 1)
    bad = (idx >= reference.times.size) | (np.abs(reference.times[idx_c] - t_c) > tol)
    if np.any(bad):
        first = float(t_c[np.argmax(bad)])
        raise GridMismatchError(f"{int(bad.sum())} kaba zaman referans ızgarasında yok (ilk: t={first:.17g})")
    h = np.diff(coarse.times)
    diff = coarse.states[1:] - reference.states[idx_c]
    return np.sqrt(np.sum(h[:, None] * np.abs(diff) ** 2, axis=0))


def snap_dts(dts: Sequence[float], ref_dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Δt değerlerini Δt_ref'in tam katlarına yuvarla; (Δt, kat) döndür."""
    multiples = np.unique(np.maximum(1, np.rint(np.asarray(dts, dtype=float) / ref_dt)).astype(np.int64))
    return multiples * ref_dt, multiples


def fit_window(design_order: int) -> Tuple[float, float]:
    return (1e-3, 1.0) if design_order >= 3 else (1e-4, 1.0)


def fit_rate(
    dts: np.ndarray, errors: np.ndarray, window: Tuple[float, float], floor: float, r2_threshold: float
) -> Tuple[float, float, bool]:
    """log10 E – log10 Δt en küçük kareler eğimi; (hız, R², iyi tanımlı mı)."""
    lo, hi = window
    use = (dts >= lo * (1 - 1e-9)) & (dts <= hi * (1 + 1e-9)) & np.isfinite(errors) & (errors >= floor)
    if use.sum() < 3 or np.unique(dts[use]).size < 2:
        return float("nan"), float("nan"), False
    fit = stats.linregress(np.log10(dts[use]), np.log10(errors[use]))
    r2 = float(fit.rvalue**2)
    return float(fit.slope), r2, r2 >= r2_threshold


@dataclass
class ConvergenceReport:
    scheme: str
    design_order: int
    problem: str
    t_end: float
    ref_dt: float
    eps: np.ndarray
    dts: np.ndarray
    errors: np.ndarray  # (ε, Δt, bileşen)
    newton_fail: np.ndarray  # (ε, Δt)
    max_stage_iters: np.ndarray  # (ε, Δt)
    error_floor: float
    r2_threshold: float
    rates: np.ndarray = field(default=None)
    r2: np.ndarray = field(default=None)
    well_defined: np.ndarray = field(default=None)
    failures: List[CellFailure] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.rates is None:
            self.fit()

    @property
    def window(self) -> Tuple[float, float]:
        return fit_window(self.design_order)

    def fit(self) -> None:
        m, _, n = self.errors.shape
        self.rates = np.full((m, n), np.nan)
        self.r2 = np.full((m, n), np.nan)
        self.well_defined = np.zeros((m, n), dtype=bool)
        for i in range(m):
            for c in range(n):
                self.rates[i, c], self.r2[i, c], self.well_defined[i, c] = fit_rate(
                    self.dts, self.errors[i, :, c], self.window, self.error_floor, self.r2_threshold
                )
        excluded = int(np.sum(np.isfinite(self.errors) & (self.errors < self.error_floor)))
        if excluded:
            logger.warning(f"{self.scheme}: {excluded} hata değeri taban ({self.error_floor:g}) altında, uyumdan çıkarıldı")
        poor = int((~self.well_defined).sum())
        if poor:
            logger.warning(f"{self.scheme} ({self.problem}): {poor} hız iyi tanımlı değil")

    def rows_where(self, lo: float, hi: float) -> np.ndarray:
        return (self.eps >= lo) & (self.eps <= hi)

    def surface_rows(self):
        for i, e in enumerate(self.eps):
            for k, dt in enumerate(self.dts):
                yield [e, dt, *self.errors[i, k], int(self.newton_fail[i, k])]

    def rate_rows(self):
        for i, e in enumerate(self.eps):
            yield [e, *self.rates[i], *self.r2[i], *[int(w) for w in self.well_defined[i]]]

    def write_surface_csv(self, path: Union[str, Path]) -> Path:
        header = ["eps", "dt"] + [f"err_{c}" for c in COMPONENTS] + ["newton_fail"]
        return write_csv(path, header, self.surface_rows())

    def write_rates_csv(self, path: Union[str, Path]) -> Path:
        header = (
            ["eps"] + [f"rate_{c}" for c in COMPONENTS] + [f"r2_{c}" for c in COMPONENTS]
            + [f"well_defined_{c}" for c in COMPONENTS]
        )
        return write_csv(path, header, self.rate_rows())

    def to_dict(self) -> Dict[str, object]:
        return {
            "scheme": self.scheme,
            "design_order": self.design_order,
            "problem": self.problem,
            "t_end": self.t_end,
            "reference_dt": self.ref_dt,
            "eps": self.eps,
            "dts": self.dts,
            "fit_window": list(self.window),
            "error_floor": self.error_floor,
            "error_floor_excluded_from_fits": True,
            "r2_threshold": self.r2_threshold,
            "max_stage_newton_iterations": int(self.max_stage_iters.max(initial=0)),
            "min_error": float(np.nanmin(self.errors)) if np.isfinite(self.errors).any() else None,
            "failures": [f.to_dict() for f in self.failures],
        }


# --- Yığın çalıştırma (işçi süreçlerde de çalışır) ---

def _integrate_members(
    t: ButcherDoubleTableau,
    problem: TestProblem,
    eps_values: Sequence[float],
    dt: float,
    t_end: float,
    cfg: StepperConfig,
    record_every: Optional[Sequence[int]],
    seed: int,
) -> List[Union[Trajectory, Tuple[str, str]]]:
    """Önce yığın halinde dene; başarısızsa her ε'u ayrı çöz. Hatalar (sınıf, mesaj) olarak döner."""
    eps_arr = np.asarray(eps_values, dtype=float)
    if eps_arr.size > 1:
        U0 = np.tile(problem.initial_state(), (eps_arr.size, 1))
        try:
            traj = integrate(t, problem.build(eps_arr, seed), U0, dt, t_end, cfg, record_every)
            return [traj.member(j) for j in range(eps_arr.size)]
        except (StepError, StiffLimitError) as e:
            logger.info(f"{t.name}: yığın başarısız ({type(e).__name__}), ε değerleri tek tek çözülüyor")
    out: List[Union[Trajectory, Tuple[str, str]]] = []
    for eps in eps_arr:
        try:
            out.append(integrate(t, problem.build(float(eps), seed), problem.initial_state(), dt, t_end, cfg, record_every))
        except (StepError, StiffLimitError) as e:
            notes = "; ".join(getattr(e, "__notes__", []))
            out.append((type(e).__name__, f"{e}{' (' + notes + ')' if notes else ''}"))
    return out


def _run_task(task: tuple) -> List[Union[Trajectory, Tuple[str, str]]]:
    return _integrate_members(*task)


def _map(tasks: List[tuple], workers: int) -> List[list]:
    if workers > 1 and len(tasks) > 1:
        with mp.Pool(min(workers, len(tasks))) as pool:
            return pool.map(_run_task, tasks)
    return [_run_task(task) for task in tasks]


def _reference_key(t, problem, eps, ref_dt, t_end, cfg, multiples) -> str:
    return CacheManager.make_key(
        kind="reference",
        scheme=t.name,
        fingerprint=t.fingerprint(),
        problem=problem.label,
        eps=repr(float(eps)),
        ref_dt=repr(float(ref_dt)),
        t_end=repr(float(t_end)),
        newton=cfg.to_dict(),
        multiples=[int(m) for m in multiples],
    )


def sweep(
    scheme: Union[str, ButcherDoubleTableau],
    problem: TestProblem,
    eps_grid: Union[str, Sequence[float], None] = None,
    dt_grid: Union[str, Sequence[float], None] = None,
    t_end: Optional[float] = None,
    cfg: Optional[StepperConfig] = None,
    ref_dt: Optional[float] = None,
    workers: Optional[int] = None,
    cache: Optional[CacheManager] = None,
    seed: Optional[int] = None,
) -> ConvergenceReport:
    """Hata yüzeyi E(ε, Δt) ve ε başına yakınsama hızları."""
    t = get_scheme(scheme) if isinstance(scheme, str) else scheme
    eps = _grid(eps_grid, settings.eps_grid)
    dts_raw = _grid(dt_grid, settings.dt_grid)
    t_end = problem.default_t_end() if t_end is None else t_end
    ref_dt = settings.reference_dt if ref_dt is None else ref_dt
    cfg = cfg or StepperConfig.from_settings()
    workers = workers or settings.workers
    cache = cache or get_cache_manager()
    seed = settings.seed if seed is None else seed
    if t_end <= 0 or ref_dt <= 0:
        raise ValueError("t_end ve ref_dt pozitif olmalı")
    if np.any(dts_raw <= 0):
        raise ValueError("Δt ızgarası pozitif olmalı")

    dts, multiples = snap_dts(dts_raw, ref_dt)
    keep = dts <= t_end * (1 + 1e-12)
    if not keep.all():
        logger.warning(f"t_end={t_end} değerinden büyük {int((~keep).sum())} Δt atlandı")
        dts, multiples = dts[keep], multiples[keep]
    if dts.size == 0:
        raise ValueError("Izgarada t_end'den küçük Δt kalmadı")
    logger.info(f"{t.name} / {problem.label}: {eps.size}×{dts.size} hücre, Δt_ref={ref_dt:g}, t_end={t_end:g}")

    failures: List[CellFailure] = []

    # referanslar
    references: Dict[int, Trajectory] = {}
    keys = {i: _reference_key(t, problem, e, ref_dt, t_end, cfg, multiples) for i, e in enumerate(eps)}
    for i, key in keys.items():
        hit = cache.get(key)
        if hit is not None:
            references[i] = Trajectory.from_arrays(hit, scheme=t.name)
    missing = [i for i in range(eps.size) if i not in references]
    chunks = [missing[k:k + REFERENCE_BATCH] for k in range(0, len(missing), REFERENCE_BATCH)]
    record = tuple(int(m) for m in multiples)
    tasks = [(t, problem, tuple(eps[chunk]), ref_dt, t_end, cfg, record, seed) for chunk in chunks]
    for chunk, results in zip(chunks, _map(tasks, workers)):
        for i, res in zip(chunk, results):
            if isinstance(res, Trajectory):
                references[i] = res
                cache.set(keys[i], res.to_arrays())
            else:
                failures.append(CellFailure(float(eps[i]), None, *res))
                logger.warning(f"{t.name}: ε={eps[i]:g} referans çözümü başarısız: {res[1]}")

    # kaba çözümler: Δt başına bir yığın
    live = sorted(references)
    errors = np.full((eps.size, dts.size, 2), np.nan)
    newton_fail = np.zeros((eps.size, dts.size), dtype=bool)
    max_iters = np.zeros((eps.size, dts.size), dtype=np.int64)
    newton_fail[[i for i in range(eps.size) if i not in references], :] = True
    if live:
        tasks = [(t, problem, tuple(eps[live]), float(dt), t_end, cfg, None, seed) for dt in dts]
        for k, results in enumerate(_map(tasks, workers)):
            for i, res in zip(live, results):
                if isinstance(res, Trajectory):
                    errors[i, k] = l2_error(res, references[i])
                    max_iters[i, k] = int(res.max_stage_iters.max(initial=0))
                else:
                    newton_fail[i, k] = True
                    failures.append(CellFailure(float(eps[i]), float(dts[k]), *res))
                    logger.debug(f"{t.name}: hücre (ε={eps[i]:g}, Δt={dts[k]:g}) başarısız: {res[1]}")
    logger.info(f"{t.name}: önbellek {cache.get_stats()['hits']} isabet / {cache.get_stats()['misses']} ıska")

    return ConvergenceReport(
        scheme=t.name,
        design_order=t.design_order,
        problem=problem.label,
        t_end=float(t_end),
        ref_dt=float(ref_dt),
        eps=eps,
        dts=dts,
        errors=errors,
        newton_fail=newton_fail,
        max_stage_iters=max_iters,
        error_floor=settings.error_floor,
        r2_threshold=settings.fit_r2_threshold,
        failures=failures,
    )


def _grid(value: Union[str, Sequence[float], None], default: str) -> np.ndarray:
    if value is None:
        value = default
    if isinstance(value, str):
        return GridSpecValidator.parse(value)
    grid = np.unique(np.asarray(value, dtype=float))
    if grid.size == 0 or np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValueError(f"Geçersiz ızgara: {value!r}")
    return grid


@dataclass
class RidgeLocus:
    eps: np.ndarray
    dt_star: np.ndarray  # (ε, bileşen)
    distance: np.ndarray  # |log10 Δt* − log10 ε|
    flat: np.ndarray
    interior: np.ndarray
    in_band: np.ndarray
    band: Tuple[float, float]

    def median_distance(self, component: int = 1) -> float:
        use = self.in_band & ~self.flat[:, component]
        return float(np.median(self.distance[use, component])) if use.any() else float("nan")

    def to_dict(self) -> Dict[str, object]:
        return {
            "band": list(self.band),
            "eps": self.eps,
            "dt_star": self.dt_star,
            "distance": self.distance,
            "flat": self.flat,
            "interior": self.interior,
            "median_distance": {c: self.median_distance(k) for k, c in enumerate(COMPONENTS)},
        }


def ridge_locus(report: ConvergenceReport, band: Tuple[float, float] = (1e-5, 1e-2)) -> RidgeLocus:
    """Her ε > 0 satırında E'yi en büyük yapan Δt; düz satırlar işaretlenir."""
    decades = lambda v: np.log10(v.max() / v.min()) if v.size and v.min() > 0 else 0.0  # noqa: E731
    positive = report.eps > 0
    if decades(report.eps[positive]) < 3 or decades(report.dts) < 3:
        logger.warning("Sırt tespiti için ızgaralar her eksende en az 3 on yıl kapsamalı")
    eps = report.eps[positive]
    errs = report.errors[positive]
    m, k, n = errs.shape
    dt_star = np.full((m, n), np.nan)
    distance = np.full((m, n), np.nan)
    flat = np.zeros((m, n), dtype=bool)
    interior = np.zeros((m, n), dtype=bool)
    for i in range(m):
        for c in range(n):
            row = errs[i, :, c]
            if not np.all(np.isfinite(row)) or row.max() - row.min() <= 1e-14 * max(row.max(), 1e-300):
                flat[i, c] = True
                continue
            j = int(np.argmax(row))
            dt_star[i, c] = report.dts[j]
            distance[i, c] = abs(np.log10(report.dts[j]) - np.log10(eps[i]))
            interior[i, c] = 0 < j < k - 1
    in_band = (eps >= band[0]) & (eps <= band[1])
    return RidgeLocus(eps, dt_star, distance, flat, interior, in_band, band)


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", name.replace("'", "p")).strip("_")


def run_figure(
    figure: str,
    out_dir: Union[str, Path],
    schemes: Optional[Sequence[str]] = None,
    eps_grid: Union[str, Sequence[float], None] = None,
    dt_grid: Union[str, Sequence[float], None] = None,
    t_end: Optional[float] = None,
    ref_dt: Optional[float] = None,
    cfg: Optional[StepperConfig] = None,
    workers: Optional[int] = None,
) -> List[Path]:
    """Bir şeklin yapılandırmasıyla her şema için CSV ve SVG dosyalarını üret."""
    if figure not in FIGURES:
        raise ValueError(f"Bilinmeyen şekil: {figure!r} (seçenekler: {', '.join(FIGURES)})")
    if schemes is None:
        schemes = FIG2_SCHEMES if figure == "fig2" else FEATURED_SCHEMES
    problem = TestProblem.of(*FIGURES[figure])
    out = Path(out_dir)
    files: List[Path] = []
    for name in schemes:
        t = get_scheme(name)
        report = sweep(t, problem, eps_grid, dt_grid, t_end, cfg, ref_dt, workers)
        stem = out / f"{figure}_{_slug(t.name)}"
        files.append(report.write_surface_csv(f"{stem}_surface.csv"))
        files.append(report.write_rates_csv(f"{stem}_rates.csv"))
        files.append(write_json(f"{stem}_report.json", report.to_dict()))
        title = f"{t.name}, {problem.label}"
        if figure == "fig2":
            for c, label in enumerate(COMPONENTS):
                files.append(plotting.surface_svg(f"{stem}_surface_{label}.svg", f"{title}, {label}", report.eps, report.dts, report.errors[:, :, c]))
        else:
            files.append(plotting.rates_svg(f"{stem}_rates.svg", title, report.eps, report.rates, report.well_defined, t.design_order))
            shown = [i for i, e in enumerate(report.eps) if e == 0 or np.isclose(np.log10(e), np.round(np.log10(e)))]
            labels = ["ε=0" if report.eps[i] == 0 else f"ε={report.eps[i]:.0e}" for i in shown]
            for c, label in enumerate(COMPONENTS):
                files.append(plotting.errors_svg(f"{stem}_errors_{label}.svg", f"{title}, {label}", report.dts, report.errors[shown, :, c], labels, c))
        logger.info(f"{figure}: {t.name} tamamlandı")
    return files
