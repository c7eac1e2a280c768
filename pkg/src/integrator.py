"""
IMEX Runge-Kutta adımlayıcı: ∂t U = F(U) + R(U)/ε.

ASI biçimi her ε ∈ [0, ∞) için aynı kodla çalışır; standart biçim son
birleştirme aşamasında ε'a böldüğünden yalnız ε > 0 kabul eder.

Durumlar (n,) ya da (m, n) biçiminde olabilir; ikinci durumda m bağımsız
problem (örneğin farklı ε değerleri) aynı adım döngüsünde ilerletilir.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from config.config import settings
from src.tableau import ButcherDoubleTableau

logger = logging.getLogger(__name__)

State = np.ndarray
Evaluator = Callable[[State], State]


class JacobianMode(str, Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite-difference"


class StepError(RuntimeError):
    """Bir adım tamamlanamadı. `step_index` integrate tarafından doldurulur."""

    step_index: Optional[int] = None
    stage: Optional[int] = None


class NewtonConvergenceError(StepError):
    def __init__(self, stage: int, iterations: int, update_norm: float):
        self.stage = stage
        self.iterations = iterations
        self.update_norm = update_norm
        super().__init__(f"Newton aşama {stage} için {iterations} iterasyonda yakınsamadı (|δ|={update_norm:.3e})")


class SingularStageJacobianError(StepError):
    def __init__(self, stage: int, detail: str = ""):
        self.stage = stage
        super().__init__(f"Aşama {stage} Jacobian'ı tekil{': ' + detail if detail else ''}")


class NonFiniteStateError(StepError):
    def __init__(self, stage: int):
        self.stage = stage
        super().__init__(f"Aşama {stage} sonlu olmayan değer üretti (NaN/Inf)")


class StiffLimitError(ValueError):
    """Standart biçim ε = 0 ile çalıştırılamaz."""
    pass


@dataclass(frozen=True)
class StepperConfig:
    rtol: float = 1e-13
    atol: float = 1e-14
    max_iter: int = 100
    jacobian_mode: JacobianMode = JacobianMode.ANALYTIC
    fd_scale: float = float(np.sqrt(np.finfo(float).eps))

    def __post_init__(self) -> None:
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("Newton toleransları pozitif olmalı")
        if self.max_iter < 1:
            raise ValueError("max_iter en az 1 olmalı")
        if self.fd_scale <= 0:
            raise ValueError("fd_scale pozitif olmalı")
        object.__setattr__(self, "jacobian_mode", JacobianMode(self.jacobian_mode))

    @classmethod
    def from_settings(cls) -> "StepperConfig":
        return cls(
            rtol=settings.newton_rtol,
            atol=settings.newton_atol,
            max_iter=settings.newton_max_iter,
            jacobian_mode=JacobianMode(settings.jacobian_mode),
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "rtol": self.rtol,
            "atol": self.atol,
            "max_iter": self.max_iter,
            "jacobian_mode": self.jacobian_mode.value,
            "fd_scale": self.fd_scale,
        }


@dataclass
class PartitionedProblem:
    """Bölünmüş sert sistem.

    flux ve relaxation son eksen üzerinde çalışmalı ki (m, n) yığınları da
    değerlendirilebilsin. eps skaler ya da yığın üyesi başına (m,) dizisi olabilir.
    """
    flux: Evaluator
    relaxation: Evaluator
    eps: Union[float, np.ndarray]
    stiff_mask: Sequence[bool]
    jacobian: Optional[Callable[[State], np.ndarray]] = None
    name: str = "problem"
    spot_checks: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        self.stiff_mask = np.asarray(self.stiff_mask, dtype=bool)
        if self.stiff_mask.ndim != 1 or self.stiff_mask.size == 0:
            raise ValueError("stiff_mask tek boyutlu ve boş olmayan olmalı")
        eps = np.asarray(self.eps, dtype=float)
        if not np.all(np.isfinite(eps)) or np.any(eps < 0):
            raise ValueError(f"ε sonlu ve negatif olmayan olmalı, gelen: {self.eps!r}")
        self.eps = float(eps) if eps.ndim == 0 else eps
        self._spot_check()

    @property
    def n(self) -> int:
        return int(self.stiff_mask.size)

    @property
    def stiff_index(self) -> np.ndarray:
        return np.flatnonzero(self.stiff_mask)

    def _spot_check(self) -> None:
        """Sert olmayan bileşenlerde R'nin sıfır olduğunu rastgele durumlarda kontrol et."""
        if self.stiff_mask.all():
            return
        rng = np.random.default_rng(self.seed)
        free = ~self.stiff_mask
        for _ in range(self.spot_checks):
            U = rng.standard_normal(self.n)
            r = np.asarray(self.relaxation(U))
            if np.any(r[free] != 0):
                raise ValueError(f"{self.name}: sert olmayan bileşenlerde R sıfır değil ({r[free]})")

    def relaxation_jacobian(self, U: State, cfg: StepperConfig) -> np.ndarray:
        """∂R/∂U, (..., n, n). Analitik Jacobian yoksa ileri farklar kullanılır."""
        if self.jacobian is not None and cfg.jacobian_mode is JacobianMode.ANALYTIC:
            return np.asarray(self.jacobian(U))
        R0 = np.asarray(self.relaxation(U))
        J = np.zeros(U.shape + (self.n,), dtype=np.result_type(U, R0))
        for k in self.stiff_index:
            h = cfg.fd_scale * np.maximum(1.0, np.abs(U[..., k]))
            Up = U.copy()
            Up[..., k] = Up[..., k] + h
            J[..., :, k] = (np.asarray(self.relaxation(Up)) - R0) / np.asarray(h)[..., None]
        return J


@dataclass
class Trajectory:
    """Kaydedilen zamanlar ve durumlar.

    newton_iters[k], times[k] ile times[k+1] arasındaki adımların toplam Newton
    iterasyonu; max_stage_iters aynı aralıktaki en büyük aşama iterasyonu.
    """
    times: np.ndarray
    states: np.ndarray
    newton_iters: np.ndarray
    max_stage_iters: np.ndarray
    dt: float = 0.0
    scheme: str = ""

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states)
        self.newton_iters = np.asarray(self.newton_iters, dtype=np.int64)
        self.max_stage_iters = np.asarray(self.max_stage_iters, dtype=np.int64)
        if self.states.shape[0] != self.times.size:
            raise ValueError("times ve states uzunlukları uyuşmuyor")
        if self.newton_iters.size != max(self.times.size - 1, 0) or self.max_stage_iters.size != self.newton_iters.size:
            raise ValueError("Newton istatistikleri aralık sayısıyla uyuşmuyor")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Zamanlar kesin artan olmalı")

    @property
    def final(self) -> State:
        return self.states[-1]

    @property
    def is_batch(self) -> bool:
        return self.states.ndim == 3

    def member(self, j: int) -> "Trajectory":
        if not self.is_batch:
            raise ValueError("Yığın olmayan yörünge")
        return replace(self, states=self.states[:, j, :])

    def to_csv(self, path: Union[str, Path]) -> Path:
        if self.is_batch:
            raise ValueError("Yığın yörünge CSV'ye yazılamaz; önce member() kullanın")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        n = self.states.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["t"] + [f"U_{i + 1}" for i in range(n)] + ["newton_iters"])
            iters = np.concatenate([[0], self.newton_iters])
            for t, u, it in zip(self.times, self.states, iters):
                writer.writerow([format(t, ".17g")] + [format(float(np.real(x)), ".17g") for x in u] + [int(it)])
        return path

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "times": self.times,
            "states": self.states,
            "newton_iters": self.newton_iters,
            "max_stage_iters": self.max_stage_iters,
            "dt": np.array(self.dt),
        }

    @staticmethod
    def from_arrays(data: Dict[str, np.ndarray], scheme: str = "") -> "Trajectory":
        return Trajectory(
            times=data["times"],
            states=data["states"],
            newton_iters=data["newton_iters"],
            max_stage_iters=data["max_stage_iters"],
            dt=float(data["dt"]),
            scheme=scheme,
        )


@dataclass
class StepStats:
    iterations: int = 0
    max_stage: int = 0


def _column(eps: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    return eps if np.ndim(eps) == 0 else np.asarray(eps)[:, None]


def _all_finite(x: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(x)))


def _newton(
    p: PartitionedProblem,
    expl: State,
    imp: State,
    a_ii: float,
    dt: float,
    cfg: StepperConfig,
    stage: int,
) -> tuple:
    """Sert bileşenler için ε(U − expl) − Δt·imp − Δt·a_ii·R(U) = 0 denklemini çöz."""
    idx = p.stiff_index
    k = idx.size
    eps = _column(p.eps)
    U = expl.copy()
    target = expl[..., idx]
    imp_s = imp[..., idx]
    update = np.inf
    # yığın üyeleri yakınsadıkça dondurulur
    done = np.zeros(U.shape[:-1], dtype=bool)
    for it in range(1, cfg.max_iter + 1):
        r = np.asarray(p.relaxation(U))[..., idx]
        res = eps * (U[..., idx] - target) - dt * imp_s - dt * a_ii * r
        JR = p.relaxation_jacobian(U, cfg)[..., idx[:, None], idx[None, :]]
        if k == 1:
            J = eps - dt * a_ii * JR[..., 0, 0] if np.ndim(eps) == 0 else eps[:, 0] - dt * a_ii * JR[..., 0, 0]
            if np.any(J == 0):
                raise SingularStageJacobianError(stage, "ε − Δt·a_ii·∂R/∂U = 0")
            delta = (-res[..., 0] / J)[..., None]
        else:
            eye = np.eye(k)
            J = (eps if np.ndim(eps) == 0 else np.asarray(p.eps)[:, None, None]) * eye - dt * a_ii * JR
            try:
                delta = np.linalg.solve(J, -res[..., None])[..., 0]
            except np.linalg.LinAlgError as e:
                raise SingularStageJacobianError(stage, str(e)) from e
        delta = np.where(done[..., None], 0.0, delta)
        if not _all_finite(delta):
            raise NonFiniteStateError(stage)
        U[..., idx] = U[..., idx] + delta
        update = float(np.max(np.abs(delta)))
        done |= np.all(np.abs(delta) <= cfg.atol + cfg.rtol * np.abs(U[..., idx]), axis=-1)
        if np.all(done):
            return U, it
    raise NewtonConvergenceError(stage, cfg.max_iter, update)


def _stages(
    t: ButcherDoubleTableau,
    p: PartitionedProblem,
    U_n: State,
    dt: float,
    cfg: StepperConfig,
    stats: StepStats,
    weights_needed: bool,
) -> tuple:
    """Aşama değerlerini sırayla çöz; gerekli F ve R değerlendirmelerini döndür."""
    arr = t.arrays
    A, B, s = arr.A, arr.B, t.s
    idx = p.stiff_index
    eps = _column(p.eps)
    U_n = np.asarray(U_n)
    U_n = U_n.astype(np.result_type(U_n, float), copy=False)

    need_F = [bool(np.any(B[i + 1:, i] != 0)) or (weights_needed and arr.omega[i] != 0) for i in range(s)]
    need_R = [bool(np.any(A[i + 1:, i] != 0)) or (weights_needed and arr.w[i] != 0) for i in range(s)]
    F: List[Optional[State]] = [None] * s
    Rv: List[Optional[State]] = [None] * s
    U_i = U_n

    for i in range(s):
        expl = U_n.copy()
        for j in range(i):
            if B[i, j] != 0:
                expl = expl + dt * B[i, j] * F[j]
        imp = np.zeros_like(expl)
        coupled = False
        for j in range(i):
            if A[i, j] != 0:
                imp = imp + A[i, j] * Rv[j]
                coupled = True
        a_ii = A[i, i]

        if a_ii == 0 and not coupled:
            U_i = expl
        elif a_ii == 0:
            if np.any(np.asarray(p.eps) == 0):
                raise SingularStageJacobianError(i + 1, "a_ii = 0 iken ε = 0")
            U_i = expl.copy()
            U_i[..., idx] = U_i[..., idx] + dt * imp[..., idx] / eps
        else:
            U_i, its = _newton(p, expl, imp, a_ii, dt, cfg, i + 1)
            stats.iterations += its
            stats.max_stage = max(stats.max_stage, its)

        if not _all_finite(U_i):
            raise NonFiniteStateError(i + 1)
        if need_F[i]:
            F[i] = np.asarray(p.flux(U_i))
        if need_R[i]:
            Rv[i] = np.asarray(p.relaxation(U_i))
    return U_i, F, Rv


def step_asi(
    t: ButcherDoubleTableau,
    p: PartitionedProblem,
    U_n: State,
    dt: float,
    cfg: Optional[StepperConfig] = None,
    stats: Optional[StepStats] = None,
) -> State:
    """ASI adımı: U^{n+1} = U^{(s)}."""
    if not t.is_asi:
        raise ValueError(f"{t.name} ASI biçiminde değil; step_standard kullanın")
    if dt < 0:
        raise ValueError("dt negatif olamaz")
    cfg = cfg or StepperConfig()
    U_s, _, _ = _stages(t, p, U_n, dt, cfg, stats or StepStats(), weights_needed=False)
    return U_s


def step_standard(
    t: ButcherDoubleTableau,
    p: PartitionedProblem,
    U_n: State,
    dt: float,
    cfg: Optional[StepperConfig] = None,
    stats: Optional[StepStats] = None,
) -> State:
    """Standart biçim: U^{n+1} = U^n + Δt Σ w_i R_i/ε + Δt Σ ω_i F_i."""
    if np.any(np.asarray(p.eps) == 0):
        raise StiffLimitError(
            f"{t.name}: standart biçimin son aşaması ε'a böler; ε = 0 için ASI biçimli bir şema kullanın"
        )
    if dt < 0:
        raise ValueError("dt negatif olamaz")
    cfg = cfg or StepperConfig()
    arr = t.arrays
    U_n = np.asarray(U_n)
    _, F, Rv = _stages(t, p, U_n, dt, cfg, stats or StepStats(), weights_needed=True)
    eps = _column(p.eps)
    out = U_n.astype(np.result_type(U_n, float), copy=True)
    for i in range(t.s):
        if arr.w[i] != 0:
            out = out + dt * arr.w[i] * Rv[i] / eps
        if arr.omega[i] != 0:
            out = out + dt * arr.omega[i] * F[i]
    return out


def step(
    t: ButcherDoubleTableau,
    p: PartitionedProblem,
    U_n: State,
    dt: float,
    cfg: Optional[StepperConfig] = None,
    stats: Optional[StepStats] = None,
) -> State:
    """Tablonun biçimine göre step_asi ya da step_standard."""
    fn = step_asi if t.is_asi else step_standard
    return fn(t, p, U_n, dt, cfg, stats)


def time_grid(dt: float, t_end: float) -> np.ndarray:
    """Düzgün zaman ızgarası; t_end'e tam bölünmüyorsa son adım kısaltılır."""
    if t_end < 0:
        raise ValueError("t_end negatif olamaz")
    if t_end == 0:
        return np.zeros(1)
    if dt <= 0:
        raise ValueError("dt pozitif olmalı")
    ratio = t_end / dt
    n = round(ratio)
    if n >= 1 and abs(ratio - n) <= 64 * np.finfo(float).eps * max(1.0, ratio):
        times = np.arange(n + 1) * dt
    else:
        n = int(np.floor(ratio))
        times = np.append(np.arange(n + 1) * dt, t_end)
    times[-1] = t_end
    return times


def integrate(
    t: ButcherDoubleTableau,
    p: PartitionedProblem,
    U_0: State,
    dt: float,
    t_end: float,
    cfg: Optional[StepperConfig] = None,
    record_every: Optional[Sequence[int]] = None,
) -> Trajectory:
    """[0, t_end] aralığını sabit Δt ile ilerlet.

    record_every verilirse yalnızca indeksi bu tam sayılardan birine bölünen
    adımlar (ve son adım) saklanır.
    """
    cfg = cfg or StepperConfig()
    times = time_grid(dt, t_end)
    n_steps = times.size - 1
    keep = np.ones(times.size, dtype=bool)
    if record_every:
        keep[:] = False
        for m in record_every:
            keep[:: int(m)] = True
        keep[-1] = True

    U = np.asarray(U_0)
    U = U.astype(np.result_type(U, float), copy=True)
    states = [U.copy()]
    iters: List[int] = []
    max_stage: List[int] = []
    interval = StepStats()
    for k in range(n_steps):
        h = times[k + 1] - times[k]
        stats = StepStats()
        try:
            U = step(t, p, U, h, cfg, stats)
        except StepError as e:
            e.step_index = k
            if hasattr(e, "add_note"):  # 3.11+
                e.add_note(f"adım {k}, t = {times[k]:.17g}, şema {t.name}")
            raise
        interval.iterations += stats.iterations
        interval.max_stage = max(interval.max_stage, stats.max_stage)
        if keep[k + 1]:
            states.append(U.copy())
            iters.append(interval.iterations)
            max_stage.append(interval.max_stage)
            interval = StepStats()
    logger.debug(f"{t.name}: {n_steps} adım tamamlandı (Δt={dt:g}, t_end={t_end:g})")
    return Trajectory(
        times=times[keep],
        states=np.array(states),
        newton_iters=np.array(iters, dtype=np.int64),
        max_stage_iters=np.array(max_stage, dtype=np.int64),
        dt=float(dt),
        scheme=t.name,
    )
