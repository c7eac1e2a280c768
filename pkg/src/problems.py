"""
Yakınsama deneylerinde kullanılan iki sert test problemi.

Her iki problemde de gevşeme terimi yalnızca ikinci bileşene (y) etki eder;
ε'a bölünmeyen terimler açık kısma (F) atanır.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Union

import numpy as np

from config.config import settings
from src.integrator import PartitionedProblem

logger = logging.getLogger(__name__)

STIFF_MASK = (False, True)


class ProblemId(str, Enum):
    PARESCHI = "pareschi"
    VANDERPOL = "vanderpol"


class InitialCondition(str, Enum):
    EQUILIBRIUM = "equilibrium"
    PERTURBED = "perturbed"


def _pareschi_flux(U: np.ndarray) -> np.ndarray:
    x, y = U[..., 0], U[..., 1]
    return np.stack([-y, x], axis=-1)


def _pareschi_relaxation(U: np.ndarray) -> np.ndarray:
    x, y = U[..., 0], U[..., 1]
    return np.stack([np.zeros_like(x), np.sin(x) - y], axis=-1)


def _pareschi_jacobian(U: np.ndarray) -> np.ndarray:
    x = U[..., 0]
    J = np.zeros(U.shape + (2,), dtype=U.dtype)
    J[..., 1, 0] = np.cos(x)
    J[..., 1, 1] = -1.0
    return J


def _vanderpol_flux(U: np.ndarray) -> np.ndarray:
    y = U[..., 1]
    return np.stack([y, np.zeros_like(y)], axis=-1)


def _vanderpol_relaxation(U: np.ndarray) -> np.ndarray:
    x, y = U[..., 0], U[..., 1]
    return np.stack([np.zeros_like(x), (1.0 - x**2) * y - x], axis=-1)


def _vanderpol_jacobian(U: np.ndarray) -> np.ndarray:
    x, y = U[..., 0], U[..., 1]
    J = np.zeros(U.shape + (2,), dtype=U.dtype)
    J[..., 1, 0] = -2.0 * x * y - 1.0
    J[..., 1, 1] = 1.0 - x**2
    return J


_INITIAL: Dict[ProblemId, Dict[InitialCondition, tuple]] = {
    ProblemId.PARESCHI: {
        InitialCondition.EQUILIBRIUM: (np.pi / 2, 1.0),
        InitialCondition.PERTURBED: (np.pi / 2, 0.5),
    },
    ProblemId.VANDERPOL: {
        InitialCondition.EQUILIBRIUM: (2.0, -2.0 / 3.0),
        InitialCondition.PERTURBED: (2.0, -1.0),
    },
}

_EVALUATORS = {
    ProblemId.PARESCHI: (_pareschi_flux, _pareschi_relaxation, _pareschi_jacobian),
    ProblemId.VANDERPOL: (_vanderpol_flux, _vanderpol_relaxation, _vanderpol_jacobian),
}


@dataclass(frozen=True)
class TestProblem:
    """Problem kimliği ve başlangıç koşulu; ε'a göre PartitionedProblem üretir."""
    __test__ = False  # pytest bu sınıfı test sınıfı sanmasın

    problem: ProblemId
    ic: InitialCondition

    @staticmethod
    def of(problem: Union[str, ProblemId], ic: Union[str, InitialCondition]) -> "TestProblem":
        try:
            return TestProblem(ProblemId(problem), InitialCondition(ic))
        except ValueError as e:
            raise ValueError(
                f"Bilinmeyen problem/başlangıç koşulu: {problem!r}/{ic!r} "
                f"(problemler: {[p.value for p in ProblemId]}, koşullar: {[c.value for c in InitialCondition]})"
            ) from e

    @property
    def label(self) -> str:
        return f"{self.problem.value}-{self.ic.value}"

    def initial_state(self) -> np.ndarray:
        return np.array(_INITIAL[self.problem][self.ic], dtype=float)

    def default_t_end(self) -> float:
        if self.problem is ProblemId.PARESCHI:
            return settings.t_end_pareschi
        return settings.t_end_vanderpol

    def build(self, eps: Union[float, np.ndarray], seed: int = 0) -> PartitionedProblem:
        flux, relaxation, jacobian = _EVALUATORS[self.problem]
        return PartitionedProblem(
            flux=flux,
            relaxation=relaxation,
            eps=eps,
            stiff_mask=STIFF_MASK,
            jacobian=jacobian,
            name=self.label,
            seed=seed,
        )

    def equilibrium_residual(self, U: np.ndarray) -> float:
        """|R_y(U)|; denge başlangıç koşullarında tam sıfır."""
        _, relaxation, _ = _EVALUATORS[self.problem]
        return float(np.abs(relaxation(np.asarray(U, dtype=float))[..., 1]).max())


def linear_problem(lam_I: complex, lam_E: complex, eps: float = 1.0) -> PartitionedProblem:
    """Skaler doğrusal test problemi: R = λ_I U, F = λ_E U."""
    return PartitionedProblem(
        flux=lambda U: lam_E * U,
        relaxation=lambda U: lam_I * U,
        eps=eps,
        stiff_mask=(True,),
        jacobian=lambda U: np.full(np.shape(U) + (1,), lam_I, dtype=complex),
        name="linear",
    )
