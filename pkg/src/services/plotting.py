"""
SVG çıktıları (matplotlib, Agg arka ucu).

Şekiller tek başına açılabilen SVG dosyalarıdır; etkileşimli pencere açılmaz.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Bileşen başına işaretler: x mavi elmas, y yeşil daire
COMPONENT_STYLE = {
    0: {"color": "tab:blue", "marker": "D", "label": "x"},
    1: {"color": "tab:green", "marker": "o", "label": "y"},
}


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # sabit meta veri: aynı girdi aynı dosyayı üretsin
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    logger.debug(f"SVG yazıldı: {path}")
    return path


def region_svg(
    path: PathLike,
    title: str,
    window: Sequence[float],
    imex_lines: Iterable[np.ndarray],
    explicit_lines: Optional[Iterable[np.ndarray]] = None,
) -> Path:
    """Kararlılık bölgesi sınırları: IMEX mavi kesikli, açık kısım siyah düz çizgi."""
    plt.rcParams["svg.hashsalt"] = "imex-region"
    fig, ax = plt.subplots(figsize=(6, 6))
    for k, line in enumerate(explicit_lines or []):
        ax.plot(line[:, 0], line[:, 1], "k-", lw=1.0, label="explicit part" if k == 0 else None)
    for k, line in enumerate(imex_lines):
        ax.plot(line[:, 0], line[:, 1], "b--", lw=1.2, label="IMEX" if k == 0 else None)
    ax.axhline(0, color="0.7", lw=0.5)
    ax.axvline(0, color="0.7", lw=0.5)
    ax.set_xlim(window[0], window[1])
    ax.set_ylim(window[2], window[3])
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="upper left")
    return _save(fig, path)


def rates_svg(
    path: PathLike,
    title: str,
    eps: np.ndarray,
    rates: np.ndarray,
    well_defined: np.ndarray,
    design_order: int,
) -> Path:
    """ε'a karşı yakınsama hızı; iyi tanımlı olmayan noktalar içi boş çizilir."""
    plt.rcParams["svg.hashsalt"] = "imex-rates"
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.where(eps > 0, eps, np.nan)
    for comp, style in COMPONENT_STYLE.items():
        if comp >= rates.shape[1]:
            continue
        ok = well_defined[:, comp]
        ax.semilogx(x[ok], rates[ok, comp], color=style["color"], marker=style["marker"], ls="-", label=style["label"])
        ax.semilogx(x[~ok], rates[~ok, comp], color=style["color"], marker=style["marker"], ls="none", mfc="none")
    ax.axhline(design_order, color="0.5", ls=":", lw=1)
    ax.set_xlabel("ε")
    ax.set_ylabel("rate")
    ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def errors_svg(
    path: PathLike,
    title: str,
    dts: np.ndarray,
    errors: np.ndarray,
    eps_labels: Sequence[str],
    component: int,
) -> Path:
    """Seçili ε satırları için log-log hata eğrileri."""
    plt.rcParams["svg.hashsalt"] = "imex-errors"
    style = COMPONENT_STYLE[component]
    fig, ax = plt.subplots(figsize=(6, 4))
    for row, label in zip(errors, eps_labels):
        ax.loglog(dts, row, marker=style["marker"], ms=3, label=label)
    ax.set_xlabel("Δt")
    ax.set_ylabel(f"E({style['label']})")
    ax.set_title(title)
    ax.legend(fontsize="small", ncol=2)
    return _save(fig, path)


def surface_svg(
    path: PathLike,
    title: str,
    eps: np.ndarray,
    dts: np.ndarray,
    errors: np.ndarray,
) -> Path:
    """log10 E yüzeyi (log10 ε, log10 Δt) düzleminde; Δt = ε köşegeni çizilir."""
    plt.rcParams["svg.hashsalt"] = "imex-surface"
    positive = eps > 0
    le = np.log10(eps[positive])
    ld = np.log10(dts)
    with np.errstate(divide="ignore"):
        lz = np.log10(np.where(errors[positive] > 0, errors[positive], np.nan))
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(le, ld, lz.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="log10 E")
    lo, hi = max(le.min(), ld.min()), min(le.max(), ld.max())
    if lo < hi:
        ax.plot([lo, hi], [lo, hi], "w--", lw=1)
    ax.set_xlabel("log10 ε")
    ax.set_ylabel("log10 Δt")
    ax.set_title(title)
    return _save(fig, path)

