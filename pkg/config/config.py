import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ("true", "1", "yes")


@dataclass
class Settings:
    # Newton çözücü ayarları
    newton_rtol: float = float(os.getenv("IMEX_NEWTON_RTOL", "1e-13"))
    newton_atol: float = float(os.getenv("IMEX_NEWTON_ATOL", "1e-14"))
    newton_max_iter: int = int(os.getenv("IMEX_NEWTON_MAX_ITER", "100"))
    jacobian_mode: str = os.getenv("IMEX_JACOBIAN_MODE", "analytic")  # analytic | finite-difference

    # Mertebe koşulları
    order_tolerance: float = float(os.getenv("IMEX_ORDER_TOL", "1e-10"))

    # Kararlılık bölgesi taraması
    region_window: str = os.getenv("IMEX_REGION_WINDOW", "-10,4,-10,10")  # re_min,re_max,im_min,im_max
    region_resolution: int = int(os.getenv("IMEX_REGION_RESOLUTION", "2000"))
    stability_slack: float = float(os.getenv("IMEX_STABILITY_SLACK", "1e-14"))
    zi_per_decade: int = int(os.getenv("IMEX_ZI_PER_DECADE", "4"))
    axis_y_max: float = float(os.getenv("IMEX_AXIS_Y_MAX", "5"))
    axis_tol: float = float(os.getenv("IMEX_AXIS_TOL", "1e-6"))
    axis_samples: int = int(os.getenv("IMEX_AXIS_SAMPLES", "2000"))

    # Mutlak monotonluk
    monotonicity_tol: float = float(os.getenv("IMEX_MONOTONICITY_TOL", "1e-12"))
    radius_r_max: float = float(os.getenv("IMEX_RADIUS_R_MAX", "10"))
    radius_tol: float = float(os.getenv("IMEX_RADIUS_TOL", "1e-6"))
    radius_samples: int = int(os.getenv("IMEX_RADIUS_SAMPLES", "400"))

    # Yakınsama deneyleri
    reference_dt: float = float(os.getenv("IMEX_REFERENCE_DT", "1e-6"))
    t_end_pareschi: float = float(os.getenv("IMEX_T_END_PARESCHI", "5"))
    t_end_vanderpol: float = float(os.getenv("IMEX_T_END_VANDERPOL", "0.5"))  # kıvrım noktası t≈0.807'den önce
    eps_grid: str = os.getenv("IMEX_EPS_GRID", "0+logspace:1e-8:1:5")
    dt_grid: str = os.getenv("IMEX_DT_GRID", "logspace:1e-4:1:10")
    error_floor: float = float(os.getenv("IMEX_ERROR_FLOOR", "1e-11"))
    fit_r2_threshold: float = float(os.getenv("IMEX_FIT_R2", "0.98"))

    # Paralellik ve tekrarlanabilirlik
    workers: int = int(os.getenv("IMEX_WORKERS", str(os.cpu_count() or 1)))
    seed: int = int(os.getenv("IMEX_SEED", "20240101"))

    # Dosya konumları
    output_dir: str = os.getenv("IMEX_OUTPUT_DIR", "results")
    cache_dir: str = os.getenv("IMEX_CACHE_DIR", ".imex-cache")
    cache_enabled: bool = _env_bool("IMEX_CACHE_ENABLED", "True")

    # Uygulama ayarları
    app_name: str = os.getenv("APP_NAME", "ASI-SSP IMEX Araç Takımı")
    app_version: str = os.getenv("APP_VERSION", "1.0.0")
    log_level: str = os.getenv("IMEX_LOG_LEVEL", "WARNING")

    def window(self) -> tuple[float, float, float, float]:
        """IMEX_REGION_WINDOW değerini (re_min, re_max, im_min, im_max) demetine çevir."""
        parts = [float(p) for p in self.region_window.split(",")]
        if len(parts) != 4:
            raise ValueError(f"Geçersiz pencere: {self.region_window!r}")
        return parts[0], parts[1], parts[2], parts[3]

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


settings = Settings()
