import pytest

from config.config import settings
from src.services.cache_manager import get_cache_manager
from src.tableaux import get_scheme


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    # Her test için ayrı önbellek ve çıktı klasörü; tek işçi
    monkeypatch.setattr(settings, "cache_dir", str(tmp_path / "cache"))
    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "results"))
    monkeypatch.setattr(settings, "workers", 1)
    monkeypatch.setattr(settings, "seed", 12345)
    monkeypatch.delenv("IMEX_CLI_OUTPUT", raising=False)
    yield settings


@pytest.fixture
def cache(isolated_settings):
    manager = get_cache_manager()
    yield manager
    manager.clear()


@pytest.fixture
def asi432():
    return get_scheme("ASI-SSP(4,3,2)")


@pytest.fixture
def third_order():
    return get_scheme("ASI-SSP(6,4,3)-axis")
