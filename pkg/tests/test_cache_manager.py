from pathlib import Path

import numpy as np

from src.services.cache_manager import CacheManager, get_cache_manager


def arrays():
    return {"times": np.linspace(0.0, 1.0, 5), "states": np.arange(10.0).reshape(5, 2)}


def test_make_key_is_order_independent():
    a = CacheManager.make_key(scheme="ASI-SSP(4,3,2)", eps=1e-3, dt=0.01)
    b = CacheManager.make_key(dt=0.01, eps=1e-3, scheme="ASI-SSP(4,3,2)")
    assert a == b
    assert a != CacheManager.make_key(scheme="ASI-SSP(4,3,2)", eps=1e-4, dt=0.01)


def test_set_and_get_from_memory(tmp_path):
    cache = CacheManager(cache_dir=str(tmp_path), enabled=True)
    assert cache.set("k", arrays())
    value = cache.get("k")
    np.testing.assert_array_equal(value["states"], arrays()["states"])
    assert cache.get_stats()["memory_hits"] == 1


def test_disk_hit_after_memory_is_cleared(tmp_path):
    cache = CacheManager(cache_dir=str(tmp_path), enabled=True)
    cache.set("k", arrays())
    cache.memory_cache.clear()
    value = cache.get("k")
    np.testing.assert_array_equal(value["times"], arrays()["times"])
    stats = cache.get_stats()
    assert stats["disk_hits"] == 1
    assert stats["hit_ratio"] == 1.0


def test_miss_delete_and_clear(tmp_path):
    cache = CacheManager(cache_dir=str(tmp_path), enabled=True)
    assert cache.get("missing") is None
    cache.set("a", arrays())
    cache.set("b", arrays())
    assert cache.delete("a")
    assert not cache.delete("a")
    assert cache.clear() == 1
    assert cache.get("b") is None
    assert cache.get_stats()["misses"] == 2


def test_corrupt_file_is_ignored(tmp_path):
    cache = CacheManager(cache_dir=str(tmp_path), enabled=True)
    (tmp_path / "bad.npz").write_bytes(b"not a zip")
    assert cache.get("bad") is None


def test_memory_limit_evicts_oldest(tmp_path):
    cache = CacheManager(cache_dir=str(tmp_path), enabled=True, max_memory_items=2)
    for key in ("a", "b", "c"):
        cache.set(key, arrays())
    assert list(cache.memory_cache) == ["b", "c"]


def test_disabled_cache(tmp_path):
    cache = CacheManager(cache_dir=str(tmp_path), enabled=False)
    assert not cache.set("k", arrays())
    assert cache.get("k") is None
    assert not any(tmp_path.iterdir())


def test_manager_follows_settings(isolated_settings):
    manager = get_cache_manager()
    assert manager.cache_dir == Path(isolated_settings.cache_dir)
    assert get_cache_manager() is manager
