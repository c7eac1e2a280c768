"""
Referans yörüngeleri için iki katmanlı önbellek yöneticisi.
Bellek içi sözlük önce denenir; ardından önbellek dizinindeki .npz dosyaları.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config.config import settings

logger = logging.getLogger(__name__)

Arrays = Dict[str, np.ndarray]


class CacheManager:
    """Dizi sözlükleri için bellek + disk önbelleği."""

    def __init__(self, cache_dir: Optional[str] = None, enabled: Optional[bool] = None, max_memory_items: int = 256):
        self.cache_dir = Path(cache_dir or settings.cache_dir)
        self.enabled = settings.cache_enabled if enabled is None else enabled
        self.max_memory_items = max_memory_items
        self.memory_cache: Dict[str, Arrays] = {}
        self.memory_cache_lock = threading.RLock()
        self.cache_stats = {
            'hits': 0,
            'misses': 0,
            'disk_hits': 0,
            'memory_hits': 0,
            'writes': 0,
        }

    @staticmethod
    def make_key(**parts: Any) -> str:
        """Parçalardan kararlı bir anahtar üret (sıralı JSON'un md5 özeti)."""
        payload = json.dumps(parts, sort_keys=True, default=repr)
        return hashlib.md5(payload.encode('utf-8')).hexdigest()

    def _path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.npz"

    def get(self, key: str) -> Optional[Arrays]:
        """Önbellekten değer al."""
        if not self.enabled:
            return None
        with self.memory_cache_lock:
            if key in self.memory_cache:
                self.cache_stats['hits'] += 1
                self.cache_stats['memory_hits'] += 1
                return self.memory_cache[key]

        path = self._path(key)
        if path.exists():
            try:
                with np.load(path, allow_pickle=False) as data:
                    value = {name: data[name] for name in data.files}
            except (OSError, ValueError) as e:
                logger.warning(f"Bozuk önbellek dosyası atlandı {path}: {e}")
            else:
                with self.memory_cache_lock:
                    self.cache_stats['hits'] += 1
                    self.cache_stats['disk_hits'] += 1
                    self._remember(key, value)
                logger.info(f"Önbellek diskten okundu: {key[:12]}")
                return value

        with self.memory_cache_lock:
            self.cache_stats['misses'] += 1
        return None

    def _remember(self, key: str, value: Arrays) -> None:
        self.memory_cache[key] = value
        # en eski girdileri at
        while len(self.memory_cache) > self.max_memory_items:
            self.memory_cache.pop(next(iter(self.memory_cache)))

    def set(self, key: str, value: Arrays) -> bool:
        """Değeri belleğe ve diske yaz. Disk yazımı atomiktir (geçici dosya + rename)."""
        if not self.enabled:
            return False
        with self.memory_cache_lock:
            self._remember(key, value)

        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".npz.tmp")
            with os.fdopen(fd, "wb") as f:
                np.savez(f, **value)
            os.replace(tmp, self._path(key))
        except OSError as e:
            logger.warning(f"Önbellek diske yazılamadı: {e}")
            return False
        with self.memory_cache_lock:
            self.cache_stats['writes'] += 1
        return True

    def delete(self, key: str) -> bool:
        with self.memory_cache_lock:
            memory_deleted = self.memory_cache.pop(key, None) is not None
        path = self._path(key)
        disk_deleted = path.exists()
        if disk_deleted:
            path.unlink()
        return memory_deleted or disk_deleted

    def clear(self) -> int:
        """Tüm önbelleği temizle; silinen dosya sayısını döndür."""
        with self.memory_cache_lock:
            self.memory_cache.clear()
        count = 0
        if self.cache_dir.exists():
            for path in self.cache_dir.glob("*.npz"):
                path.unlink()
                count += 1
        return count

    def get_stats(self) -> Dict[str, Any]:
        """Önbellek istatistiklerini al."""
        with self.memory_cache_lock:
            stats = self.cache_stats.copy()
            stats['memory_cache_size'] = len(self.memory_cache)
        stats['enabled'] = self.enabled
        stats['cache_dir'] = str(self.cache_dir)
        total = stats['hits'] + stats['misses']
        stats['hit_ratio'] = stats['hits'] / total if total else 0.0
        return stats


_manager: Optional[CacheManager] = None


def get_cache_manager() -> CacheManager:
    """Süreç başına tek önbellek yöneticisi; ayarlar ilk çağrıda okunur."""
    global _manager
    if _manager is None or _manager.cache_dir != Path(settings.cache_dir):
        _manager = CacheManager()
    return _manager
