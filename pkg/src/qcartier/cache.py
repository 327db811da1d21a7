"""Content-addressed JSON cache for series and sequence tables.

Entries are keyed by (object name, ring token, precision, tool version); a
cached series at higher precision satisfies a lower-precision request by
truncation.  Corrupted entries are rebuilt, never trusted.  An unwritable
cache directory degrades to a per-process in-memory store.
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
from pathlib import Path

from . import __version__
from .sequences import SequenceCache
from .series import TruncatedSeries

__all__ = ["CacheStore", "default_cache_dir"]

log = logging.getLogger(__name__)

_NAME_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


def default_cache_dir() -> Path:
    env = os.environ.get("QCARTIER_CACHE_DIR")
    if env:
        return Path(env)
    xdg = os.environ.get("XDG_CACHE_HOME")
    base = Path(xdg) if xdg else Path.home() / ".cache"
    return base / "qcartier"


class CacheStore:
    """Series/sequence cache over one directory (or memory when dir is None)."""

    def __init__(self, directory: Path | str | None, version: str | None = None):
        self.version = version or __version__
        self.memory: dict = {}
        self.hits = 0
        self.truncated_hits = 0
        self.misses = 0
        self.directory = None
        if directory is not None:
            directory = Path(directory)
            try:
                directory.mkdir(parents=True, exist_ok=True)
                probe = directory / ".writable"
                probe.write_text("ok")
                probe.unlink()
                self.directory = directory
            except OSError:
                log.warning("cache dir %s not writable; using in-memory cache", directory)

    # -- filenames -----------------------------------------------------------

    def _series_name(self, obj: str, ring_token: str, precision: int) -> str:
        return f"{obj}__{ring_token}__N{precision}__v{self.version}.json"

    def _series_pattern(self, obj: str, ring_token: str) -> re.Pattern:
        return re.compile(
            re.escape(f"{obj}__{ring_token}__N")
            + r"(\d+)"
            + re.escape(f"__v{self.version}.json")
            + "$"
        )

    @staticmethod
    def _check_name(obj: str):
        if not _NAME_RE.match(obj):
            raise ValueError(f"cache object name {obj!r} has unsafe characters")

    # -- series ----------------------------------------------------------------

    def get_series(self, obj: str, ring, precision: int) -> TruncatedSeries | None:
        self._check_name(obj)
        token = ring.name_token()
        exact_key = (obj, token, precision)
        hit = self._load(self._series_name(obj, token, precision), exact_key)
        if hit is not None:
            series = self._decode_series(hit, ring)
            if series is not None:
                self.hits += 1
                return series
        # a deeper expansion still answers the question after truncation
        best = None
        for prec in self._stored_precisions(obj, token):
            if prec > precision and (best is None or prec < best):
                best = prec
        if best is not None:
            data = self._load(self._series_name(obj, token, best), (obj, token, best))
            series = self._decode_series(data, ring) if data is not None else None
            if series is not None:
                self.truncated_hits += 1
                return series.truncate(precision)
        self.misses += 1
        return None

    def put_series(self, obj: str, series: TruncatedSeries) -> None:
        self._check_name(obj)
        token = series.ring.name_token()
        self._store(
            self._series_name(obj, token, series.precision),
            (obj, token, series.precision),
            series.to_json_dict(),
        )

    def get_or_build_series(self, obj: str, ring, precision: int, builder):
        found = self.get_series(obj, ring, precision)
        if found is not None:
            return found
        series = builder()
        self.put_series(obj, series)
        return series

    def _stored_precisions(self, obj: str, token: str):
        out = []
        pattern = self._series_pattern(obj, token)
        if self.directory is not None:
            for path in self.directory.iterdir():
                m = pattern.match(path.name)
                if m:
                    out.append(int(m.group(1)))
        for key in self.memory:
            if isinstance(key, tuple) and len(key) == 3 and key[0] == obj and key[1] == token:
                out.append(key[2])
        return out

    def _decode_series(self, data, ring) -> TruncatedSeries | None:
        try:
            series = TruncatedSeries.from_json_dict(data)
        except Exception:
            return None
        if series.ring != ring:
            return None
        return series

    # -- sequences ----------------------------------------------------------------

    def get_sequences(self, n_max: int, provenance: str) -> SequenceCache | None:
        key = ("sequences", provenance, n_max)
        name = f"sequences__{provenance}__N{n_max}__v{self.version}.json"
        data = self._load(name, key)
        if data is not None:
            try:
                cache = SequenceCache.from_json_dict(data)
            except Exception:
                cache = None
            if cache is not None and cache.n_max >= n_max:
                self.hits += 1
                return cache
        # any deeper table works: scan stored lengths
        pattern = re.compile(
            re.escape(f"sequences__{provenance}__N") + r"(\d+)" + re.escape(f"__v{self.version}.json") + "$"
        )
        candidates = []
        if self.directory is not None:
            for path in self.directory.iterdir():
                m = pattern.match(path.name)
                if m:
                    candidates.append(int(m.group(1)))
        for k in self.memory:
            if isinstance(k, tuple) and k[:2] == ("sequences", provenance):
                candidates.append(k[2])
        for n in sorted(c for c in candidates if c > n_max):
            name = f"sequences__{provenance}__N{n}__v{self.version}.json"
            data = self._load(name, ("sequences", provenance, n))
            if data is not None:
                try:
                    cache = SequenceCache.from_json_dict(data)
                except Exception:
                    continue
                self.truncated_hits += 1
                return cache
        self.misses += 1
        return None

    def put_sequences(self, cache: SequenceCache) -> None:
        key = ("sequences", cache.provenance, cache.n_max)
        name = f"sequences__{cache.provenance}__N{cache.n_max}__v{self.version}.json"
        self._store(name, key, cache.to_json_dict())

    # -- backing store ----------------------------------------------------------------

    def _load(self, filename: str, key):
        if key in self.memory:
            return self.memory[key]
        if self.directory is None:
            return None
        path = self.directory / filename
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            log.warning("cache entry %s is corrupted; rebuilding", path.name)
            return None

    def _store(self, filename: str, key, payload) -> None:
        self.memory[key] = payload
        if self.directory is None:
            return
        path = self.directory / filename
        try:
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                json.dump(payload, fh)
            os.replace(tmp, path)
        except OSError:
            log.warning("failed to write cache entry %s", path.name)
