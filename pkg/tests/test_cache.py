import json

from qcartier.cache import CacheStore
from qcartier.rings import ExactIntegers, ResidueRing
from qcartier.sequences import build_sequence_cache
from qcartier.series import TruncatedSeries

Z = ExactIntegers()


def make_series(n=10):
    return TruncatedSeries.from_coeffs(Z, list(range(1, n)), n - 1)


def test_series_round_trip(tmp_path):
    store = CacheStore(tmp_path)
    s = make_series()
    store.put_series("obj", s)
    fresh = CacheStore(tmp_path)  # no in-memory state
    assert fresh.get_series("obj", Z, s.precision) == s
    assert fresh.hits == 1


def test_truncated_hit_avoids_rebuild(tmp_path):
    store = CacheStore(tmp_path)
    store.put_series("obj", make_series(40))
    fresh = CacheStore(tmp_path)
    got = fresh.get_series("obj", Z, 12)
    assert got is not None and got.precision == 12
    assert fresh.truncated_hits == 1
    assert got == make_series(40).truncate(12)


def test_get_or_build_series(tmp_path):
    store = CacheStore(tmp_path)
    calls = []

    def builder():
        calls.append(1)
        return make_series()

    a = store.get_or_build_series("x", Z, 9, builder)
    b = store.get_or_build_series("x", Z, 9, builder)
    assert a == b and len(calls) == 1


def test_version_bump_invalidates(tmp_path):
    CacheStore(tmp_path, version="1").put_series("obj", make_series())
    newer = CacheStore(tmp_path, version="2")
    assert newer.get_series("obj", Z, 9) is None
    assert newer.misses == 1


def test_ring_mismatch_is_miss(tmp_path):
    store = CacheStore(tmp_path)
    store.put_series("obj", make_series())
    fresh = CacheStore(tmp_path)
    assert fresh.get_series("obj", ResidueRing(7, 2), 9) is None


def test_corrupted_entry_rebuilt(tmp_path):
    store = CacheStore(tmp_path)
    store.put_series("obj", make_series())
    [path] = list(tmp_path.iterdir())
    path.write_text("{ not json")
    fresh = CacheStore(tmp_path)
    assert fresh.get_series("obj", Z, 9) is None
    rebuilt = fresh.get_or_build_series("obj", Z, 9, make_series)
    assert rebuilt == make_series()
    assert json.loads(path.read_text())  # overwritten with a valid entry


def test_unwritable_directory_degrades_to_memory(tmp_path):
    # a path below a regular file can never be created
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    store = CacheStore(blocker / "sub")
    assert store.directory is None
    store.put_series("obj", make_series())
    assert store.get_series("obj", Z, 9) == make_series()


def test_sequences_cache(tmp_path):
    store = CacheStore(tmp_path)
    cache = build_sequence_cache(30)
    store.put_sequences(cache)
    fresh = CacheStore(tmp_path)
    got = fresh.get_sequences(20, "Recurrence")
    assert got is not None and got.n_max >= 20
    assert got.a_mix[:7] == cache.a_mix[:7]


def test_memory_only_store():
    store = CacheStore(None)
    store.put_series("obj", make_series())
    assert store.get_series("obj", Z, 9) == make_series()
