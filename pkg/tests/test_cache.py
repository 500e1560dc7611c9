import pytest

from db.sqlite_db import SQLiteDB
from main_logic.config import CODE_VERSION, CONVENTION_TAG, RunConfig
from main_logic.invariants import GradedDims, akh, kh
from main_logic.linkdiag import diagram_hash, model_link
from manager.cache_manager import ResultCacheManager
from view_models.homology_view_model import CachedHomologyEngine, open_cache


@pytest.fixture
def cache(tmp_path):
    manager = ResultCacheManager(str(tmp_path / "nested" / "cache.db"))
    yield manager
    manager.close()


def test_sqlite_db_round_trip(tmp_path):
    with SQLiteDB(str(tmp_path / "t.db")) as db:
        db.create_table("items", {"id": "INTEGER PRIMARY KEY", "name": "TEXT"})
        db.execute("INSERT INTO items (name) VALUES (?)", ["a"])
        db.execute("INSERT INTO items (name) VALUES (?)", ("b",))
        assert db.fetch_one("SELECT name FROM items WHERE id = ?", (1,)) == {"name": "a"}
        assert [row["name"] for row in db.fetch_all("SELECT name FROM items")] == ["a", "b"]
        assert db.fetch_one("SELECT name FROM items WHERE id = ?", (9,)) is None
    assert db.connection is None


def test_sqlite_db_writes_visible_to_other_connection(tmp_path):
    path = str(tmp_path / "shared.db")
    with SQLiteDB(path) as writer, SQLiteDB(path, timeout=1.0) as reader:
        writer.create_table("graded_dims", {"cache_key": "TEXT PRIMARY KEY", "payload": "TEXT"})
        writer.execute("INSERT INTO graded_dims VALUES (?, ?)", ("kh:abc", "{}"))
        assert reader.fetch_one("SELECT payload FROM graded_dims WHERE cache_key = ?",
                                ("kh:abc",)) == {"payload": "{}"}


def test_put_and_get(cache):
    dims = kh(model_link("hopf_positive"))
    assert cache.get("kh", dims.diagram_hash) is None
    cache.put("kh", dims)
    assert cache.get("kh", dims.diagram_hash) == dims
    assert cache.get("akh", dims.diagram_hash) is None
    assert cache.count() == 1


def test_put_replaces_same_key(cache):
    dims = akh(model_link("U2"))
    cache.put("akh", dims)
    cache.put("akh", dims)
    assert cache.count() == 1
    entry = cache.get_all_entries()[0]
    assert entry["convention"] == CONVENTION_TAG
    assert entry["code_version"] == CODE_VERSION
    assert "payload" not in entry


def test_put_requires_diagram_hash(cache):
    with pytest.raises(ValueError):
        cache.put("kh", GradedDims.from_mapping({(0, 1): 1}))


def test_delete_and_clear(cache):
    unknot = kh(model_link("unknot"))
    hopf = kh(model_link("hopf_positive"))
    cache.put("kh", unknot)
    cache.put("kh", hopf)
    assert cache.delete("kh", unknot.diagram_hash)
    assert not cache.delete("kh", unknot.diagram_hash)
    assert cache.clear() == 1
    assert cache.stats()["entries"] == 0


def test_other_convention_or_version_is_rejected(tmp_path):
    path = str(tmp_path / "cache.db")
    dims = kh(model_link("unknot"))
    writer = ResultCacheManager(path)
    writer.put("kh", dims)
    writer.close()

    for reader in (
        ResultCacheManager(path, convention="other:v0"),
        ResultCacheManager(path, code_version="0.0.1"),
    ):
        assert reader.get("kh", dims.diagram_hash) is None
        reader.close()

    # 伪造一条键正确但内容约定不符的记录
    stale = GradedDims(dims.entries, "other:v0", dims.diagram_hash)
    tampered = ResultCacheManager(path)
    tampered.db.execute(
        "UPDATE graded_dims SET payload = ? WHERE cache_key = ?",
        (stale.to_json(), tampered.make_key("kh", dims.diagram_hash)),
    )
    assert tampered.get("kh", dims.diagram_hash) is None
    tampered.close()


def test_cached_engine_uses_cache(cache):
    engine = CachedHomologyEngine(20, cache)
    hopf = model_link("hopf_positive")
    first = engine.kh(hopf)
    assert cache.count() == 1
    assert cache.get("kh", diagram_hash(hopf)) == first
    assert engine.kh(hopf) == first
    assert engine.akh(model_link("U2")) == akh(model_link("U2"))
    assert cache.count() == 2


def test_cached_engine_without_cache():
    engine = CachedHomologyEngine(20)
    assert engine.kh(model_link("unknot")).dims == {(0, 1): 1, (0, -1): 1}


def test_open_cache_follows_config(tmp_path, monkeypatch):
    monkeypatch.delenv("CAUSALITY_ASSIST_CACHE_DIR", raising=False)
    assert open_cache(RunConfig()) is None
    assert open_cache(RunConfig(cache_dir=str(tmp_path), use_cache=False)) is None
    manager = open_cache(RunConfig(cache_dir=str(tmp_path)))
    assert manager is not None
    assert manager.stats()["path"].startswith(str(tmp_path))
    manager.close()


def test_cached_engine_stores_reference_dims(cache):
    engine = CachedHomologyEngine(20, cache)
    u2 = engine.reference("U2")
    p3 = engine.reference("P3")
    assert cache.get("akh", diagram_hash(model_link("U2"))) == u2
    assert cache.get("kh", diagram_hash(model_link("P3"))) == p3
    assert cache.count() == 2
