"""Tests for the division polynomial disk cache."""

import json
import logging
from pathlib import Path

import pytest

from fiberlevel.cache import CACHE_DIR_ENV, CACHE_MODE_ENV, PsiCache, curve_key, default_cache_dir
from fiberlevel.cache_modes import CacheMode
from fiberlevel.elliptic import DivisionPolynomials, WeierstrassCurve, curve_from_ainvs
from fiberlevel.errors import CacheWriteError
from fiberlevel.exact_arith import RatPoly


class TestCacheMode:
    def test_enum_values(self) -> None:
        assert CacheMode.OFF.value == "off"
        assert CacheMode.READ_WRITE.value == "read_write"
        assert CacheMode.READ_ONLY.value == "read_only"
        assert CacheMode.REFRESH.value == "refresh"

    def test_from_string(self) -> None:
        assert CacheMode("read_only") == CacheMode.READ_ONLY

    @pytest.mark.parametrize(
        ("mode", "can_read", "can_write"),
        [
            (CacheMode.OFF, False, False),
            (CacheMode.READ_WRITE, True, True),
            (CacheMode.READ_ONLY, True, False),
            (CacheMode.REFRESH, False, True),
        ],
    )
    def test_capabilities(self, mode: CacheMode, can_read: bool, can_write: bool) -> None:
        assert mode.can_read is can_read
        assert mode.can_write is can_write


class TestCurveKey:
    def test_stable_hex_digest(self, curve_54b2: WeierstrassCurve) -> None:
        key = curve_key(curve_54b2)
        assert len(key) == 64
        assert key == curve_key(curve_from_ainvs(1, -1, 1, -14, 29))

    def test_distinguishes_curves(self, curve_54b2: WeierstrassCurve, graphexample: WeierstrassCurve) -> None:
        assert curve_key(curve_54b2) != curve_key(graphexample)


class TestPsiCache:
    def test_store_and_reload(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        computed = DivisionPolynomials(curve_54b2, PsiCache(tmp_cache_dir))[9]
        assert PsiCache(tmp_cache_dir).path_for(curve_54b2, 9).exists()

        reader = PsiCache(tmp_cache_dir, mode=CacheMode.READ_ONLY)
        assert reader.load(curve_54b2, 9) == computed
        assert DivisionPolynomials(curve_54b2, reader)[9] == computed

    def test_entry_format(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        cache = PsiCache(tmp_cache_dir)
        cache.store(curve_54b2, 5, RatPoly.from_coeffs([1, -2, 3]))
        data = json.loads(cache.path_for(curve_54b2, 5).read_text(encoding="utf-8"))
        assert data == {
            "format": "fiberlevel-psi",
            "version": 1,
            "ainvs": ["1", "-1", "1", "-14", "29"],
            "n": 5,
            "coefficients": ["1", "-2", "3"],
        }

    def test_stored_entry_is_used(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        planted = RatPoly.from_coeffs([7, 7])
        PsiCache(tmp_cache_dir).store(curve_54b2, 5, planted)
        assert DivisionPolynomials(curve_54b2, PsiCache(tmp_cache_dir))[5] == planted

    def test_read_only_never_writes(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        DivisionPolynomials(curve_54b2, PsiCache(tmp_cache_dir, mode=CacheMode.READ_ONLY))[7]
        assert not tmp_cache_dir.exists()

    def test_off_ignores_disk(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        PsiCache(tmp_cache_dir).store(curve_54b2, 5, RatPoly.from_coeffs([7, 7]))
        off = PsiCache(tmp_cache_dir, mode=CacheMode.OFF)
        assert off.load(curve_54b2, 5) is None
        assert DivisionPolynomials(curve_54b2, off)[5].degree == 12

    def test_refresh_overwrites(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        PsiCache(tmp_cache_dir).store(curve_54b2, 5, RatPoly.from_coeffs([7, 7]))
        recomputed = DivisionPolynomials(curve_54b2, PsiCache(tmp_cache_dir, mode=CacheMode.REFRESH))[5]
        assert recomputed.degree == 12
        assert PsiCache(tmp_cache_dir).load(curve_54b2, 5) == recomputed

    def test_miss_returns_none(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        assert PsiCache(tmp_cache_dir).load(curve_54b2, 5) is None

    def test_header_mismatch_is_a_miss(
        self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        cache = PsiCache(tmp_cache_dir)
        cache.store(curve_54b2, 5, RatPoly.from_coeffs([1, 1]))
        path = cache.path_for(curve_54b2, 5)
        data = json.loads(path.read_text(encoding="utf-8"))
        data["version"] = 99
        path.write_text(json.dumps(data), encoding="utf-8")

        with caplog.at_level(logging.WARNING, logger="fiberlevel.cache"):
            assert cache.load(curve_54b2, 5) is None
        assert "Ignoring unreadable psi cache entry" in caplog.text

    def test_wrong_index_is_a_miss(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        cache = PsiCache(tmp_cache_dir)
        cache.store(curve_54b2, 5, RatPoly.from_coeffs([1, 1]))
        cache.path_for(curve_54b2, 5).replace(cache.path_for(curve_54b2, 6))
        assert cache.load(curve_54b2, 6) is None

    def test_corrupt_json_is_a_miss(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        cache = PsiCache(tmp_cache_dir)
        tmp_cache_dir.mkdir(parents=True)
        cache.path_for(curve_54b2, 5).write_text("{not json", encoding="utf-8")
        assert cache.load(curve_54b2, 5) is None

    def test_no_temporary_files_left(self, curve_54b2: WeierstrassCurve, tmp_cache_dir: Path) -> None:
        DivisionPolynomials(curve_54b2, PsiCache(tmp_cache_dir))[9]
        assert not list(tmp_cache_dir.glob("*.tmp"))
        assert all(p.suffix == ".json" for p in tmp_cache_dir.iterdir())

    def test_write_failure(self, curve_54b2: WeierstrassCurve, tmp_path: Path) -> None:
        blocker = tmp_path / "blocker"
        blocker.write_text("", encoding="utf-8")
        cache = PsiCache(blocker / "psi")
        with pytest.raises(CacheWriteError) as exc_info:
            cache.store(curve_54b2, 5, RatPoly.from_coeffs([1, 1]))
        assert exc_info.value.path.endswith(".json")
        assert isinstance(exc_info.value.cause, OSError)

    def test_string_directory(self, tmp_path: Path) -> None:
        assert PsiCache(str(tmp_path)).directory == tmp_path


class TestEnvironment:
    def test_from_env(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(CACHE_DIR_ENV, str(tmp_path))
        monkeypatch.setenv(CACHE_MODE_ENV, "read_only")
        cache = PsiCache.from_env()
        assert cache.directory == tmp_path
        assert cache.mode == CacheMode.READ_ONLY

    def test_explicit_mode_wins(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(CACHE_DIR_ENV, str(tmp_path))
        monkeypatch.setenv(CACHE_MODE_ENV, "read_only")
        assert PsiCache.from_env(CacheMode.OFF).mode == CacheMode.OFF

    def test_bad_mode_raises(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv(CACHE_MODE_ENV, "sometimes")
        with pytest.raises(ValueError):
            PsiCache.from_env()

    def test_xdg_fallback(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv(CACHE_DIR_ENV, raising=False)
        monkeypatch.setenv("XDG_CACHE_HOME", str(tmp_path))
        assert default_cache_dir() == tmp_path / "fiberlevel"

    def test_home_fallback(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv(CACHE_DIR_ENV, raising=False)
        monkeypatch.delenv("XDG_CACHE_HOME", raising=False)
        monkeypatch.setenv("HOME", str(tmp_path))
        assert default_cache_dir() == tmp_path / ".cache" / "fiberlevel"
