import orjson
import pytest

from scripts.config import ConfigError, LabSettings, get_settings, load_config_file


def test_defaults():
    settings = LabSettings()
    assert settings.tol is None
    assert settings.indent_radius <= 0.1
    assert settings.linnik_targets == [1_000, 500_000]


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LAB_TOL", "1e-6")
    monkeypatch.setenv("LAB_SEED", "7")
    monkeypatch.setenv("LAB_LINNIK_TARGETS", "[100, 2000]")
    settings = get_settings()
    assert settings.tol == pytest.approx(1e-6)
    assert settings.seed == 7
    assert settings.linnik_targets == [100, 2000]


def test_explicit_overrides_win_and_none_is_ignored(monkeypatch):
    monkeypatch.setenv("LAB_SEED", "7")
    assert get_settings(seed=11).seed == 11
    assert get_settings(seed=None).seed == 7


def test_invalid_settings_raise_config_error():
    with pytest.raises(ConfigError):
        get_settings(tol=-1.0)
    with pytest.raises(ConfigError):
        get_settings(indent_radius=0.5)


def test_config_file_normalizes_dashes(tmp_path):
    path = tmp_path / "run.json"
    path.write_bytes(orjson.dumps({"n-max": 20, "potential": "x^2"}))
    assert load_config_file(str(path), {"n_max", "potential"}) == {"n_max": 20, "potential": "x^2"}


def test_config_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "run.json"
    path.write_bytes(orjson.dumps({"potentail": "x^2"}))
    with pytest.raises(ConfigError, match="potentail"):
        load_config_file(str(path), {"potential"})


@pytest.mark.parametrize("content", [b"{not json", b"[1, 2]"])
def test_config_file_must_be_an_object(tmp_path, content):
    path = tmp_path / "run.json"
    path.write_bytes(content)
    with pytest.raises(ConfigError):
        load_config_file(str(path), {"potential"})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "absent.json"), set())
    assert load_config_file(None, set()) == {}
