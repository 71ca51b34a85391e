import pytest

from fkdv.config import ContinuationConfig, Settings, load_settings, with_overrides
from fkdv.errors import ConfigError

YAML = """
kernel:
  grid_resolution: 129
  modes: null
continuation:
  alpha: "1.5"
  k: 2
  modes: 64
  s_start: 0.001
  pseudo_arclength: "yes"
  unknown_key: 3
logging:
  level: ${FKDV_TEST_LEVEL:-WARNING}
output:
  directory: ${FKDV_TEST_OUT}
"""


def _write(tmp_path, text):
    path = tmp_path / "settings.yaml"
    path.write_text(text)
    return path


def test_load_settings_from_yaml(tmp_path, monkeypatch):
    monkeypatch.delenv("FKDV_TEST_LEVEL", raising=False)
    monkeypatch.setenv("FKDV_TEST_OUT", "/tmp/fkdv-runs")
    settings = load_settings(_write(tmp_path, YAML))

    assert settings.kernel.grid_resolution == 129
    assert settings.kernel.modes is None
    assert settings.continuation.alpha == 1.5
    assert settings.continuation.k == 2
    assert settings.continuation.s_start == 0.001
    assert settings.continuation.pseudo_arclength is True
    # Sections missing from the file keep their defaults
    assert settings.continuation.newton_tol == 1e-11
    assert settings.diagnostics.oversample == 8
    assert settings.logging.level == "WARNING"
    assert settings.output.directory == "/tmp/fkdv-runs"


def test_env_var_overrides_default(tmp_path, monkeypatch):
    monkeypatch.setenv("FKDV_TEST_LEVEL", "DEBUG")
    settings = load_settings(_write(tmp_path, "logging:\n  level: ${FKDV_TEST_LEVEL:-INFO}\n"))
    assert settings.logging.level == "DEBUG"


def test_empty_file_gives_defaults(tmp_path):
    assert load_settings(_write(tmp_path, "")) == Settings()


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_settings(tmp_path / "absent.yaml")


def test_malformed_yaml(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(_write(tmp_path, "kernel: [unclosed\n"))


def test_invalid_value(tmp_path):
    with pytest.raises(ConfigError, match="modes"):
        load_settings(_write(tmp_path, "continuation:\n  modes: many\n"))


def test_section_must_be_mapping(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(_write(tmp_path, "kernel: 5\n"))


def test_top_level_must_be_mapping(tmp_path):
    with pytest.raises(ConfigError, match="mapping of sections"):
        load_settings(_write(tmp_path, "- kernel\n- continuation\n"))


def test_null_rejected_for_required_field(tmp_path):
    with pytest.raises(ConfigError, match="modes may not be empty"):
        load_settings(_write(tmp_path, "continuation:\n  modes: null\n"))


def test_null_accepted_for_optional_field(tmp_path, monkeypatch):
    monkeypatch.delenv("FKDV_TEST_LOG", raising=False)
    settings = load_settings(_write(tmp_path, "kernel:\n  modes: ~\nlogging:\n  file: ${FKDV_TEST_LOG:-}\n"))
    assert settings.kernel.modes is None
    assert settings.logging.file is None


def test_default_continuation_config_is_valid():
    ContinuationConfig().validate()


@pytest.mark.parametrize(
    "overrides,message",
    [
        ({"alpha": 1.0}, "alpha must exceed 1"),
        ({"k": 0}, "k must be at least 1"),
        ({"k": 4, "modes": 8}, "modes must be at least 4k"),
        ({"max_modes": 16}, "max_modes"),
        ({"newton_tol": 0.0}, "newton_tol"),
        ({"s_step": -0.1}, "s_step"),
        ({"step_grow": 0.9}, "step factors"),
        ({"damping_floor": 0.0}, "damping_floor"),
        ({"escalate_factor": 1}, "escalate_factor"),
        ({"max_points": 1}, "max_points"),
        ({"direction": 0}, "direction"),
    ],
)
def test_validate_rejects(overrides, message):
    config = with_overrides(ContinuationConfig(), **overrides)
    with pytest.raises(ConfigError, match=message):
        config.validate()


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        ContinuationConfig(alpha=0.5).validate()


def test_with_overrides_skips_none():
    config = with_overrides(ContinuationConfig(), alpha=3.0, k=None)
    assert config.alpha == 3.0
    assert config.k == 1
