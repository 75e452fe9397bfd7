import pytest
from pydantic import ValidationError

from corrdyn.config import RunConfig, Settings, format_complex, parse_complex, parse_word
from corrdyn.parallel import parallel_map, resolve_workers


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1", 1 + 0j),
        ("-0.5", -0.5 + 0j),
        ("0.2i", 0.2j),
        ("0+0.2i", 0.2j),
        ("-1-2.5e-3i", -1 - 0.0025j),
        (0.5, 0.5 + 0j),
    ],
)
def test_parse_complex(text, expected):
    """a+bi strings and plain numbers"""
    assert parse_complex(text) == expected


@pytest.mark.parametrize("text", ["abc", "1 + 2i", "1+2j", ""])
def test_parse_complex_rejects(text):
    """Spaces, j suffixes and garbage are refused"""
    with pytest.raises(ValueError):
        parse_complex(text)


def test_format_complex_round_trip():
    """format_complex output parses back exactly"""
    z = complex(1 / 3, -0.1)
    assert parse_complex(format_complex(z)) == z


def test_parse_word():
    """Comma separated symbols"""
    assert parse_word("1,0,0") == [1, 0, 0]
    assert parse_word("") == []
    with pytest.raises(ValueError):
        parse_word("1,x")


def test_run_config_defaults():
    """Documented defaults"""
    cfg = RunConfig()
    assert (cfg.p, cfg.q, cfg.c) == (6, 2, 0j)
    assert cfg.size == 512 and cfg.depth == 24 and cfg.tol == 0.01
    assert cfg.truncation == 40 and cfg.buffer == 20


def test_run_config_precedence(tmp_path):
    """File values override defaults, flags override the file"""
    path = tmp_path / "run.env"
    path.write_text("c=0+0.2i\ndepth=10\nsize=64\n")
    cfg = RunConfig.from_sources({"depth": 12, "c": None}, str(path))
    assert cfg.c == 0.2j
    assert cfg.depth == 12
    assert cfg.size == 64


def test_run_config_validation():
    """Exponents, modes and unknown keys are checked"""
    with pytest.raises(ValidationError):
        RunConfig(p=2, q=3)
    with pytest.raises(ValidationError):
        RunConfig(mode="other")
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"colour": "red"})
    with pytest.raises(ValueError):
        RunConfig.from_sources({}, "/nonexistent/run.env")


def test_settings_from_environment(monkeypatch):
    """CORRDYN_* variables feed Settings"""
    monkeypatch.setenv("CORRDYN_TORUS_CAP", "5")
    monkeypatch.setenv("CORRDYN_THREADS", "3")
    s = Settings()
    assert s.torus_cap == 5
    assert s.threads == 3


def test_settings_validation_lists_every_error():
    """All invalid values are reported at once"""
    with pytest.raises(ValueError) as exc:
        Settings(threads=0, torus_cap=0).validate_runtime()
    message = str(exc.value)
    assert "CORRDYN_THREADS" in message
    assert "CORRDYN_TORUS_CAP" in message


def test_resolve_workers():
    """Explicit counts win and are at least 1"""
    assert resolve_workers(3) == 3
    assert resolve_workers(0) == 1
    assert resolve_workers() >= 1


def test_parallel_map_keeps_order():
    """Single-worker maps preserve input order"""
    assert parallel_map(abs, [-3, 2, -1], workers=1) == [3, 2, 1]
