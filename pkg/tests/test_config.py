"""Config grammar: unit suffixes, parse errors, manifest round-trips."""
import numpy as np
import pytest

from nlfaraday.config import (
    format_config,
    load_config,
    parse_config_text,
    parse_entry,
    write_manifest,
)
from nlfaraday.exceptions import InvalidConfig


def test_unit_suffixes():
    assert parse_entry("54 ns") == pytest.approx(54e-9, rel=1e-15)
    assert parse_entry("40 us") == pytest.approx(40e-6, rel=1e-15)
    assert parse_entry("20 um") == pytest.approx(20e-6, rel=1e-15)
    assert parse_entry("780.241209686 nm") == pytest.approx(780.241209686e-9, rel=1e-15)
    # stated frequencies become angular frequencies
    assert parse_entry("462 mhz") == pytest.approx(2 * np.pi * 462e6, rel=1e-15)
    assert parse_entry("1.5 GHz") == pytest.approx(2 * np.pi * 1.5e9, rel=1e-15)
    assert parse_entry("4 mrad") == pytest.approx(4e-3, rel=1e-15)


def test_bare_values():
    assert parse_entry("50") == 50 and isinstance(parse_entry("50"), int)
    assert parse_entry("3.3e-8") == pytest.approx(3.3e-8)
    assert parse_entry("gaussian") == "gaussian"


def test_parse_entry_errors():
    with pytest.raises(InvalidConfig):
        parse_entry("")
    with pytest.raises(InvalidConfig):
        parse_entry("1 2 3")
    with pytest.raises(InvalidConfig):
        parse_entry("5 parsec")
    with pytest.raises(InvalidConfig):
        parse_entry("abc mhz")


def test_parse_config_text():
    cfg = parse_config_text(
        "# comment line\n"
        "\n"
        "pulse_fwhm = 54 ns   # duration\n"
        "detuning = 462 mhz\n"
        "samples = 50\n"
        "shape = gaussian\n"
    )
    assert cfg["pulse_fwhm"] == pytest.approx(54e-9)
    assert cfg["samples"] == 50
    assert cfg["shape"] == "gaussian"
    assert list(cfg) == ["pulse_fwhm", "detuning", "samples", "shape"]


def test_parse_config_errors_carry_line_numbers():
    with pytest.raises(InvalidConfig, match="line 1"):
        parse_config_text("just some words\n")
    with pytest.raises(InvalidConfig, match="line 2"):
        parse_config_text("a = 1\na = 2\n")
    with pytest.raises(InvalidConfig, match="bad key"):
        parse_config_text("two words = 3\n")
    with pytest.raises(InvalidConfig, match="line 3"):
        parse_config_text("a = 1\nb = 2\nc = 5 lightyears\n")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(InvalidConfig, match="cannot read"):
        load_config(tmp_path / "nope.cfg")
    p = tmp_path / "ok.cfg"
    p.write_text("x = 3 us\n")
    assert load_config(p)["x"] == pytest.approx(3e-6)


def test_format_round_trip():
    cfg = {
        "detuning": 2 * np.pi * 462e6,
        "samples": 50,
        "shape": "gaussian",
        "flag": True,
        "tiny": 3.8e-16,
    }
    text = format_config(cfg, header="round trip")
    back = parse_config_text(text)
    assert back["detuning"] == cfg["detuning"]    # %.17g is lossless
    assert back["tiny"] == cfg["tiny"]
    assert back["samples"] == 50
    assert back["shape"] == "gaussian"
    assert back["flag"] == 1
    assert sorted(back) == sorted(cfg)


def test_format_round_trip_random_floats():
    rng = np.random.default_rng(2)
    cfg = {f"k{i}": float(v) for i, v in enumerate(rng.standard_normal(40) * 10.0 ** rng.integers(-18, 18, 40))}
    back = parse_config_text(format_config(cfg))
    for key, val in cfg.items():
        assert back[key] == val, key


def test_write_manifest(tmp_path):
    path = tmp_path / "manifest.txt"
    text = write_manifest(path, {"n_photons": 5.7e6}, version="1.0.0", command="simulate")
    on_disk = path.read_text()
    assert on_disk == text
    assert "manifest for simulate" in text
    back = parse_config_text(text)
    assert back["n_photons"] == 5.7e6
    assert back["package_version"] == "1.0.0"
