import pytest

from mqpgsim.config import (
    PRESETS,
    ConfigError,
    experiment_config,
    load_text,
    preset,
    sweep_config,
)
from mqpgsim.mqpg import Layout


def test_preset_names():
    expected = {f"table1-d{d}-{k}" for d in (3, 5) for k in ("timebins", "hg", "freqbins", "ffb")}
    assert set(PRESETS) == expected


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_build(name):
    cfg = experiment_config(preset(name))
    assert cfg.alphabet.dimension == int(name.split("-d")[1][0])
    assert cfg.layout is (Layout.FFB if name.endswith("ffb") else Layout.STANDARD)


def test_preset_values_match_table1():
    # d=5 FFB row: 150 GHz bins at 500 GHz spacing
    a = experiment_config(preset("table1-d5-ffb")).alphabet
    assert (a.fwhm, a.separation) == (0.15, 0.5)
    a = experiment_config(preset("table1-d3-timebins")).alphabet
    assert (a.fwhm, a.separation) == (1.5, 3.5)


def test_override_preset():
    cfg = experiment_config(load_text('preset = "table1-d3-ffb"\n[spectrograph]\nresolution = 0.3\n'))
    assert cfg.spectrograph_resolution == 0.3
    assert cfg.alphabet.fwhm == 0.3


def test_full_file():
    text = """
[alphabet]
kind = "hermite_gauss"
dimension = 3
fwhm = 0.21
center = 194.0

[device]
n_channels = 3
spacing = 0.63
pm_fwhm = 0.03

[measurement]
bases = [0, 2]

[counting]
enabled = true
seed = 9
"""
    cfg = experiment_config(load_text(text), text)
    assert cfg.selected_bases() == [0, 2]
    assert cfg.counting.seed == 9


def test_unknown_key_has_line():
    text = 'preset = "table1-d3-hg"\n\n[device]\nspcing = 1.0\n'
    with pytest.raises(ConfigError) as e:
        load_text(text)
    assert e.value.line == 4
    assert e.value.field == "[device].spcing"


def test_wrong_type():
    with pytest.raises(ConfigError, match="expected int"):
        load_text('[alphabet]\ndimension = "three"\n')
    with pytest.raises(ConfigError, match="expected bool"):
        load_text("[counting]\nenabled = 1\n")


def test_bool_is_not_a_number():
    with pytest.raises(ConfigError):
        load_text("[alphabet]\nfwhm = true\n")


def test_semantic_error_points_at_key():
    text = '[alphabet]\nkind = "frequency_bins"\ndimension = 3\nfwhm = -0.1\nseparation = 0.2\n' \
           '[device]\nn_channels = 3\nspacing = 0.63\n'
    with pytest.raises(ConfigError) as e:
        experiment_config(load_text(text), text)
    assert e.value.field == "[alphabet].fwhm"
    assert e.value.line == 4


def test_syntax_error():
    with pytest.raises(ConfigError, match="TOML"):
        load_text("[alphabet\n")


def test_missing_sections():
    with pytest.raises(ConfigError, match="alphabet"):
        experiment_config({})
    with pytest.raises(ConfigError, match="n_channels"):
        experiment_config({"alphabet": {"kind": "hermite_gauss", "dimension": 3, "fwhm": 0.2}})


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        load_text('preset = "nope"\n')


def test_sweep_config():
    sc = sweep_config(load_text("[sweep]\ndimensions = [3, 5]\nratios = [10.0]\n"))
    assert sc.dimensions == (3, 5)
    with pytest.raises(ConfigError, match="odd prime"):
        sweep_config(load_text("[sweep]\ndimensions = [4]\n"))
