import pytest

from psbo.config import ConfigError, SearchConfig, make_config, read_config_file


def test_defaults_are_valid():
    cfg = SearchConfig().validate()
    assert cfg.overrides() == {}
    assert all(cfg.on(t) for t in range(1, 9))


def test_config_file_parsing(tmp_path):
    path = tmp_path / "psbo.cfg"
    path.write_text("# comment\n\nseed = 7\nclock = wall\ntechnique_off = [3, 5]\n"
                    "algorithms = [\"knn\", \"cart\"]\nbudget = 100\n")
    values = read_config_file(path)
    assert values == {"seed": 7, "clock": "wall", "technique_off": [3, 5],
                      "algorithms": ["knn", "cart"], "budget": 100}
    cfg = make_config(values)
    assert cfg.budget == 100.0
    assert not cfg.on(3) and cfg.on(4)
    assert cfg.overrides()["seed"] == 7


def test_bad_line_names_the_line(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("seed = 1\nnonsense\n")
    with pytest.raises(ConfigError, match=":2:"):
        read_config_file(path)


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        read_config_file("/nonexistent/psbo.cfg")


@pytest.mark.parametrize("values, message", [
    ({"colour": 1}, "unknown config key"),
    ({"seed": "x"}, "integer"),
    ({"seed": -1}, "non-negative"),
    ({"clock": "sundial"}, "clock"),
    ({"technique_off": [9]}, "unknown technique"),
    ({"proposals": 7}, "even"),
    ({"algorithms": ["knn", "oracle"]}, "unknown algorithm"),
    ({"budget": 0}, "positive"),
    ({"ratio_low": 2.0}, "ratio bounds"),
    ({"fs_penalty": 0.9}, "reward"),
])
def test_invalid_values(values, message):
    with pytest.raises(ConfigError, match=message):
        make_config(values)


def test_single_technique_number_becomes_a_list():
    assert make_config({"technique_off": 2}).technique_off == [2]


def test_replace_keeps_the_original():
    a = SearchConfig(seed=1)
    b = a.replace(seed=2)
    assert (a.seed, b.seed) == (1, 2)
