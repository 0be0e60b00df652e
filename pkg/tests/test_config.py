import logging

import pytest

from src.config.config import Config, ExperimentConfig, load_config, parse_config, validate_config
from src.errors import ConfigError


def test_empty_text_gives_defaults():
    config = parse_config("")
    assert config.method == "hermite_nn"
    assert config.problem == "box"
    assert config.seed == 42
    assert config.iterations == 1000
    assert config.compare_seeds == [1, 2, 3, 4, 5]


def test_overrides_applied():
    config = parse_config("iterations = 1000\nproblem = oscillator")
    assert config.iterations == 1000
    assert config.problem == "oscillator"


def test_comments_and_blank_lines():
    config = parse_config("# experiment\n\nseed = 7  # fixed\n   \nlearning_rate = 0.005\n")
    assert config.seed == 7
    assert config.learning_rate == 0.005


def test_unparsable_value_names_line():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("iterations = banana")
    assert excinfo.value.line == 1
    assert "line 1" in str(excinfo.value)


def test_range_violation_names_line():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("seed = 3\n\niterations = -5\n")
    assert excinfo.value.line == 3


def test_negative_seed_names_line():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("iterations = 3\nseed = -1\n")
    assert excinfo.value.line == 2


def test_negative_comparison_seed_names_line():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("compare_seeds = 1,-2,3\n")
    assert excinfo.value.line == 1


def test_validate_config_without_lines():
    with pytest.raises(ConfigError) as excinfo:
        validate_config({"seed": -4})
    assert excinfo.value.line is None
    assert validate_config({"seed": 4}).seed == 4


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("seed = 1\nmomentum = 0.9")
    assert excinfo.value.line == 2


def test_line_without_assignment_rejected():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("problem box")
    assert excinfo.value.line == 1


def test_duplicate_key_last_wins_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        config = parse_config("seed = 1\nseed = 2\n")
    assert config.seed == 2
    assert "duplicate key 'seed'" in caplog.text


def test_list_values():
    config = parse_config("hidden_sizes = 15, 15,15\ncompare_seeds = 3,4")
    assert config.hidden_sizes == [15, 15, 15]
    assert config.compare_seeds == [3, 4]
    assert config.architecture("hermite_nn") == [2, 15, 15, 15, 1]


def test_non_positive_width_rejected():
    with pytest.raises(ConfigError):
        parse_config("hidden_sizes = 15,0")


def test_bool_values():
    assert parse_config("heatmap = false").heatmap is False


def test_table_architectures_by_problem():
    box = ExperimentConfig()
    assert box.architecture("hermite_nn") == [2] + [15] * 5 + [1]
    assert box.architecture("pinn") == [2] + [18] * 5 + [1]
    oscillator = ExperimentConfig(problem="oscillator")
    assert oscillator.architecture("hermite_nn") == [2] + [10] * 15 + [1]
    assert oscillator.architecture("pinn") == [2] + [5] * 10 + [1]


def test_training_config_carries_fields():
    config = parse_config("optimizer = sgd\nbatch = stochastic\nbatch_size = 10\nstop_tol = 1e-6")
    training = config.training_config(seed=9)
    assert training.optimizer == "sgd"
    assert training.batch_size == 10
    assert training.stop_tol == 1e-6
    assert training.seed == 9
    assert config.training_config().seed == 42


def test_build_problem_from_config():
    problem = parse_config("problem = oscillator\nnx = 1").build_problem()
    assert problem.modes == (1, 0)
    assert problem.energy == pytest.approx(3.0)


def test_load_config_reads_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("problem = oscillator\n", encoding="utf-8")
    assert load_config(str(path)).problem == "oscillator"
    assert load_config(None) == ExperimentConfig()


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.cfg"))


def test_non_utf8_config_file(tmp_path):
    path = tmp_path / "latin.cfg"
    path.write_bytes("problem = box  # côté\n".encode("latin-1"))
    with pytest.raises(ConfigError) as excinfo:
        load_config(str(path))
    assert "UTF-8" in str(excinfo.value)


def test_default_output_dir_from_environment_defaults():
    assert ExperimentConfig().output_dir == Config.OUTPUT_DIR
