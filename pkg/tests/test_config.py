"""Tests for configuration loading and validation."""

import json

import pytest
import yaml

from skewshadow.utils.config import (
    SEED_ENV,
    THREADS_ENV,
    ExperimentConfig,
    ToleranceConfig,
    load_config,
    save_config,
)
from skewshadow.utils.exceptions import ConfigurationError, ParameterError


@pytest.fixture
def no_dotenv(tmp_path, monkeypatch):
    """Run from an empty directory so no stray .env is picked up."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestExperimentConfig:
    def test_defaults_are_valid(self):
        config = ExperimentConfig()
        config.validate()

        assert config.lambda0 == 0.5
        assert config.lambda1 == 3.0
        assert config.c_values == [1.0, 3.0]
        assert config.n_values == [200, 800, 3200]
        assert config.tol == 1e-10
        assert config.tolerances.oracle == 1e-9

    def test_from_dict_roundtrip(self):
        config = ExperimentConfig.from_dict(
            {"lambda0": 0.25, "samples": 50, "tolerances": {"ruin": 1e-11}}
        )
        again = ExperimentConfig.from_dict(config.to_dict())

        assert again == config
        assert again.tolerances.ruin == 1e-11

    def test_tol_shorthand(self):
        config = ExperimentConfig.from_dict({"tol": 1e-8})
        assert config.tolerances.statistic == 1e-8

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError) as exc:
            ExperimentConfig.from_dict({"lamda0": 0.5})
        assert exc.value.config_key == "lamda0"

    def test_unknown_tolerance(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_dict({"tolerances": {"bogus": 1.0}})

    @pytest.mark.parametrize("value", [0.0, -1e-9, float("nan"), "small"])
    def test_bad_tolerance(self, value):
        with pytest.raises(ConfigurationError) as exc:
            ToleranceConfig(oracle=value)
        assert exc.value.config_key == "tolerances.oracle"

    def test_model_constraints_surface_as_parameter_errors(self):
        """Invalid multipliers keep their own error type."""
        with pytest.raises(ParameterError) as exc:
            ExperimentConfig(lambda0=0.5, lambda1=2.0).validate()
        assert exc.value.constraint == "lambda0 * lambda1 != 1"

    @pytest.mark.parametrize(
        "field, value",
        [
            ("format", "xml"),
            ("epsilon", 0.0),
            ("c_values", []),
            ("c_values", [1.0, -2.0]),
            ("n_values", [0]),
            ("n_values", [10.5]),
            ("samples", 0),
            ("seed", -1),
            ("seed", 2**64),
            ("threads", -2),
            ("noise", -0.1),
            ("length", 0),
            ("sample_index", -1),
            ("ruin_levels", [0.0]),
            ("eps_values", []),
            ("horizon", 0),
            ("log_level", "LOUD"),
            ("command", "plot"),
        ],
    )
    def test_invalid_field(self, field, value):
        config = ExperimentConfig(**{field: value})
        with pytest.raises(ConfigurationError) as exc:
            config.validate()
        assert exc.value.config_key == field

    def test_radius_needs_instance(self):
        with pytest.raises(ConfigurationError) as exc:
            ExperimentConfig(command="radius").validate()
        assert exc.value.config_key == "instance_path"

    def test_zero_noise_allowed(self):
        ExperimentConfig(noise=0.0).validate()


class TestLoadConfig:
    def test_yaml_file(self, no_dotenv):
        path = no_dotenv / "experiment.yaml"
        path.write_text(
            "lambda0: 0.25\n"
            "lambda1: 6.0\n"
            "c_values: [1.5, 2.5]\n"
            "tolerances:\n"
            "  statistic: 1.0e-9\n"
        )
        config = load_config(path)

        assert config.lambda0 == 0.25
        assert config.c_values == [1.5, 2.5]
        assert config.tol == 1e-9
        assert config.tolerances.oracle == 1e-9

    def test_json_file(self, no_dotenv):
        path = no_dotenv / "experiment.json"
        path.write_text(json.dumps({"samples": 77, "n_values": [10, 20]}))
        config = load_config(path)

        assert config.samples == 77
        assert config.n_values == [10, 20]

    def test_missing_file(self, no_dotenv):
        with pytest.raises(ConfigurationError) as exc:
            load_config(no_dotenv / "absent.yaml")
        assert exc.value.config_key == "config"

    def test_file_must_be_mapping(self, no_dotenv):
        path = no_dotenv / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_malformed_yaml(self, no_dotenv):
        path = no_dotenv / "broken.yaml"
        path.write_text("lambda0: [0.5\n")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_environment_seed(self, no_dotenv, monkeypatch):
        """SKEWSHADOW_SEED applies when no flag is given; hex is accepted."""
        monkeypatch.setenv(SEED_ENV, "0x2a")
        monkeypatch.setenv(THREADS_ENV, "3")
        config = load_config()

        assert config.seed == 42
        assert config.threads == 3

    def test_bad_environment_seed(self, no_dotenv, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "forty-two")
        with pytest.raises(ConfigurationError) as exc:
            load_config()
        assert exc.value.config_key == "seed"

    def test_precedence(self, no_dotenv, monkeypatch):
        """Flags beat the environment, which beats the file."""
        path = no_dotenv / "experiment.yaml"
        path.write_text("seed: 1\nsamples: 10\nthreads: 2\n")
        monkeypatch.setenv(SEED_ENV, "5")

        config = load_config(path)
        assert (config.seed, config.samples, config.threads) == (5, 10, 2)

        config = load_config(path, overrides={"seed": 9, "threads": None})
        assert (config.seed, config.samples, config.threads) == (9, 10, 2)

    def test_tolerance_override_merges(self, no_dotenv):
        """A flag for one tolerance keeps the others from the file."""
        path = no_dotenv / "experiment.yaml"
        path.write_text("tolerances:\n  oracle: 1.0e-7\n")

        config = load_config(path, overrides={"tolerances": {"ruin": 1e-10}})
        assert config.tolerances.oracle == 1e-7
        assert config.tolerances.ruin == 1e-10

    def test_env_file(self, no_dotenv):
        env = no_dotenv / "settings.env"
        env.write_text(f"{SEED_ENV}=123\n")
        config = load_config(env_file=env)

        assert config.seed == 123

    def test_save_and_load(self, no_dotenv):
        config = ExperimentConfig(lambda0=0.3, samples=12, eps_values=[0.1])
        path = no_dotenv / "out" / "saved.yaml"
        save_config(config, path)

        assert yaml.safe_load(path.read_text())["samples"] == 12
        assert load_config(path) == config
