import json

import pytest
import yaml

from twinsim.config import CONFIG_ENV, CONFIG_TEMPLATE, CacheConfig, ConfigError, SimConfig


def test_defaults_without_file(monkeypatch):
    """No path and no environment variable gives the built-in machine."""
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    config = SimConfig.load()
    assert config == SimConfig()
    assert config.icache.miss_penalty_cycles == 30
    assert config.dcache.num_sets == 128


def test_load_config_from_json(tmp_path):
    config_file = tmp_path / "machine.json"
    config_file.write_text(json.dumps({"dcache": {"size": 8192, "assoc": 2}, "mispredict_penalty": 6}))

    config = SimConfig.load(config_file)

    assert config.dcache.size_bytes == 8192
    assert config.dcache.associativity == 2
    assert config.icache == CacheConfig()
    assert config.mispredict_penalty == 6


def test_yaml_syntax_is_accepted(tmp_path):
    config_file = tmp_path / "machine.yaml"
    with open(config_file, "w") as f:
        yaml.dump({"int_div_cycles": 12, "blocking": "per_cache"}, f)

    config = SimConfig.load(config_file)
    assert config.int_div_cycles == 12
    assert config.blocking == "per_cache"


def test_env_names_the_file(tmp_path, monkeypatch):
    config_file = tmp_path / "env.json"
    config_file.write_text('{"spin_delay": 2}')
    monkeypatch.setenv(CONFIG_ENV, str(config_file))

    assert SimConfig.load().spin_delay == 2


def test_template_parses_to_defaults():
    assert SimConfig.from_mapping(json.loads(CONFIG_TEMPLATE)) == SimConfig()


def test_empty_file_gives_defaults(tmp_path):
    config_file = tmp_path / "empty.json"
    config_file.write_text("  \n")
    assert SimConfig.load(config_file) == SimConfig()


class TestRejected:
    def _problems(self, data) -> list[str]:
        with pytest.raises(ConfigError) as info:
            SimConfig.from_mapping(data)
        return info.value.problems

    def test_unknown_keys(self):
        problems = self._problems({"colour": "blue", "icache": {"ways": 4}})
        assert "unknown key colour" in problems
        assert "unknown key icache.ways" in problems

    def test_associativity_without_power_of_two_sets(self):
        problems = self._problems({"dcache": {"assoc": 3}})
        assert any("assoc=3" in p for p in problems)

    def test_cache_too_large(self):
        problems = self._problems({"icache": {"size": 65536}})
        assert any(p.startswith("icache.size") for p in problems)

    def test_unaligned_channel(self):
        problems = self._problems({"channel_base": 0x80010})
        assert any("64-byte aligned" in p for p in problems)

    def test_wrong_types(self):
        problems = self._problems({"trace": 1, "max_cycles": "many"})
        assert "trace must be true or false" in problems
        assert "max_cycles must be an integer" in problems

    def test_bad_blocking_mode(self):
        assert any("blocking" in p for p in self._problems({"blocking": "never"}))

    def test_root_must_be_object(self):
        assert self._problems([1, 2]) == ["config root must be an object"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            SimConfig.load(tmp_path / "nope.json")

    def test_unparseable_file(self, tmp_path):
        config_file = tmp_path / "bad.json"
        config_file.write_text("{unclosed: [")
        with pytest.raises(ConfigError, match="cannot parse config"):
            SimConfig.load(config_file)


class TestOverridesAndDigest:
    def test_with_overrides_validates(self):
        config = SimConfig().with_overrides(max_cycles=1000)
        assert config.max_cycles == 1000
        with pytest.raises(ConfigError):
            SimConfig().with_overrides(max_cycles=0)

    def test_digest_is_stable(self):
        assert SimConfig().digest() == SimConfig.from_mapping({}).digest()
        assert len(SimConfig().digest()) == 16

    def test_digest_tracks_values(self):
        assert SimConfig().digest() != SimConfig().with_overrides(mispredict_penalty=5).digest()

    def test_to_mapping_round_trips(self):
        config = SimConfig(dcache=CacheConfig(size_bytes=4096, associativity=1), trace=True)
        assert SimConfig.from_mapping(config.to_mapping()) == config
