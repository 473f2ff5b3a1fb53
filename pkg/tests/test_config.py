"""Configuration loading: YAML files, env overrides, key validation."""

import pytest

from dubkit.config import (
    AppConfig,
    ConfigError,
    JobConfig,
    load_config,
    job_config_from_dict,
)


class TestDefaults:
    def test_fresh_config(self):
        cfg = load_config(environ={})
        assert cfg.pipeline.language == "hi"
        assert cfg.pipeline.target_language == "en"
        assert cfg.pipeline.subtitle_mode == "webvtt-standard"
        assert cfg.pipeline.sample_rate == 16000
        assert cfg.pipeline.merge_segments is False
        assert cfg.service.port == 8000
        assert cfg.store.root == "dubkit-jobs"
        assert cfg.media_tool.ffmpeg == "ffmpeg"
        assert cfg.forge.valid_fraction == 0.1
        assert cfg.eval.strip_punctuation is True
        assert cfg.backends == {}

    def test_media_tool_templates_have_placeholders(self):
        mt = AppConfig().media_tool
        assert "{input}" in mt.probe_args
        assert "{rate}" in mt.extract_args
        assert "{subtitles}" in mt.mux_args


class TestYamlFile:
    def test_loads_sections(self, tmp_path):
        p = tmp_path / "dubkit.yaml"
        p.write_text(
            "pipeline:\n"
            "  subtitle_mode: listing1-compat\n"
            "  workers: 2\n"
            "service:\n"
            "  port: 9001\n"
            "backends:\n"
            "  asr:\n"
            "    kind: http\n"
            "    endpoint: http://gpu:9000\n",
            encoding="utf-8",
        )
        cfg = load_config(p, environ={})
        assert cfg.pipeline.subtitle_mode == "listing1-compat"
        assert cfg.pipeline.workers == 2
        assert cfg.service.port == 9001
        assert cfg.backends["asr"]["endpoint"] == "http://gpu:9000"

    def test_empty_file_is_defaults(self, tmp_path):
        p = tmp_path / "empty.yaml"
        p.write_text("", encoding="utf-8")
        assert load_config(p, environ={}).service.port == 8000

    def test_non_mapping_file_rejected(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("- just\n- a list\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="mapping"):
            load_config(p, environ={})

    def test_media_tool_list_becomes_tuple(self, tmp_path):
        p = tmp_path / "mt.yaml"
        p.write_text(
            "media_tool:\n  probe_args: ['-v', 'quiet', '{input}']\n", encoding="utf-8"
        )
        cfg = load_config(p, environ={})
        assert cfg.media_tool.probe_args == ("-v", "quiet", "{input}")


class TestUnknownKeys:
    def test_unknown_section(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("pipelnie: {}\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="pipelnie"):
            load_config(p, environ={})

    def test_unknown_key_dotted(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("service:\n  prot: 9000\n", encoding="utf-8")
        with pytest.raises(ConfigError, match=r"service\.prot"):
            load_config(p, environ={})

    def test_unknown_backend_role(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("backends:\n  ocr:\n    kind: mock\n", encoding="utf-8")
        with pytest.raises(ConfigError, match=r"backends\.ocr"):
            load_config(p, environ={})

    def test_multiple_unknown_keys_all_named(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("eval:\n  wrokers: 1\n  lang: hi\n", encoding="utf-8")
        with pytest.raises(ConfigError) as exc_info:
            load_config(p, environ={})
        assert "eval.lang" in str(exc_info.value)
        assert "eval.wrokers" in str(exc_info.value)


class TestEnvOverrides:
    def test_scalar_override(self):
        cfg = load_config(environ={"DUBKIT_SERVICE__PORT": "9000"})
        assert cfg.service.port == 9000  # YAML-parsed, so an int

    def test_nested_backend_override(self):
        cfg = load_config(
            environ={"DUBKIT_BACKENDS__ASR__ENDPOINT": "http://gpu-box:9001"}
        )
        assert cfg.backends["asr"]["endpoint"] == "http://gpu-box:9001"

    def test_env_wins_over_file(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text("service:\n  port: 7000\n", encoding="utf-8")
        cfg = load_config(p, environ={"DUBKIT_SERVICE__PORT": "7100"})
        assert cfg.service.port == 7100

    def test_boolean_and_null_scalars(self):
        cfg = load_config(
            environ={
                "DUBKIT_PIPELINE__MERGE_SEGMENTS": "true",
                "DUBKIT_PIPELINE__EMPTY_SEGMENT_TEXT": "null",
            }
        )
        assert cfg.pipeline.merge_segments is True
        assert cfg.pipeline.empty_segment_text is None

    def test_unrelated_env_ignored(self):
        cfg = load_config(environ={"PATH": "/bin", "DUBKIT": "ignored-no-underscore"})
        assert cfg.service.port == 8000

    def test_typo_in_env_key_fails(self):
        with pytest.raises(ConfigError, match=r"service\.prot"):
            load_config(environ={"DUBKIT_SERVICE__PROT": "9000"})


class TestJobConfig:
    def test_overrides_on_defaults(self):
        jc = job_config_from_dict({"subtitle_mode": "srt", "workers": 1})
        assert jc.subtitle_mode == "srt"
        assert jc.workers == 1
        assert jc.language == "hi"

    def test_overrides_on_base(self):
        base = JobConfig(language="ta")
        jc = job_config_from_dict({"workers": 2}, base=base)
        assert jc.language == "ta"
        assert jc.workers == 2

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match=r"pipeline\.moed"):
            job_config_from_dict({"moed": "srt"})

    def test_non_mapping_rejected(self):
        with pytest.raises(ConfigError, match="mapping"):
            job_config_from_dict(["srt"])

    def test_bad_subtitle_mode(self):
        with pytest.raises(ValueError):
            job_config_from_dict({"subtitle_mode": "ass"})

    def test_bad_failure_policy(self):
        with pytest.raises(ConfigError, match="on_segment_failure"):
            JobConfig(on_segment_failure="retry")

    @pytest.mark.parametrize(
        "kwargs", [{"workers": 0}, {"merge_gap_tolerance": -0.1}]
    )
    def test_range_checks(self, kwargs):
        with pytest.raises(ConfigError):
            JobConfig(**kwargs)
