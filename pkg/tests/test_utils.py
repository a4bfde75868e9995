"""Tests for configuration loading, text helpers and SVG rendering."""

import ipaddress
from pathlib import Path

import pytest

from constellation.models import ConstellationConfig, Shell
from utils.config_utils import load_config, parse_config
from utils.errors import ConfigError, FileIOError, Violation
from utils.svg_utils import render_svg, write_svg
from utils.text_utils import format_number, read_text_file, render_csv, save_text_to_file

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "example.toml"


def shell_document(**overrides):
    shell = {"planes": 3, "sats_per_plane": 3, "altitude_km": 550, "inclination_deg": 53}
    shell.update(overrides)
    return {"shells": [shell]}


class TestConfig:
    """Test cases for main configuration parsing."""

    def test_example_config(self):
        """Test the shipped example configuration."""
        config = load_config(EXAMPLE_CONFIG)
        assert config.machine_names[:2] == ("berlin", "accra")
        assert len(config.machines) == 8
        assert config.addresses[0] == ipaddress.IPv4Address("10.0.100.1")
        assert config.addresses[1] == ipaddress.IPv4Address("10.0.0.2")
        assert config.seed == 7
        assert config.step_s == 10.0

    def test_all_machines_default(self):
        """Test that every node is a machine by default."""
        config = parse_config(shell_document())
        assert config.machines == tuple(range(9))
        assert config.addresses[0] == ipaddress.IPv4Address("10.0.0.1")

    def test_unknown_key_named(self):
        """Test that unknown keys are named in the error."""
        with pytest.raises(ConfigError, match="bogus"):
            parse_config({**shell_document(), "bogus": 1})
        with pytest.raises(ConfigError, match="shells\\[0\\].colour"):
            parse_config(shell_document(colour="red"))

    def test_missing_and_wrong_type(self):
        """Test missing keys and wrong value types."""
        document = shell_document()
        del document["shells"][0]["planes"]
        with pytest.raises(ConfigError, match="planes"):
            parse_config(document)
        with pytest.raises(ConfigError):
            parse_config(shell_document(planes="three"))

    def test_invalid_shell(self):
        """Test that shell range errors surface as ConfigError."""
        with pytest.raises(ConfigError):
            parse_config(shell_document(phasing_factor=3))

    def test_unknown_subset_members(self):
        """Test unknown satellites and stations in a subset."""
        document = shell_document()
        document["machines"] = {"select": "subset", "satellites": ["0-9-0"]}
        with pytest.raises(ConfigError, match="0-9-0"):
            parse_config(document)

    def test_bad_addressing(self):
        """Test unknown hosts and undersized networks."""
        document = shell_document()
        document["addressing"] = {"hosts": {"nobody": "10.0.0.9"}}
        with pytest.raises(ConfigError):
            parse_config(document)
        document["addressing"] = {"network": "10.0.0.0/30"}
        with pytest.raises(ConfigError):
            parse_config(document)

    def test_trace_duration_below_step(self):
        """Test duration shorter than step."""
        document = shell_document()
        document["trace"] = {"step_s": 10, "duration_s": 5}
        with pytest.raises(ConfigError):
            parse_config(document)

    def test_config_hash(self):
        """Test that the hash tracks the constellation but not trace settings."""
        base = parse_config(shell_document())
        document = shell_document()
        document["trace"] = {"step_s": 30}
        assert parse_config(document).config_hash() == base.config_hash()
        assert parse_config(shell_document(altitude_km=600)).config_hash() != base.config_hash()
        assert len(base.config_hash()) == 64

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file raises FileIOError."""
        with pytest.raises(FileIOError):
            load_config(tmp_path / "missing.toml")

    def test_syntax_error(self, tmp_path):
        """Test that broken TOML raises ConfigError."""
        path = tmp_path / "broken.toml"
        path.write_text("[[shells]\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestTextUtils:
    """Test cases for text helpers."""

    def test_format_number(self):
        """Test integral and fractional rendering."""
        assert format_number(1.0) == "1"
        assert format_number(0.25) == "0.25"

    def test_save_and_read(self, tmp_path):
        """Test writing into a new directory and reading back verbatim."""
        path = save_text_to_file("a\nb\n", tmp_path / "nested" / "out.txt")
        assert read_text_file(path) == "a\nb\n"

    def test_read_missing(self, tmp_path):
        """Test that reading a missing file raises FileIOError."""
        with pytest.raises(FileIOError):
            read_text_file(tmp_path / "none.txt")

    def test_render_csv(self):
        """Test LF-terminated CSV with empty cells for None."""
        assert render_csv(["a", "b"], [[1, None]]) == "a,b\n1,\n"

    def test_violation_str(self):
        """Test violation rendering with and without a line."""
        assert str(Violation("code", "msg", 3)) == "code: line 3: msg"
        assert str(Violation("code", "msg")) == "code: msg"


class TestSvg:
    """Test cases for the constellation SVG."""

    def test_empty_constellation(self):
        """Test that an empty constellation renders only the frame."""
        svg = render_svg(ConstellationConfig(), 0.0)
        assert 'class="frame"' in svg
        assert "<circle" not in svg
        assert "<line" not in svg

    def test_satellite_count(self):
        """Test one circle per satellite."""
        config = ConstellationConfig(shells=(Shell(3, 3, 550.0, 0.9),))
        svg = render_svg(config, 0.0)
        assert svg.count('class="sat"') == 9
        assert svg.count('class="isl"') >= 1

    def test_deterministic(self, tmp_path):
        """Test byte-identical output for the same inputs."""
        config = load_config(EXAMPLE_CONFIG).constellation
        path = write_svg(config, 120.0, tmp_path / "map.svg")
        assert path.read_text() == render_svg(config, 120.0)
        assert render_svg(config, 120.0) == render_svg(config, 120.0)
        assert 'class="gs"' in render_svg(config, 120.0)


if __name__ == "__main__":
    pytest.main([__file__])
