"""
Integration tests — the disco-isac command line end to end.
"""

from __future__ import annotations

import io

import pandas as pd
import pytest

from cli.main import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, main
from cli.output import CRLB_COLUMNS, SWEEP_COLUMNS, read_manifest
from config.settings import settings

SMALL_SIZES = {
    "n_b = 8": "n_b = 4",
    "n_s = 8": "n_s = 4",
    "n_d_h = 64": "n_d_h = 8",
    "n_d_v = 64": "n_d_v = 8",
    "k_c = 4": "k_c = 2",
    "frame_len = 80": "frame_len = 16",
}


def _write(tmp_path, text: str, name: str = "scenario.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def small_toml(tmp_path, reference_toml) -> str:
    text = reference_toml.read_text(encoding="utf-8")
    for old, new in SMALL_SIZES.items():
        text = text.replace(old, new)
    return _write(tmp_path, text)


class TestSweepCommand:
    """``disco-isac sweep`` and ``--replay``."""

    def test_writes_csv_and_manifest(self, tmp_path, small_toml):
        out = tmp_path / "power"
        argv = "--axis power --values 5,10 --metric sum_rate --trials 2 --threads 2".split()
        code = main(["sweep", "--config", small_toml, *argv, "--out", str(out)])
        assert code == EXIT_OK
        frame = pd.read_csv(f"{out}.csv")
        assert list(frame.columns) == SWEEP_COLUMNS
        # comm + two variants each of isac and sensing, per point
        assert len(frame) == 2 * 5
        assert sorted(set(frame["axis"])) == [5.0, 10.0]
        manifest = read_manifest(f"{out}.manifest")
        assert manifest.spec.trials == 2
        assert manifest.seed == 0
        assert manifest.point_errors == []

    def test_replay_is_byte_identical(self, tmp_path, small_toml):
        first = tmp_path / "first"
        argv = "--axis power --values 0,15 --metric sum_rate,crlb_aoa --trials 2".split()
        assert main(["sweep", "--config", small_toml, *argv, "--out", str(first)]) == EXIT_OK
        replay = tmp_path / "replay"
        code = main(
            ["sweep", "--replay", f"{first}.manifest", "--threads", "3", "--out", str(replay)]
        )
        assert code == EXIT_OK
        assert (tmp_path / "replay.csv").read_bytes() == (tmp_path / "first.csv").read_bytes()

    def test_replay_uses_recorded_redraws(self, tmp_path, small_toml, monkeypatch):
        first = tmp_path / "first"
        argv = "--axis power --values 11 --metric sum_rate --trials 2".split()
        monkeypatch.setattr(settings.harness, "dt_redraws", 3)
        assert main(["sweep", "--config", small_toml, *argv, "--out", str(first)]) == EXIT_OK
        assert read_manifest(f"{first}.manifest").dt_redraws == 3

        monkeypatch.setattr(settings.harness, "dt_redraws", 7)
        replay = tmp_path / "replay"
        assert main(["sweep", "--replay", f"{first}.manifest", "--out", str(replay)]) == EXIT_OK
        assert (tmp_path / "replay.csv").read_bytes() == (tmp_path / "first.csv").read_bytes()
        assert read_manifest(f"{replay}.manifest").dt_redraws == 3

        fresh = tmp_path / "fresh"
        assert main(["sweep", "--config", small_toml, *argv, "--out", str(fresh)]) == EXIT_OK
        assert (tmp_path / "fresh.csv").read_bytes() != (tmp_path / "first.csv").read_bytes()

    def test_elements_axis(self, tmp_path, small_toml):
        out = tmp_path / "elements"
        argv = "--axis elements --values 16,64 --metric crlb_aod --benchmarks isac_waveform"
        code = main(
            ["sweep", "--config", small_toml, *argv.split(), "--trials", "1", "--out", str(out)]
        )
        assert code == EXIT_OK
        frame = pd.read_csv(f"{out}.csv")
        assert list(frame["benchmark"]) == [
            "isac_waveform/without_dris",
            "isac_waveform/with_dris",
        ] * 2

    def test_failed_point_exit_code(self, tmp_path, small_toml):
        argv = "--axis elements --values 16,20 --metric sum_rate --trials 1".split()
        base = ["sweep", "--config", small_toml, *argv]
        assert main([*base, "--out", str(tmp_path / "strict")]) == EXIT_NUMERICAL
        assert main([*base, "--keep-going", "--out", str(tmp_path / "lax")]) == EXIT_OK
        manifest = read_manifest(tmp_path / "lax.manifest")
        assert [e.axis for e in manifest.point_errors] == [20.0]

    def test_missing_required_flags(self, tmp_path, small_toml):
        no_axis = ["sweep", "--config", small_toml, "--out", str(tmp_path / "x")]
        assert main(no_axis) == EXIT_CONFIG
        assert main(["sweep", "--config", small_toml, "--axis", "power"]) == EXIT_CONFIG


class TestErrorExitCodes:
    """Configuration and I/O failures map to their exit codes."""

    def test_corrupted_profile(self, tmp_path, reference_toml):
        text = reference_toml.read_text(encoding="utf-8").replace(
            "probs = [0.5, 0.5]", "probs = [0.7, 0.3]"
        )
        assert main(["crlb", "--config", _write(tmp_path, text)]) == EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        assert main(["crlb", "--config", str(tmp_path / "absent.toml")]) == EXIT_IO

    def test_bad_kappa_flag(self, small_toml):
        assert main(["crlb", "--config", small_toml, "--kappa", "1.5"]) == EXIT_CONFIG


class TestCrlbCommand:
    """``disco-isac crlb``."""

    def test_csv_output(self, small_toml, capsys):
        assert main(["crlb", "--config", small_toml, "--format", "csv"]) == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(frame.columns) == CRLB_COLUMNS
        assert list(frame["benchmark"]) == [
            "isac_waveform/with_dris",
            "isac_waveform/without_dris",
        ]
        assert (frame["crlb_aod"] > 0).all()
        asymmetry = (frame["fim_12"] - frame["fim_21"]).abs()
        assert (asymmetry <= 1e-9 * frame["fim_11"].abs()).all()

    def test_table_output(self, small_toml, capsys):
        assert main(["crlb", "--config", small_toml, "--no-dris", "--seed", "4"]) == EXIT_OK
        text = capsys.readouterr().out
        assert "Scenario seed 4" in text
        assert "without_dris" in text
        assert "with_dris]" not in text


class TestValidateCommand:
    """``disco-isac validate``."""

    @pytest.mark.slow
    def test_reference_scenario_passes(self, reference_toml, capsys):
        code = main(["validate", "--config", str(reference_toml), "--format", "csv"])
        assert code == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert (frame["status"] != "fail").all()
        assert frame.loc[frame["name"] == "mu_bar_published", "status"].item() == "warn"

    def test_failed_check_exit_code(self, small_toml, monkeypatch, tmp_path):
        monkeypatch.setattr(settings.validation, "variance_rtol", 0.0)
        out = tmp_path / "checks"
        code = main(
            ["validate", "--config", small_toml, "--samples", "1000", "--out", str(out)]
        )
        assert code == EXIT_NUMERICAL
        frame = pd.read_csv(f"{out}.csv")
        assert frame.loc[frame["name"] == "aca_variance", "status"].item() == "fail"
