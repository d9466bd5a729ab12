import json

import pytest

from cvqkd_rates import (
    ChannelParams,
    ProtocolConfig,
    SearchSettings,
    Variant,
    max_tolerable_noise,
    protocol_key_rate,
)
from cvqkd_rates.cli import format_number, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestKeyrateCommand:
    def test_pessimistic_json_record(self, capsys):
        code, out, _ = run_cli(
            capsys, "keyrate", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
            "--vpb", "1.005", "--variant", "ud-pessimistic",
        )
        assert code == 0
        payload = json.loads(out)
        record = payload["results"][0]
        assert set(record) == {"i_ab", "chi_be", "key_rate", "c_p_evaluated", "worst_case"}
        assert record["worst_case"] is True

        engine = protocol_key_rate(
            ProtocolConfig(10.0, Variant.UD_PESSIMISTIC),
            ChannelParams(eta_x=0.1, eps_x=0.05, eta_p=0.1, eps_p=0.05),
            v_p_b=1.005,
            settings=SearchSettings(),
        )
        assert record["key_rate"] == pytest.approx(engine.key_rate, abs=1e-11)
        assert record["i_ab"] == pytest.approx(engine.i_ab, abs=1e-11)
        assert payload["config"]["variant"] == "ud-pessimistic"

    def test_fixed_correlation_point(self, capsys):
        code, out, _ = run_cli(
            capsys, "keyrate", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
            "--vpb", "1.005", "--cp", "-0.5", "--variant", "ud-pessimistic",
        )
        assert code == 0
        record = json.loads(out)["results"][0]
        assert record["c_p_evaluated"] == -0.5
        assert record["worst_case"] is False

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "keyrate", "--vm", "10", "--eta-x", "0.5", "--format", "csv",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "i_ab,chi_be,key_rate,c_p_evaluated,worst_case"
        assert len(lines) == 2

    def test_transmittance_validation_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "keyrate", "--vm", "10", "--eta-x", "1.2")
        assert code == 2
        assert "eta_x" in err and "(0, 1]" in err

    def test_cp_rejected_for_baseline(self, capsys):
        code, _, err = run_cli(
            capsys, "keyrate", "--vm", "10", "--eta-x", "0.5", "--cp", "-0.1",
            "--variant", "gg02",
        )
        assert code == 2
        assert "--cp" in err


class TestErrorRecords:
    def test_empty_region_exit_three_with_json_record(self, capsys):
        code, out, err = run_cli(
            capsys, "sweep-cp", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
            "--vpb", "0.9", "--format", "json",
        )
        assert code == 3
        payload = json.loads(out)
        assert payload["error"]["error_type"] == "EmptyRegion"
        assert "EmptyRegion" in err

    def test_empty_region_csv_record(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep-cp", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
            "--vpb", "0.9",
        )
        assert code == 3
        assert out.splitlines()[0] == "error_type,error_message"
        assert "EmptyRegion" in out


class TestSweeps:
    def test_sweep_cp_round_trips_byte_identical(self, capsys):
        args = ("sweep-cp", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
                "--vpb", "1.005", "--resolution", "21")
        code, out, _ = run_cli(capsys, *args)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "c_p,key_rate"
        # Re-parsing every numeric cell and re-emitting reproduces the bytes.
        rebuilt = [lines[0]]
        for line in lines[1:]:
            rebuilt.append(",".join(format_number(float(cell)) for cell in line.split(",")))
        assert "\n".join(rebuilt) + "\n" == out

    def test_keyrate_json_round_trips_byte_identical(self, capsys):
        from cvqkd_rates.cli import _json_text

        code, out, _ = run_cli(
            capsys, "keyrate", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
            "--vpb", "1.005", "--variant", "ud-optimistic",
        )
        assert code == 0
        assert _json_text(json.loads(out)) + "\n" == out

    def test_sweep_loss_columns(self, capsys):
        code, out, _ = run_cli(
            capsys, "sweep-loss", "--vm", "100", "--eps", "0.05",
            "--loss-db-min", "0", "--loss-db-max", "10", "--loss-db-step", "5",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "loss_db,k_gg02,k_ud_estimated,k_ud_pessimistic"
        assert len(lines) == 4

    def test_region_summary_in_json(self, capsys):
        code, out, _ = run_cli(
            capsys, "region", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
            "--vpb-max", "1.002", "--resolution", "3", "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert "max_secure_v_p_b" in payload["summary"]
        assert len(payload["results"]) == 3

    def test_tolerable_noise_record(self, capsys):
        code, out, _ = run_cli(
            capsys, "tolerable-noise", "--vm", "100", "--loss-db", "2",
            "--variant", "gg02",
        )
        assert code == 0
        record = json.loads(out)["results"][0]
        expected = max_tolerable_noise(ProtocolConfig(100.0), 2.0, Variant.GG02)
        assert record["eps_max"] == pytest.approx(expected, abs=1e-9)


class TestFigures:
    def test_figure_three_layout(self, capsys):
        code, out, _ = run_cli(capsys, "figure", "--id", "3", "--resolution", "51")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "v_p_b,c_p,key_rate"
        assert len(lines) == 1 + 4 * 51

    def test_figure_two_contains_crossing(self, capsys):
        code, out, _ = run_cli(
            capsys, "figure", "--id", "2", "--resolution", "11", "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["summary"]["max_secure_v_p_b"] == pytest.approx(1.0053, abs=1e-3)

    def test_figure_five_deterministic_on_coarse_grid(self, capsys, tmp_path):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        for path in (out_a, out_b):
            code = main([
                "figure", "--id", "5",
                "--loss-db-min", "1", "--loss-db-max", "7", "--loss-db-step", "3",
                "--out", str(path),
            ])
            capsys.readouterr()
            assert code == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        header = out_a.read_text().splitlines()[0]
        assert header == (
            "loss_db,eps_max_gg02,eps_max_ud_estimated,"
            "eps_max_ud_pessimistic,eps_max_ud_optimistic"
        )

    def test_out_file_uses_lf_endings(self, capsys, tmp_path):
        path = tmp_path / "curve.csv"
        code = main([
            "sweep-cp", "--vm", "10", "--eta-x", "0.1", "--eps-x", "0.05",
            "--vpb", "1.005", "--resolution", "11", "--out", str(path),
        ])
        captured = capsys.readouterr()
        assert code == 0
        assert captured.out == ""
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")

    def test_unknown_figure_rejected(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["figure", "--id", "7"])
        capsys.readouterr()
        assert exc.value.code == 2


class TestNumberFormatting:
    def test_twelve_significant_digits(self):
        assert format_number(0.4982033676379959) == "0.498203367638"
        assert format_number(1.0) == "1"
        assert format_number(-0.5463686435583209) == "-0.546368643558"

    def test_round_trip_stable(self):
        for value in (0.1, 1.005, -0.5463686435583209, 123456.789012345, 1e-7):
            text = format_number(value)
            assert format_number(float(text)) == text
