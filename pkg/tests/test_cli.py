import json


from twistsim.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes(capsys):
    code, out, _ = run_cli(["verify", "--seed", "1"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    assert report["library_version"]
    assert report["config_sha256"]


def test_derive_reports_two_unpaired_modes(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "lattice": {"width": 8, "height": 6,
                    "segments": [{"row": 1, "col_start": 2, "col_end": 5}]},
    }))
    code, out, _ = run_cli(["derive", "--config", str(cfg)], capsys)
    assert code == 0
    report = json.loads(out)
    assert len(report["results"]["unpaired_modes"]) == 2
    assert "reduced" in report["results"]["parities"]["0"] or \
        "reduced" in report["results"]["parities"][0 if 0 in report["results"]["parities"] else "0"]


def test_malformed_config_fails_without_output(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    out_file = tmp_path / "report.json"
    code, _, err = run_cli(
        ["stats", "--config", str(cfg), "--out", str(out_file)], capsys)
    assert code == 1
    assert not out_file.exists()
    assert "config error" in err


def test_unknown_config_field_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus_field": 1}))
    code, _, err = run_cli(["stats", "--config", str(cfg)], capsys)
    assert code == 1
    assert "unknown config fields" in err


def test_stats_deterministic_and_signature(tmp_path, capsys):
    args = ["stats", "--seed", "3", "--shots", "400", "--n-braids", "2"]
    code1, out1, _ = run_cli(list(args), capsys)
    code2, out2, _ = run_cli(list(args), capsys)
    assert code1 == code2 == 0
    assert out1 == out2
    report = json.loads(out1)
    assert report["results"]["flip_frequency"] == 1.0


def test_stats_csv_output(tmp_path, capsys):
    out_file = tmp_path / "stats.csv"
    code, _, _ = run_cli(
        ["stats", "--seed", "0", "--shots", "50", "--n-braids", "0",
         "--out", str(out_file), "--format", "csv"], capsys)
    assert code == 0
    text = out_file.read_text()
    assert "flip_frequency" in text and "0.0" in text


def test_mbb_trace(capsys):
    code, out, _ = run_cli(["mbb", "--seed", "9"], capsys)
    assert code == 0
    report = json.loads(out)
    assert len(report["results"]["trace"]) == 3
    assert abs(report["results"]["fidelity"] - 1.0) < 1e-10


def test_oracle_check(capsys):
    code, out, _ = run_cli(["oracle-check", "--seed", "2", "--shots", "20"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["results"]["mismatches"] == 0


def test_lattice_file_config(tmp_path, capsys):
    lattice_file = tmp_path / "lat.json"
    lattice_file.write_text(json.dumps({
        "format": "twistsim-lattice/1", "width": 8, "height": 6,
        "segments": [{"row": 1, "col_start": 2, "col_end": 5}],
    }))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": str(lattice_file)}))
    code, out, _ = run_cli(["derive", "--config", str(cfg)], capsys)
    assert code == 0
    assert len(json.loads(out)["results"]["unpaired_modes"]) == 2
