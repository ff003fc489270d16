"""The command-line interface, exercised in-process through main()."""

import json
import subprocess
import sys

import pytest

from migrent import write_trace
from migrent.cli import main

from conftest import constant_trace

CATALOG_TEXT = """\
model_name,spec_score,tdp_watts,release_date,cores,cloud
old-box,300,95,2010-01-01,4,false
new-box,660,110,2015-03-01,12,false
box-a,31.579,10,2012-01-01,8,false
cloud-box,50,10,2016-01-01,16,true
"""


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli-data")
    (d / "catalog.csv").write_text(CATALOG_TEXT)
    write_trace(constant_trace(0.4, days=8.0, machine_id="const-04"), d / "const-04.csv")
    write_trace(constant_trace(0.4, days=3.0, machine_id="short"), d / "short.csv")
    write_trace(constant_trace(0.0, days=8.0, machine_id="idle"), d / "idle.csv")
    return d


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def error_payload(err):
    return json.loads(err)["error"]


class TestAnalyze:
    def test_basic_report(self, capsys, data_dir):
        payload = run_json(
            capsys,
            "analyze",
            str(data_dir / "const-04.csv"),
            "old-box",
            "--catalog",
            str(data_dir / "catalog.csv"),
            "--targets",
            "0.8",
        )
        assert payload["machine_id"] == "const-04"
        assert payload["cpu_model"] == "old-box"
        assert payload["idle_machine"] is False
        assert payload["peak_utilization"] == 0.4
        row = payload["targets"][0]
        assert row["target"] == 0.8
        assert row["static_resize"] == pytest.approx(0.805303, abs=5e-7)
        assert row["combined"] == pytest.approx(row["lift_and_shift"] * row["static_resize"], rel=1e-4)
        assert set(row["autoscale_vs"]) == {"lift-and-shift", "static-resized"}

    def test_machine_id_flag(self, capsys, data_dir):
        payload = run_json(
            capsys,
            "analyze",
            str(data_dir / "const-04.csv"),
            "old-box",
            "--catalog",
            str(data_dir / "catalog.csv"),
            "--machine-id",
            "rack-42",
            "--datacenter",
            "dc-west",
        )
        assert payload["machine_id"] == "rack-42"
        assert payload["datacenter_id"] == "dc-west"

    def test_missing_trace_exits_2(self, capsys, data_dir):
        code, _, err = run(
            capsys, "analyze", str(data_dir / "nope.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"),
        )
        assert code == 2
        assert "nope.csv" in error_payload(err)["message"]

    def test_short_trace_exits_3(self, capsys, data_dir):
        code, _, err = run(
            capsys, "analyze", str(data_dir / "short.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"),
        )
        assert code == 3
        assert error_payload(err)["type"] == "InsufficientDataError"

    def test_min_days_flag_rescues_short_trace(self, capsys, data_dir):
        payload = run_json(
            capsys, "analyze", str(data_dir / "short.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--min-days", "2",
        )
        assert payload["peak_utilization"] == 0.4

    def test_idle_machine_reported_not_failed(self, capsys, data_dir):
        payload = run_json(
            capsys, "analyze", str(data_dir / "idle.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--targets", "0.8",
        )
        assert payload["idle_machine"] is True
        assert payload["targets"][0]["static_resize"] is None
        assert payload["targets"][0]["autoscale_ideal"] == 0.0

    def test_unknown_cpu_exits_2(self, capsys, data_dir):
        code, _, err = run(
            capsys, "analyze", str(data_dir / "const-04.csv"), "old-bax",
            "--catalog", str(data_dir / "catalog.csv"),
        )
        assert code == 2
        assert "old-box" in error_payload(err)["message"]  # spelling hint

    @pytest.mark.parametrize("targets", ["0,0.5", "1.5", "abc", ""])
    def test_bad_targets_exit_2(self, capsys, data_dir, targets):
        code, _, err = run(
            capsys, "analyze", str(data_dir / "const-04.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--targets", targets,
        )
        assert code == 2

    def test_bad_baseline_rejected_by_argparse(self, data_dir):
        with pytest.raises(SystemExit):
            main([
                "analyze", str(data_dir / "const-04.csv"), "old-box",
                "--baseline", "something-else",
            ])


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """A deterministic synthetic corpus created through the CLI itself."""
    d = tmp_path_factory.mktemp("cli-corpus")
    code = main([
        "synth", "--out", str(d), "--seed", "42", "--machines", "8",
        "--datacenters", "3", "--duration-days", "8,9",
    ])
    assert code == 0
    return d


class TestFleet:
    def test_full_run(self, capsys, corpus):
        payload = run_json(capsys, "fleet", str(corpus / "manifest.csv"), "--targets", "0.5,0.8")
        assert payload["machines_analyzed"] == 8
        assert payload["machines_excluded"] == 0
        assert payload["targets"] == [0.5, 0.8]
        assert len(payload["mean_table"]) == 10
        assert len(payload["machines"]) == 8
        assert payload["machines"] == sorted(payload["machines"], key=lambda m: m["machine_id"])

    def test_deterministic_output(self, capsys, corpus):
        args = ("fleet", str(corpus / "manifest.csv"), "--targets", "0.8")
        code_a, out_a, _ = run(capsys, *args)
        code_b, out_b, _ = run(capsys, *args)
        assert code_a == code_b == 0
        assert out_a == out_b

    def test_jobs_flag_gives_same_output(self, capsys, corpus):
        base = ("fleet", str(corpus / "manifest.csv"), "--targets", "0.8")
        _, out_seq, _ = run(capsys, *base, "--jobs", "1")
        _, out_par, _ = run(capsys, *base, "--jobs", "2")
        assert out_seq == out_par

    def test_partial_failure_is_excluded(self, capsys, corpus, tmp_path):
        manifest = (corpus / "manifest.csv").read_text()
        manifest += "ghost,traces/ghost.csv,fx-quad-2011,dc000\n"
        patched = tmp_path / "manifest.csv"
        patched.write_text(manifest)
        (tmp_path / "traces").symlink_to(corpus / "traces")
        payload = run_json(capsys, "fleet", str(patched), "--targets", "0.8")
        assert payload["machines_excluded"] == 1
        assert payload["exclusions"][0]["machine_id"] == "ghost"

    def test_all_failures_exit_4(self, capsys, tmp_path):
        manifest = tmp_path / "manifest.csv"
        manifest.write_text(
            "machine_id,trace_path,cpu_model,datacenter_id\n"
            "ghost,traces/ghost.csv,fx-quad-2011,dc000\n"
        )
        code, _, err = run(capsys, "fleet", str(manifest), "--targets", "0.8")
        assert code == 4
        assert error_payload(err)["type"] == "FleetError"

    def test_missing_manifest_exits_2(self, capsys, tmp_path):
        code, _, err = run(capsys, "fleet", str(tmp_path / "none.csv"))
        assert code == 2

    def test_emit_csv(self, capsys, corpus, tmp_path):
        out_dir = tmp_path / "csv"
        payload = run_json(
            capsys, "fleet", str(corpus / "manifest.csv"),
            "--targets", "0.8", "--emit-csv", str(out_dir),
        )
        assert (out_dir / "mean_table.csv").exists()
        assert (out_dir / "size_bins.csv").exists()
        assert (out_dir / "util_by_release.csv").exists()
        cdf_files = sorted(p.name for p in out_dir.glob("cdf_*.csv"))
        assert "cdf_lift_and_shift_0.8.csv" in cdf_files
        assert payload["machines_analyzed"] == 8


class TestSynth:
    def test_message_and_layout(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, "synth", "--out", str(tmp_path / "corpus"), "--seed", "1",
            "--machines", "4", "--datacenters", "2",
        )
        assert code == 0
        assert "wrote 4 traces across 2 datacenters" in out
        assert (tmp_path / "corpus" / "manifest.csv").exists()
        assert (tmp_path / "corpus" / "traces" / "m0003.csv").exists()

    def test_same_seed_byte_identical(self, capsys, tmp_path):
        for name in ("a", "b"):
            code, _, _ = run(
                capsys, "synth", "--out", str(tmp_path / name), "--seed", "7",
                "--machines", "3", "--datacenters", "2", "--duration-days", "8",
            )
            assert code == 0
        for rel in ("manifest.csv", "traces/m0000.csv", "traces/m0001.csv", "traces/m0002.csv"):
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_different_seed_differs(self, capsys, tmp_path):
        for name, seed in (("a", "7"), ("b", "8")):
            run(
                capsys, "synth", "--out", str(tmp_path / name), "--seed", seed,
                "--machines", "3", "--datacenters", "2",
            )
        assert (
            (tmp_path / "a" / "traces" / "m0000.csv").read_bytes()
            != (tmp_path / "b" / "traces" / "m0000.csv").read_bytes()
        )

    def test_invalid_range_exits_2(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "synth", "--out", str(tmp_path / "x"),
            "--base-util", "0.9,0.2",
        )
        assert code == 2
        assert "base_utilization" in error_payload(err)["message"]

    def test_invalid_period_exits_2(self, capsys, tmp_path):
        code, _, _ = run(capsys, "synth", "--out", str(tmp_path / "x"), "--periods", "45")
        assert code == 2

    def test_single_value_range(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "synth", "--out", str(tmp_path / "x"), "--machines", "2",
            "--datacenters", "1", "--duration-days", "8", "--noise", "0.01",
        )
        assert code == 0


class TestCatalog:
    def test_list_bundled(self, capsys):
        code, out, _ = run(capsys, "catalog", "list")
        assert code == 0
        lines = out.strip().splitlines()
        names = [line.split(" ")[0] for line in lines]
        assert names == sorted(names)
        assert sum("(cloud reference)" in line for line in lines) == 1

    def test_list_custom_catalog(self, capsys, data_dir):
        code, out, _ = run(capsys, "catalog", "list", "--catalog", str(data_dir / "catalog.csv"))
        assert code == 0
        assert "cloud-box (cloud reference)" in out

    def test_show(self, capsys, data_dir):
        payload = run_json(
            capsys, "catalog", "show", "old-box", "--catalog", str(data_dir / "catalog.csv")
        )
        assert payload["model_name"] == "old-box"
        assert payload["spec_score"] == 300
        assert payload["ce"] == pytest.approx(300 / 95, rel=1e-4)

    def test_show_unknown_exits_2(self, capsys, data_dir):
        code, _, err = run(
            capsys, "catalog", "show", "mystery", "--catalog", str(data_dir / "catalog.csv")
        )
        assert code == 2

    def test_ce_prints_fraction(self, capsys, data_dir):
        code, out, _ = run(
            capsys, "catalog", "ce", "box-a", "--catalog", str(data_dir / "catalog.csv")
        )
        assert code == 0
        assert out.strip() == "0.63158"

    def test_ce_with_explicit_cloud_model(self, capsys, data_dir):
        code, out, _ = run(
            capsys, "catalog", "ce", "old-box", "old-box",
            "--catalog", str(data_dir / "catalog.csv"),
        )
        assert code == 0
        assert out.strip() == "1"

    def test_env_var_supplies_catalog(self, capsys, data_dir, monkeypatch):
        monkeypatch.setenv("MIGRENT_CATALOG", str(data_dir / "catalog.csv"))
        code, out, _ = run(capsys, "catalog", "list")
        assert code == 0
        assert "box-a" in out

    def test_flag_beats_env_var(self, capsys, data_dir, monkeypatch, tmp_path):
        bogus = tmp_path / "bogus.csv"
        bogus.write_text("not,a,catalog\n")
        monkeypatch.setenv("MIGRENT_CATALOG", str(bogus))
        code, out, _ = run(capsys, "catalog", "list", "--catalog", str(data_dir / "catalog.csv"))
        assert code == 0
        assert "box-a" in out


class TestConfigFile:
    def test_config_supplies_defaults(self, capsys, data_dir, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"targets": [0.7], "min_days": 2}))
        payload = run_json(
            capsys, "analyze", str(data_dir / "short.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--config", str(config),
        )
        assert [row["target"] for row in payload["targets"]] == [0.7]

    def test_flag_beats_config(self, capsys, data_dir, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"targets": [0.7], "min_days": 2}))
        payload = run_json(
            capsys, "analyze", str(data_dir / "short.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--config", str(config),
            "--targets", "0.9",
        )
        assert [row["target"] for row in payload["targets"]] == [0.9]

    def test_unknown_config_key_exits_2(self, capsys, data_dir, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"windowseconds": 60}))
        code, _, err = run(
            capsys, "analyze", str(data_dir / "const-04.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--config", str(config),
        )
        assert code == 2
        assert "windowseconds" in error_payload(err)["message"]

    def test_malformed_config_exits_2(self, capsys, data_dir, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("{not json")
        code, _, _ = run(
            capsys, "analyze", str(data_dir / "const-04.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--config", str(config),
        )
        assert code == 2

    def test_non_object_config_exits_2(self, capsys, data_dir, tmp_path):
        config = tmp_path / "config.json"
        config.write_text("[1, 2]")
        code, _, _ = run(
            capsys, "analyze", str(data_dir / "const-04.csv"), "old-box",
            "--catalog", str(data_dir / "catalog.csv"), "--config", str(config),
        )
        assert code == 2


class TestEntrypoints:
    def test_no_arguments_is_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2

    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "migrent", "catalog", "list"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "(cloud reference)" in proc.stdout

    def test_console_script(self):
        proc = subprocess.run(["migrent", "catalog", "list"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "(cloud reference)" in proc.stdout
