import csv

import pytest

from simulate import as_list, main

SMALL = "n_receivers: 2\nfull_capacity_mah: 10\n"


@pytest.fixture
def config_file(tmp_path):
    def make(text=SMALL):
        path = tmp_path / "sim.yaml"
        path.write_text(text, encoding="utf-8")
        return str(path)

    return make


def read_rows(path):
    with open(path, "r", encoding="utf-8") as fp:
        return list(csv.DictReader(fp))


class TestAsList:
    def test_forms(self):
        assert as_list(5, int) == [5]
        assert as_list((5, 10), int) == [5, 10]
        assert as_list("5,10", int) == [5, 10]
        assert as_list(None, int) is None


class TestMain:
    def test_profile(self, tmp_path):
        assert main(["profile", f"--out={tmp_path}"]) == 0
        rows = read_rows(tmp_path / "profile.csv")
        assert len(rows) == 101
        assert rows[-1] == {"soc": "1.0", "stage": "CT", "desired_power_w": "0.0"}

    def test_run(self, tmp_path, config_file):
        assert main(["run", f"--config={config_file()}", f"--out={tmp_path}"]) == 0
        (row,) = read_rows(tmp_path / "summary.csv")
        assert row["n_receivers"] == "2"
        assert row["status"] == "ok"
        assert (tmp_path / "config.yaml").exists()

    def test_run_overrides(self, tmp_path, config_file):
        args = ["run", f"--config={config_file()}", f"--out={tmp_path}", "--n=3", "--drive-power=40"]
        assert main(args) == 0
        (row,) = read_rows(tmp_path / "summary.csv")
        assert (row["n_receivers"], row["drive_power_w"]) == ("3", "40.0")

    def test_invalid_config(self, tmp_path, config_file):
        path = config_file("eta_s = 1.5\n")
        assert main(["run", f"--config={path}", f"--out={tmp_path}"]) == 1

    def test_missing_config(self, tmp_path):
        assert main(["run", f"--config={tmp_path / 'nope.yaml'}", f"--out={tmp_path}"]) == 2

    def test_time_cap_is_runtime_error(self, tmp_path, config_file):
        path = config_file(SMALL + "max_time_s: 20\n")
        assert main(["run", f"--config={path}", f"--out={tmp_path}"]) == 2
        (row,) = read_rows(tmp_path / "summary.csv")
        assert row["status"] == "failed"

    def test_compare(self, tmp_path, config_file):
        args = ["compare", f"--config={config_file()}", f"--out={tmp_path}", "--n=1,2"]
        assert main(args) == 0
        rows = read_rows(tmp_path / "compare.csv")
        assert [row["n_receivers"] for row in rows] == ["1", "2"]
        assert abs(float(rows[0]["ratio"]) - 1.0) < 0.05
        assert float(rows[1]["ratio"]) < 1.0
        assert len(read_rows(tmp_path / "summary.csv")) == 4

    def test_sweep_json(self, tmp_path, config_file):
        args = [
            "sweep",
            f"--config={config_file()}",
            f"--out={tmp_path}",
            "--n=1,2",
            "--drive-power=21,50",
            "--format=json",
        ]
        assert main(args) == 0
        assert (tmp_path / "summary.json").exists()
        assert (tmp_path / "timeseries_tdma_n2_pd50_seednone.json").exists()

    def test_unknown_command(self):
        assert main(["teleport"]) == 1

    def test_bad_format(self, tmp_path):
        assert main(["profile", f"--out={tmp_path}", "--format=xml"]) == 1

    def test_compare_drive_power_list(self, tmp_path, config_file):
        args = [
            "compare",
            f"--config={config_file()}",
            f"--out={tmp_path}",
            "--n=1,2",
            "--drive-power=21,50",
        ]
        assert main(args) == 0
        rows = read_rows(tmp_path / "compare.csv")
        assert [(row["n_receivers"], row["drive_power_w"]) for row in rows] == [
            ("1", "21.0"),
            ("1", "50.0"),
            ("2", "21.0"),
            ("2", "50.0"),
        ]
        assert len(read_rows(tmp_path / "summary.csv")) == 8

    def test_sweep_writes_seed_means(self, tmp_path, config_file):
        path = config_file(SMALL + "init_mode: uniform\nseed: 3\nruns: 3\n")
        args = ["sweep", f"--config={path}", f"--out={tmp_path}", "--n=2", "--drive-power=21,50"]
        assert main(args) == 0
        summary = read_rows(tmp_path / "summary.csv")
        means = read_rows(tmp_path / "means.csv")
        assert list(means[0]) == [
            "scheduler",
            "n_receivers",
            "drive_power_w",
            "runs",
            "t_charge_s",
            "avg_multiplexing",
        ]
        assert [(row["drive_power_w"], row["runs"]) for row in means] == [
            ("21.0", "3"),
            ("50.0", "3"),
        ]
        for mean in means:
            cell = [row for row in summary if row["drive_power_w"] == mean["drive_power_w"]]
            assert len(cell) == 3
            for column in ("t_charge_s", "avg_multiplexing"):
                expected = sum(float(row[column]) for row in cell) / 3
                assert float(mean[column]) == pytest.approx(expected)

    def test_bad_log_level(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RBC_SCHED_LOG", "BOGUS")
        assert main(["profile", f"--out={tmp_path}"]) == 1
