import json

from activecc.cli import main
from activecc.engine import RunConfig
from activecc.oracle import load_csv


def run_args(tmp_path, *extra):
    return ["run", "--dataset", "synthetic", "--n", "12", "--k", "3",
            "--d", "2", "--iters", "2", "--gamma", "0.2",
            "--init-fraction", "0.1", "--out", str(tmp_path / "runs"),
            *extra]


class TestGen:
    def test_writes_loadable_csv(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        assert main(["gen", "--n", "30", "--k", "3", "--d", "4",
                     "--seed", "1", "--out", str(out)]) == 0
        features, gt = load_csv(out)
        assert features.shape == (30, 4)
        assert gt.labels.max() == 2
        assert "wrote 30 objects" in capsys.readouterr().out


class TestRun:
    def test_uniform_run_writes_outputs(self, tmp_path, capsys):
        code = main(run_args(tmp_path, "--acq", "uniform", "--seeds", "3"))
        assert code == 0
        files = sorted((tmp_path / "runs").glob("*.jsonl"))
        assert len(files) == 3
        assert (tmp_path / "runs" / "summary.csv").exists()
        out = capsys.readouterr().out
        assert out.count("final ARI") == 3

    def test_run_requires_dataset_and_acquisition(self, tmp_path, capsys):
        assert main(["run", "--dataset", "synthetic"]) == 2
        assert "requires" in capsys.readouterr().err
        assert main(["run", "--acq", "uniform"]) == 2

    def test_unknown_strategy_exits_2(self, tmp_path, capsys):
        code = main(run_args(tmp_path, "--acq", "nosuch"))
        assert code == 2
        err = capsys.readouterr().err
        for name in ("uniform", "maxmin", "maxexp", "imu-c", "entropy",
                     "info-gain"):
            assert name in err

    def test_dump_config_defaults(self, tmp_path, capsys):
        code = main(["run", "--dataset", "synthetic", "--dump-config"])
        assert code == 0
        flat = json.loads(capsys.readouterr().out)
        assert flat["alpha"] == 1.0
        assert flat["beta"] == 3.0
        assert flat["subset_size"] is None      # resolved to 50N at run time
        assert flat["batch"] is None            # resolved to ceil(|E|/100)
        assert flat["power_diversity"] is True
        cfg = RunConfig.from_flat(flat)
        assert cfg.resolved_subset_size(500) == 25000
        assert cfg.batch_size(124750) == 1248

    def test_dump_config_round_trip(self, tmp_path, capsys):
        code = main(run_args(tmp_path, "--acq", "entropy", "--beta", "2.5",
                             "--dump-config"))
        assert code == 0
        flat = json.loads(capsys.readouterr().out)
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps(flat))
        code = main(["run", "--config", str(cfg_file), "--dump-config"])
        assert code == 0
        assert json.loads(capsys.readouterr().out) == flat

    def test_toml_config(self, tmp_path, capsys):
        cfg_file = tmp_path / "cfg.toml"
        cfg_file.write_text(
            'dataset = "synthetic"\nn = 12\nk = 3\nd = 2\n'
            'acquisition = "uniform"\ngamma = 0.1\niterations = 1\n'
            f'init_fraction = 0.1\nout_dir = "{tmp_path}/runs"\n')
        assert main(["run", "--config", str(cfg_file)]) == 0

    def test_flags_override_config_file(self, tmp_path, capsys):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"dataset": "synthetic", "gamma": 0.9}))
        main(["run", "--config", str(cfg_file), "--gamma", "0.1",
              "--dump-config"])
        assert json.loads(capsys.readouterr().out)["gamma"] == 0.1


class TestReport:
    def make_runs(self, tmp_path, seeds="2"):
        main(run_args(tmp_path, "--acq", "uniform", "--seeds", seeds))
        return sorted((tmp_path / "runs").glob("*.jsonl"))

    def test_aggregates_runs(self, tmp_path, capsys):
        files = self.make_runs(tmp_path)
        out = tmp_path / "report"
        assert main(["report", *map(str, files), "--out", str(out)]) == 0
        lines = (out / "aggregate.csv").read_text().splitlines()
        assert lines[0] == "iter,queries,ari_mean,ari_std,ami_mean,ami_std,n_runs"
        assert len(lines) == 4  # header + iterations 0..2
        assert all(line.endswith(",2") for line in lines[1:])
        auc_lines = (out / "auc.csv").read_text().splitlines()
        assert len(auc_lines) == 3

    def test_single_file_zero_std(self, tmp_path, capsys):
        files = self.make_runs(tmp_path, seeds="1")
        out = tmp_path / "report"
        assert main(["report", str(files[0]), "--out", str(out)]) == 0
        for line in (out / "aggregate.csv").read_text().splitlines()[1:]:
            cells = line.split(",")
            assert float(cells[3]) == 0.0
            assert float(cells[5]) == 0.0

    def test_mixed_configs_rejected(self, tmp_path, capsys):
        main(run_args(tmp_path, "--acq", "uniform", "--seeds", "1"))
        main(run_args(tmp_path, "--acq", "imu-c", "--seeds", "1"))
        files = sorted((tmp_path / "runs").glob("*.jsonl"))
        assert len(files) == 2
        code = main(["report", *map(str, files), "--out",
                     str(tmp_path / "report")])
        assert code == 2
        assert "config-hash mismatch" in capsys.readouterr().err


class TestSweep:
    def test_gamma_grid(self, tmp_path, capsys):
        code = main(["sweep", "--dataset", "synthetic", "--n", "12", "--k",
                     "3", "--d", "2", "--iters", "1", "--init-fraction",
                     "0.1", "--acq", "uniform", "--gamma-grid", "0.2,0.6",
                     "--seeds", "2", "--jobs", "2",
                     "--out", str(tmp_path / "sweep")])
        assert code == 0
        files = sorted((tmp_path / "sweep").glob("*.jsonl"))
        assert len(files) == 4  # 2 gammas x 2 seeds
        hashes = {f.name.split("_")[1] for f in files}
        assert len(hashes) == 2
