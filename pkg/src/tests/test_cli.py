import json
import os

import numpy
import pytest

from pyclawfdr import cli
from pyclawfdr.cli import main, read_units_csv, read_null_pool, load_config
from pyclawfdr.common import ClawNumericError, ConfigError, MissingColumn, ParseError
from pyclawfdr.configuration import config as package_config
from pyclawfdr.pipeline import StandardNormalNull, TabulatedNull
from pyclawfdr.misc import make_rng

from six import StringIO


def _write_units(path, m=40, seed=0, calibration=True):
    rng = make_rng(seed)
    t = rng.normal(size=m)
    t[: m // 4] += 4.0
    t_cal = rng.normal(size=m)
    with open(path, "w") as f:
        f.write("t,t_cal,s\n" if calibration else "t,s\n")
        for i in range(m):
            label = "a" if i % 2 == 0 else "b"
            if calibration:
                f.write("%r,%r,%s\n" % (float(t[i]), float(t_cal[i]), label))
            else:
                f.write("%r,%s\n" % (float(t[i]), label))
    return t, t_cal


def _write_json(path, data):
    with open(path, "w") as f:
        json.dump(data, f)


class TestReaders(object):
    def test_categorical(self):
        data = read_units_csv(StringIO("t,t_cal,s,extra\n1.5,0.1,a,x\n-2,0.3,b,y\n\n"))
        assert data.m == 2
        assert [u.s for u in data.units] == ["a", "b"]
        assert [u.t for u in data.units] == [1.5, -2.0]
        assert [u.t_cal for u in data.units] == [0.1, 0.3]

    def test_real(self):
        data = read_units_csv(StringIO("s2,t,s1,t_cal\n4,1,3,0\n6,2,5,0\n"))
        assert [u.s for u in data.units] == [(3.0, 4.0), (5.0, 6.0)]
        data = read_units_csv(StringIO("t,s1\n1,7\n"), require_calibration=False)
        assert data.units[0].s == 7.0
        assert data.units[0].t_cal is None

    def test_errors(self):
        with pytest.raises(MissingColumn):
            read_units_csv(StringIO("t,s\n1,a\n"))
        with pytest.raises(MissingColumn):
            read_units_csv(StringIO("t_cal,s\n1,a\n"))
        with pytest.raises(MissingColumn):
            read_units_csv(StringIO("t,t_cal\n1,2\n"))
        with pytest.raises(ParseError):
            read_units_csv(StringIO(""))
        with pytest.raises(ParseError) as excinfo:
            read_units_csv(StringIO("t,t_cal,s\n1,2,a\n1,x,a\n"))
        assert excinfo.value.line == 3
        with pytest.raises(ParseError) as excinfo:
            read_units_csv(StringIO("t,t_cal,s\n1,2\n"))
        assert excinfo.value.line == 2

    def test_null_pool(self):
        assert read_null_pool(StringIO("z\n0.5\n-1\n\n2\n")).tolist() == [0.5, -1.0, 2.0]
        assert read_null_pool(StringIO("0.5\n")).tolist() == [0.5]
        with pytest.raises(ParseError):
            read_null_pool(StringIO("0.5\nfoo\n"))
        with pytest.raises(ParseError):
            read_null_pool(StringIO("0.5,1\n"))


class TestLoadConfig(object):
    def test_defaults(self, monkeypatch):
        monkeypatch.setattr(package_config, "SEED", None)
        cfg, f0 = load_config(None)
        assert cfg.seed == 0
        assert cfg.alpha == 0.05
        assert isinstance(f0, StandardNormalNull)

    def test_seed_precedence(self, tmpdir, monkeypatch):
        filename = str(tmpdir.join("config.json"))
        _write_json(filename, {"alpha": 0.1, "seed": 5})
        monkeypatch.setattr(package_config, "SEED", None)
        assert load_config(filename)[0].seed == 5
        monkeypatch.setattr(package_config, "SEED", 9)
        assert load_config(filename)[0].seed == 9
        assert load_config(filename, seed=7)[0].seed == 7
        assert load_config(filename, seed=7)[0].alpha == 0.1

    def test_table(self, tmpdir):
        with open(str(tmpdir.join("cdf.csv")), "w") as f:
            f.write("t,cdf\n-10,0\n0,0.5\n10,1\n")
        filename = str(tmpdir.join("config.json"))
        _write_json(filename, {"f0": {"table": "cdf.csv"}})
        cfg, f0 = load_config(filename)
        assert isinstance(f0, TabulatedNull)
        assert f0.describe() == {"table": "cdf.csv"}

    def test_errors(self, tmpdir):
        filename = str(tmpdir.join("config.json"))
        _write_json(filename, {"f0": "laplace"})
        with pytest.raises(ConfigError) as excinfo:
            load_config(filename)
        assert excinfo.value.field == "config.f0"
        _write_json(filename, {"alpha": 2.0})
        with pytest.raises(ConfigError):
            load_config(filename)
        _write_json(filename, {"colour": 1})
        with pytest.raises(ConfigError):
            load_config(filename)
        _write_json(filename, [1, 2])
        with pytest.raises(ConfigError):
            load_config(filename)
        with open(filename, "w") as f:
            f.write("{\n  'alpha': \n")
        with pytest.raises(ParseError):
            load_config(filename)


class TestMain(object):
    def test_run(self, tmpdir, monkeypatch):
        monkeypatch.setattr(package_config, "SEED", None)
        input_ = str(tmpdir.join("units.csv"))
        t, t_cal = _write_units(input_)
        config = str(tmpdir.join("config.json"))
        _write_json(config, {"alpha": 0.2, "seed": 3})
        out = str(tmpdir.join("out"))
        rc = main(["--quiet", "run", input_, "--config", config, "--out", out])
        assert rc == 0
        with open(os.path.join(out, "report.json")) as f:
            report = json.load(f)
        assert report["m"] == 40
        assert report["alpha"] == 0.2
        assert report["seed"] == 3
        assert report["config"]["f0"] == "standard_normal"
        assert report["n_rejected"] == len(report["rejected"])
        assert report["tau_is_neg_infinity"] == (report["tau"] is None)
        assert report["bandwidth"] is None or report["bandwidth"] > 0
        # the per-unit report reads back as input
        back = read_units_csv(os.path.join(out, "report.csv"))
        assert numpy.array_equal([u.t for u in back.units], t)
        assert numpy.array_equal([u.t_cal for u in back.units], t_cal)
        with open(os.path.join(out, "report.csv")) as f:
            lines = f.read().splitlines()
        assert lines[0] == "index,t,s,t_cal,u,u_cal,evalue,rejected"
        assert len(lines) == 41
        flags = [int(line.split(",")[-1]) for line in lines[1:]]
        assert [i for i, v in enumerate(flags) if v] == report["rejected"]

    def test_run_seed_flag(self, tmpdir, monkeypatch):
        monkeypatch.setattr(package_config, "SEED", 4)
        input_ = str(tmpdir.join("units.csv"))
        _write_units(input_)
        out = str(tmpdir.join("out"))
        assert main(["--quiet", "run", input_, "--out", out]) == 0
        with open(os.path.join(out, "report.json")) as f:
            assert json.load(f)["seed"] == 4
        assert main(["--quiet", "run", input_, "--out", out, "--seed", "8"]) == 0
        with open(os.path.join(out, "report.json")) as f:
            assert json.load(f)["seed"] == 8

    def test_semisup(self, tmpdir):
        input_ = str(tmpdir.join("units.csv"))
        _write_units(input_, calibration=False)
        pool = str(tmpdir.join("pool.csv"))
        samples = make_rng(1).normal(size=120)
        with open(pool, "w") as f:
            f.write("z\n")
            for x in samples:
                f.write("%r\n" % (float(x)))
        out = str(tmpdir.join("out"))
        rc = main(["--quiet", "semisup", input_, "--null-pool", pool, "--out", out,
                   "--seed", "2"])
        assert rc == 0
        with open(os.path.join(out, "null_split.json")) as f:
            split = json.load(f)
        assert split["pool_size"] == 120
        assert split["seed"] == 2
        assert len(split["calibration_index"]) == 40
        assert len(split["train1_index"]) + len(split["train2_index"]) == 80
        used = split["calibration_index"] + split["train1_index"] + split["train2_index"]
        assert sorted(used) == list(range(120))
        back = read_units_csv(os.path.join(out, "report.csv"))
        assert [u.t_cal for u in back.units] == samples[split["calibration_index"]].tolist()

    def test_semisup_small_pool(self, tmpdir):
        input_ = str(tmpdir.join("units.csv"))
        _write_units(input_, calibration=False)
        pool = str(tmpdir.join("pool.csv"))
        with open(pool, "w") as f:
            f.write("0.1\n0.2\n")
        out = str(tmpdir.join("out"))
        assert main(["--quiet", "semisup", input_, "--null-pool", pool, "--out", out]) == 2

    def test_input_errors(self, tmpdir):
        out = str(tmpdir.join("out"))
        input_ = str(tmpdir.join("units.csv"))
        _write_units(input_, calibration=False)
        assert main(["--quiet", "run", input_, "--out", out]) == 2
        assert main(["--quiet", "run", str(tmpdir.join("missing.csv")), "--out", out]) == 2
        _write_units(input_)
        config = str(tmpdir.join("config.json"))
        _write_json(config, {"lam": 1.5})
        assert main(["--quiet", "run", input_, "--config", config, "--out", out]) == 2
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2

    def test_numeric_failure(self, tmpdir, monkeypatch):
        def fail(*args, **kwds):
            raise ClawNumericError("density underflow")

        monkeypatch.setattr(cli, "claw_run", fail)
        input_ = str(tmpdir.join("units.csv"))
        _write_units(input_)
        out = str(tmpdir.join("out"))
        assert main(["--quiet", "run", input_, "--out", out]) == 3

    def test_simulate(self, tmpdir, capsys):
        out = str(tmpdir.join("summary.csv"))
        json_out = str(tmpdir.join("summary.json"))
        rc = main(["simulate", "--family", "grouped", "--setting", "II", "--param",
                   "pi=0.2", "--reps", "2", "--methods", "bh,storey_bh", "--seed", "5",
                   "--out", out, "--json", json_out])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert stdout.startswith("bh ")
        assert "storey_bh" in stdout
        with open(out) as f:
            lines = f.read().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("bh,2,pi=0.2,")
        with open(json_out) as f:
            data = json.load(f)
        assert data["master_seed"] == 5
        assert data["n_reps"] == 2
        assert data["alpha"] == 0.05

    def test_simulate_errors(self):
        assert main(["--quiet", "simulate", "--family", "grouped", "--setting", "9"]) == 2
        assert main(["--quiet", "simulate", "--family", "grouped", "--setting", "1",
                     "--param", "pi=0.1"]) == 2
        assert main(["--quiet", "simulate", "--family", "grouped", "--setting", "1",
                     "--methods", "lasso"]) == 2
        with pytest.raises(SystemExit):
            main(["simulate", "--family", "grouped", "--setting", "1", "--reps", "0"])
        with pytest.raises(SystemExit):
            main(["simulate", "--family", "lattice", "--setting", "1"])

    def test_aggregate(self, tmpdir, capsys):
        panel = str(tmpdir.join("panel.csv"))
        with open(panel, "w") as f:
            f.write("a,b\n")
            f.write("100,20\n")
            f.write("0,0\n")
            f.write("0,2\n")
        assert main(["aggregate", panel, "--alpha", "0.1"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["sources"] == ["a", "b"]
        assert data["weights"] == [1.0, 1.0]
        assert data["ebar"] == [60.0, 0.0, 1.0]
        assert data["rejected"] == [0]
        assert data["n_rejected"] == 1
        out = str(tmpdir.join("agg.json"))
        assert main(["--quiet", "aggregate", panel, "--weights", "3,1", "--out", out]) == 0
        with open(out) as f:
            data = json.load(f)
        assert data["ebar"] == [80.0, 0.0, 0.5]
        assert main(["--quiet", "aggregate", panel, "--weights", "x,1"]) == 2
        assert main(["--quiet", "aggregate", panel, "--weights", "1,1,1"]) == 2
