import csv
import json

import pytest

from morphspread import P1, cli, spectral

P1_DICT = P1.as_dict()


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture
def p1_config(tmp_path):
    return write_config(tmp_path, P1_DICT)


class TestConfig:
    def test_roundtrip(self, tmp_path, p1_config):
        cfg = cli.load_config(p1_config)
        assert cfg.params == P1
        assert cfg.sim == cli.SIM_DEFAULTS

    def test_negative_parameter_named(self):
        with pytest.raises(cli.ConfigError, match="D_e"):
            cli.parse_config({**P1_DICT, "D_e": -0.3})

    def test_unknown_key(self):
        with pytest.raises(cli.ConfigError, match="D_x"):
            cli.parse_config({**P1_DICT, "D_x": 1.0})

    def test_missing_key(self):
        data = dict(P1_DICT)
        del data["r_d"]
        with pytest.raises(cli.ConfigError, match="r_d"):
            cli.parse_config(data)

    def test_scaling_form(self):
        data = {k: v for k, v in P1_DICT.items() if k not in ("mu_e", "mu_d")}
        cfg = cli.parse_config({**data, "mu": 2.0, "e": 0.001, "d": 0.00025})
        assert (cfg.params.mu_e, cfg.params.mu_d) == (0.002, 0.0005)
        assert cfg.mutation_scaling().mu == 2.0

    def test_both_mutation_forms_rejected(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_config({**P1_DICT, "mu": 1.0, "e": 0.001, "d": 0.00025})

    @pytest.mark.parametrize("sim", [{"dx": 0.1}, {"boundary": "periodic"}, {"nx": 40.5}, {"left": [1.0]}])
    def test_bad_sim_block(self, sim):
        with pytest.raises(cli.ConfigError):
            cli.parse_config({**P1_DICT, "sim": sim})

    def test_bool_is_not_a_number(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_config({**P1_DICT, "r_e": True})


class TestExitCodes:
    def test_speed(self, p1_config, tmp_path, capsys):
        assert cli.run_cli(["speed", "--config", p1_config, "--out", str(tmp_path / "o")]) == 0
        assert "c*=1.5298217" in capsys.readouterr().out
        rows = read_csv(tmp_path / "o" / "dispersion.csv")
        assert tuple(rows[0]) == ("beta", "eta")
        assert json.loads((tmp_path / "o" / "speed.json").read_text())["c_star"] == pytest.approx(1.5298217)

    def test_conditions_report_failure_but_exit_zero(self, p1_config, capsys):
        assert cli.run_cli(["conditions", "--config", p1_config]) == 0
        assert "intersmall FAIL (-0.267633" in capsys.readouterr().out

    def test_invalid_config(self, tmp_path, capsys):
        bad = write_config(tmp_path, {**P1_DICT, "D_e": -0.3})
        assert cli.run_cli(["speed", "--config", bad]) == 1
        assert "D_e" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert cli.run_cli(["speed", "--config", str(tmp_path / "nope.json")]) == 1

    def test_missing_config_flag(self):
        assert cli.run_cli(["speed"]) == 1

    def test_unknown_command(self):
        assert cli.run_cli(["frobnicate"]) == 1

    def test_limits_wrong_regime(self, tmp_path):
        cfg = write_config(tmp_path, {**P1_DICT, "r_d": 1.0})
        assert cli.run_cli(["limits", "--config", cfg]) == 1

    def test_numerical_failure(self, tmp_path):
        # dispersion minimum far outside the scan range
        data = {**P1_DICT, "D_e": 1e4, "D_d": 1e4, "r_e": 1e-4, "r_d": 1e-4, "mu_e": 1e-6, "mu_d": 1e-6}
        assert cli.run_cli(["speed", "--config", write_config(tmp_path, data)]) == 2

    def test_verify_inconclusive(self, p1_config, tmp_path):
        argv = ["verify", "--config", p1_config, "--L", "60", "--nx", "601", "--x0", "10", "--t-end", "40",
                "--out", str(tmp_path / "v")]
        assert cli.run_cli(argv) == 3
        assert json.loads((tmp_path / "v" / "verify.json").read_text())["status"] == "INCONCLUSIVE"

    def test_equilibria_and_classify(self, p1_config, tmp_path, capsys):
        assert cli.run_cli(["equilibria", "--config", p1_config, "--grid-n", "12", "--out", str(tmp_path)]) == 0
        assert "non-negative equilibria of f: 2" in capsys.readouterr().out
        payload = json.loads((tmp_path / "equilibria.json").read_text())
        assert payload["k_minus"] is None and "intersmall" in payload["k_minus_error"]
        assert cli.run_cli(["classify", "--config", p1_config]) == 0
        assert "regime=anomalous" in capsys.readouterr().out


class TestOutputs:
    def test_mu_curve_header_and_determinism(self, p1_config, tmp_path):
        outs = []
        for i, jobs in enumerate(("1", "2")):
            out = tmp_path / f"run{i}"
            argv = ["mu-curve", "--config", p1_config, "--points", "8", "--jobs", jobs, "--out", str(out)]
            assert cli.run_cli(argv) == 0
            outs.append((out / "mu_curve.csv").read_bytes())
        assert outs[0] == outs[1]
        assert outs[0].splitlines()[0] == b"mu,eta,beta,q_ratio,eta_prime,beta_prime"

    def test_sweep_completeness(self, tmp_path):
        assert cli.run_cli(["sweep", "--n", "20", "--jobs", "2", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "sweep.csv")
        assert tuple(rows[0]) == ("r_ratio", "D_ratio", "regime", "v_limit")
        body = rows[1:]
        assert len(body) == 400
        for r, D, regime, _ in body:
            assert (regime == "anomalous") == spectral.in_anomalous_zone(float(r), float(D))
        q_rows = read_csv(tmp_path / "q_ratio.csv")
        assert tuple(q_rows[0]) == ("r_ratio", "D_ratio", "m_ratio", "q_ratio") and len(q_rows) == 401

    def test_sweep_deterministic_across_jobs(self, tmp_path):
        for jobs in ("1", "3"):
            assert cli.run_cli(["sweep", "--n", "10", "--jobs", jobs, "--out", str(tmp_path / jobs)]) == 0
        assert (tmp_path / "1" / "sweep.csv").read_bytes() == (tmp_path / "3" / "sweep.csv").read_bytes()

    def test_simulate_outputs(self, tmp_path):
        cfg = write_config(tmp_path, {**P1_DICT, "sim": {"L": 40.0, "nx": 401, "t_end": 5.0, "x0": 5.0}})
        runs = []
        for name in ("a", "b"):
            assert cli.run_cli(["simulate", "--config", cfg, "--out", str(tmp_path / name)]) == 0
            runs.append([(tmp_path / name / f).read_bytes() for f in ("trace.csv", "profile.csv")])
        assert runs[0] == runs[1]
        trace, profile = runs[0]
        assert trace.splitlines()[0] == b"t,x_front"
        assert profile.splitlines()[0] == b"x,n_e,n_d"
        assert len(profile.splitlines()) == 402

    def test_dirichlet_config(self, tmp_path):
        cfg = write_config(tmp_path, {**P1_DICT, "sim": {"L": 40.0, "nx": 401, "t_end": 2.0, "x0": 5.0,
                                                        "boundary": "dirichlet", "left": [0.7, 0.5]}})
        assert cli.run_cli(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
        first = read_csv(tmp_path / "profile.csv")[1]
        assert (float(first[1]), float(first[2])) == (0.7, 0.5)
