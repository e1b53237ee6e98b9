import csv
import io
import json
import math
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from subcomp import cli
from subcomp.config import ConfigError, RunConfig, dump_config, load_config, parse_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

finite = st.floats(-1e6, 1e6, allow_nan=False)
positive = st.floats(1e-6, 1e6)


@st.composite
def windows(draw):
    edges = sorted(draw(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=4, unique=True)))
    hi = draw(st.sampled_from([math.inf, edges[-1]]))
    out = [(edges[0], hi)] if hi == math.inf else [(edges[0], edges[-1])]
    if draw(st.booleans()):
        out.insert(0, (-math.inf, -edges[0]))
    return tuple(out)


@st.composite
def configs(draw):
    return RunConfig(
        command=draw(st.sampled_from(["simulate", "density", "verify"])),
        kernel=draw(st.sampled_from(["skew", "compound_poisson"])),
        beta=draw(st.floats(-1, 1)),
        rate=draw(positive), jump_std=draw(positive),
        c=draw(positive), lam=draw(positive), alpha=draw(st.floats(0, 0.9)),
        drift=draw(st.floats(0, 10)), eps=draw(st.floats(1e-8, 1.0)),
        horizon=draw(positive), x0=draw(finite), window=draw(windows()),
        n_paths=draw(st.integers(1, 10 ** 7)), seed=draw(st.integers(0, 2 ** 64 - 1)),
        coupled=draw(st.booleans()), block_size=draw(st.integers(1, 10 ** 5)),
        y_min=draw(finite), y_max=draw(finite), n_points=draw(st.integers(2, 500)),
        x_values=tuple(draw(st.lists(finite, min_size=1, max_size=5))),
        exclude=draw(positive),
        output_format=draw(st.sampled_from(["csv", "json"])),
    )


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


SMALL_VG = """
command = verify
kernel.type = skew
subordinator.c = 1
subordinator.lambda = 1
scenario.window = 0.5:inf
scenario.paths = 5000
scenario.seed = 99
output.format = json
"""


class TestConfig:
    @given(cfg=configs())
    def test_round_trip(self, cfg):
        assert parse_config(dump_config(cfg)) == cfg

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# header\n\nkernel.beta = 0.25  # skew\n")
        assert cfg.beta == 0.25

    @pytest.mark.parametrize("text", ["bogus.key = 1", "kernel.beta", "scenario.paths = many",
                                      "kernel.type = levy", "density.exclude = 0",
                                      "scenario.coupled = maybe"])
    def test_bad_input(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    @pytest.mark.parametrize("name", ["vg.cfg", "skew_ts.cfg", "cp_drift.cfg",
                                      "density_skew_gamma.cfg"])
    def test_shipped_scenarios_load(self, name):
        cfg = load_config(SCENARIOS / name)
        cfg.subordinator()
        cfg.make_kernel()
        if cfg.command == "verify":
            cfg.scenario()

    def test_y_grid_excludes_origin(self):
        cfg = RunConfig(y_min=-1.0, y_max=1.0, n_points=21, exclude=0.05)
        grid = cfg.y_grid()
        assert len(grid) == 20 and min(abs(grid)) >= 0.05


class TestExitCodes:
    def test_missing_config(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["verify", "--config", "/nonexistent/file.cfg"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 2

    def test_verify_pass_and_corrupt(self, tmp_path, capsys):
        path = write_cfg(tmp_path, SMALL_VG)
        assert cli.main(["verify", "--config", path]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["pass"] is True
        assert cli.main(["verify", "--config", path, "--corrupt-predicted", "1.2"]) == 1
        assert json.loads(capsys.readouterr().out)["pass"] is False

    def test_runtime_error_is_json(self, tmp_path, capsys):
        path = write_cfg(tmp_path, SMALL_VG + "kernel.beta = 0.5\nsubordinator.drift = 0.2\n")
        assert cli.main(["verify", "--config", path]) == 3
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["command"] == "verify"

    def test_selftest_perturbed(self, capsys):
        assert cli.main(["selftest", "--perturb-bessel", "1e-3"]) == 1
        lines = capsys.readouterr().out.splitlines()
        assert next(l for l in lines if "bessel identity" in l).startswith("FAIL")


class TestSeeds:
    def _seed(self, argv, capsys):
        assert cli.main(argv) == 0
        return json.loads(capsys.readouterr().out)["seed"]

    def test_precedence(self, tmp_path, capsys, monkeypatch):
        path = write_cfg(tmp_path, SMALL_VG.replace("5000", "200"))
        monkeypatch.delenv(cli.SEED_ENV, raising=False)
        assert self._seed(["verify", "--config", path], capsys) == 99
        monkeypatch.setenv(cli.SEED_ENV, "7")
        assert self._seed(["verify", "--config", path], capsys) == 7
        assert self._seed(["verify", "--config", path, "--seed", "11"], capsys) == 11


class TestOutputs:
    def test_density_csv(self, tmp_path, capsys):
        out = tmp_path / "density.csv"
        code = cli.main(["density", "--config", str(SCENARIOS / "density_skew_gamma.cfg"),
                         "--output", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert tuple(rows[0]) == cli.DENSITY_COLUMNS
        assert len(rows) == 4 * 24
        for r in rows:
            assert abs(float(r["closed_form"]) - float(r["gamma_closed_form"])) <= \
                1e-12 * float(r["closed_form"])
            assert float(r["abs_diff"]) <= float(r["tolerance"])

    def test_density_beta_zero_x_independent(self, tmp_path, capsys):
        path = write_cfg(tmp_path, "command = density\nkernel.beta = 0\nsubordinator.alpha = 0.3\n"
                                   "density.n_points = 7\noutput.format = csv\n")
        assert cli.main(["density", "--config", path]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        by_y = {}
        for r in rows:
            by_y.setdefault(r["y"], set()).add(r["closed_form"])
        assert all(len(v) == 1 for v in by_y.values())

    def test_full_precision(self, tmp_path, capsys):
        path = write_cfg(tmp_path, "command = density\nkernel.beta = 0.3\ndensity.n_points = 4\n"
                                   "density.x_values = 0.1\noutput.format = csv\n")
        cli.main(["density", "--config", path])
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        from subcomp.compensator import skew_ts_closed_form
        from subcomp.levy_models import TemperedStableParams
        from subcomp.markov import SkewParams
        for r in rows:
            exact = skew_ts_closed_form(0.1, float(r["y"]), SkewParams(0.3),
                                        TemperedStableParams(1.0, 1.0))
            assert float(r["closed_form"]) == exact

    def test_simulate_csv(self, tmp_path, capsys):
        path = write_cfg(tmp_path, SMALL_VG.replace("5000", "300") + "kernel.beta = 0.6\n"
                                                                    "output.format = csv\n")
        assert cli.main(["simulate", "--config", path]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert tuple(rows[0]) == cli.SIMULATE_COLUMNS
        paths = [int(r["path"]) for r in rows]
        assert paths == sorted(paths) and max(paths) < 300
        for r in rows:
            assert (float(r["size"]) >= 0.5) == (r["in_window"] == "true")

    def test_help_documents_columns(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["--help"])
        text = capsys.readouterr().out
        assert "closed_form" in text and "in_window" in text and cli.SEED_ENV in text
