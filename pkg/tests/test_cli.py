import csv
import json
import math

import numpy as np
import pytest

from enantiosep.cli import main
from enantiosep.config import ConfigError, load_preset, parse_config, preset_names, preset_text

FIG3 = ["fig3-perfect", "fig3-duration-error", "fig3-all-errors"]


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def summary(out):
    return json.loads((out / "summary.json").read_text())


@pytest.fixture
def preset_config(tmp_path):
    def make(name, **overrides):
        data = json.loads(preset_text(name))
        data.update(overrides)
        path = tmp_path / f"{name}-custom.json"
        path.write_text(json.dumps(data))
        return path

    return make


def test_presets_list(capsys):
    assert main(["presets", "list"]) == 0
    listed = capsys.readouterr().out.split()
    assert set(FIG3) <= set(listed)


def test_presets_show(capsys):
    assert main(["presets", "show", "fig3-perfect"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["pulses"][0]["amplitude"] == math.sqrt(math.pi) / 4


def test_presets_show_unknown():
    assert main(["presets", "show", "nope"]) == 1


@pytest.mark.parametrize("name", preset_names())
def test_presets_parse(name):
    load_preset(name)


def test_run_perfect(tmp_path):
    assert main(["run", "fig3-perfect", "--out-dir", str(tmp_path)]) == 0
    s = summary(tmp_path)
    np.testing.assert_allclose(s["final_populations"]["L"], [0.5, 0.5, 0], atol=1e-3)
    np.testing.assert_allclose(s["final_populations"]["R"], [0, 0, 1], atol=1e-3)
    assert s["pulse_areas"]["T12"] == pytest.approx(math.pi / 4)
    assert s["pulse_areas"]["effective_step2"] == pytest.approx(math.pi / 2)
    assert s["separation"]["enantiomeric_excess_retained"] == pytest.approx(1, abs=1e-3)
    header, rows = read_csv(tmp_path / "trace.csv")
    assert header == ["t", "p1_L", "p2_L", "p3_L", "p1_R", "p2_R", "p3_R"]
    assert len(rows) == 1201
    assert float(rows[-1][0]) == pytest.approx(12.0)


def test_trace_has_enough_digits(tmp_path):
    main(["run", "fig3-duration-error", "--out-dir", str(tmp_path)])
    _, rows = read_csv(tmp_path / "trace.csv")
    digits = rows[-1][6].lstrip("0.").replace(".", "").split("e")[0]
    assert len(digits) >= 12


def test_run_duration_error(tmp_path):
    assert main(["run", "fig3-duration-error", "--out-dir", str(tmp_path)]) == 0
    s = summary(tmp_path)
    p1, p2, p3 = s["final_populations"]["R"]
    assert p3 == pytest.approx(0.976, abs=0.005)
    assert p1 == pytest.approx(0.012, abs=0.005) and p2 == pytest.approx(0.012, abs=0.005)
    assert s["imperfections"]["delta_prime"] == pytest.approx(0.1 * math.pi / 2)


def test_run_all_errors(tmp_path):
    assert main(["run", "fig3-all-errors", "--out-dir", str(tmp_path)]) == 0
    s = summary(tmp_path)
    assert sum(s["final_populations"]["L"][:2]) == pytest.approx(0.988, abs=0.005)
    assert s["final_populations"]["R"][2] == pytest.approx(0.964, abs=0.005)


@pytest.mark.parametrize("engine", ["exact-algebraic", "perturbative"])
def test_run_closed_form_engines(tmp_path, engine):
    assert main(["run", "fig3-all-errors", "--engine", engine, "--out-dir", str(tmp_path)]) == 0
    s = summary(tmp_path)
    assert s["engine"] == engine
    assert s["final_populations"]["R"][2] == pytest.approx(0.964, abs=0.005)
    _, rows = read_csv(tmp_path / "trace.csv")
    assert len(rows) == 2


def test_run_from_file_eq17_swaps(tmp_path, preset_config):
    path = preset_config("fig3-perfect", sign_convention="eq17")
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 0
    s = summary(tmp_path)
    np.testing.assert_allclose(s["final_populations"]["L"], [0, 0, 1], atol=1e-3)
    np.testing.assert_allclose(s["final_populations"]["R"], [0.5, 0.5, 0], atol=1e-3)


def test_dump_round_trip_bit_equal(tmp_path, capsys):
    assert main(["run", "fig3-all-errors", "--dump-effective-config"]) == 0
    dumped = tmp_path / "effective.json"
    dumped.write_text(capsys.readouterr().out)
    assert parse_config(json.loads(dumped.read_text())) == load_preset("fig3-all-errors")
    main(["run", "fig3-all-errors", "--out-dir", str(tmp_path / "a")])
    main(["run", str(dumped), "--out-dir", str(tmp_path / "b")])
    for f in ("trace.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_dump_applies_engine_override(capsys):
    main(["sweep", "sweep-robustness", "--engine", "perturbative", "--dump-effective-config"])
    data = json.loads(capsys.readouterr().out)
    assert data["engine"] == "perturbative"
    assert len(data["sweep"]["delta"]) == 5


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"time_unit": "fs"}, "time_unit"),
        ({"window": {"t_start": 0, "t_end": -1, "dt": 0.001}}, "window.t_end"),
        ({"mixture_ratio": 1.5}, "mixture_ratio"),
        ({"engine": "magic"}, "engine"),
        ({"sign_convention": "eq5"}, "sign_convention"),
        ({"bogus": 1}, "bogus"),
        ({"level_system": {"energies": [0, 1, 2], "drive_frequencies": [1, 2, 0.5]}}, "level_system"),
        ({"initial_state": {"L": [1, 1, 0]}}, "initial_state.L"),
    ],
)
def test_config_errors_exit_1(tmp_path, preset_config, capsys, overrides, field):
    path = preset_config("fig3-perfect", **overrides)
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 1
    assert field in capsys.readouterr().err


def test_missing_amplitude_is_config_error(tmp_path, capsys):
    data = json.loads(preset_text("fig3-perfect"))
    del data["pulses"][1]["amplitude"]
    with pytest.raises(ConfigError, match=r"pulses\[1\]\.amplitude"):
        parse_config(data)


def test_unknown_config_path(capsys):
    assert main(["run", "/no/such/file.json"]) == 1


def test_numerical_failure_exit_2(tmp_path, preset_config, capsys):
    data = json.loads(preset_text("fig3-perfect"))
    data["pulses"][0]["amplitude"] = 80.0
    path = preset_config(
        "fig3-perfect",
        pulses=data["pulses"],
        method="fourth-order-fixed-step",
        window={"t_start": 0.0, "t_end": 12.0, "dt": 0.1, "record_stride": 1},
    )
    assert main(["run", str(path), "--out-dir", str(tmp_path)]) == 2
    assert "norm drift" in capsys.readouterr().err
    assert not (tmp_path / "trace.csv").exists()


def test_sweep_step2_area(tmp_path):
    assert main(["sweep", "sweep-step2-area", "--out-dir", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "sweep.csv")
    assert header == [
        "delta", "delta_prime", "delta_phi",
        "p1_L", "p2_L", "p3_L", "p1_R", "p2_R", "p3_R",
        "ee_retained", "ee_ionized",
    ]  # fmt: skip
    p3R = [float(r[8]) for r in rows]
    np.testing.assert_allclose(p3R, [1, 0.9975, 0.9755], atol=1e-4)
    assert float(rows[0][9]) == 1.0
    assert json.loads((tmp_path / "sweep_summary.json").read_text())["n_points"] == 3


def test_sweep_single_point(tmp_path, preset_config):
    path = preset_config("sweep-step2-area", sweep={"delta": [0.0]})
    assert main(["sweep", str(path), "--out-dir", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 1 and float(rows[0][9]) == 1.0


def test_sweep_engines_agree(tmp_path):
    for engine in ("perturbative", "exact-algebraic"):
        assert (
            main(["sweep", "sweep-robustness", "--engine", engine, "--out-dir", str(tmp_path / engine)]) == 0
        )
    _, a = read_csv(tmp_path / "perturbative" / "sweep.csv")
    _, b = read_csv(tmp_path / "exact-algebraic" / "sweep.csv")
    a = np.array([[float(x) for x in r[:9]] for r in a])
    b = np.array([[float(x) for x in r[:9]] for r in b])
    np.testing.assert_array_equal(a[:, :3], b[:, :3])
    eps = np.abs(a[:, :3]).max(axis=1)
    assert np.all(np.abs(a[:, 3:] - b[:, 3:]).max(axis=1) <= 10 * eps**3 + 1e-15)


def test_sweep_requires_axes(tmp_path):
    assert main(["sweep", "fig3-perfect", "--out-dir", str(tmp_path)]) == 1
