import math

import numpy as np
import pytest

from snailopto import cli, config, csvio, fitting

PRESET_SHA = config.load_config("paper_device").sha256


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    import io

    return csvio.read_csv(io.StringIO(text))


def test_zero_kerr_report(capsys):
    code, out, _ = run(capsys, "zero-kerr")
    assert code == 0
    t = table(out)
    roots = np.sort(t["phi_frac"])
    assert len(roots) == 2
    assert abs(roots[0] - 0.445) < 0.01
    assert roots[1] == pytest.approx(1 - roots[0], abs=1e-9)


def test_provenance_line(capsys):
    code, out, _ = run(capsys, "zero-kerr", "--seed", "17")
    first = out.splitlines()[0]
    assert first == f"# snailopto zero-kerr config_sha256={PRESET_SHA} seed=17"


def test_damping_values(capsys):
    code, out, _ = run(capsys, "damping", "--c0", "1.7", "--omega-m-hz", "3.5e9", "--n-d", "0,1,2")
    assert code == 0
    t = table(out)
    gamma = config.load_config("paper_device").hybrid.gamma
    assert np.allclose(t["gamma_all_hz"] / gamma, [1.0, 2.7, 4.4], rtol=1e-12)


def test_deterministic_output(capsys):
    _, first, _ = run(capsys, "sweep-flux", "--points", "21", "--table", "effective")
    _, second, _ = run(capsys, "sweep-flux", "--points", "21", "--table", "effective")
    assert first == second


def test_output_file(tmp_path, capsys):
    path = tmp_path / "spectrum.csv"
    code, out, _ = run(capsys, "sweep-flux", "--points", "11", "--out", str(path))
    assert code == 0 and out == ""
    t = csvio.read_csv(path)
    assert len(t["phi_frac"]) == 11
    assert path.read_text().startswith("# snailopto sweep-flux config_sha256=")


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, "plot-everything")
    assert code == 2
    assert "usage" in err


def test_config_error_exit_status(tmp_path, capsys):
    path = tmp_path / "bad.conf"
    path.write_text("ec_hz = 35e6\n")
    code, _, err = run(capsys, "zero-kerr", "--config", str(path))
    assert code == 2
    assert "ej_small_hz" in err


def test_numerical_failure_exit_status(capsys):
    code, _, err = run(capsys, "verify", "--dims", "6", "2")
    assert code == 3
    assert "TruncationTooSmall" in err


def test_stark_emits_note(capsys):
    code, out, _ = run(capsys, "stark", "--points", "3")
    assert code == 0
    comments = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert any("chi_s_hz=" in c for c in comments)
    assert len(comments) >= 3
    chi = float(comments[1].split()[1].split("=")[1])
    assert 22 / 2 <= abs(chi) <= 22 * 2


def test_csv_round_trip_is_exact():
    values = [math.pi, -1 / 3, 1e-300, 6.02214076e23, 0.1 + 0.2]
    text = csvio.to_string(("x",), [(v,) for v in values])
    assert list(table(text)["x"]) == values


def test_fit_coop_round_trip(tmp_path, capsys):
    n = np.linspace(0.05, 6, 30)
    c = 5 * (1 - np.exp(-0.34 * n))
    path = tmp_path / "coop.csv"
    path.write_text(csvio.to_string(("n_d", "c"), zip(n, c)))
    code, out, _ = run(capsys, "fit-coop", "--input", str(path))
    assert code == 0
    t = table(out)
    direct = fitting.fit_linear_cooperativity(n, c)
    assert t["value"][0] == direct["c0"]


def test_fit_lorentz_round_trip(tmp_path, capsys):
    f = np.linspace(-10e6, 10e6, 101)
    y = fitting.lorentzian_sum(f, [1e6], [2e6], [1e6 + 0.5e6j], 0.2)
    path = tmp_path / "spectrum.csv"
    path.write_text(csvio.to_string(("freq_hz", "re", "im"), zip(f, y.real, y.imag)))
    code, out, _ = run(capsys, "fit-lorentz", "--input", str(path), "--peaks", "1")
    assert code == 0
    t = table(out)
    direct = fitting.fit_complex_lorentzians(fitting.ComplexSpectrum(f, y), 1)
    assert list(t["value"]) == list(direct.values)
    assert t["name"][0] == "center_1"


def test_fit_input_missing_columns(tmp_path, capsys):
    path = tmp_path / "wrong.csv"
    path.write_text("a,b\n1,2\n")
    code, _, err = run(capsys, "fit-coop", "--input", str(path))
    assert code == 2
    assert "n_d" in err


def test_steady_then_fit_kerr(tmp_path, capsys):
    path = tmp_path / "steady.csv"
    code, _, _ = run(capsys, "steady", "--power-start", "-95", "--power-stop", "-68", "--power-step", "3", "--out", str(path))
    assert code == 0
    code, out, _ = run(capsys, "fit-kerr", "--input", str(path))
    assert code == 0
    t = table(out)
    fitted = dict(zip(t["name"], t["value"]))
    assert fitted["alpha_hz"] == pytest.approx(-13.0e6, rel=1e-6)
    assert fitted["a_m_db"] == pytest.approx(-57.3, rel=1e-6)


def test_verify_report(capsys):
    code, out, _ = run(capsys, "verify", "--coupling", "rwa")
    assert code == 0
    t = table(out)
    assert set(t["name"]) >= {"omega_m_dressed", "alpha", "g0", "g0_exact", "g0_block"}
    assert "validity_ratio=" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("design-sweep", "--vary", "omega_s", "--points", "3"),
        ("convert", "--points", "5"),
        ("sweep-flux", "--points", "5"),
    ],
)
def test_other_subcommands_run(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.startswith("# snailopto ")
