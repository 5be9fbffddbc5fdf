"""Command-line workbench: one subcommand per regenerable curve or fit.

Every subcommand writes CSV (or a ``name,value,sigma`` report) whose first
line records the configuration hash and the seed. Exit status is 0 on
success, 2 for configuration or input errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

import numpy as np

from . import circuit, csvio, effective, fitting, fock, response
from .config import PRESETS, load_config
from .errors import ConfigError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def _zero_kerr(cfg, window=(0.0, 0.5)):
    return effective.find_zero_kerr_flux(cfg.snail, cfg.hybrid, window)[0]


def _zero_flux_spectrum(cfg):
    """Resonator values at zero flux, preferring measured ones when configured."""
    model = circuit.mode_spectrum(cfg.snail, 0.0)
    return circuit.ModeSpectrum(
        omega_m=cfg.get("omega_m_measured_hz", model.omega_m),
        alpha0=cfg.get("alpha0_measured_hz", model.alpha0),
        beta=0.0,
    )


# -- subcommands ------------------------------------------------------------


def cmd_sweep_flux(args, cfg):
    grid = np.linspace(args.start, args.stop, args.points)
    if args.table == "effective":
        return effective.EFFECTIVE_HEADER, list(effective.effective_rows(cfg.snail, cfg.hybrid, grid)), []
    points = circuit.sweep_flux(cfg.snail, grid)
    return circuit.SPECTRUM_HEADER, list(circuit.spectrum_rows(points)), []


ZERO_KERR_HEADER = (
    "phi_frac",
    "omega_m_hz",
    "alpha0_hz",
    "beta_hz",
    "alpha_hz",
    "g0_hz",
    "g0_exact_hz",
    "c0",
    "valid",
)


def cmd_zero_kerr(args, cfg):
    windows = args.window or [(0.0, 0.5), (0.5, 1.0)]
    rows = []
    h = cfg.hybrid
    for lo, hi in windows:
        for root in effective.find_zero_kerr_flux(cfg.snail, h, (lo, hi), points=args.grid):
            s, e = root.spectrum, root.effective
            c0 = effective.cooperativity_c0(e.g0, h.kappa, h.gamma)
            rows.append((root.phi_frac, s.omega_m, s.alpha0, s.beta, e.alpha, e.g0, e.g0_exact, c0, int(e.validity.passed)))
    notes = [f"kappa_hz={h.kappa:.17g} gamma_hz={h.gamma:.17g}"]
    return ZERO_KERR_HEADER, rows, notes


def cmd_design_sweep(args, cfg):
    if args.values:
        values = _floats(args.values)
    else:
        defaults = {"ej_large": (80e9, 250e9, 18), "omega_s": (0.2e9, 3.0e9, 15)}[args.vary]
        start = args.start if args.start is not None else defaults[0]
        stop = args.stop if args.stop is not None else defaults[1]
        values = np.linspace(start, stop, args.points or defaults[2])
    points = effective.design_sweep(args.vary, values, cfg.snail, cfg.hybrid)
    notes = [f"{p.varied}={p.value:.17g} status={p.status}" for p in points if p.status != "ok"]
    return effective.DESIGN_HEADER, list(effective.design_rows(points)), notes


def _response_inputs(args, cfg):
    root = None
    c0 = args.c0
    omega_m = args.omega_m_hz
    if c0 is None or omega_m is None:
        root = _zero_kerr(cfg)
    if c0 is None:
        c0 = effective.cooperativity_c0(root.effective.g0, cfg.hybrid.kappa, cfg.hybrid.gamma)
    if omega_m is None:
        omega_m = root.spectrum.omega_m
    n_s = args.n_s if args.n_s is not None else cfg.get("n_s", 0.0)
    return c0, omega_m, n_s


def _response_table(n_d, c0, omega_m, n_s, cfg):
    rows = list(response.response_rows(n_d, c0, cfg.hybrid.gamma, n_s, cfg.hybrid.kappa_ex, omega_m))
    notes = [f"c0={c0:.17g} omega_m_hz={omega_m:.17g} n_s={n_s:.17g}"]
    return response.RESPONSE_HEADER, rows, notes


def cmd_convert(args, cfg):
    c0, omega_m, n_s = _response_inputs(args, cfg)
    if args.n_d:
        n_d = _floats(args.n_d)
    else:
        n_d = np.linspace(0.0, args.n_d_max if args.n_d_max is not None else 5.0 / c0, args.points)
    return _response_table(n_d, c0, omega_m, n_s, cfg)


def cmd_damping(args, cfg):
    c0, omega_m, n_s = _response_inputs(args, cfg)
    n_d = _floats(args.n_d) if args.n_d else np.linspace(0.0, args.n_d_max or 3.0, args.points)
    return _response_table(n_d, c0, omega_m, n_s, cfg)


def cmd_steady(args, cfg):
    modes = _zero_flux_spectrum(cfg)
    h = cfg.zero_flux_hybrid().with_spectrum(modes)
    alpha = args.alpha_hz if args.alpha_hz is not None else modes.alpha0
    att = args.attenuation_db if args.attenuation_db is not None else cfg.get("a_m_db")
    powers = np.arange(args.power_start, args.power_stop + 0.5 * args.power_step, args.power_step)
    probe = fock.default_probe_grid(alpha, h.kappa, args.probe_points)
    points = fock.driven_kerr_response(h, alpha, powers, probe, att, dim=args.dim)
    notes = [
        f"alpha_hz={alpha:.17g} attenuation_db={att:.17g} kappa_hz={h.kappa:.17g} "
        f"kappa_ex_hz={h.kappa_ex:.17g} omega_m_hz={modes.omega_m:.17g}"
    ]
    return fock.KERR_HEADER, list(fock.kerr_rows(points)), notes


STARK_HEADER = ("p_s_w", "n_s", "stark_shift_hz")


def cmd_stark(args, cfg):
    modes = _zero_flux_spectrum(cfg)
    h = cfg.hybrid
    delta = modes.omega_m - h.omega_s
    chi = response.stark_shift_per_phonon(h.g, modes.alpha0, delta)
    powers = _floats(args.p_s_w) if args.p_s_w else np.linspace(0.0, args.p_s_max_w, args.points)
    a_s = cfg.calibration.a_s
    rows = []
    for p in powers:
        n_s = response.phonon_number(p, a_s, h.omega_s, h.gamma)
        rows.append((float(p), n_s, chi * n_s))
    notes = [f"chi_s_hz={chi:.17g} delta_hz={delta:.17g}", response.STARK_NOTE]
    return STARK_HEADER, rows, notes


def _read(path, columns):
    table = csvio.read_csv(path)
    csvio.require_columns(table, columns)
    return table


def _report(result, extra=()):
    notes = [
        f"converged={int(result.converged)} iterations={result.iterations} "
        f"residual_norm={result.residual_norm:.17g}"
    ]
    if result.flags:
        notes.append("flags=" + ";".join(result.flags))
    notes.extend(extra)
    return fitting.REPORT_HEADER, result.rows(), notes


def cmd_fit_lorentz(args, cfg):
    t = _read(args.input, ("freq_hz", "re", "im"))
    s = fitting.ComplexSpectrum(t["freq_hz"], t["re"] + 1j * t["im"])
    return _report(fitting.fit_complex_lorentzians(s, args.peaks))


def cmd_fit_kerr(args, cfg):
    t = _read(args.input, ("power_dbm", "shift_hz", "s21_min"))
    data = fitting.KerrData(t["power_dbm"], t["shift_hz"], t["s21_min"])
    h = cfg.zero_flux_hybrid()
    modes = _zero_flux_spectrum(cfg)
    res = fitting.fit_kerr_saturation(
        data,
        kappa=h.kappa,
        kappa_ex=h.kappa_ex,
        omega_m=modes.omega_m,
        a_m_db_guess=args.a_m_db_guess,
        alpha_guess=args.alpha_guess_hz,
        dim=args.dim,
    )
    return _report(res)


def cmd_fit_coop(args, cfg):
    t = _read(args.input, ("n_d", "c"))
    res = fitting.fit_linear_cooperativity(t["n_d"], t["c"], threshold=args.threshold, max_n_d=args.max_n_d)
    return _report(res, [f"selected={' '.join(str(i) for i in res.meta['selected'])}"])


VERIFY_HEADER = ("name", "exact", "predicted", "deviation", "tolerance", "passed")


def cmd_verify(args, cfg):
    if args.phi is None:
        modes = _zero_kerr(cfg).spectrum
        phi = None
    else:
        phi = args.phi
        modes = circuit.mode_spectrum(cfg.snail, phi)
    h = cfg.hybrid.with_spectrum(modes)
    rep = fock.compare_effective_vs_exact(h, tuple(args.dims), coupling=args.coupling)
    rows = [(r.name, r.exact, r.predicted, r.deviation, r.tolerance, int(r.passed)) for r in rep.rows]
    notes = [
        f"phi_frac={'zero-kerr' if phi is None else repr(phi)} coupling={args.coupling} "
        f"dims={args.dims[0]}x{args.dims[1]}",
        f"validity_ratio={rep.validity_ratio:.17g} breakdown={int(rep.breakdown)}",
    ]
    return VERIFY_HEADER, rows, notes


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        default="paper_device",
        help=f"configuration file or preset name ({', '.join(PRESETS)}); default paper_device",
    )
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--seed", type=int, default=0, help="seed recorded in the output (default 0)")

    parser = argparse.ArgumentParser(prog="snailopto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("sweep-flux", parents=[common], help="resonator spectrum or effective terms vs flux")
    p.add_argument("--start", type=float, default=-0.5)
    p.add_argument("--stop", type=float, default=0.5)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--table", choices=("spectrum", "effective"), default="spectrum")
    p.set_defaults(func=cmd_sweep_flux)

    p = sub.add_parser("zero-kerr", parents=[common], help="flux biases where the effective Kerr vanishes")
    p.add_argument("--window", type=float, nargs=2, action="append", metavar=("LO", "HI"))
    p.add_argument("--grid", type=int, default=effective.ZERO_KERR_GRID)
    p.set_defaults(func=cmd_zero_kerr)

    p = sub.add_parser("design-sweep", parents=[common], help="g0 and C0 at zero Kerr vs a design parameter")
    p.add_argument("--vary", choices=("ej_large", "omega_s"), required=True)
    p.add_argument("--values", help="explicit values (Hz), comma or space separated")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.set_defaults(func=cmd_design_sweep)

    for name, func, text in (
        ("convert", cmd_convert, "converted output power vs drive photons"),
        ("damping", cmd_damping, "mechanical linewidth vs drive photons"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--c0", type=float, help="single-photon cooperativity (default: model value at zero Kerr)")
        p.add_argument("--omega-m-hz", type=float, help="MW frequency (default: model value at zero Kerr)")
        p.add_argument("--n-s", type=float, help="SAW phonon number (default: config n_s)")
        p.add_argument("--n-d", help="explicit drive photon numbers, comma or space separated")
        p.add_argument("--n-d-max", type=float)
        p.add_argument("--points", type=int, default=101)
        p.set_defaults(func=func)

    p = sub.add_parser("steady", parents=[common], help="driven Kerr resonance shift and dip vs power")
    p.add_argument("--power-start", type=float, default=-100.0, help="dBm")
    p.add_argument("--power-stop", type=float, default=-68.0, help="dBm")
    p.add_argument("--power-step", type=float, default=2.0, help="dB")
    p.add_argument("--alpha-hz", type=float)
    p.add_argument("--attenuation-db", type=float)
    p.add_argument("--probe-points", type=int, default=81)
    p.add_argument("--dim", type=int, default=fock.LINDBLAD_DIM)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("stark", parents=[common], help="MW frequency pull vs SAW drive power")
    p.add_argument("--p-s-w", help="explicit SAW drive powers (W)")
    p.add_argument("--p-s-max-w", type=float, default=1e-10)
    p.add_argument("--points", type=int, default=11)
    p.set_defaults(func=cmd_stark)

    p = sub.add_parser("fit-lorentz", parents=[common], help="fit complex Lorentzians to freq_hz,re,im data")
    p.add_argument("--input", required=True)
    p.add_argument("--peaks", type=int, default=3)
    p.set_defaults(func=cmd_fit_lorentz)

    p = sub.add_parser("fit-kerr", parents=[common], help="fit alpha and A_m to steady-state data")
    p.add_argument("--input", required=True)
    p.add_argument("--a-m-db-guess", type=float, default=-60.0)
    p.add_argument("--alpha-guess-hz", type=float)
    p.add_argument("--dim", type=int, default=fock.LINDBLAD_DIM)
    p.set_defaults(func=cmd_fit_kerr)

    p = sub.add_parser("fit-coop", parents=[common], help="fit C = C0 n_d on the low-power subset")
    p.add_argument("--input", required=True)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--max-n-d", type=float)
    p.set_defaults(func=cmd_fit_coop)

    p = sub.add_parser("verify", parents=[common], help="effective Hamiltonian vs exact diagonalization")
    p.add_argument("--dims", type=int, nargs=2, default=list(fock.TWO_MODE_DIMS), metavar=("MW", "SAW"))
    p.add_argument("--coupling", choices=("full", "rwa"), default="full")
    p.add_argument("--phi", type=float, help="flux in flux quanta (default: zero-Kerr bias)")
    p.set_defaults(func=cmd_verify)
    return parser


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors (status 2) and --help (status 0) come from argparse
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        header, rows, notes = args.func(args, cfg)
        with _output(args.out) as stream:
            csvio.write_csv(stream, header, rows, args.command, cfg.sha256, args.seed, notes)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"snailopto {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"snailopto {args.command}: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
