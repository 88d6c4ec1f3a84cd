"""Command-line front end.

Settings come from built-in defaults, then ``--config FILE``, then flags.
CSV output uses ``.`` decimals and 17 significant digits.

Exit codes: 0 success, 2 configuration error, 3 stagnation, 4 leakage.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import warnings
from typing import Any, Iterable, Sequence

import numpy as np

from . import config, faraday, ghz, protocol, resources
from .faraday import CavityParams
from .ghz import GhzMixture
from .protocol import ErrorMode, RoundConfig, StagnationError

EXIT_OK, EXIT_CONFIG, EXIT_STAGNATION, EXIT_LEAKAGE = 0, 2, 3, 4

_EFF = resources.EfficiencyParams()
DEFAULTS: dict[str, Any] = {
    "n": 3, "error": "bit-flip", "seed": 0, "trials": 0, "exact": False,
    "F_min": 0.05, "F_max": 0.95, "F_step": 0.05,
    "efficiencies": False, "ideal_point": False, "points": 401,
    "T_f": _EFF.T_f, "eta_0": _EFF.eta_0, "eta_d": _EFF.eta_d, "eta_a": _EFF.eta_a,
    "per_photon_losses": False, "n_max": 6,
}
CAVITY_KEYS = ("omega_c", "omega_0", "omega_p", "kappa", "gamma", "g")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: str | None, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])

    if path is None:
        emit(sys.stdout)
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def _error_mode(s) -> ErrorMode:
    try:
        return ErrorMode(s["error"])
    except ValueError:
        raise config.ConfigError(f"--error must be bit-flip or phase-flip, got {s['error']!r}")


def _binary_mixture(f: float, s) -> GhzMixture:
    if not 0 <= f <= 1:
        raise config.ConfigError(f"F={f} outside [0, 1]")
    n = s["n"]
    if _error_mode(s) is ErrorMode.PHASE_FLIP:
        error = ghz.phi(0, "-", n)
    else:
        party = s.get("error_party", n - 1)
        error = ghz.GhzIndex(format(ghz.flip_mask(party, n), f"0{n - 1}b"))
    return GhzMixture.binary(f, error)


def _mixture(s) -> GhzMixture:
    has_f, has_file = "F" in s, "mixture" in s
    if has_f == has_file:
        raise config.ConfigError("give exactly one mixture source: --F or --mixture")
    if has_f:
        return _binary_mixture(s["F"], s)
    try:
        m = ghz.load_mixture(s["mixture"], tol=1e-9)
    except OSError as exc:
        raise config.ConfigError(f"cannot read mixture file: {exc}") from exc
    s["n"] = m.n_parties
    return m


def _cavity(s) -> CavityParams | None:
    if s["ideal_point"]:
        return None
    given = [k for k in CAVITY_KEYS if k in s]
    if not given:
        return None
    missing = [k for k in ("omega_c", "omega_0", "omega_p", "kappa") if k not in s]
    if missing:
        raise config.ConfigError(f"cavity parameters missing: {', '.join(missing)}")
    return CavityParams(**{k: s[k] for k in CAVITY_KEYS if k in s})


def _efficiencies(s) -> resources.EfficiencyParams:
    return resources.EfficiencyParams(s["T_f"], s["eta_0"], s["eta_d"], s["eta_a"])


def _round_config(s) -> RoundConfig:
    return RoundConfig(s["n"], _error_mode(s), _cavity(s), seed=s["seed"])


def _weight_columns(m: GhzMixture, mode: ErrorMode) -> list[float]:
    if mode is ErrorMode.PHASE_FLIP:
        return [float(m.weights[0]), float(m.weights[1])]
    return [float(w) for w in m.weights[0::2]]


def cmd_round(s) -> int:
    m = _mixture(s)
    cfg = _round_config(s)
    res = protocol.simulate_round_exact(m, cfg)
    print(f"n_parties = {m.n_parties}")
    print(f"error_mode = {cfg.error_mode.value}")
    print(f"input_fidelity = {m.fidelity:.10g}")
    print(f"p_success = {res.p_success:.10g}")
    print(f"kept_fidelity = {res.fidelity:.10g}")
    print(f"leakage = {res.leakage:.3g}")
    print("kept_weights:")
    for idx, w in res.kept.as_dict().items():
        if w > 1e-15:
            print(f"  {idx.flips}\t{idx.sign.value}\t{w:.10g}")
    if s["trials"] > 0:
        mc = protocol.monte_carlo_round(m, cfg, s["trials"])
        print(f"mc_trials = {mc.trials}")
        print(f"mc_acceptance = {mc.acceptance_rate:.6g} +- {mc.acceptance_stderr:.2g}")
        print(f"mc_kept_fidelity = {mc.kept_fidelity:.6g} +- {mc.kept_fidelity_stderr:.2g}")
    if "out" in s:
        _write_csv(s["out"], ["pattern", "readout", "probability", "kept_fidelity"],
                   ([b.detector_pattern, b.atom_readout or "", b.branch_probability,
                     "" if b.kept_fidelity is None else b.kept_fidelity]
                    for b in res.branches))
    return EXIT_OK


def _grid(lo: float, hi: float, step: float) -> list[float]:
    if not (0 < lo <= hi < 1) or step <= 0:
        raise config.ConfigError("sweep range must lie in (0, 1) with a positive step")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def cmd_sweep(s) -> int:
    mode = _error_mode(s)
    rows = []
    for f in _grid(s["F_min"], s["F_max"], s["F_step"]):
        m = _binary_mixture(f, s)
        if s["exact"]:
            r = protocol.simulate_round_exact(m, _round_config(s))
            new_f, p = r.fidelity, r.p_success
        else:
            new, p = protocol.recursion_step(m, mode)
            new_f = new.fidelity
        rows.append((f, new_f, p))
    _write_csv(s.get("out"), ["F", "F_prime", "p_success"], rows)
    return EXIT_OK


def cmd_iterate(s) -> int:
    m = _mixture(s)
    mode = _error_mode(s)
    if ("rounds" in s) == ("target" in s):
        raise config.ConfigError("give exactly one of --rounds or --target")
    eff = _efficiencies(s) if s["efficiencies"] else None
    states = protocol.iterate(m, rounds=s.get("rounds"), target=s.get("target"), eff=eff,
                              mode=mode, per_photon_losses=s["per_photon_losses"])
    width = len(_weight_columns(m, mode))
    header = ["round"] + [f"F{i}" for i in range(width)] + [
        "p_success", "pairs_expected", "cumulative_p"]
    _write_csv(s.get("out"), header,
               ([st.rounds_done, *_weight_columns(st.weights, mode), st.p_success,
                 st.pairs_consumed_expected, st.cumulative_success_probability]
                for st in states))
    return EXIT_OK


def cmd_resources(s) -> int:
    if "F" not in s:
        raise config.ConfigError("resources needs --F")
    eff = _efficiencies(s)
    f, n = s["F"], s["n"]
    published = resources.success_probability(n, eff, fidelity=f)
    per_photon = resources.success_probability(n, eff, fidelity=f, per_photon_losses=True)
    print(f"F = {f}, N = {n}, P_p = {resources.postselection_probability(f):.10g}")
    print(f"P = {published:.3g}  (fiber and optics counted once)")
    print(f"P_per_photon = {per_photon:.3g}  (fiber and optics per photon)")
    rows = []
    for k in range(2, max(s["n_max"], n) + 1):
        rows.append((k, f, resources.postselection_probability(f),
                     resources.success_probability(k, eff, fidelity=f),
                     resources.success_probability(k, eff, fidelity=f, per_photon_losses=True)))
    if "out" in s:
        _write_csv(s["out"], ["n", "F", "p_p", "P", "P_per_photon"], rows)
    return EXIT_OK


def cmd_faraday_scan(s) -> int:
    if s["ideal_point"] or not any(k in s for k in CAVITY_KEYS):
        base = CavityParams.ideal()
    else:
        base = _cavity(s)
    lo = s.get("omega_p_min", base.omega_c - 2 * base.kappa)
    hi = s.get("omega_p_max", base.omega_c + 2 * base.kappa)
    if not lo < hi or s["points"] < 2:
        raise config.ConfigError("scan needs omega_p_min < omega_p_max and at least 2 points")
    ideal_wp = base.omega_c - base.kappa / 2
    ideal_coupling = (base.omega_0 == base.omega_c and base.gamma == 0
                      and math.isclose(base.g, base.kappa / 2))
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", faraday.AbsorptionWarning)
        for wp in np.linspace(lo, hi, s["points"]):
            p = CavityParams(base.omega_c, base.omega_0, float(wp), base.kappa, base.gamma, base.g)
            r = faraday.reflection_coupled(p)
            ph = faraday.phases(p, allow_absorption=True)
            rows.append((float(wp), r.real, r.imag, ph.theta, ph.theta_0, ph.rotation))
    if ideal_coupling and lo <= ideal_wp <= hi:
        nearest = min(rows, key=lambda row: abs(row[0] - ideal_wp))
        print(f"ideal point omega_p = {ideal_wp:.10g} crossed; "
              f"nearest grid rotation = {nearest[5]:.10g}", file=sys.stderr)
    _write_csv(s.get("out"), ["omega_p", "re_r", "im_r", "theta", "theta_0", "rotation"], rows)
    return EXIT_OK


COMMANDS = {
    "round": cmd_round,
    "sweep": cmd_sweep,
    "iterate": cmd_iterate,
    "resources": cmd_resources,
    "faraday-scan": cmd_faraday_scan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    add = common.add_argument
    add("--config", dest="config_path", metavar="PATH")
    add("--out", metavar="PATH")
    add("--seed", type=int)
    add("--trials", type=int)
    add("--n", type=int)
    add("--error", choices=[m.value for m in ErrorMode])
    add("--error-party", dest="error_party", type=int,
        help="0-based party carrying the bit flip (default: last)")
    add("--F", type=float)
    add("--mixture", metavar="PATH")
    add("--exact", action="store_true")
    add("--F-min", dest="F_min", type=float)
    add("--F-max", dest="F_max", type=float)
    add("--F-step", dest="F_step", type=float)
    add("--rounds", type=int)
    add("--target", type=float)
    add("--efficiencies", action="store_true")
    add("--ideal", dest="ideal_point", action="store_true")
    for key in CAVITY_KEYS:
        add("--" + key.replace("_", "-"), dest=key, type=float)
    add("--omega-p-min", dest="omega_p_min", type=float)
    add("--omega-p-max", dest="omega_p_max", type=float)
    add("--points", type=int)
    add("--T-f", dest="T_f", type=float)
    add("--eta-0", dest="eta_0", type=float)
    add("--eta-d", dest="eta_d", type=float)
    add("--eta-a", dest="eta_a", type=float)
    add("--per-photon-losses", dest="per_photon_losses", action="store_true")
    add("--n-max", dest="n_max", type=int)

    parser = argparse.ArgumentParser(
        prog="ghzpurify", description="GHZ purification with Faraday-rotation parity checks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve(argv: Sequence[str] | None = None) -> tuple[str, dict[str, Any]]:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    path = args.pop("config_path", None)
    settings = dict(DEFAULTS)
    if path is not None:
        settings.update(config.load(path))
    settings.update(args)
    return command, settings


def main(argv: Sequence[str] | None = None) -> int:
    try:
        command, settings = resolve(argv)
        return COMMANDS[command](settings)
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); stay quiet
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except StagnationError as exc:
        print(f"stagnation: {exc}", file=sys.stderr)
        return EXIT_STAGNATION
    except ghz.LeakageError as exc:
        print(f"leakage: {exc}", file=sys.stderr)
        return EXIT_LEAKAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
