"""Command-line frontend: closed-form tables, Monte-Carlo runs, figure-data
regeneration, security analysis, and oracle spot checks.

All outputs carry a provenance header (command line, seed, version and the
conventions in force).  Exit codes: 0 success, 2 validation error, 3
numerical failure.  A flat key=value config file pointed to by the
VACFILTER_CONFIG environment variable supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import shlex
import sys

import numpy as np

from . import __version__, fock, gaussian, metrics, qkd
from .detectors import (
    Apd,
    HomodyneRandomized,
    HomodyneStabilized,
    IdealOnOff,
    acceptance_probability,
    error_probability,
    threshold_for_error,
)
from .fock import TruncationError
from .gaussian import NumericsError
from .montecarlo import McConfig, calibrate_prep_error, run_trials
from .signal_model import CoherentAmplitude, ErasureMixture, marginal_density, posterior_mixture

CONVENTIONS = {
    "vacuum_cm": "identity",
    "homodyne_vacuum_variance": 0.25,
    "hd_efficiency_model_default": "linear",
    "quadrature_ordering": "x1,p1,...,xn,pn",
}
SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _provenance(args) -> dict:
    return {
        "tool": "vacfilter",
        "version": __version__,
        "command": " ".join(shlex.quote(a) for a in sys.argv),
        "seed": getattr(args, "seed", None),
        "conventions": CONVENTIONS,
    }


def _emit(args, columns: list, rows: list, extra: dict | None = None):
    """Write a table as CSV (with provenance comments) or JSON."""
    fmt = getattr(args, "format", "csv")
    out_path = getattr(args, "out", None)
    if fmt == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "provenance": _provenance(args),
            "columns": columns,
            "rows": rows,
        }
        if extra:
            payload.update(extra)
        text = json.dumps(payload, indent=2, default=_jsonable) + "\n"
    else:
        buf = io.StringIO()
        prov = _provenance(args)
        buf.write(f"# {prov['tool']} {prov['version']}\n")
        buf.write(f"# command: {prov['command']}\n")
        buf.write(f"# seed: {prov['seed']}\n")
        conv = " ".join(f"{k}={v}" for k, v in CONVENTIONS.items())
        buf.write(f"# conventions: {conv}\n")
        if extra:
            for k, v in extra.items():
                buf.write(f"# {k}: {json.dumps(v, default=_jsonable)}\n")
        writer = csv.writer(buf)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _parse_grid(spec: str) -> np.ndarray:
    """start:stop:step -> inclusive grid."""
    try:
        start, stop, step = (float(tok) for tok in spec.split(":"))
    except Exception as exc:
        raise ValueError(f"bad grid {spec!r}, expected start:stop:step") from exc
    if step <= 0 or stop < start:
        raise ValueError(f"bad grid {spec!r}")
    n = int(round((stop - start) / step))
    return np.linspace(start, stop, n + 1)


# ---------------------------------------------------------------------------
# detector construction from flags
# ---------------------------------------------------------------------------

def _build_detector(args) -> object:
    kind = args.detector
    if kind == "ideal":
        return IdealOnOff()
    if kind == "apd":
        if args.eta is None:
            raise ValueError("APD needs --eta")
        return Apd(eta=args.eta, dark_prob=args.pd if args.pd is not None else 0.0)
    if kind in ("hds", "hdr"):
        if args.eta is None:
            raise ValueError("homodyne detector needs --eta")
        if args.threshold is not None:
            b = args.threshold
        elif args.match_error is not None:
            b = threshold_for_error(args.match_error)
        else:
            raise ValueError("homodyne detector needs --threshold or --match-error")
        cls = HomodyneStabilized if kind == "hds" else HomodyneRandomized
        return cls(eta=args.eta, threshold=b, efficiency_model=args.efficiency_model)
    raise ValueError(f"unknown detector {kind!r}")


def _matched_trio(e_target: float, eta_apd: float = 1.0, eta_hd: float = 1.0):
    """APD/HDS/HDR detectors tuned to the same error probability."""
    b = threshold_for_error(e_target)
    return (
        Apd(eta=eta_apd, dark_prob=e_target),
        HomodyneStabilized(eta=eta_hd, threshold=b),
        HomodyneRandomized(eta=eta_hd, threshold=b),
    )


def _add_detector_flags(sub, with_match=True):
    sub.add_argument("--detector", choices=["ideal", "apd", "hds", "hdr"])
    sub.add_argument("--eta", type=float, help="detector efficiency")
    sub.add_argument("--pd", type=float, help="APD dark-count probability")
    sub.add_argument("--threshold", type=float, help="homodyne threshold B")
    if with_match:
        sub.add_argument("--match-error", type=float,
                         help="set the homodyne threshold from a target error probability")
    sub.add_argument("--efficiency-model", choices=["linear", "sqrt"], default="linear")


def _add_common_flags(sub):
    sub.add_argument("--seed", type=int, default=2024)
    sub.add_argument("--trials", type=int)
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_argument("--out", help="output path (stdout when omitted)")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_acceptance(args):
    grid = _parse_grid(args.grid)
    if args.matched_error is not None:
        dets = _matched_trio(args.matched_error)
        cols = ["R_alpha_sq", "P_apd", "P_hds", "P_hdr"]
        rows = [
            [n, *(acceptance_probability(d, math.sqrt(n)) for d in dets)]
            for n in grid
        ]
    else:
        det = _build_detector(args)
        cols = ["R_alpha_sq", "P_accept"]
        rows = [[n, acceptance_probability(det, math.sqrt(n))] for n in grid]
    _emit(args, cols, rows)
    return 0


def cmd_error(args):
    det = _build_detector(args)
    _emit(args, ["detector", "error_probability"], [[args.detector, error_probability(det)]])
    return 0


def cmd_sensitivity(args):
    det = _build_detector(args)
    s = metrics.sensitivity(det, args.tap)
    s_analytic = metrics.sensitivity(det, args.tap, analytic=True)
    _emit(args, ["detector", "tap_reflectivity", "S", "S_over_R", "S_analytic"],
          [[args.detector, args.tap, s, s / args.tap, s_analytic]])
    return 0


def cmd_gain(args):
    det = _build_detector(args)
    grid = _parse_grid(args.grid)
    e = error_probability(det)
    rows = []
    for n in grid:
        p_acc = acceptance_probability(det, math.sqrt(n))
        p_s = metrics.success_probability(args.p, p_acc, e)
        g = metrics.gain(args.p, p_s, e, p_accept=p_acc)
        rows.append([n, p_acc, p_s, g])
    _emit(args, ["R_alpha_sq", "P_accept", "P_S", "G"], rows)
    return 0


def cmd_simulate(args):
    det = _build_detector(args)
    mix = ErasureMixture(CoherentAmplitude(math.sqrt(args.alpha_sq)), args.p, args.tap)
    prep = args.prep_error
    if args.error_target is not None:
        prep = calibrate_prep_error(det, args.tap, args.error_target)
    cfg = McConfig(seed=args.seed, trials=args.trials or 10**6, detector=det,
                   mixture=mix, workers=args.workers, prep_error=prep)
    res = run_trials(cfg)
    n_mean = args.tap * args.alpha_sq
    rows = [[args.detector, n_mean, res.p_accept_hat, res.stderr("p_accept"),
             res.e_hat, res.p_s_hat, res.g_hat]]
    extra = {
        "stderr_e": res.stderr("e"),
        "stderr_p_s": res.stderr("p_s"),
        "stderr_g": res.stderr("g"),
        "counts": {
            "trials": res.trials,
            "coherent": res.n_coherent,
            "accepted_coherent": res.n_accepted_coherent,
            "accepted_vacuum": res.n_accepted_vacuum,
        },
        "prep_error": prep,
    }
    if res.g_hat is None:
        extra["gain_undefined"] = (
            "no accepted trials" if res.n_accepted == 0 else "no coherent trials"
        )
    _emit(args, ["detector", "R_alpha_sq", "P_accept", "stderr", "E", "P_S", "G"],
          rows, extra=extra)
    return 0


def cmd_marginal(args):
    xs = _parse_grid(args.x)
    mix = ErasureMixture(CoherentAmplitude(math.sqrt(args.alpha_sq)), args.p, args.tap)
    cols = ["x", "density_perturbed", "density_vacuum"]
    dens = [xs, marginal_density(mix, xs), marginal_density([(1.0, 0j)], xs)]
    if args.detector:
        det = _build_detector(args)
        p_acc = acceptance_probability(det, math.sqrt(args.tap) * mix.alpha.magnitude)
        post = posterior_mixture(mix, p_acc, error_probability(det))
        dens.append(marginal_density(post, xs))
        cols.append("density_filtered")
    rows = [list(vals) for vals in zip(*dens)]
    _emit(args, cols, rows)
    return 0


def cmd_qkd(args):
    flt = None
    if not args.no_filter:
        if args.eta is None:
            raise ValueError("filtered scenario needs --eta (or pass --no-filter)")
        flt = qkd.TapFilter(tap_reflectivity=args.tap,
                            eta=args.eta,
                            dark_prob=args.pd if args.pd is not None else 0.0)
    if args.qkd_command == "keyrate":
        if args.optimize:
            res = qkd.optimize_key_rate(args.p, flt, protocol=args.protocol,
                                        erased_mode_variance=args.erased_variance)
        else:
            scenario = qkd.QkdScenario(V=args.V, p=args.p, filter=flt,
                                       protocol=args.protocol,
                                       erased_mode_variance=args.erased_variance,
                                       prefactor=args.prefactor)
            res = qkd.scenario_key_rate(scenario)
        opt_v, opt_t = res.optimizer if res.optimizer else (args.V, None)
        _emit(args, ["K_lower", "I_ab", "chi_bE", "P_S", "multiplier", "V", "T"],
              [[res.k_lower, res.i_ab, res.chi_be, res.p_s, res.multiplier, opt_v, opt_t]])
        return 0
    if args.qkd_command == "pmin":
        res = qkd.p_min_search(flt, precision=args.precision, protocol=args.protocol,
                               erased_mode_variance=args.erased_variance)
        rows = [[p, k] for p, k in res.trace]
        _emit(args, ["p", "max_K_lower"], rows,
              extra={"p_min": res.p_min, "precision": res.precision,
                     "bounded_below": res.bounded_below})
        return 0
    raise ValueError(f"unknown qkd subcommand {args.qkd_command!r}")


def cmd_oracle(args):
    """Spot checks of the Gaussian calculus against the truncated-Fock
    reference; prints both values and their deviation."""
    n_max = args.nmax
    rows = []
    if args.check == "coherent":
        st = fock.coherent_state(args.alpha, n_max)
        rows.append(["mean_photons", fock.mean_photon(st, 0), args.alpha ** 2])
        rows.append(["trace_deficit", st.deficit, 0.0])
    elif args.check == "beamsplitter":
        st = fock.tensor(fock.coherent_state(args.alpha, n_max), fock.vacuum_state(n_max))
        st = fock.fock_beamsplitter(st, 0, 1, 1.0 - args.tap)
        target = fock.tensor(
            fock.coherent_state(math.sqrt(1.0 - args.tap) * args.alpha, n_max),
            fock.coherent_state(-math.sqrt(args.tap) * args.alpha, n_max),
        )
        rows.append(["fidelity_vs_product", fock.fidelity(st, target), 1.0])
    elif args.check == "noclick":
        st = fock.tmsv_state(args.V, n_max)
        st = fock.tensor(st, fock.vacuum_state(n_max))
        st = fock.fock_beamsplitter(st, 1, 2, 1.0 - args.tap)
        prob, cond = fock.povm_expectation(st, 2, fock.NoClick(args.eta, args.pd or 0.0))
        gstate = gaussian.tensor(gaussian.two_mode_squeezed(args.V), gaussian.vacuum(1))
        gstate = gaussian.apply_beamsplitter(gstate, 1, 2, 1.0 - args.tap)
        w, gcond = gaussian.condition_on_noclick(gstate, 2, args.eta, args.pd or 0.0)
        cm_f = fock.covariance_matrix(cond)[:4, :4]
        cm_g = gcond.components[0].cm.mat
        rows.append(["noclick_prob_fock", prob, w])
        rows.append(["max_cm_deviation", float(np.max(np.abs(cm_f - cm_g))), 0.0])
    else:
        raise ValueError(f"unknown oracle check {args.check!r}")
    _emit(args, ["quantity", "value", "reference"], rows)
    return 0


# -- figure data -------------------------------------------------------------

FIG_ERROR = 5.3e-3
FIG_P = 0.02
FIG_TAP_PHOTONS = 1.65
EXP_ETA_APD = 0.63
EXP_PD_APD = 1.4e-4
EXP_ETA_HD = 0.84


def _fig_out(args, name):
    if args.out:
        return args.out
    return f"{name}.csv"


def cmd_figures(args):
    which = args.which
    ns = np.linspace(0.0, FIG_TAP_PHOTONS, 34)
    if which == "fig3":
        return _figure3(args)
    if which == "fig4":
        dets_unit = _matched_trio(FIG_ERROR)
        cols = ["R_alpha_sq", "P_apd", "P_hds", "P_hdr"]
        rows = []
        mc_cols, mc_rows = _mc_acceptance_points(args, dets_unit, ns[::3])
        for n in ns:
            rows.append([n, *(acceptance_probability(d, math.sqrt(n)) for d in dets_unit)])
        args.out = _fig_out(args, "fig4")
        _emit(args, cols, rows, extra={"mc_points": {"columns": mc_cols, "rows": mc_rows}})
        return 0
    if which == "fig5a":
        es = np.logspace(-4, math.log10(0.2), 40)
        rows = []
        for e in es:
            dets = _matched_trio(e)
            svals = [metrics.sensitivity(d, 1.0, analytic=True) for d in dets]
            rows.append([e, *svals])
        args.out = _fig_out(args, "fig5a")
        _emit(args, ["E", "S_over_R_apd", "S_over_R_hds", "S_over_R_hdr"], rows)
        return 0
    if which in ("fig5b", "fig5c"):
        dets = _matched_trio(FIG_ERROR)
        rows = []
        for n in ns:
            row = [n]
            for d in dets:
                p_acc = acceptance_probability(d, math.sqrt(n))
                e = error_probability(d)
                p_s = metrics.success_probability(FIG_P, p_acc, e)
                row += [p_s, metrics.gain(FIG_P, p_s, e, p_accept=p_acc)]
            rows.append(row)
        cols = ["R_alpha_sq", "Ps_apd", "G_apd", "Ps_hds", "G_hds", "Ps_hdr", "G_hdr"]
        args.out = _fig_out(args, which)
        _emit(args, cols, rows)
        return 0
    raise ValueError(f"unknown figure {which!r}")


def _mc_acceptance_points(args, dets, ns):
    cols = ["R_alpha_sq", "detector", "P_hat", "P_se", "E_hat", "E_se"]
    rows = []
    trials = args.trials or 200_000
    tap = 0.5
    for d, name in zip(dets, ("apd", "hds", "hdr")):
        for n in ns:
            if n == 0.0:
                continue
            mix = ErasureMixture(CoherentAmplitude(math.sqrt(n / tap)), 0.5, tap)
            cfg = McConfig(seed=args.seed, trials=trials, detector=d, mixture=mix,
                           workers=args.workers)
            res = run_trials(cfg)
            rows.append([n, name, res.p_accept_hat, res.stderr("p_accept"),
                         res.e_hat, res.stderr("e")])
    return cols, rows


def _figure3(args):
    tap = 0.5
    alpha_sq = FIG_TAP_PHOTONS / tap
    trials = args.trials or 100_000
    det_mc = Apd(eta=EXP_ETA_APD, dark_prob=EXP_PD_APD)
    leak = calibrate_prep_error(det_mc, tap, FIG_ERROR)

    mix = ErasureMixture(CoherentAmplitude(math.sqrt(alpha_sq)), FIG_P, tap)
    cfg = McConfig(seed=args.seed, trials=trials, detector=det_mc, mixture=mix,
                   workers=args.workers, prep_error=leak)
    res = run_trials(cfg)
    vac_cfg = McConfig(seed=args.seed + 1, trials=trials, detector=det_mc,
                       mixture=ErasureMixture(mix.alpha, 0.0, tap), workers=args.workers)
    vac_res = run_trials(vac_cfg)

    edges = res.hist_all.edges
    mids = 0.5 * (edges[:-1] + edges[1:])

    from .montecarlo import theory_branches

    model_all = marginal_density(theory_branches(cfg, "all"), mids)
    model_filtered = marginal_density(theory_branches(cfg, "accepted"), mids)
    theory_vacuum = marginal_density([(1.0, 0j)], mids)

    ideal_dets = _matched_trio(FIG_ERROR)
    theory_filtered = []
    for d in ideal_dets[:2]:  # ideal-efficiency APD and HDS reference curves
        p_acc = acceptance_probability(d, math.sqrt(FIG_TAP_PHOTONS))
        post = posterior_mixture(mix, p_acc, error_probability(d))
        theory_filtered.append(marginal_density(post, mids))

    def mc_density(hist):
        return hist.densities()

    cols = ["x", "theory_perturbed", "theory_vacuum", "theory_filtered_apd_ideal",
            "theory_filtered_hds_ideal", "model_perturbed", "model_filtered",
            "mc_density_perturbed", "mc_density_vacuum", "mc_density_filtered",
            "mc_count_perturbed", "mc_count_vacuum", "mc_count_filtered"]
    theory_perturbed = marginal_density(mix, mids)
    rows = [
        list(vals) for vals in zip(
            mids, theory_perturbed, theory_vacuum, theory_filtered[0], theory_filtered[1],
            model_all, model_filtered,
            mc_density(res.hist_all), mc_density(vac_res.hist_all),
            mc_density(res.hist_accepted),
            res.hist_all.counts[1:-1], vac_res.hist_all.counts[1:-1],
            res.hist_accepted.counts[1:-1],
        )
    ]
    args.out = _fig_out(args, "fig3")
    _emit(args, cols, rows, extra={"prep_error": leak,
                                   "accepted_trials": res.n_accepted})
    return 0


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------

_SUBPARSERS: dict = {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vacfilter",
        description="vacuum-filtering analysis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"vacfilter {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    _SUBPARSERS.clear()

    s = subs.add_parser("acceptance", help="closed-form acceptance probability curves")
    _SUBPARSERS["acceptance"] = s
    _add_detector_flags(s)
    s.add_argument("--grid", default="0:1.65:0.05", help="R|alpha|^2 grid start:stop:step")
    s.add_argument("--matched-error", type=float,
                   help="emit all three detectors tuned to this error probability")
    _add_common_flags(s)
    s.set_defaults(func=cmd_acceptance)

    s = subs.add_parser("error", help="detector error probability E = P(0)")
    _SUBPARSERS["error"] = s
    _add_detector_flags(s)
    _add_common_flags(s)
    s.set_defaults(func=cmd_error)

    s = subs.add_parser("sensitivity", help="filter sensitivity S")
    _SUBPARSERS["sensitivity"] = s
    _add_detector_flags(s)
    s.add_argument("--tap", type=float, default=0.5, help="tap reflectivity R")
    _add_common_flags(s)
    s.set_defaults(func=cmd_sensitivity)

    s = subs.add_parser("gain", help="gain and success probability over a grid")
    _SUBPARSERS["gain"] = s
    _add_detector_flags(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--grid", default="0:1.65:0.05")
    _add_common_flags(s)
    s.set_defaults(func=cmd_gain)

    s = subs.add_parser("simulate", help="Monte-Carlo estimate of P, E, P_S, G")
    _SUBPARSERS["simulate"] = s
    _add_detector_flags(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha-sq", type=float, required=True, help="|alpha|^2 of the signal")
    s.add_argument("--tap", type=float, default=0.5)
    s.add_argument("--prep-error", type=float, default=0.0,
                   help="residual coherent amplitude in vacuum slots")
    s.add_argument("--error-target", type=float,
                   help="calibrate --prep-error so the error probability hits this value")
    _add_common_flags(s)
    s.set_defaults(func=cmd_simulate)

    s = subs.add_parser("marginal", help="analytic quadrature marginals")
    _SUBPARSERS["marginal"] = s
    _add_detector_flags(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha-sq", type=float, required=True)
    s.add_argument("--tap", type=float, default=0.5)
    s.add_argument("--x", default="-2:3.5:0.05", help="quadrature grid start:stop:step")
    _add_common_flags(s)
    s.set_defaults(func=cmd_marginal)

    s = subs.add_parser("figures", help="regenerate figure data files")
    _SUBPARSERS["figures"] = s
    s.add_argument("which", choices=["fig3", "fig4", "fig5a", "fig5b", "fig5c"])
    _add_common_flags(s)
    s.set_defaults(func=cmd_figures)

    s = subs.add_parser("qkd", help="security analysis")
    qsubs = s.add_subparsers(dest="qkd_command", required=True)
    for name in ("keyrate", "pmin"):
        q = qsubs.add_parser(name)
        _SUBPARSERS[f"qkd {name}"] = q
        q.add_argument("--V", type=float, default=1.1, help="two-mode squeezing variance")
        q.add_argument("--p", type=float, default=0.5)
        q.add_argument("--no-filter", action="store_true")
        q.add_argument("--tap", type=float, default=0.5, help="filter tap reflectivity R")
        q.add_argument("--eta", type=float, help="filter APD efficiency")
        q.add_argument("--pd", type=float, help="filter APD dark-count probability")
        q.add_argument("--protocol", choices=["heterodyne", "homodyne"], default="heterodyne")
        q.add_argument("--erased-variance", choices=["marginal", "alphabet"],
                       default="marginal")
        q.add_argument("--prefactor", choices=["ps", "p_ps"], default="ps")
        if name == "keyrate":
            q.add_argument("--optimize", action="store_true",
                           help="maximize over V (and T with a filter)")
        else:
            q.add_argument("--precision", type=float, default=1e-3)
        _add_common_flags(q)
        q.set_defaults(func=cmd_qkd)

    s = subs.add_parser("oracle", help="truncated-Fock spot checks of the Gaussian calculus")
    _SUBPARSERS["oracle"] = s
    s.add_argument("check", choices=["coherent", "beamsplitter", "noclick"])
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--V", type=float, default=1.1)
    s.add_argument("--tap", type=float, default=0.5)
    s.add_argument("--eta", type=float, default=0.63)
    s.add_argument("--pd", type=float, default=0.005)
    s.add_argument("--nmax", type=int, default=30)
    _add_common_flags(s)
    s.set_defaults(func=cmd_oracle)

    return parser


def _option_names(subparser) -> set:
    names = set()
    for act in subparser._actions:  # noqa: SLF001 - argparse has no public option listing
        names.update(opt.lstrip("-").replace("-", "_") for opt in act.option_strings)
    return names


def _read_config(path: str) -> dict:
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line {line!r}, expected key=value")
            key, value = (tok.strip() for tok in line.split("=", 1))
            entries[key.replace("-", "_")] = value
    return entries


def _apply_config_file(argv: list) -> list:
    """Merge the flat key=value config file named by VACFILTER_CONFIG under
    the command line: known keys of the invoked subcommand are injected as
    flags ahead of the user's (so explicit flags win); keys unknown to every
    subcommand are rejected."""
    path = os.environ.get("VACFILTER_CONFIG")
    if not path or not argv:
        return argv
    entries = _read_config(path)
    if not entries:
        return argv
    all_known = set()
    for sub in _SUBPARSERS.values():
        all_known |= _option_names(sub)
    for key in entries:
        if key not in all_known:
            raise ValueError(f"unknown config key {key!r}")
    head = [argv[0]]
    rest = argv[1:]
    name = argv[0]
    if name == "qkd" and rest:
        head = argv[:2]
        rest = argv[2:]
        name = f"qkd {argv[1]}"
    sub = _SUBPARSERS.get(name)
    if sub is None:
        return argv
    local = _option_names(sub)
    injected = []
    for key, value in entries.items():
        if key in local:
            injected += [f"--{key.replace('_', '-')}", value]
    return [*head, *injected, *rest]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
