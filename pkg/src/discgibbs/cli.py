"""Command-line frontend: every experiment as a reproducible, config-driven run.

Each subcommand resolves its configuration (flat key=value config file,
overridden by explicit flags), writes a manifest echoing the resolved
configuration and code version, and emits CSV/JSON artifacts.  All
randomized commands require an explicit --seed.  Exit codes: 0 ok,
2 usage/config error, 3 numeric failure (with a machine-readable error
record on stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import (__version__, bessel, disc_spectrum, gff, ground_state, linops,
               partition, soliton)
from .errors import DiscGibbsError

KNOWN_COMMANDS = ("bessel-zeros", "basis-check", "ground-state", "gns-check",
                  "sample-stats", "partition-sweep", "s-gamma", "decompose",
                  "spectrum", "gaussian-product", "full-pipeline")


def _float_list(text):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _write_manifest(out_dir, command, config):
    record = {
        "command": command,
        "version": __version__,
        "config": {k: v for k, v in sorted(config.items())},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    path = Path(out_dir) / f"{command}-manifest.json"
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, default=str)
        fh.write("\n")


def _write_json(path, record):
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")


def _resolved(args, skip=("config", "command", "func")):
    return {k: v for k, v in vars(args).items()
            if k not in skip and not k.startswith("_")}


def _load_config(parser, args_ns, argv):
    """Apply config-file values as defaults, then reparse so flags win."""
    if not args_ns.config:
        return args_ns
    path = Path(args_ns.config)
    if not path.exists():
        parser.error(f"config file not found: {path}")
    overrides = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected key=value")
        key, value = (tok.strip() for tok in line.split("=", 1))
        overrides[key.replace("-", "_")] = value
    valid = {k for k in vars(args_ns) if not k.startswith("_")}
    unknown = sorted(set(overrides) - valid)
    if unknown:
        parser.error(f"unknown config keys: {', '.join(unknown)} "
                     f"(valid: {', '.join(sorted(valid - {'config', 'func', 'command'}))})")
    # Re-parse: config values become defaults so explicit flags still win.
    subparser = args_ns._subparser
    typed = {}
    for key, value in overrides.items():
        action = next(a for a in subparser._actions if a.dest == key)
        typed[key] = action.type(value) if action.type else value
    subparser.set_defaults(**typed)
    fresh = parser.parse_args(argv)
    fresh._subparser = subparser
    return fresh


def cmd_bessel_zeros(args):
    table = bessel.j0_zeros(args.n)
    out = Path(args.out_dir) / "bessel-zeros.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "z_n", "residual", "mcmahon_deviation"])
        resid = np.abs(bessel.j0(table.zeros))
        dev = table.zeros - np.pi * (np.arange(1, args.n + 1) - 0.25)
        for i in range(args.n):
            writer.writerow([i + 1, repr(float(table.zeros[i])),
                             repr(float(resid[i])), repr(float(dev[i]))])
    if args.alpha is not None:
        cross = bessel.cross_product_zeros(args.alpha, args.n)
        out2 = Path(args.out_dir) / "cross-product-zeros.csv"
        with open(out2, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "B_k"])
            for i, b in enumerate(cross):
                writer.writerow([i + 1, repr(float(b))])
    return 0


def cmd_basis_check(args):
    basis = disc_spectrum.build_basis(args.n, quad_points=args.quad_points,
                                      radius=args.radius)
    disc_spectrum.dump_basis_csv(basis, Path(args.out_dir) / "basis.csv")
    l4 = np.array([disc_spectrum.lp_integral(basis, _unit(n, args.n), 4)
                   for n in range(args.n)]) ** 0.25
    growth = l4 / (np.log(2.0 + np.arange(1, args.n + 1)) ** 0.25)
    record = {
        "N": args.n,
        "quad_points": int(basis.quad.nodes.size),
        "orthonormality_residual": basis.orth_residual,
        "l4_growth_min": float(growth.min()),
        "l4_growth_max": float(growth.max()),
    }
    _write_json(Path(args.out_dir) / "basis-check.json", record)
    return 0


def _unit(index, n):
    c = np.zeros(n, dtype=np.complex128)
    c[index] = 1.0
    return c


def cmd_ground_state(args):
    gs = ground_state.solve_ground_state(args.p, tol=args.tol)
    gs.to_csv(Path(args.out_dir) / "ground-state.csv")
    energy = ground_state.energy_profile(gs)
    record = {
        "p": args.p,
        "center_value": gs.center_value,
        "mass": gs.mass,
        "l2_norm": float(np.sqrt(gs.mass)),
        "r_max": gs.r_max,
        "tail_slope": gs.tail_slope,
        "energy_at_rmax": float(energy[-1]),
        "energy_monotone": bool(np.all(np.diff(energy) <= 1e-10)),
        "quarter_radius": ground_state.quarter_radius(gs),
    }
    _write_json(Path(args.out_dir) / "ground-state.json", record)
    return 0


def cmd_gns_check(args):
    gs = ground_state.solve_ground_state(args.p)
    basis = disc_spectrum.build_basis(args.n)
    sampler = gff.GaussianSampler(basis=basis, seed=args.seed)
    worst = -np.inf
    for _ in range(args.samples):
        coeffs = sampler.draw_matrix(args.modes, 1)[0]
        worst = max(worst, ground_state.gns_ratio(coeffs, args.p, gs, basis=basis))
    self_ratio = ground_state.gns_ratio(gs, args.p, gs)
    record = {"p": args.p, "samples": args.samples, "modes": args.modes,
              "seed": args.seed, "max_random_ratio": worst,
              "ground_state_ratio": self_ratio}
    _write_json(Path(args.out_dir) / "gns-check.json", record)
    return 0


def cmd_sample_stats(args):
    basis = disc_spectrum.build_basis(args.n)
    sampler = gff.GaussianSampler(basis=basis, seed=args.seed)
    coeffs = sampler.draw_matrix(args.n, args.samples)
    re_g = np.real(coeffs) * basis.frequencies[: args.n]
    mass = np.sum(np.abs(coeffs) ** 2, axis=1)
    l4 = np.array([gff.functionals(c, basis).l4_integral for c in coeffs[:256]])
    record = {
        "N": args.n, "samples": args.samples, "seed": args.seed,
        "var_re_g_mean": float(np.mean(np.var(re_g, axis=0))),
        "mass_mean": float(mass.mean()),
        "mass_expected": float(np.sum(1.0 / basis.eigenvalues[: args.n])),
        "mass_stderr": float(mass.std() / np.sqrt(args.samples)),
        "l4_subsample_mean": float(l4.mean()),
    }
    _write_json(Path(args.out_dir) / "sample-stats.json", record)
    sample = gff.sample_field(sampler, args.n)
    gff.dump_sample_csv(sample, Path(args.out_dir) / "sample-coeffs.csv")
    return 0


def _sweep_cell(payload):
    sampler, K, p, N, samples = payload
    return partition.estimate_partition(sampler, K, p, N, samples)


def cmd_partition_sweep(args):
    basis = disc_spectrum.build_basis(max(args.n_list))
    sampler = gff.GaussianSampler(basis=basis, seed=args.seed)
    cells = []
    idx = 0
    for K in args.k_grid:
        for p in args.p_grid:
            for N in args.n_list:
                cells.append((sampler.spawn(sampler.stream_id * 1_000_003 + idx + 1),
                              K, p, N, args.samples))
                idx += 1
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            estimates = list(pool.map(_sweep_cell, cells))
    else:
        estimates = [_sweep_cell(cell) for cell in cells]
    partition.sweep_to_csv(estimates, Path(args.out_dir) / "partition-sweep.csv")
    partition.sweep_to_json(estimates, Path(args.out_dir) / "partition-sweep.json")
    return 0


def cmd_s_gamma(args):
    basis = disc_spectrum.build_basis(max(args.n_list))
    gs = ground_state.solve_ground_state(4.0)
    sampler = gff.GaussianSampler(basis=basis, seed=args.seed)
    cutoff = np.sqrt(gs.mass)
    out = Path(args.out_dir) / "s-gamma.csv"
    n_member = 0
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample", "margin", "l2_norm", "member"])
        for i in range(args.samples):
            coeffs = sampler.draw_matrix(max(args.n_list), 1)[0]
            margin = partition.s_gamma_margin(basis, coeffs, args.gamma,
                                              args.n_list)
            l2 = float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))
            member = bool(margin <= 0.0 and l2 <= cutoff)
            n_member += member
            writer.writerow([i + 1, repr(margin), repr(l2), int(member)])
    _write_json(Path(args.out_dir) / "s-gamma.json",
                {"gamma": args.gamma, "samples": args.samples,
                 "member_fraction": n_member / args.samples,
                 "mass_cutoff": float(cutoff)})
    return 0


def cmd_decompose(args):
    basis = disc_spectrum.build_basis(args.n)
    gs = ground_state.solve_ground_state(4.0)
    if args.coeffs:
        field = gff.load_sample_csv(args.coeffs).coeffs
    else:
        # Synthesize a neighborhood point: soliton at (theta, delta) plus a
        # small seeded normal perturbation.
        rng = np.random.default_rng(args.seed)
        q = ground_state.restricted_soliton(gs, args.delta, basis)
        noise = (rng.standard_normal(args.n) + 1j * rng.standard_normal(args.n))
        noise *= args.vnorm / np.linalg.norm(noise)
        field = np.exp(1j * args.theta) * q + noise
    init = soliton.SolitonCoords(theta=args.init_theta if args.init_theta is not None else args.theta,
                                 delta=args.init_delta if args.init_delta is not None else args.delta)
    dec = soliton.decompose(gs, field, init, basis, eps=args.eps)
    record = soliton.decomposition_to_json(
        dec, Path(args.out_dir) / "decompose.json",
        coeff_path=Path(args.out_dir) / "decompose-v.csv")
    print(json.dumps(record))
    return 0


def cmd_spectrum(args):
    basis = disc_spectrum.build_basis(args.n)
    gs = ground_state.solve_ground_state(4.0)
    rows = []
    min_eig = np.inf
    for which in args.which:
        op = linops.build_constrained_operator(which, args.delta, args.eta,
                                               gs, basis, args.dim)
        eigs = linops.eigenvalues(op)
        rows.append((op, eigs))
        min_eig = min(min_eig, float(eigs.min()))
    linops.spectrum_to_csv(rows, Path(args.out_dir) / "spectrum.csv")
    _write_json(Path(args.out_dir) / "spectrum.json",
                {"delta": args.delta, "eta": args.eta, "dim": args.dim,
                 "which": list(args.which), "min_eigenvalue": min_eig})
    return 0


def cmd_gaussian_product(args):
    basis = disc_spectrum.build_basis(args.n)
    gs = ground_state.solve_ground_state(4.0)
    eigs = []
    min_eig = np.inf
    for which in ("A1", "A2"):
        op = linops.build_constrained_operator(which, args.delta, args.eta,
                                               gs, basis, args.dim)
        pos, neg = linops.eigen_branches(op)
        eigs.extend(pos)
        eigs.extend(neg)
        min_eig = min(min_eig, float(np.min(neg)) if neg.size else 0.0)
    gp = linops.gaussian_product(np.array(eigs), args.eta)
    linops.product_report_json(Path(args.out_dir) / "gaussian-product.json",
                               args.delta, args.eta, gp.log_product, min_eig)
    return 0


def cmd_full_pipeline(args):
    """Assembly run: away-from-manifold diagnostics, decomposition round
    trip, and the quadratic-part spectral products over a delta grid."""
    out_dir = Path(args.out_dir)
    basis = disc_spectrum.build_basis(args.n)
    gs = ground_state.solve_ground_state(4.0)
    sampler = gff.GaussianSampler(basis=basis, seed=args.seed)
    cutoff = float(np.sqrt(gs.mass))

    margins = []
    for _ in range(args.samples):
        coeffs = sampler.draw_matrix(basis.N, 1)[0]
        margins.append(partition.s_gamma_margin(basis, coeffs, args.gamma,
                                                [basis.N]))
    margins = np.array(margins)
    s_gamma_report = {
        "gamma": args.gamma,
        "samples": args.samples,
        "margin_max": float(margins.max()),
        "nonpositive_fraction": float(np.mean(margins <= 0.0)),
    }

    rng = np.random.default_rng(args.seed)
    delta0 = 0.12
    q = ground_state.restricted_soliton(gs, delta0, basis)
    noise = rng.standard_normal(basis.N) + 1j * rng.standard_normal(basis.N)
    noise *= 0.01 / np.linalg.norm(noise)
    field = np.exp(0.3j) * q + noise
    dec = soliton.decompose(gs, field,
                            soliton.SolitonCoords(theta=0.3, delta=delta0),
                            basis)
    dec_report = {
        "theta": dec.coords.theta, "delta": dec.coords.delta,
        "residual_l2": dec.residual_l2,
        "orth_residuals": list(dec.orth_residuals),
    }

    products = []
    spectra_rows = []
    for delta in args.delta_grid:
        eigs = []
        min_eig = np.inf
        for which in ("A1", "A2"):
            op = linops.build_constrained_operator(which, delta, args.eta,
                                                   gs, basis, args.dim)
            pos, neg = linops.eigen_branches(op)
            spectra_rows.append((op, np.concatenate([pos, neg])))
            eigs.extend(pos)
            eigs.extend(neg)
            if neg.size:
                min_eig = min(min_eig, float(np.min(neg)))
        gp = linops.gaussian_product(np.array(eigs), args.eta)
        products.append({"delta": delta, "eta": args.eta,
                         "log_product": gp.log_product,
                         "min_eigenvalue": min_eig})
    linops.spectrum_to_csv(spectra_rows, out_dir / "pipeline-spectra.csv")

    critical = partition.estimate_partition(
        sampler.spawn(9999), cutoff, 4.0, min(basis.N, 256),
        max(args.samples, 100))
    report = {
        "seed": args.seed,
        "mass_cutoff": cutoff,
        "s_gamma": s_gamma_report,
        "decomposition": dec_report,
        "quadratic_products": products,
        "critical_cell_exploratory": {
            "mean": critical.mean, "stderr": critical.stderr,
            "log_max_weight": critical.log_max_weight,
            "diverged": critical.diverged,
            "note": "critical pair (p=4, K=||Q||_2): desk-scale Monte Carlo "
                    "cannot certify finiteness; emitted without threshold",
        },
    }
    _write_json(out_dir / "full-pipeline.json", report)
    print(json.dumps({"log_products": [p["log_product"] for p in products],
                      "s_gamma_nonpositive": s_gamma_report["nonpositive_fraction"]}))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="discgibbs",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    def add(name, func, seeded=False):
        sp = subs.add_parser(name)
        sp.add_argument("--config", default=None,
                        help="flat key=value file; explicit flags win")
        sp.add_argument("--out-dir", default=".")
        if seeded:
            sp.add_argument("--seed", type=int, required=True,
                            help="explicit seed (no silent entropy)")
        sp.set_defaults(func=func)
        return sp

    sp = add("bessel-zeros", cmd_bessel_zeros)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--alpha", type=float, default=None,
                    help="also emit cross-product roots at this ratio")

    sp = add("basis-check", cmd_basis_check)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--quad-points", type=int, default=None)
    sp.add_argument("--radius", type=float, default=1.0)

    sp = add("ground-state", cmd_ground_state)
    sp.add_argument("--p", type=float, default=4.0)
    sp.add_argument("--tol", type=float, default=1e-12)

    sp = add("gns-check", cmd_gns_check, seeded=True)
    sp.add_argument("--p", type=float, default=4.0)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--modes", type=int, default=10)
    sp.add_argument("--n", type=int, default=64)

    sp = add("sample-stats", cmd_sample_stats, seeded=True)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--samples", type=int, default=2000)

    sp = add("partition-sweep", cmd_partition_sweep, seeded=True)
    sp.add_argument("--k-grid", type=_float_list, required=True)
    sp.add_argument("--p-grid", type=_float_list, required=True)
    sp.add_argument("--n-list", type=_int_list, required=True)
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("--workers", type=int, default=1)

    sp = add("s-gamma", cmd_s_gamma, seeded=True)
    sp.add_argument("--gamma", type=float, default=0.1)
    sp.add_argument("--n-list", type=_int_list, default=[256])
    sp.add_argument("--samples", type=int, default=200)

    sp = add("decompose", cmd_decompose, seeded=True)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--delta", type=float, default=0.12)
    sp.add_argument("--vnorm", type=float, default=0.01)
    sp.add_argument("--coeffs", default=None,
                    help="decompose this coefficient CSV instead of synthesizing")
    sp.add_argument("--init-theta", type=float, default=None)
    sp.add_argument("--init-delta", type=float, default=None)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--n", type=int, default=256)

    sp = add("spectrum", cmd_spectrum)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--eta", type=float, default=0.01)
    sp.add_argument("--dim", type=int, default=200)
    sp.add_argument("--which", type=lambda s: s.split(","), default=["A1", "A2"])
    sp.add_argument("--n", type=int, default=256)

    sp = add("gaussian-product", cmd_gaussian_product)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--eta", type=float, default=0.01)
    sp.add_argument("--dim", type=int, default=200)
    sp.add_argument("--n", type=int, default=256)

    sp = add("full-pipeline", cmd_full_pipeline, seeded=True)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--dim", type=int, default=200)
    sp.add_argument("--eta", type=float, default=0.01)
    sp.add_argument("--gamma", type=float, default=0.1)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--delta-grid", type=_float_list, default=[0.2, 0.1, 0.05])

    return parser, subs


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    sub = subs.choices[args.command]
    args._subparser = sub
    if args.config:
        args = _load_config(parser, args, argv)
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    try:
        status = args.func(args)
    except DiscGibbsError as exc:
        record = {"error": type(exc).__name__, "message": str(exc),
                  "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return 3
    _write_manifest(args.out_dir, args.command, _resolved(args))
    return status


if __name__ == "__main__":
    sys.exit(main())
