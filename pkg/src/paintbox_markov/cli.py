"""Command-line entry point.

Exit status: 0 on success, 1 when a verification suite fails, 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from contextlib import contextmanager

from . import ctmc, equilibrium, frequency, kernel, masses, paintbox, verify
from .partitions import SetPartition

log = logging.getLogger("paintbox_markov")


class ConfigError(Exception):
    pass


def _load_json_arg(text: str):
    """Inline JSON, or a path to a JSON file."""
    text = text.strip()
    if text.startswith(("{", "[")):
        return json.loads(text)
    with open(text, encoding="utf-8") as fh:
        return json.load(fh)


def _nu(args) -> masses.NuMeasure:
    if getattr(args, "alpha", None) is not None:
        return masses.PitmanDirichlet(args.alpha, args.k)
    if getattr(args, "nu", None) is None:
        raise ConfigError("one of --nu or --alpha is required")
    return masses.nu_from_config(_load_json_arg(args.nu))


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _dump(obj, path):
    with _output(path) as fh:
        json.dump(obj, fh)
        fh.write("\n")


def _report(results: list[verify.SuiteResult]) -> int:
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def _tolerances(args) -> verify.Tolerances:
    return verify.Tolerances.uniform(args.tol) if args.tol is not None else verify.Tolerances()


# --- subcommands -------------------------------------------------------------

def cmd_paintbox_eval(args) -> int:
    nu = _nu(args)
    part = SetPartition.from_json(_load_json_arg(args.partition))
    print(repr(paintbox.rho(part, nu)))
    return 0


def cmd_paintbox_sample(args) -> int:
    nu = _nu(args)
    rng = masses.RngStream(args.seed)
    with _output(args.output) as fh:
        for _ in range(args.count):
            fh.write(json.dumps(paintbox.paintbox_sample_nu(nu, args.n, rng).to_json()) + "\n")
    return 0


def cmd_kernel_build(args) -> int:
    if args.alpha is not None:
        kern = kernel.build_kernel(args.n, args.k, alpha=args.alpha)
    else:
        kern = kernel.build_kernel(args.n, args.k, nu=_nu(args))
    _dump(kern.to_json(), args.output)
    return 0


def cmd_kernel_verify(args) -> int:
    nu = _nu(args)
    tol = _tolerances(args)
    grid = {"nu": nu}
    results = [
        verify.suite_row_sums(args.n, args.k, grid, tol.algebraic),
        verify.suite_consistency(args.n, args.k, grid, tol.algebraic),
        verify.suite_kernel_exchangeability(args.n, args.k, grid, tol.algebraic),
    ]
    if isinstance(nu, masses.PitmanDirichlet) and nu.k == args.k:
        results.append(verify.suite_closed_form(args.n, (args.k,), (nu.alpha,), tol.algebraic))
    return _report(results)


def cmd_stationary_solve(args) -> int:
    kern = kernel.TransitionKernel.from_json(_load_json_arg(args.kernel))
    try:
        theta = equilibrium.solve_stationary(kern, force=args.force)
    except equilibrium.UniquenessError as exc:
        print(f"error: {exc} (use --force for power iteration)", file=sys.stderr)
        return 1
    _dump(theta.to_json(), args.output)
    return 0


def cmd_stationary_verify(args) -> int:
    tol = _tolerances(args)
    ks, alphas = (args.k,), (args.alpha,)
    grid = {"nu": masses.PitmanDirichlet(args.alpha, args.k)}
    results = [
        verify.suite_stationary_match(args.n, ks, alphas, tol.linear),
        verify.suite_detailed_balance(args.n, ks, alphas, tol.relative),
        verify.suite_stationary_structure(args.n, args.k, grid, tol.linear),
    ]
    return _report(results)


def cmd_ctmc_simulate(args) -> int:
    nu = _nu(args)
    rng = masses.RngStream(args.seed)
    start = SetPartition.from_json(_load_json_arg(args.start)) if args.start else SetPartition.one_block(args.n)
    if start.n != args.n:
        raise ConfigError(f"start partition is on [{start.n}], expected [{args.n}]")
    if args.driver == "embedded":
        kern = kernel.build_kernel(args.n, args.k, nu=nu)
        traj = ctmc.simulate_embedded(start, ctmc.build_rate_matrix(kern, args.lam), args.horizon, rng)
    else:
        traj = ctmc.simulate_poissonian(start, nu, args.k, args.lam, args.horizon, rng)
    _dump(traj.to_json(), args.output)
    return 0


def cmd_ctmc_verify(args) -> int:
    nu = _nu(args)
    tol = _tolerances(args)
    grid = {"nu": nu}
    results = [
        verify.suite_rate_consistency(args.n, args.k, grid, lams=(args.lam,), tol=tol.algebraic),
        verify.suite_generator_stationarity(args.n, args.k, grid, args.lam, tol.algebraic),
        verify.suite_driver_equivalence(min(args.n, 3), args.k, nu, args.lam, args.replicates, args.seed, tol.mc_sigmas),
    ]
    if args.n >= 2:
        results.append(verify.suite_coupling(args.n, args.n - 1, args.k, nu, runs=args.runs, lam=args.lam, seed=args.seed))
    return _report(results)


def cmd_massproc_simulate(args) -> int:
    nu = _nu(args)
    rng = masses.RngStream(args.seed)
    x0 = masses.MassPartition.from_json(_load_json_arg(args.start)) if args.start else masses.MassPartition((1.0,) + (0.0,) * (args.k - 1))
    traj = frequency.simulate_mass_process(x0, nu, args.k, args.lam, args.horizon, rng)
    width = max(args.k, x0.k)
    with _output(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time"] + [f"s_{j}" for j in range(1, width + 1)])
        for row in traj.to_rows():
            w.writerow([repr(v) for v in row] + ["0.0"] * (width + 1 - len(row)))
    return 0


def cmd_massproc_couple(args) -> int:
    nu = _nu(args)
    rng = masses.RngStream(args.seed)
    x0 = masses.MassPartition.from_json(_load_json_arg(args.start)) if args.start else nu.sample(rng)
    run = frequency.coupled_set_mass(args.n, x0, nu, args.k, args.lam, args.horizon, rng)
    k = args.k
    with _output(args.output) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time"] + [f"s_{j}" for j in range(1, k + 1)] + [f"freq_{j}" for j in range(1, k + 1)] + ["sup_error"])
        for (t, x), err in zip(run.masses.jumps, run.errors):
            freq = frequency.empirical_frequencies(run.sets.state_at(t), k)
            w.writerow([repr(t)] + [repr(float(v)) for v in x.padded(k)] + [repr(float(v)) for v in freq] + [repr(err)])
    if args.sets:
        _dump(run.sets.to_json(), args.sets)
    return 0


def cmd_verify(args) -> int:
    if not args.all:
        raise ConfigError("verify needs --all")
    nu = _nu(args)
    results = verify.verify_all(args.n, args.k, nu=nu, tolerances=_tolerances(args), replicates=args.replicates, seed=args.seed)
    return _report(results)


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=None, help="override every deterministic tolerance")
    common.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    sizes = argparse.ArgumentParser(add_help=False)
    sizes.add_argument("-n", type=_positive(int), required=True)
    sizes.add_argument("-k", type=_positive(int), required=True)

    measure = argparse.ArgumentParser(add_help=False)
    g = measure.add_mutually_exclusive_group()
    g.add_argument("--nu", help="measure config: JSON file or inline JSON")
    g.add_argument("--alpha", type=_positive(float), help="use PD(-alpha/k, alpha)")

    p = argparse.ArgumentParser(prog="paintbox-markov", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    pb = sub.add_parser("paintbox").add_subparsers(dest="action", required=True)
    q = pb.add_parser("eval", parents=[common, measure])
    q.add_argument("--partition", required=True)
    q.add_argument("-k", type=_positive(int), default=None)
    q.set_defaults(func=cmd_paintbox_eval)
    q = pb.add_parser("sample", parents=[common, measure])
    q.add_argument("-n", type=_positive(int), required=True)
    q.add_argument("-k", type=_positive(int), default=None)
    q.add_argument("--count", type=_positive(int), default=1)
    q.set_defaults(func=cmd_paintbox_sample)

    kb = sub.add_parser("kernel").add_subparsers(dest="action", required=True)
    q = kb.add_parser("build", parents=[common, sizes, measure])
    q.set_defaults(func=cmd_kernel_build)
    q = kb.add_parser("verify", parents=[common, sizes, measure])
    q.set_defaults(func=cmd_kernel_verify)

    st = sub.add_parser("stationary").add_subparsers(dest="action", required=True)
    q = st.add_parser("solve", parents=[common])
    q.add_argument("--kernel", required=True)
    q.add_argument("--force", action="store_true", help="power-iterate even for a degenerate measure")
    q.set_defaults(func=cmd_stationary_solve)
    q = st.add_parser("verify", parents=[common, sizes])
    q.add_argument("--alpha", type=_positive(float), required=True)
    q.set_defaults(func=cmd_stationary_verify)

    ct = sub.add_parser("ctmc").add_subparsers(dest="action", required=True)
    q = ct.add_parser("simulate", parents=[common, sizes, measure])
    q.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    q.add_argument("--horizon", type=_positive(float), required=True)
    q.add_argument("--driver", choices=["embedded", "poisson"], default="embedded")
    q.add_argument("--start", default=None, help="start partition JSON (default one block)")
    q.set_defaults(func=cmd_ctmc_simulate)
    q = ct.add_parser("verify", parents=[common, sizes, measure])
    q.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    q.add_argument("--replicates", type=_positive(int), default=10_000)
    q.add_argument("--runs", type=_positive(int), default=200, help="coupled runs")
    q.set_defaults(func=cmd_ctmc_verify)

    mp = sub.add_parser("massproc").add_subparsers(dest="action", required=True)
    q = mp.add_parser("simulate", parents=[common, measure])
    q.add_argument("-k", type=_positive(int), required=True)
    q.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    q.add_argument("--horizon", type=_positive(float), required=True)
    q.add_argument("--start", default=None, help="initial masses JSON (default (1, 0, ...))")
    q.set_defaults(func=cmd_massproc_simulate)
    q = mp.add_parser("couple", parents=[common, sizes, measure])
    q.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    q.add_argument("--horizon", type=_positive(float), required=True)
    q.add_argument("--start", default=None, help="initial masses JSON (default: a draw from nu)")
    q.add_argument("--sets", default=None, help="also write the set-valued trajectory as JSON here")
    q.set_defaults(func=cmd_massproc_couple)

    q = sub.add_parser("verify", parents=[common, sizes, measure])
    q.add_argument("--all", action="store_true", required=True)
    q.add_argument("--replicates", type=_positive(int), default=10_000)
    q.set_defaults(func=cmd_verify)
    return p


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "alpha", None) is not None and getattr(args, "k", None) is None:
        print("error: --alpha needs -k", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
