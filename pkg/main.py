"""
Driver script for gpbogo.

Every subcommand writes JSON (scalars and reports, with the resolved
configuration under "config") or CSV (tabulated profiles and coefficients).
Potentials are given as a JSON file, or inline as kind:V0,R, e.g.
square_well:2,1.

Usage:
    python main.py <subcommand> [--potential <file or kind:V0,R>] \
        [--config <config.json>] [--output <path>] [--format json|csv] \
        [--plot <figure path>] [--threads <n>] [--log-level <level>]

Example:
    python main.py scatter --potential square_well:2,1
    python main.py elambda --max-level 60 --method averaged
    python main.py coeffs --potential square_well:2,1 --N 1000 --mu 60 --format csv
    python main.py simulate --potential square_well:2,1 --N 4 --pmax 6.3 --cascade
    python main.py check --suite all
"""
import argparse
import json
import os.path as osp
import sys
from dataclasses import asdict, dataclass

import numpy as np

from gpbogo.bogoliubov import (
    OccupationList,
    bogoliubov_energy_mf,
    coefficient_shells,
    depletion_closed_form,
    depletion_integral,
    diagonalization_constant,
    dispersion,
    excitation_energy,
    ground_state_energy_gp,
    lhy_energy_per_particle,
    sound_velocity,
)
from gpbogo.cascade import Cascade
from gpbogo.checks import parse_suite, run_suite
from gpbogo.data import (
    load_potential,
    potential_from_dict,
    potential_to_dict,
    write_csv,
    write_json,
)
from gpbogo.lattice import bogoliubov_lattice_sum, e_lambda, sum_vs_integral_check
from gpbogo.potential import KINDS, SQUARE_WELL, scattering_length_closed_form
from gpbogo.scattering import (
    born_series,
    eta_norm,
    eta_table,
    intvf,
    solve_neumann,
    solve_zero_energy,
)
from gpbogo.utils.errors import GPBogoError, NumericalError, PreconditionError
from gpbogo.utils.logging_config import configure_logging, get_logger
from gpbogo.utils.visualize import plot_profile

logger = get_logger(__name__)

EXIT_USAGE = 1
EXIT_PRECONDITION = PreconditionError.exit_code
EXIT_NUMERICAL = NumericalError.exit_code
EXIT_FAILED = 4


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one invocation, written into every JSON output."""

    command: str
    potential: object = None
    N: int = None
    beta: float = None
    kappa: float = None
    mu: float = None
    nu: float = None
    p_max: float = None
    M_max: int = None
    tol: float = None
    output: str = None
    format: str = "json"
    threads: int = 1

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise PreconditionError(f"Tolerances must be positive, got {self.tol}.")
        if self.mu is not None and self.nu is not None and not self.mu > self.nu > 0:
            raise PreconditionError(
                f"Need mu > nu > 0, got mu={self.mu}, nu={self.nu}."
            )
        if self.threads < 1:
            raise PreconditionError(f"--threads must be >= 1, got {self.threads}.")

    @classmethod
    def from_args(cls, args):
        return cls(
            command=args.command,
            potential=getattr(args, "potential", None),
            N=getattr(args, "N", None),
            beta=getattr(args, "beta", None),
            kappa=getattr(args, "kappa", None),
            mu=getattr(args, "mu", None),
            nu=getattr(args, "nu", None),
            p_max=getattr(args, "pmax", None),
            M_max=getattr(args, "max_level", None),
            tol=getattr(args, "tol", None),
            output=args.output,
            format=args.format,
            threads=args.threads,
        )

    def to_dict(self):
        return asdict(self)


def parse_potential(text):
    """A JSON file path, or kind:V0,R."""
    if text is None:
        raise PreconditionError("This subcommand needs --potential.")
    if osp.exists(text) or text.endswith(".json"):
        return load_potential(text)
    kind, _, values = text.partition(":")
    if kind not in KINDS or not values:
        raise PreconditionError(
            f"--potential must be a JSON file or kind:V0,R with kind in {KINDS}, got {text!r}."
        )
    try:
        V0, R = (float(x) for x in values.split(","))
    except ValueError:
        raise PreconditionError(f"Cannot parse potential parameters {values!r}.")
    return potential_from_dict({"kind": kind, "V0": V0, "R": R})


def resolve_a0(args):
    if getattr(args, "a0", None) is not None:
        return args.a0
    return solve_zero_energy(parse_potential(args.potential)).a0


# ---------------------------------------------------------------------------
# Subcommands. Each returns (report dict, (columns, rows) or None).
# ---------------------------------------------------------------------------


def cmd_scatter(args):
    pot = parse_potential(args.potential)
    sol = solve_zero_energy(pot)
    report = {
        "a0": sol.a0,
        "residual": sol.residual,
        "integral_identity": sol.integral_identity(),
        "potential": potential_to_dict(pot),
    }
    if pot.kind == SQUARE_WELL:
        report["closed_form"] = scattering_length_closed_form(pot.V0, pot.R)
    r, f = sol.profile()
    return report, (["r", "f"], list(zip(r, f)))


def cmd_born(args):
    pot = parse_potential(args.potential)
    terms = born_series(pot, args.order)
    report = {"terms": terms, "sum": float(sum(terms))}
    if args.compare:
        a0 = solve_zero_energy(pot).a0
        report.update({"a0": a0, "error": abs(report["sum"] - a0)})
    return report, None


def cmd_neumann(args):
    pot = parse_potential(args.potential)
    sol = solve_neumann(pot, args.N)
    residual = sol.boundary_residual()
    report = {
        "lambdaN": sol.lambdaN,
        "intvf": intvf(sol),
        "eight_pi_a0": 8 * np.pi * solve_zero_energy(pot).a0,
        "boundary_residual": [float(x) for x in residual],
    }
    r, f = sol.profile()
    return report, (["r", "f_N"], list(zip(r, f)))


def cmd_eta(args):
    pot = parse_potential(args.potential)
    sol = solve_neumann(pot, args.N)
    columns, rows = eta_table(sol, args.max_level)
    report = {"N": args.N, "max_level": args.max_level, "shells": len(rows)}
    if args.mu is not None:
        report.update({"mu": args.mu, "eta_norm": eta_norm(sol, args.mu, args.max_level)})
    return report, (columns, rows)


def cmd_elambda(args):
    return e_lambda(args.max_level, args.method).to_dict(), None


def cmd_bogsum(args):
    result = bogoliubov_lattice_sum(
        args.a0, m_max=args.max_shell, tol=args.tol, workers=args.threads
    )
    return result.to_dict(), None


def cmd_energy(args):
    pot = parse_potential(args.potential)
    energy = ground_state_energy_gp(
        pot, args.N, M_max=args.max_level, e_lambda_method=args.method, workers=args.threads
    )
    return energy.to_dict(), None


def cmd_spectrum(args):
    a0 = resolve_a0(args)
    occ = OccupationList.parse(args.occ)
    p, counts = occ.momenta()
    rows = [(float(q), int(c), dispersion(a0, q)) for q, c in zip(p, counts)]
    report = {
        "a0": a0,
        "occupations": [[list(v), c] for v, c in occ.entries],
        "excitation_energy": excitation_energy(a0, occ),
        "sound_velocity": sound_velocity(a0),
    }
    return report, (["p", "count", "dispersion"], rows)


def cmd_depletion(args):
    if args.potential is not None:
        kernel = parse_potential(args.potential)
        a0 = solve_zero_energy(kernel).a0
    else:
        if args.a0 is None:
            raise PreconditionError("depletion needs --a0 or --potential.")
        a0 = args.a0
        kernel = 8 * np.pi * a0
    return {
        "rho": args.rho,
        "a0": a0,
        "integral": depletion_integral(args.rho, kernel),
        "closed_form": depletion_closed_form(args.rho, a0),
    }, None


def cmd_lhy(args):
    a0 = resolve_a0(args)
    report = {
        "rho": args.rho,
        "a0": a0,
        "energy_per_particle": lhy_energy_per_particle(args.rho, a0),
        "leading": 4 * np.pi * args.rho * a0,
    }
    if args.potential is not None:
        report["bogoliubov_mean_field"] = bogoliubov_energy_mf(
            args.rho, parse_potential(args.potential), continuum=True
        )
    return report, None


def cmd_coeffs(args):
    pot = parse_potential(args.potential)
    coeffs = coefficient_shells(pot, args.N, args.mu, args.max_level, workers=args.threads)
    report = {
        "N": coeffs.N,
        "mu": coeffs.mu,
        "a0": coeffs.a0,
        "shells": len(coeffs.p),
        "diagonal_constant": coeffs.diagonal_constant(),
        "diagonalization_constant": diagonalization_constant(coeffs),
    }
    return report, (list(coeffs.COLUMNS), coeffs.rows())


def cmd_sum_vs_integral(args):
    return sum_vs_integral_check(args.a0, args.R_scale, workers=args.threads), None


def cmd_simulate(args):
    pot = parse_potential(args.potential)
    cascade = Cascade(
        pot,
        args.N,
        args.pmax,
        beta=args.beta,
        kappa=args.kappa,
        mu=args.mu,
        nu=args.nu,
        weights=args.weights,
    )
    if args.cascade:
        return cascade.run(pbar=not args.no_pbar), None
    cascade.build()
    return {
        "N": cascade.N,
        "beta": cascade.beta,
        "kappa": cascade.kappa,
        "dimension": len(cascade.fock),
        "E_exact": cascade.exact.energy,
        "E_bogoliubov_prediction": cascade.bogoliubov_prediction(),
        "dropped_terms": {"hamiltonian": int(cascade.H.info["dropped_terms"])},
    }, None


def cmd_check(args):
    results = run_suite(parse_suite(args.suite), pbar=not args.no_pbar)
    return {
        "results": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
    }, None


COMMANDS = {
    "scatter": cmd_scatter,
    "born": cmd_born,
    "neumann": cmd_neumann,
    "eta": cmd_eta,
    "elambda": cmd_elambda,
    "bogsum": cmd_bogsum,
    "energy": cmd_energy,
    "spectrum": cmd_spectrum,
    "depletion": cmd_depletion,
    "lhy": cmd_lhy,
    "coeffs": cmd_coeffs,
    "sum-vs-integral": cmd_sum_vs_integral,
    "simulate": cmd_simulate,
    "check": cmd_check,
}


def get_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON file of defaults.")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level.",
    )
    common.add_argument("--threads", type=int, default=1, help="Worker threads.")
    common.add_argument(
        "--output", type=str, default=None, help="Output path (Defaults to stdout)."
    )
    common.add_argument("--format", default="json", choices=["json", "csv"])
    common.add_argument(
        "--plot", type=str, default=None, help="Saves a figure of the tabulated output."
    )

    def add_potential(p, required=True):
        p.add_argument(
            "--potential",
            type=str,
            required=required,
            default=None,
            help="Potential JSON file, or kind:V0,R.",
        )

    parser = ArgumentParser(description="Bogoliubov theory of dilute Bose gases.")
    sub = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    sub.required = True

    def add(name, summary):
        return sub.add_parser(name, parents=[common], help=summary)

    p = add("scatter", "Zero-energy scattering solution and a0.")
    add_potential(p)

    p = add("born", "Born approximations of a0.")
    add_potential(p)
    p.add_argument("--order", type=int, default=1, choices=[0, 1])
    p.add_argument("--compare", action="store_true", help="Also solve for a0.")

    p = add("neumann", "Neumann problem on the ball of radius 1/2.")
    add_potential(p)
    p.add_argument("--N", type=int, required=True)

    p = add("eta", "Correlation kernel on the momentum cube.")
    add_potential(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--max-level", type=int, default=8)
    p.add_argument("--mu", type=float, default=None, help="Cutoff for ||eta_H||.")

    p = add("elambda", "Finite-volume lattice constant e_Lambda.")
    p.add_argument("--max-level", type=int, default=60)
    p.add_argument(
        "--method", default="averaged", choices=["raw", "averaged", "abel", "ewald"]
    )

    p = add("bogsum", "Bogoliubov lattice sum.")
    p.add_argument("--a0", type=float, required=True)
    p.add_argument("--max-shell", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("energy", "Ground-state energy in the Gross-Pitaevskii regime.")
    add_potential(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--max-level", type=int, default=60)
    p.add_argument(
        "--method", default="averaged", choices=["raw", "averaged", "abel", "ewald"]
    )

    p = add("spectrum", "Excitation energies of an occupation list.")
    add_potential(p, required=False)
    p.add_argument("--a0", type=float, default=None)
    p.add_argument("--occ", type=str, required=True, help='e.g. "1/0/0:2,0/1/0:1".')

    p = add("depletion", "Condensate depletion.")
    add_potential(p, required=False)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--a0", type=float, default=None)

    p = add("lhy", "Lee-Huang-Yang energy per particle.")
    add_potential(p, required=False)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--a0", type=float, default=None)

    p = add("coeffs", "Renormalized Bogoliubov coefficients per shell.")
    add_potential(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--max-level", type=int, default=4)

    p = add("sum-vs-integral", "Bogoliubov lattice sum against its continuum limit.")
    p.add_argument("--a0", type=float, required=True)
    p.add_argument("--R-scale", dest="R_scale", type=float, default=1e4)

    p = add("simulate", "Exact diagonalization and the renormalization cascade.")
    add_potential(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--pmax", type=float, required=True, help="Mode cutoff |p| <= pmax.")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--eta-mu", dest="mu", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--weights", default="dressed", choices=["plain", "dressed"])
    p.add_argument("--cascade", action="store_true", help="Runs every stage.")
    p.add_argument("--no-pbar", action="store_true")

    p = add("check", "Acceptance criteria.")
    p.add_argument("--suite", default="all", help="all, numbers, or e.g. 1,2,9.")
    p.add_argument("--no-pbar", action="store_true")
    parser.subcommands = sub.choices
    return parser


def apply_config(parser, argv):
    """Makes the values of a --config JSON file the defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=str, default=None)
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in parser.subcommands), None)
    if not known.config or command is None:
        return
    try:
        with open(known.config) as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise PreconditionError(f"Cannot read config {known.config}: {e}")
    if not isinstance(config, dict):
        raise PreconditionError("Config file must hold a JSON object.")
    subparser = parser.subcommands[command]
    actions = {action.dest: action for action in subparser._actions}
    unknown = sorted(set(config) - set(actions))
    if unknown:
        raise PreconditionError(f"Unknown config keys {unknown} for {command}.")
    subparser.set_defaults(**config)
    for key in config:
        actions[key].required = False


def emit(args, config, report, table):
    if args.plot and table is not None:
        plot_profile(table[0], table[1], args.plot, title=args.command)
    if args.format == "csv":
        if table is None:
            raise PreconditionError(f"{args.command} has no tabulated output.")
        return write_csv(table[0], table[1], args.output)
    return write_json({"config": config.to_dict(), "result": report}, args.output)


def main(argv=None):
    parser = get_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        apply_config(parser, argv)
    except PreconditionError as e:
        logger.error("%s", e)
        return EXIT_PRECONDITION
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level)
        config = RunConfig.from_args(args)
        report, table = COMMANDS[args.command](args)
        emit(args, config, report, table)
    except GPBogoError as e:
        logger.error("%s", e)
        return e.exit_code
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as e:
        logger.error("Numerical failure in %s: %s", args.command, e)
        return EXIT_NUMERICAL
    if args.command == "check" and not report["passed"]:
        return EXIT_FAILED
    return 0


if __name__ == "__main__":
    sys.exit(main())
