"""``spinqnet`` command line.

Exit codes: 0 success, 1 usage/IO, 2 parse error, 3 numeric or
unsupported-gate error, 4 operators not equivalent (``equiv``).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import core, formats, hardware as hw, metrics, protocols, synthesis
from .errors import ParseError, SpinqnetError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_NOT_EQUIVALENT = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(args, header, rows):
    """CSV to --csv if given, otherwise to stdout."""
    if getattr(args, "csv", None):
        formats.write_csv(args.csv, header, rows)
    else:
        formats.write_csv(sys.stdout, header, rows)


def _read(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def load_operator(path):
    """Unitary of a netlist or gate-circuit file (detected from its keywords)."""
    text = _read(path)
    try:
        netlist = formats.parse_netlist(text)
    except ParseError as exc:
        if exc.code != formats.E_KEYWORD:
            raise
        try:
            circuit = formats.parse_circuit(text)
        except ParseError:
            raise exc from None
        from .gates import circuit_unitary
        return circuit.n_electrons, circuit_unitary(circuit)
    return netlist.n_electrons, hw.netlist_unitary(netlist)


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> int:
    netlist = formats.parse_netlist(_read(args.netlist))
    n = netlist.n_electrons
    state = core.basis_state(n, args.input) if args.input else core.new_register(n)
    if args.shots < 0:
        raise UsageError("--shots must be non-negative")
    if args.shots == 0:
        final, records = hw.simulate(state, netlist, args.seed)
        for rec in records:
            print(f"# detector {','.join(map(str, rec.measured))} -> {rec.outcome} (p={rec.probability:.12g})",
                  file=sys.stderr)
        rows = []
        for i, a in enumerate(final.amplitudes):
            rows.append([core.basis_label(i, n), float(a.real), float(a.imag), float(abs(a) ** 2)])
        _emit(args, ["basis", "re", "im", "probability"], rows)
        return EXIT_OK
    if not netlist.has_detectors():
        raise UsageError("--shots needs a netlist with at least one detector")
    counts = hw.sample_shots(state, netlist, args.seed, args.shots)
    rows = [[" ".join(key), c, c / args.shots] for key, c in sorted(counts.items())]
    _emit(args, ["outcome", "count", "frequency"], rows)
    return EXIT_OK


def cmd_equiv(args) -> int:
    na, ua = load_operator(args.a)
    nb, ub = load_operator(args.b)
    if na != nb:
        print(f"not equivalent: {na} vs {nb} electrons")
        return EXIT_NOT_EQUIVALENT
    lam = core.global_phase(ua, ub, args.tol)
    if lam is not None:
        print(f"equivalent up to global phase {lam:.12g}")
        return EXIT_OK
    if args.diagonal:
        r = ua @ ub.conj().T
        d = np.diag(r)
        if np.max(np.abs(r - np.diag(d))) <= args.tol:
            rel = np.angle(d * np.conj(d[0]))
            print("equivalent up to a diagonal phase; residual phases: "
                  + " ".join(f"{x:.12g}" for x in rel))
            return EXIT_OK
    print("not equivalent")
    return EXIT_NOT_EQUIVALENT


def cmd_synth(args) -> int:
    vals = args.entries
    u = np.array([complex(vals[i], vals[i + 1]) for i in range(0, 8, 2)]).reshape(2, 2)
    e = synthesis.euler_zxz(u)
    formats.write_csv(sys.stdout, ["lambda", "theta1", "theta2", "theta3"],
                      [[e.global_phase, e.theta1, e.theta2, e.theta3]])
    return EXIT_OK


def cmd_lower(args) -> int:
    circuit = formats.parse_circuit(_read(args.circuit))
    netlist = synthesis.lower_to_netlist(circuit, exact=not args.structural)
    try:
        formats.write_netlist(args.out, netlist)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc.strerror}") from exc
    print(f"{len(circuit)} gates -> {synthesis.hardware_cost(netlist)} elements")
    return EXIT_OK


def cmd_protocol(args) -> int:
    result = protocols.run_protocol(args.name, seed=args.seed, shots=args.shots, layer=args.layer)
    d = result.derived
    if args.name == "entanglement-transfer":
        print(f"mode entropy {d['mode_entropy_before']:.1f} -> {d['mode_entropy_after']:.1f}")
        print(f"spin entropy {d['spin_entropy_before']:.1f} -> {d['spin_entropy_after']:.1f}")
    for rec in result.records:
        print(f"# measured {','.join(map(str, rec.measured))} -> {rec.outcome}", file=sys.stderr)
    _emit(args, ["quantity", "value"], [[k, float(v)] for k, v in d.items()])
    return EXIT_OK


def cmd_sweep_stern_gerlach(args) -> int:
    thetas, p = protocols.stern_gerlach_sweep(args.theta0, args.points, args.paper_angle, args.layer)
    unpol = [protocols.unpolarized_p_up(t, args.paper_angle, args.layer) for t in thetas]
    _emit(args, ["theta", "p_up", "p_up_unpolarized"],
          [[float(t), float(x), float(y)] for t, x, y in zip(thetas, p, unpol)])
    if args.points >= 4:
        fit_theta = thetas if args.paper_angle else thetas / 2
        fit = metrics.fit_polarization(list(zip(fit_theta, p)))
        print(f"# fit: degree={fit.degree:.6g} theta0={fit.theta0:.6g} residual={fit.residual:.3g}",
              file=sys.stderr)
    return EXIT_OK


_CHSH_STATES = {
    "phi+": protocols.BellState.PHI_PLUS,
    "phi-": protocols.BellState.PHI_MINUS,
    "psi+": protocols.BellState.PSI_PLUS,
    "psi-": protocols.BellState.PSI_MINUS,
}


def _angles(text: str):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle list {text!r}") from None
    if len(vals) != 4 or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("expected four finite angles a,a',b,b'")
    return tuple(vals)


def cmd_sweep_chsh(args) -> int:
    state = protocols.spin_bell_state(_CHSH_STATES[args.state])
    terms = protocols.chsh_terms(state, args.angles)
    _emit(args, ["quantity", "value"], [[k, v] for k, v in terms.items()])
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinqnet", description="Spintronic quantum network simulator and compiler.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a netlist")
    p.add_argument("netlist")
    p.add_argument("--input", help="basis state such as u0,d1 (default: all u0)")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equiv", help="compare two netlists or circuits")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--diagonal", action="store_true",
                   help="also accept equality up to a diagonal phase on the output")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("synth", help="gate synthesis")
    synth = p.add_subparsers(dest="method", required=True, parser_class=_Parser)
    e = synth.add_parser("euler", help="ZXZ Euler angles of a 2x2 unitary")
    e.add_argument("entries", type=float, nargs=8, metavar="X",
                   help="re/im pairs of u00 u01 u10 u11 (row-major)")
    e.set_defaults(func=cmd_synth)

    p = sub.add_parser("lower", help="compile a gate circuit to a netlist")
    p.add_argument("circuit")
    p.add_argument("--out", required=True)
    p.add_argument("--structural", action="store_true",
                   help="one block per gate, without phase-correction elements")
    p.set_defaults(func=cmd_lower)

    p = sub.add_parser("protocol", help="run a named protocol")
    p.add_argument("name", choices=protocols.PROTOCOL_NAMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--layer", choices=protocols.LAYERS, default="gate")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("sweep", help="parameter sweeps")
    sweeps = p.add_subparsers(dest="sweep", required=True, parser_class=_Parser)
    s = sweeps.add_parser("stern-gerlach")
    s.add_argument("--theta0", type=float, required=True)
    s.add_argument("--points", type=int, required=True)
    s.add_argument("--paper-angle", action="store_true",
                   help="angles in the half-angle convention where p = cos^2(theta - theta0)")
    s.add_argument("--layer", choices=protocols.LAYERS, default="gate")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_sweep_stern_gerlach)
    c = sweeps.add_parser("chsh")
    c.add_argument("--angles", type=_angles, default=protocols.CHSH_ANGLES,
                   help="a,a',b,b' in radians (use --angles=... for negative values)")
    c.add_argument("--state", choices=sorted(_CHSH_STATES), default="phi+")
    c.add_argument("--csv")
    c.set_defaults(func=cmd_sweep_chsh)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"spinqnet: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"spinqnet: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SpinqnetError, ValueError) as exc:
        print(f"spinqnet: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
