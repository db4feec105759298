"""Text formats: netlist files, gate-circuit files and CSV output.

Both file formats are line oriented. ``#`` starts a comment, blank lines are
ignored, and the first remaining line must be ``electrons <n>``::

    electrons 1
    bs e0 theta=0.7853981633974483        # beam splitter
    abphase e0 phi=1.5707963267948966
    rashba e0 axis=z theta=1.5707963267948966 mode=1
    coulomb e0 e1 phi=3.141592653589793
    detector e0 target=mode

Gate circuits use qubit names ``s<i>`` / ``k<i>``::

    electrons 2
    h s0
    rx k1 theta=0.25
    cphase k0 k1 phi=3.141592653589793
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence, TextIO

from . import core, hardware as hw
from .core import QubitRef
from .errors import ParseError, SpinqnetError
from .gates import Circuit, GateKind, GateOp

# stable error codes
E_HEADER = "missing-header"
E_KEYWORD = "unknown-keyword"
E_ELECTRON = "bad-electron"
E_SAME_ELECTRON = "same-electron"
E_QUBIT = "bad-qubit"
E_FLOAT = "bad-float"
E_ARGUMENT = "bad-argument"

ERROR_CODES = (E_HEADER, E_KEYWORD, E_ELECTRON, E_SAME_ELECTRON, E_QUBIT, E_FLOAT, E_ARGUMENT)


def _lines(text: str):
    """(line number, tokens) for every non-empty line, comments stripped."""
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield number, body.split()


def _header(lines) -> int:
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise ParseError(E_HEADER, "empty file; expected 'electrons <n>'") from None
    if tokens[0] != "electrons" or len(tokens) != 2:
        raise ParseError(E_HEADER, "first line must be 'electrons <n>'", number)
    try:
        n = int(tokens[1])
    except ValueError:
        raise ParseError(E_HEADER, f"electron count {tokens[1]!r} is not an integer", number) from None
    if not 1 <= n <= core.MAX_ELECTRONS:
        raise ParseError(E_HEADER, f"electron count must be in 1..{core.MAX_ELECTRONS}", number)
    return n


def _float(text: str, number: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(E_FLOAT, f"{text!r} is not a number", number) from None
    if not math.isfinite(value):
        raise ParseError(E_FLOAT, f"{text!r} is not finite", number)
    return value


def _split_args(tokens: Sequence[str], number: int):
    """Positional tokens and a key=value map (duplicate keys rejected)."""
    positional, named = [], {}
    for tok in tokens:
        if "=" in tok:
            key, _, value = tok.partition("=")
            if key in named:
                raise ParseError(E_ARGUMENT, f"duplicate argument {key!r}", number)
            named[key] = value
        else:
            if named:
                raise ParseError(E_ARGUMENT, f"positional {tok!r} after key=value arguments", number)
            positional.append(tok)
    return positional, named


def _expect_keys(named: dict, keys: Iterable[str], keyword: str, number: int):
    keys = set(keys)
    missing = keys - named.keys()
    extra = named.keys() - keys
    if missing:
        raise ParseError(E_ARGUMENT, f"{keyword} needs {', '.join(sorted(k + '=' for k in missing))}", number)
    if extra:
        raise ParseError(E_ARGUMENT, f"{keyword} does not take {', '.join(sorted(extra))}", number)


def _choice(named: dict, key: str, options: Sequence[str], number: int) -> str:
    value = named[key]
    if value not in options:
        raise ParseError(E_ARGUMENT, f"{key} must be one of {'|'.join(options)}, got {value!r}", number)
    return value


def _electron(tok: str, n: int, number: int) -> int:
    if len(tok) < 2 or tok[0] != "e" or not tok[1:].isdigit():
        raise ParseError(E_ELECTRON, f"expected an electron like e0, got {tok!r}", number)
    e = int(tok[1:])
    if e >= n:
        raise ParseError(E_ELECTRON, f"{tok} is outside a {n}-electron netlist", number)
    return e


# ---------------------------------------------------------------------------
# netlists

_ELEMENT_ARGS = {
    "bs": (1, ("theta",)),
    "abphase": (1, ("phi",)),
    "rashba": (1, ("axis", "theta", "mode")),
    "coulomb": (2, ("phi",)),
    "detector": (1, ("target",)),
}


def _parse_element(tokens, n, number) -> hw.HardwareElement:
    keyword = tokens[0]
    if keyword not in _ELEMENT_ARGS:
        raise ParseError(E_KEYWORD, f"unknown element {keyword!r}", number)
    n_pos, keys = _ELEMENT_ARGS[keyword]
    positional, named = _split_args(tokens[1:], number)
    if len(positional) != n_pos:
        raise ParseError(E_ARGUMENT, f"{keyword} takes {n_pos} electron(s), got {len(positional)}", number)
    electrons = [_electron(t, n, number) for t in positional]
    _expect_keys(named, keys, keyword, number)
    if keyword == "bs":
        return hw.beam_splitter(electrons[0], _float(named["theta"], number))
    if keyword == "abphase":
        return hw.ab_phase(electrons[0], _float(named["phi"], number))
    if keyword == "rashba":
        axis = _choice(named, "axis", ("x", "z"), number)
        mask = _choice(named, "mode", ("both", "1"), number)
        return hw.rashba(electrons[0], axis, _float(named["theta"], number), mask)
    if keyword == "coulomb":
        if electrons[0] == electrons[1]:
            raise ParseError(E_SAME_ELECTRON, "coulomb needs two distinct electrons", number)
        return hw.coulomb(electrons[0], electrons[1], _float(named["phi"], number))
    return hw.detector(electrons[0], _choice(named, "target", ("mode", "full"), number))


def parse_netlist(text: str) -> hw.Netlist:
    lines = _lines(text)
    n = _header(lines)
    elements = []
    for number, tokens in lines:
        if tokens[0] == "electrons":
            raise ParseError(E_HEADER, "duplicate 'electrons' header", number)
        try:
            elements.append(_parse_element(tokens, n, number))
        except ParseError:
            raise
        except SpinqnetError as exc:  # element-level validation
            raise ParseError(E_ARGUMENT, str(exc), number) from exc
    return hw.Netlist(n, elements)


def format_netlist(netlist: hw.Netlist) -> str:
    lines = [f"electrons {netlist.n_electrons}"]
    lines += [hw.format_element(el) for el in netlist.elements]
    return "\n".join(lines) + "\n"


def read_netlist(path) -> hw.Netlist:
    with open(path, encoding="utf-8") as fh:
        return parse_netlist(fh.read())


def write_netlist(path, netlist: hw.Netlist):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_netlist(netlist))


# ---------------------------------------------------------------------------
# gate circuits

def _qubit(tok: str, n: int, number: int) -> QubitRef:
    if len(tok) < 2 or tok[0] not in "sk" or not tok[1:].isdigit():
        raise ParseError(E_QUBIT, f"expected a qubit like s0 or k1, got {tok!r}", number)
    e = int(tok[1:])
    if e >= n:
        raise ParseError(E_QUBIT, f"{tok} is outside a {n}-electron circuit", number)
    return core.spin(e) if tok[0] == "s" else core.mode(e)


def _gate_keyword(kind: GateKind) -> str:
    return "phi" if kind in (GateKind.P, GateKind.CPHASE) else "theta"


_CIRCUIT_KINDS = {k.value: k for k in GateKind if k is not GateKind.IDENTITY}


def _parse_gate(tokens, n, number) -> GateOp:
    keyword = tokens[0]
    if keyword not in _CIRCUIT_KINDS:
        raise ParseError(E_KEYWORD, f"unknown gate {keyword!r}", number)
    kind = _CIRCUIT_KINDS[keyword]
    positional, named = _split_args(tokens[1:], number)
    if len(positional) != kind.arity:
        raise ParseError(E_ARGUMENT, f"{keyword} takes {kind.arity} qubit(s), got {len(positional)}", number)
    qubits = tuple(_qubit(t, n, number) for t in positional)
    if len(set(qubits)) != len(qubits):
        raise ParseError(E_QUBIT, f"{keyword} targets must be distinct", number)
    angle = None
    if kind.has_angle:
        _expect_keys(named, (_gate_keyword(kind),), keyword, number)
        angle = _float(named[_gate_keyword(kind)], number)
    else:
        _expect_keys(named, (), keyword, number)
    return GateOp(kind, qubits, angle)


def parse_circuit(text: str) -> Circuit:
    lines = _lines(text)
    n = _header(lines)
    ops = []
    for number, tokens in lines:
        if tokens[0] == "electrons":
            raise ParseError(E_HEADER, "duplicate 'electrons' header", number)
        ops.append(_parse_gate(tokens, n, number))
    return Circuit(n, ops)


def format_gate(g: GateOp) -> str:
    parts = [g.kind.value] + [str(t) for t in g.targets]
    if g.angle is not None:
        parts.append(f"{_gate_keyword(g.kind)}={g.angle!r}")
    return " ".join(parts)


def format_circuit(circuit: Circuit) -> str:
    lines = [f"electrons {circuit.n_electrons}"] + [format_gate(g) for g in circuit.ops]
    return "\n".join(lines) + "\n"


def read_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read())


# ---------------------------------------------------------------------------
# CSV

def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Header plus rows, floats at 12 significant digits, LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(dest: str | TextIO, header: Sequence[str], rows: Iterable[Sequence]):
    text = csv_text(header, rows)
    if isinstance(dest, str):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)
