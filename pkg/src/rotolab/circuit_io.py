"""Plain-text problem files: a circuit plus the observable it is measured against.

Example::

    # single-qubit demo
    qubits = 1

    [gates]
    rx q=0 p=0

    [observable]
    1.0 Z

Gate lines: ``rx|ry|rz q=<qubit> p=<param>``, ``h|x|y|z|s q=<qubit>``,
``cnot c=<control> t=<target>``, ``cz a=<qubit> b=<qubit>``. Observable lines
are ``<coefficient> <pauli string>``. ``#`` starts a comment.
"""
from __future__ import annotations

from pathlib import Path

from .qsim import Observable, ParamCircuit, PauliRotation, named_gate


class CircuitParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_ROTATIONS = {"rx": "X", "ry": "Y", "rz": "Z"}
_ONE_QUBIT = {"h", "x", "y", "z", "s"}
_GATE_KEYS = {"cnot": ("c", "t"), "cz": ("a", "b")}


def _int_field(lineno: int, fields: dict, key: str, token: str) -> int:
    if key not in fields:
        raise CircuitParseError(lineno, f"gate {token!r} is missing '{key}='")
    try:
        return int(fields[key])
    except ValueError:
        raise CircuitParseError(lineno, f"'{key}={fields[key]}' is not an integer") from None


def _parse_gate(lineno: int, line: str):
    head, *rest = line.split()
    name = head.lower()
    fields = {}
    for tok in rest:
        key, sep, value = tok.partition("=")
        if not sep:
            raise CircuitParseError(lineno, f"expected key=value, got {tok!r}")
        fields[key] = value
    if name in _ROTATIONS:
        return PauliRotation(_ROTATIONS[name], _int_field(lineno, fields, "q", head),
                             _int_field(lineno, fields, "p", head))
    if name in _ONE_QUBIT:
        return named_gate(name, _int_field(lineno, fields, "q", head))
    if name in _GATE_KEYS:
        k1, k2 = _GATE_KEYS[name]
        return named_gate(name, _int_field(lineno, fields, k1, head),
                          _int_field(lineno, fields, k2, head))
    raise CircuitParseError(lineno, f"unknown gate {head!r}")


def _parse_term(lineno: int, line: str, n_qubits: int):
    parts = line.split()
    if len(parts) != 2:
        raise CircuitParseError(lineno, f"expected '<coefficient> <pauli string>', got {line!r}")
    try:
        coeff = float(parts[0])
    except ValueError:
        raise CircuitParseError(lineno, f"bad coefficient {parts[0]!r}") from None
    label = parts[1].upper()
    bad = [ch for ch in label if ch not in "IXYZ"]
    if bad:
        raise CircuitParseError(
            lineno, f"invalid Pauli string {parts[1]!r} (offending token {bad[0]!r})"
        )
    if len(label) != n_qubits:
        raise CircuitParseError(
            lineno, f"Pauli string {parts[1]!r} has length {len(label)}, expected {n_qubits}"
        )
    return coeff, label


def parse_problem(text: str) -> tuple[ParamCircuit, Observable]:
    """Parse problem text into ``(circuit, observable)``."""
    n_qubits = None
    section = None
    gates, terms = [], []
    gate_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[] ").lower()
            if section not in ("gates", "observable"):
                raise CircuitParseError(lineno, f"unknown section [{section}]")
            continue
        if section is None:
            key, sep, value = line.partition("=")
            if not sep or key.strip() != "qubits":
                raise CircuitParseError(lineno, f"expected 'qubits = <n>', got {line!r}")
            try:
                n_qubits = int(value)
            except ValueError:
                raise CircuitParseError(lineno, f"bad qubit count {value.strip()!r}") from None
        elif section == "gates":
            try:
                gates.append(_parse_gate(lineno, line))
            except CircuitParseError:
                raise
            except ValueError as exc:
                raise CircuitParseError(lineno, str(exc)) from None
            gate_lines.append(lineno)
        else:
            if n_qubits is None:
                raise CircuitParseError(lineno, "'qubits = <n>' must come before the observable")
            terms.append(_parse_term(lineno, line, n_qubits))
    if n_qubits is None:
        raise CircuitParseError(1, "missing 'qubits = <n>'")
    if not terms:
        raise CircuitParseError(len(text.splitlines()) or 1, "observable section is empty")
    for gate, lineno in zip(gates, gate_lines):
        if any(q >= n_qubits or q < 0 for q in gate.qubits):
            raise CircuitParseError(lineno, f"gate targets qubit outside [0, {n_qubits})")
    try:
        circuit = ParamCircuit(n_qubits, tuple(gates))
    except ValueError as exc:
        raise CircuitParseError(gate_lines[-1] if gate_lines else 1, str(exc)) from None
    return circuit, Observable(n_qubits, tuple(terms))


def load_problem(path) -> tuple[ParamCircuit, Observable]:
    return parse_problem(Path(path).read_text())


def format_problem(circuit: ParamCircuit, obs: Observable) -> str:
    """Inverse of :func:`parse_problem` for circuits built from named gates."""
    lines = [f"qubits = {circuit.n_qubits}", "", "[gates]"]
    for gate in circuit.gates:
        if isinstance(gate, PauliRotation):
            lines.append(f"r{gate.axis.lower()} q={gate.qubit} p={gate.param}")
        elif gate.name == "cnot":
            lines.append(f"cnot c={gate.qubits[0]} t={gate.qubits[1]}")
        elif gate.name == "cz":
            lines.append(f"cz a={gate.qubits[0]} b={gate.qubits[1]}")
        elif gate.name in _ONE_QUBIT:
            lines.append(f"{gate.name} q={gate.qubits[0]}")
        else:
            raise ValueError(f"gate {gate.name!r} has no text form")
    lines += ["", "[observable]"]
    lines += [f"{coeff!r} {label}" for coeff, label in obs.terms]
    return "\n".join(lines) + "\n"
