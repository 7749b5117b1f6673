"""Dense statevector simulation of Pauli-rotation circuits.

Qubit 0 is the leftmost tensor factor (most significant bit of the basis
index), and character ``k`` of a Pauli string acts on qubit ``k``. Circuits
always start from ``|0...0>``.

Parameter arrays may be a single vector of shape ``(d,)`` or a batch of shape
``(B, d)``; simulation functions keep the batch axis so that many shifted
evaluations cost one pass over the gate list.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np

MAX_QUBITS = 12
MAX_DENSE_QUBITS = 10

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_NAMED_GATES = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "x": PAULI_MATRICES["X"],
    "y": PAULI_MATRICES["Y"],
    "z": PAULI_MATRICES["Z"],
    "s": np.diag([1, 1j]).astype(complex),
    "cnot": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
}


class ParameterShapeError(ValueError):
    """Parameter array does not match the circuit's parameter dimension."""


class NonHermitianError(ValueError):
    """An expectation value came back with a non-negligible imaginary part."""


@dataclass(frozen=True)
class PauliRotation:
    """``exp(-i theta sigma / 2)`` on one qubit, driven by parameter ``param``."""

    axis: str
    qubit: int
    param: int

    def __post_init__(self):
        axis = self.axis.upper()
        if axis not in ("X", "Y", "Z"):
            raise ValueError(f"rotation axis must be X, Y or Z, got {self.axis!r}")
        object.__setattr__(self, "axis", axis)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True, eq=False)
class FixedUnitary:
    """A parameter-free gate acting on one or two qubits."""

    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        matrix = np.asarray(self.matrix, dtype=complex)
        if len(qubits) not in (1, 2) or len(set(qubits)) != len(qubits):
            raise ValueError(f"fixed gates act on 1 or 2 distinct qubits, got {qubits}")
        dim = 2 ** len(qubits)
        if matrix.shape != (dim, dim):
            raise ValueError(f"gate {self.name!r} needs a {dim}x{dim} matrix, got {matrix.shape}")
        if not np.allclose(matrix.conj().T @ matrix, np.eye(dim), rtol=0, atol=1e-10):
            raise ValueError(f"gate {self.name!r} is not unitary")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "matrix", matrix)


Gate = Union[PauliRotation, FixedUnitary]


def rx(qubit: int, param: int) -> PauliRotation:
    return PauliRotation("X", qubit, param)


def ry(qubit: int, param: int) -> PauliRotation:
    return PauliRotation("Y", qubit, param)


def rz(qubit: int, param: int) -> PauliRotation:
    return PauliRotation("Z", qubit, param)


def named_gate(name: str, *qubits: int) -> FixedUnitary:
    """Look up one of the built-in fixed gates (h, x, y, z, s, cnot, cz)."""
    key = name.lower()
    if key not in _NAMED_GATES:
        raise ValueError(f"unknown fixed gate {name!r}")
    return FixedUnitary(key, tuple(qubits), _NAMED_GATES[key])


def hadamard(qubit: int) -> FixedUnitary:
    return named_gate("h", qubit)


def cnot(control: int, target: int) -> FixedUnitary:
    return named_gate("cnot", control, target)


def cz(a: int, b: int) -> FixedUnitary:
    return named_gate("cz", a, b)


def unitary(matrix, *qubits: int, name: str = "u") -> FixedUnitary:
    return FixedUnitary(name, tuple(qubits), matrix)


@dataclass(frozen=True)
class ParamCircuit:
    """Ordered gate list over ``n_qubits`` qubits.

    Every parameter index ``0..d-1`` drives exactly one Pauli rotation, so the
    parameters are independent of each other.
    """

    n_qubits: int
    gates: tuple

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        params = []
        for gate in gates:
            if any(q < 0 or q >= self.n_qubits for q in gate.qubits):
                raise ValueError(f"gate {gate} targets a qubit outside [0, {self.n_qubits})")
            if isinstance(gate, PauliRotation):
                params.append(gate.param)
        if sorted(params) != list(range(len(params))):
            raise ValueError(
                "each parameter index 0..d-1 must appear in exactly one rotation, "
                f"got {sorted(params)}"
            )

    @cached_property
    def param_dim(self) -> int:
        return sum(isinstance(g, PauliRotation) for g in self.gates)

    @cached_property
    def rotations(self) -> tuple[PauliRotation, ...]:
        """Rotations ordered by parameter index."""
        rots = [g for g in self.gates if isinstance(g, PauliRotation)]
        return tuple(sorted(rots, key=lambda g: g.param))


def _rotation_matrices(axis: str, angles: np.ndarray) -> np.ndarray:
    """Batch of 2x2 matrices ``exp(-i angle sigma / 2)``, shape ``(B, 2, 2)``."""
    c = np.cos(angles / 2)
    s = np.sin(angles / 2)
    out = np.zeros(angles.shape + (2, 2), dtype=complex)
    if axis == "X":
        out[:, 0, 0] = c
        out[:, 1, 1] = c
        out[:, 0, 1] = -1j * s
        out[:, 1, 0] = -1j * s
    elif axis == "Y":
        out[:, 0, 0] = c
        out[:, 1, 1] = c
        out[:, 0, 1] = -s
        out[:, 1, 0] = s
    else:
        out[:, 0, 0] = np.exp(-0.5j * angles)
        out[:, 1, 1] = np.exp(0.5j * angles)
    return out


def _apply_1q(state: np.ndarray, qubit: int, n: int, matrix: np.ndarray) -> np.ndarray:
    # state: (B, 2**n); matrix: (2, 2) or (B, 2, 2)
    batch = state.shape[0]
    view = state.reshape(batch, 2**qubit, 2, 2 ** (n - qubit - 1))
    if matrix.ndim == 2:
        out = np.einsum("ij,bajc->baic", matrix, view)
    else:
        out = np.einsum("bij,bajc->baic", matrix, view)
    return out.reshape(batch, 2**n)


def _apply_2q(state: np.ndarray, qubits: tuple[int, int], n: int, matrix: np.ndarray) -> np.ndarray:
    batch = state.shape[0]
    view = state.reshape((batch,) + (2,) * n)
    axes = (1 + qubits[0], 1 + qubits[1])
    moved = np.moveaxis(view, axes, (-2, -1))
    shape = moved.shape
    out = moved.reshape(shape[:-2] + (4,)) @ matrix.T
    out = np.moveaxis(out.reshape(shape), (-2, -1), axes)
    return np.ascontiguousarray(out).reshape(batch, 2**n)


def _as_batch(circuit: ParamCircuit, theta) -> tuple[np.ndarray, bool]:
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    batch = theta[None, :] if single else theta
    if batch.ndim != 2 or batch.shape[1] != circuit.param_dim:
        raise ParameterShapeError(
            f"expected parameters of shape (d,) or (B, d) with d={circuit.param_dim}, "
            f"got {theta.shape}"
        )
    return batch, single


def apply_circuit(circuit: ParamCircuit, theta) -> np.ndarray:
    """Final statevector(s) ``prod_j V_j U_j(theta_j) |0...0>``.

    Returns shape ``(2**n,)`` for a single parameter vector, ``(B, 2**n)`` for a batch.
    """
    batch, single = _as_batch(circuit, theta)
    n = circuit.n_qubits
    state = np.zeros((batch.shape[0], 2**n), dtype=complex)
    state[:, 0] = 1.0
    for gate in circuit.gates:
        if isinstance(gate, PauliRotation):
            mats = _rotation_matrices(gate.axis, batch[:, gate.param])
            state = _apply_1q(state, gate.qubit, n, mats)
        elif len(gate.qubits) == 1:
            state = _apply_1q(state, gate.qubits[0], n, gate.matrix)
        else:
            state = _apply_2q(state, gate.qubits, n, gate.matrix)
    return state[0] if single else state


def _pauli_masks(label: str) -> tuple[int, int, int]:
    n = len(label)
    xmask = zmask = 0
    n_y = 0
    for k, ch in enumerate(label):
        bit = 1 << (n - 1 - k)
        if ch in "XY":
            xmask |= bit
        if ch in "ZY":
            zmask |= bit
        n_y += ch == "Y"
    return xmask, zmask, n_y


def _popcount_parity(values: np.ndarray) -> np.ndarray:
    parity = np.zeros_like(values)
    v = values.copy()
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    return parity


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable as a real-weighted sum of Pauli strings.

    A dense Hermitian ``matrix`` may be given instead of (or alongside) the
    Pauli terms; when ``terms`` is empty the matrix defines the operator.
    """

    n_qubits: int
    terms: tuple = ()
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        terms = []
        for coeff, label in self.terms:
            label = str(label).upper()
            if len(label) != self.n_qubits or any(ch not in "IXYZ" for ch in label):
                raise ValueError(f"invalid Pauli string {label!r} for {self.n_qubits} qubits")
            terms.append((float(coeff), label))
        object.__setattr__(self, "terms", tuple(terms))
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2**self.n_qubits,) * 2:
                raise ValueError(f"dense observable has shape {m.shape}")
            if not np.allclose(m, m.conj().T, rtol=0, atol=1e-10):
                raise NonHermitianError("dense observable is not Hermitian")
            object.__setattr__(self, "matrix", m)
        elif not terms:
            raise ValueError("observable needs Pauli terms or a dense matrix")

    @classmethod
    def from_terms(cls, terms: Sequence[tuple[float, str]]) -> "Observable":
        terms = list(terms)
        return cls(len(terms[0][1]), tuple(terms))

    @classmethod
    def from_matrix(cls, matrix) -> "Observable":
        matrix = np.asarray(matrix, dtype=complex)
        n = int(round(np.log2(matrix.shape[0])))
        return cls(n, (), matrix)

    @cached_property
    def _pauli_tables(self):
        idx = np.arange(2**self.n_qubits)
        tables = []
        for coeff, label in self.terms:
            xmask, zmask, n_y = _pauli_masks(label)
            sign = 1 - 2 * _popcount_parity(idx & zmask)
            # P|b> = i^{n_y} (-1)^{|b & zmask|} |b ^ xmask>
            tables.append((coeff, idx ^ xmask, (1j**n_y) * sign))
        return tables

    def dense(self) -> np.ndarray:
        """Dense ``2**n x 2**n`` matrix (built from the terms if not given)."""
        if self.matrix is not None:
            return self.matrix
        return self._dense_from_terms

    @cached_property
    def _dense_from_terms(self) -> np.ndarray:
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise ValueError(f"dense form limited to {MAX_DENSE_QUBITS} qubits")
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        idx = np.arange(dim)
        for coeff, flipped, phase in self._pauli_tables:
            out[flipped, idx] += coeff * phase
        return out

    def apply(self, state: np.ndarray) -> np.ndarray:
        """``H|psi>`` for a state or a batch of states (last axis is the amplitude axis)."""
        if not self.terms:
            return state @ self.matrix.T
        out = np.zeros_like(state)
        for coeff, flipped, phase in self._pauli_tables:
            out[..., flipped] += coeff * phase * state
        return out

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.dense())


def expectation(state: np.ndarray, obs: Observable, atol: float = 1e-10):
    """``<psi|H|psi>`` for one state (float) or a batch (array of floats)."""
    state = np.asarray(state, dtype=complex)
    if state.shape[-1] != 2**obs.n_qubits:
        raise ValueError(
            f"state dimension {state.shape[-1]} does not match a {obs.n_qubits}-qubit observable"
        )
    value = np.sum(state.conj() * obs.apply(state), axis=-1)
    if np.any(np.abs(value.imag) > atol):
        raise NonHermitianError(
            f"imaginary residue {np.max(np.abs(value.imag)):.3e} exceeds {atol:g}"
        )
    value = value.real
    return float(value) if np.ndim(value) == 0 else value


def objective(circuit: ParamCircuit, obs: Observable, theta):
    """Noise-free objective ``f(theta) = <psi(theta)|H|psi(theta)>``."""
    if obs.n_qubits != circuit.n_qubits:
        raise ValueError("observable and circuit act on different qubit counts")
    return expectation(apply_circuit(circuit, theta), obs)


def spectral_bounds(obs: Observable, exact: bool = True) -> tuple[float, float]:
    """``(lambda_min, lambda_max)`` with every eigenvalue in ``[-lambda_min, lambda_max]``.

    Exact mode diagonalizes the dense operator (at most 10 qubits) and clips
    both numbers at zero. Bound mode returns ``(sum|c|, sum|c|)``.
    """
    if exact and obs.n_qubits <= MAX_DENSE_QUBITS:
        eig = np.linalg.eigvalsh(obs.dense())
        return max(0.0, float(-eig[0])), max(0.0, float(eig[-1]))
    if not obs.terms:
        eig = np.linalg.eigvalsh(obs.matrix)
        return max(0.0, float(-eig[0])), max(0.0, float(eig[-1]))
    total = float(sum(abs(c) for c, _ in obs.terms))
    return total, total


def spectral_radius(obs: Observable, exact: bool = True) -> float:
    """``max(lambda_min, lambda_max)``; bounds the single-shot spread of ``H``."""
    return max(spectral_bounds(obs, exact=exact))


# -- circuit families -------------------------------------------------------


def layered_ansatz(n_qubits: int, layers: int, axes: Sequence[str] = ("Y", "Z"),
                   entangle: str = "chain") -> ParamCircuit:
    """Per-qubit rotations about each axis in ``axes`` followed by a CNOT chain or ring."""
    gates: list = []
    p = 0
    for _ in range(layers):
        for axis in axes:
            for q in range(n_qubits):
                gates.append(PauliRotation(axis, q, p))
                p += 1
        if n_qubits > 1:
            pairs = [(q, q + 1) for q in range(n_qubits - 1)]
            if entangle == "ring" and n_qubits > 2:
                pairs.append((n_qubits - 1, 0))
            elif entangle == "ring":
                pairs.append((1, 0))
            gates.extend(cnot(c, t) for c, t in pairs)
    return ParamCircuit(n_qubits, tuple(gates))


def random_circuit(rng: np.random.Generator, n_qubits: int, n_params: int,
                   entangler_prob: float = 0.5) -> ParamCircuit:
    """Random circuit: rotations on random axes/qubits interleaved with H, CNOT and CZ."""
    gates: list = []
    for p in range(n_params):
        if rng.random() < 0.3:
            gates.append(hadamard(int(rng.integers(n_qubits))))
        gates.append(PauliRotation("XYZ"[rng.integers(3)], int(rng.integers(n_qubits)), p))
        if n_qubits > 1 and rng.random() < entangler_prob:
            a, b = rng.choice(n_qubits, size=2, replace=False)
            gates.append(cnot(int(a), int(b)) if rng.random() < 0.7 else cz(int(a), int(b)))
    return ParamCircuit(n_qubits, tuple(gates))


def random_observable(rng: np.random.Generator, n_qubits: int, n_terms: int = 4) -> Observable:
    """Random Pauli sum with coefficients in [-1, 1] (identity strings excluded)."""
    terms = []
    while len(terms) < n_terms:
        label = "".join(rng.choice(list("IXYZ"), size=n_qubits))
        if set(label) != {"I"}:
            terms.append((float(rng.uniform(-1, 1)), label))
    return Observable(n_qubits, tuple(terms))
