"""Dense state-vector and density-matrix engine for small qubit registers.

Every qubit carries a :class:`QubitLabel`. Basis ordering is big-endian in
register order: the first label is the most significant bit of the flat
index. Atoms use ``|g_L> -> 0``, ``|g_R> -> 1``; photons use ``|L> -> 0``,
``|R> -> 1``.

States are immutable snapshots; every operation returns a new object.
"""
from __future__ import annotations

import enum
import io
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
PROB_TOL = 1e-15
MAX_QUBITS = 16

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": np.eye(2, dtype=complex), "X": PAULI_X, "Z": PAULI_Z,
          "Y": np.array([[0, -1j], [1j, 0]], dtype=complex)}


class QsimError(ValueError):
    pass


class LabelCollisionError(QsimError):
    pass


class UnknownLabelError(QsimError):
    pass


class NonUnitaryError(QsimError):
    pass


class ImpossibleBranchError(QsimError):
    pass


class RegisterOverflowError(QsimError):
    pass


class Kind(enum.Enum):
    ATOM = "atom"
    PHOTON = "photon"


class Copy(enum.IntEnum):
    FIRST = 1
    SECOND = 2


class Basis(enum.Enum):
    COMPUTATIONAL = "computational"
    DIAGONAL = "diagonal"


@dataclass(frozen=True)
class QubitLabel:
    kind: Kind
    party: int
    copy: Copy | None = None

    def __post_init__(self):
        if self.party < 0:
            raise QsimError(f"negative party index {self.party}")
        if self.kind is Kind.ATOM and self.copy is None:
            raise QsimError("atom labels need a copy")
        if self.kind is Kind.PHOTON and self.copy is not None:
            raise QsimError("photon labels carry no copy")

    def __str__(self):
        name = string.ascii_lowercase[self.party] if self.party < 26 else f"q{self.party}_"
        if self.kind is Kind.PHOTON:
            return f"p{self.party + 1}"
        return f"{name}{int(self.copy)}"


def atom(party: int, copy: Copy = Copy.FIRST) -> QubitLabel:
    return QubitLabel(Kind.ATOM, party, Copy(copy))


def photon(party: int) -> QubitLabel:
    return QubitLabel(Kind.PHOTON, party)


def atoms(n: int, copy: Copy = Copy.FIRST) -> tuple[QubitLabel, ...]:
    """Labels of one copy of an ``n``-party register, in party order."""
    return tuple(atom(k, copy) for k in range(n))


def _check_register(register: Sequence[QubitLabel]) -> tuple[QubitLabel, ...]:
    register = tuple(register)
    if len(set(register)) != len(register):
        dup = sorted({str(q) for q in register if register.count(q) > 1})
        raise LabelCollisionError(f"duplicate labels in register: {dup}")
    if sum(q.kind is Kind.PHOTON for q in register) > 1:
        raise QsimError("a register holds at most one photon")
    if len(register) > MAX_QUBITS:
        raise RegisterOverflowError(
            f"register of {len(register)} qubits exceeds the {MAX_QUBITS}-qubit limit")
    return register


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    register: tuple[QubitLabel, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "register", _check_register(self.register))
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != 2 ** len(self.register):
            raise QsimError(f"{amps.size} amplitudes for {len(self.register)} qubits")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> PureState:
        return PureState(self.register, self.amplitudes / self.norm)

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(self.register, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    register: tuple[QubitLabel, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "register", _check_register(self.register))
        m = _frozen(self.matrix)
        dim = 2 ** len(self.register)
        if m.shape != (dim, dim):
            raise QsimError(f"matrix of shape {m.shape} for {len(self.register)} qubits")
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> DensityMatrix:
        return DensityMatrix(self.register, self.matrix / self.trace)

    def validate(self, herm_tol: float = NORM_TOL, eig_tol: float = 1e-10,
                 trace_tol: float = NORM_TOL) -> None:
        """Raise if the matrix is not a normalized physical state."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > herm_tol:
            raise QsimError("density matrix is not Hermitian")
        if abs(self.trace - 1.0) > trace_tol:
            raise QsimError(f"trace {self.trace} != 1")
        if np.linalg.eigvalsh(m).min() < -eig_tol:
            raise QsimError("density matrix has negative eigenvalues")


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True)
class MeasurementRecord:
    labels: tuple[QubitLabel, ...]
    outcomes: str
    probability: float


def basis_state(register: Sequence[QubitLabel], bits: str | int) -> PureState:
    n = len(register)
    index = int(bits, 2) if isinstance(bits, str) else int(bits)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[index] = 1.0
    return PureState(tuple(register), amps)


def mix(states: Iterable[tuple[float, State]]) -> DensityMatrix:
    """Convex combination ``sum_i p_i rho_i`` over a common register."""
    total = None
    register = None
    for p, s in states:
        d = s.to_density() if isinstance(s, PureState) else s
        if register is None:
            register, total = d.register, p * d.matrix
        else:
            if d.register != register:
                raise QsimError("cannot mix states on different registers")
            total = total + p * d.matrix
    if register is None:
        raise QsimError("empty ensemble")
    return DensityMatrix(register, total)


def tensor(a: State, b: State) -> State:
    """Kronecker product; the combined register is ``a.register + b.register``."""
    register = a.register + b.register
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(register, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(register, np.kron(a.matrix, b.matrix))
    raise QsimError("tensor() needs two states of the same kind")


def _axes(register: tuple[QubitLabel, ...], targets: Sequence[QubitLabel]) -> list[int]:
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise LabelCollisionError("repeated target label")
    try:
        return [register.index(t) for t in targets]
    except ValueError:
        missing = [str(t) for t in targets if t not in register]
        raise UnknownLabelError(f"labels not in register: {missing}") from None


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=tol)


def _apply_on_axes(t: np.ndarray, u: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply_local(u: np.ndarray, targets: Sequence[QubitLabel], s: State) -> State:
    """Apply the unitary ``u`` to ``targets`` (in the given order), identity elsewhere."""
    u = np.asarray(u, dtype=complex)
    k = len(targets)
    if u.shape != (2 ** k, 2 ** k):
        raise QsimError(f"{u.shape} operator for {k} target qubits")
    if not is_unitary(u):
        raise NonUnitaryError("operator is not unitary within tolerance")
    axes = _axes(s.register, targets)
    n = s.n_qubits
    if isinstance(s, PureState):
        psi = _apply_on_axes(s.amplitudes.reshape((2,) * n), u, axes)
        return PureState(s.register, psi.reshape(-1))
    rho = s.matrix.reshape((2,) * (2 * n))
    rho = _apply_on_axes(rho, u, axes)
    rho = _apply_on_axes(rho, u.conj(), [n + a for a in axes])
    return DensityMatrix(s.register, rho.reshape(2 ** n, 2 ** n))


def apply_each(u: np.ndarray, targets: Sequence[QubitLabel], s: State) -> State:
    """Apply the single-qubit ``u`` to every label in ``targets``."""
    for t in targets:
        s = apply_local(u, [t], s)
    return s


def _to_measurement_basis(s: State, targets, basis: Basis) -> State:
    if Basis(basis) is Basis.DIAGONAL:
        return apply_each(HADAMARD, targets, s)
    return s


def outcome_probabilities(s: State, targets: Sequence[QubitLabel],
                          basis: Basis = Basis.COMPUTATIONAL) -> np.ndarray:
    """Born probabilities of all ``2**len(targets)`` outcomes, big-endian in target order."""
    s = _to_measurement_basis(s, targets, basis)
    axes = _axes(s.register, targets)
    n = s.n_qubits
    if isinstance(s, PureState):
        p = np.abs(s.amplitudes.reshape((2,) * n)) ** 2
    else:
        p = np.real(np.diagonal(s.matrix)).reshape((2,) * n)
    rest = tuple(a for a in range(n) if a not in axes)
    p = p.sum(axis=rest) if rest else p
    # summed array keeps the surviving axes in register order; reorder to target order
    order = np.argsort(np.argsort(axes))
    return np.transpose(p, order).reshape(-1) if axes else p.reshape(-1)


def _project(s: State, axes: list[int], bits: str) -> State:
    n = s.n_qubits
    keep = tuple(q for i, q in enumerate(s.register) if i not in axes)
    sel: list = [slice(None)] * n
    for a, b in zip(axes, bits):
        sel[a] = int(b)
    if isinstance(s, PureState):
        psi = s.amplitudes.reshape((2,) * n)[tuple(sel)]
        return PureState(keep, np.asarray(psi).reshape(-1))
    rho = s.matrix.reshape((2,) * (2 * n))[tuple(sel + sel)]
    d = 2 ** len(keep)
    return DensityMatrix(keep, np.asarray(rho).reshape(d, d))


def measure(s: State, targets: Sequence[QubitLabel], basis: Basis = Basis.COMPUTATIONAL,
            outcome: str | None = None, rng: np.random.Generator | None = None,
            ) -> tuple[MeasurementRecord, State]:
    """Destructive projective measurement of ``targets``.

    Pass ``outcome`` (a bit string in target order; for the diagonal basis
    ``0`` is ``(|0>+|1>)/sqrt2``) to force a branch, or ``rng`` to sample one.
    The measured qubits are removed and the post-state is renormalized.
    """
    targets = tuple(targets)
    if not targets:
        raise QsimError("nothing to measure")
    if (outcome is None) == (rng is None):
        raise QsimError("give exactly one of outcome= or rng=")
    s = _to_measurement_basis(s, targets, basis)
    axes = _axes(s.register, targets)
    k = len(targets)
    if outcome is None:
        probs = outcome_probabilities(s, targets)
        cdf = np.cumsum(probs)
        idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        outcome = format(min(idx, 2 ** k - 1), f"0{k}b")
    if len(outcome) != k or set(outcome) - {"0", "1"}:
        raise QsimError(f"bad outcome string {outcome!r} for {k} qubits")
    post = _project(s, axes, outcome)
    if isinstance(post, PureState):
        p = float(np.vdot(post.amplitudes, post.amplitudes).real)
    else:
        p = post.trace
    if p <= PROB_TOL:
        raise ImpossibleBranchError(f"outcome {outcome} has probability {p:.3g}")
    if isinstance(s, PureState):
        p_total = float(np.vdot(s.amplitudes, s.amplitudes).real)
        post = PureState(post.register, post.amplitudes / np.sqrt(p))
    else:
        p_total = s.trace
        post = DensityMatrix(post.register, post.matrix / p)
    return MeasurementRecord(targets, outcome, p / p_total), post


def partial_trace(keep: Sequence[QubitLabel], d: State) -> DensityMatrix:
    """Reduced state on ``keep`` (returned in the order given)."""
    keep = tuple(keep)
    if not keep:
        raise QsimError("partial trace needs at least one kept qubit")
    if isinstance(d, PureState):
        d = d.to_density()
    axes = _axes(d.register, keep)
    n = d.n_qubits
    letters = string.ascii_letters
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for i in range(n):
        if i not in axes:
            cols[i] = rows[i]
    out = "".join(rows[a] for a in axes) + "".join(cols[a] for a in axes)
    rho = np.einsum("".join(rows) + "".join(cols) + "->" + out,
                    d.matrix.reshape((2,) * (2 * n)))
    dim = 2 ** len(keep)
    return DensityMatrix(keep, rho.reshape(dim, dim))


def fidelity(d: State, target: PureState) -> float:
    """Overlap ``<target|rho|target>`` of a state with a pure target."""
    if d.n_qubits != target.n_qubits:
        raise QsimError(f"{d.n_qubits}-qubit state vs {target.n_qubits}-qubit target")
    psi = target.amplitudes
    if isinstance(d, PureState):
        return float(abs(np.vdot(psi, d.amplitudes)) ** 2)
    return float(np.real(np.vdot(psi, d.matrix @ psi)))


def relabel(s: State, mapping: dict[QubitLabel, QubitLabel]) -> State:
    register = tuple(mapping.get(q, q) for q in s.register)
    if isinstance(s, PureState):
        return PureState(register, s.amplitudes)
    return DensityMatrix(register, s.matrix)


def dumps(s: State) -> str:
    """Text dump, one ``index<TAB>re<TAB>im`` line per entry.

    Pure states dump their amplitudes; density matrices dump ``matrix``
    flattened row-major (index = row * dim + col).
    """
    data = s.amplitudes if isinstance(s, PureState) else s.matrix.reshape(-1)
    buf = io.StringIO()
    for i, z in enumerate(data):
        buf.write(f"{i}\t{float(z.real)!r}\t{float(z.imag)!r}\n")
    return buf.getvalue()


def dump(s: State, path: str | Path) -> None:
    Path(path).write_text(dumps(s), encoding="utf-8")


def loads(text: str, register: Sequence[QubitLabel], density: bool = False) -> State:
    register = tuple(register)
    dim = 2 ** len(register)
    size = dim * dim if density else dim
    data = np.zeros(size, dtype=complex)
    seen = set()
    for line in text.splitlines():
        if not line.strip():
            continue
        idx, re_, im_ = line.split("\t")
        i = int(idx)
        if not 0 <= i < size or i in seen:
            raise QsimError(f"bad or repeated index {i}")
        seen.add(i)
        data[i] = complex(float(re_), float(im_))
    if density:
        return DensityMatrix(register, data.reshape(dim, dim))
    return PureState(register, data)


def load(path: str | Path, register: Sequence[QubitLabel], density: bool = False) -> State:
    return loads(Path(path).read_text(encoding="utf-8"), register, density)
