"""GHZ basis states and GHZ-diagonal mixtures.

An ``n``-party GHZ basis state is ``(|x> + s|~x>)/sqrt2`` with ``x`` a bit
string whose first bit is 0 and ``~x`` its complement. ``x[1:]`` is the
*flip pattern* (which of parties 2..n disagree with party 1) and ``s`` the
sign. For three parties the named states map as::

    Phi_0  <->  flips "00"      Phi_1  <->  flips "01" (party 3 flipped)
    Phi_2  <->  flips "10"      Phi_3  <->  flips "11" (party 1 flipped)

so ``Phi_i`` has flip pattern ``i`` in binary. Note ``Phi^-_3`` written as
``(|g_R g_L g_L> - |g_L g_R g_R>)/sqrt2`` equals ``-ghz_state(phi(3, "-"))``;
the global sign is irrelevant for mixtures.

Weight vectors are indexed by ``2 * int(flips, 2) + (sign == "-")``.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import qsim
from .qsim import Copy, DensityMatrix, PureState, QubitLabel

WEIGHT_TOL = 1e-12
LEAKAGE_TOL = 1e-9


class LeakageError(RuntimeError):
    """The state has too much weight off the GHZ diagonal."""


class Sign(str, enum.Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True, order=True)
class GhzIndex:
    flips: str
    sign: Sign = Sign.PLUS

    def __post_init__(self):
        if set(self.flips) - {"0", "1"}:
            raise ValueError(f"flip pattern must be a bit string, got {self.flips!r}")
        object.__setattr__(self, "sign", Sign(self.sign))

    @property
    def n_parties(self) -> int:
        return len(self.flips) + 1

    @property
    def position(self) -> int:
        return 2 * (int(self.flips, 2) if self.flips else 0) + (self.sign is Sign.MINUS)

    @classmethod
    def from_position(cls, pos: int, n: int) -> GhzIndex:
        return cls(format(pos >> 1, f"0{n - 1}b"), Sign.MINUS if pos & 1 else Sign.PLUS)

    def __str__(self):
        return f"{self.flips}{self.sign.value}"


def phi(i: int, sign: str = "+", n: int = 3) -> GhzIndex:
    """``Phi^sign_i``: the GHZ index whose flip pattern is ``i`` in binary."""
    if not 0 <= i < 2 ** (n - 1):
        raise ValueError(f"no Phi_{i} for {n} parties")
    return GhzIndex(format(i, f"0{n - 1}b"), Sign(sign))


def flip_mask(party: int, n: int) -> int:
    """Change to the flip pattern caused by a bit flip on ``party`` (0-based)."""
    if not 0 <= party < n:
        raise ValueError(f"party {party} out of range for {n} parties")
    if party == 0:
        return 2 ** (n - 1) - 1
    return 1 << (n - 1 - party)


def ghz_state(idx: GhzIndex, n: int | None = None, copy: Copy = Copy.FIRST) -> PureState:
    n = idx.n_parties if n is None else n
    if n < 2 or idx.n_parties != n:
        raise ValueError(f"index {idx} does not describe {n} parties")
    x = int("0" + idx.flips, 2)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[x] = 1 / np.sqrt(2)
    amps[(2 ** n - 1) ^ x] = (1 if idx.sign is Sign.PLUS else -1) / np.sqrt(2)
    return PureState(qsim.atoms(n, copy), amps)


@functools.lru_cache(maxsize=None)
def _basis_matrix(n: int) -> np.ndarray:
    """Columns are the GHZ basis states in weight-vector order."""
    cols = [ghz_state(GhzIndex.from_position(pos, n), n).amplitudes
            for pos in range(2 ** n)]
    m = np.column_stack(cols)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class GhzMixture:
    n_parties: int
    weights: np.ndarray

    def __post_init__(self):
        if self.n_parties < 2:
            raise ValueError("a GHZ mixture needs at least two parties")
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size != 2 ** self.n_parties:
            raise ValueError(f"{w.size} weights for {self.n_parties} parties")
        if w.min() < -WEIGHT_TOL:
            raise ValueError("negative weight in mixture")
        if abs(w.sum() - 1) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_dict(cls, weights: Mapping[GhzIndex, float], n: int | None = None) -> GhzMixture:
        if n is None:
            n = next(iter(weights)).n_parties
        w = np.zeros(2 ** n)
        for idx, p in weights.items():
            if idx.n_parties != n:
                raise ValueError(f"index {idx} does not describe {n} parties")
            w[idx.position] += p
        return cls(n, w)

    @classmethod
    def pure(cls, idx: GhzIndex) -> GhzMixture:
        return cls.from_dict({idx: 1.0})

    @classmethod
    def binary(cls, fidelity: float, error: GhzIndex) -> GhzMixture:
        """``F |Phi+_0><Phi+_0| + (1-F) |error><error|``."""
        n = error.n_parties
        return cls.from_dict({phi(0, "+", n): fidelity, error: 1 - fidelity}, n)

    def weight(self, idx: GhzIndex) -> float:
        return float(self.weights[idx.position])

    @property
    def fidelity(self) -> float:
        """Weight on ``Phi+_0``."""
        return float(self.weights[0])

    def as_dict(self, drop_zero: bool = True) -> dict[GhzIndex, float]:
        return {GhzIndex.from_position(pos, self.n_parties): float(w)
                for pos, w in enumerate(self.weights) if w > 0 or not drop_zero}

    def __repr__(self):
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in self.as_dict().items() if v > WEIGHT_TOL)
        return f"GhzMixture(n={self.n_parties}, {{{terms}}})"


def mixture_to_density(m: GhzMixture, copy: Copy = Copy.FIRST) -> DensityMatrix:
    b = _basis_matrix(m.n_parties)
    return DensityMatrix(qsim.atoms(m.n_parties, copy), (b * m.weights) @ b.conj().T)


@dataclass(frozen=True)
class Projection:
    """GHZ-diagonal part of a density matrix.

    ``leakage`` is the Frobenius norm of the off-diagonal part of the matrix
    written in the GHZ basis; ``mixture`` is the renormalized diagonal.
    """
    mixture: GhzMixture
    leakage: float


def density_to_mixture(d: qsim.State, leakage_tol: float | None = None) -> Projection:
    n = d.n_qubits
    if isinstance(d, PureState):
        d = d.to_density()
    b = _basis_matrix(n)
    in_basis = b.conj().T @ d.matrix @ b
    w = np.real(np.diagonal(in_basis)).copy()
    leakage = float(np.linalg.norm(in_basis - np.diag(np.diagonal(in_basis))))
    if leakage_tol is not None and leakage > leakage_tol:
        raise LeakageError(f"off-diagonal weight {leakage:.3g} exceeds {leakage_tol:.3g}")
    w = np.clip(w, 0.0, None)
    return Projection(GhzMixture(n, w / w.sum()), leakage)


def hadamard_all(s: qsim.State, targets: Sequence[QubitLabel]) -> qsim.State:
    """Hadamard every target qubit; maps ``Phi+-_0`` to the even/odd-weight superpositions."""
    return qsim.apply_each(qsim.HADAMARD, targets, s)


def _permute(base: GhzMixture, new_pos, p: float) -> GhzMixture:
    if not 0 <= p <= 1:
        raise ValueError(f"error probability {p} outside [0, 1]")
    moved = np.zeros_like(base.weights)
    for pos, w in enumerate(base.weights):
        moved[new_pos(pos)] += w
    return GhzMixture(base.n_parties, (1 - p) * base.weights + p * moved)


def bit_flip(base: GhzMixture, party: int, p: float) -> GhzMixture:
    """X error on ``party`` (0-based) with probability ``p``."""
    mask = flip_mask(party, base.n_parties)
    return _permute(base, lambda pos: pos ^ (mask << 1), p)


def phase_flip(base: GhzMixture, p: float) -> GhzMixture:
    """Z error on any one party with probability ``p``."""
    return _permute(base, lambda pos: pos ^ 1, p)


def _family(weights: Sequence[float] | Mapping[int, float], n: int, sign: str) -> GhzMixture:
    items = weights.items() if isinstance(weights, Mapping) else enumerate(weights)
    return GhzMixture.from_dict({phi(i, sign, n): w for i, w in items}, n)


def general_bit_flip(weights: Sequence[float] | Mapping[int, float], n: int = 3) -> GhzMixture:
    """``sum_i F_i |Phi+_i><Phi+_i|``; ``weights[i]`` is the weight of flip pattern ``i``."""
    return _family(weights, n, "+")


def all_phase_flip(weights: Sequence[float] | Mapping[int, float], n: int = 3) -> GhzMixture:
    """``sum_i F_i |Phi-_i><Phi-_i|``."""
    return _family(weights, n, "-")


class Noise(str, enum.Enum):
    BIT_FLIP = "bit-flip"
    PHASE_FLIP = "phase-flip"
    GENERAL_BIT_FLIP = "general-bit-flip"
    ALL_PHASE_FLIP = "all-phase-flip"


def noise_channel(kind: Noise | str, base: GhzMixture | None = None, p: float | None = None,
                  *, party: int | None = None, weights=None, n: int = 3) -> GhzMixture:
    kind = Noise(kind)
    if kind is Noise.BIT_FLIP:
        return bit_flip(base, base.n_parties - 1 if party is None else party, p)
    if kind is Noise.PHASE_FLIP:
        return phase_flip(base, p)
    if base is not None:
        n = base.n_parties
    if kind is Noise.GENERAL_BIT_FLIP:
        return general_bit_flip(weights, n)
    return all_phase_flip(weights, n)


def dumps_mixture(m: GhzMixture, drop_zero: bool = True) -> str:
    return "".join(f"{idx.flips}\t{idx.sign.value}\t{w!r}\n"
                   for idx, w in m.as_dict(drop_zero).items())


def loads_mixture(text: str, tol: float = WEIGHT_TOL) -> GhzMixture:
    """Parse ``flips<TAB>sign<TAB>weight`` lines; ``#`` starts a comment."""
    weights: dict[GhzIndex, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(parts)}")
        idx = GhzIndex(parts[0], Sign(parts[1]))
        w = float(parts[2])
        if idx in weights:
            raise ValueError(f"line {lineno}: {idx} listed twice")
        weights[idx] = w
    if not weights:
        raise ValueError("no mixture entries")
    sizes = {k.n_parties for k in weights}
    if len(sizes) != 1:
        raise ValueError("flip patterns of different lengths")
    total = sum(weights.values())
    if any(w < 0 for w in weights.values()) or abs(total - 1) > tol:
        raise ValueError(f"weights must be non-negative and sum to 1 (got {total!r})")
    n = sizes.pop()
    w = np.zeros(2 ** n)
    for k, v in weights.items():
        w[k.position] = v
    return GhzMixture(n, w / w.sum())


def save_mixture(m: GhzMixture, path: str | Path) -> None:
    Path(path).write_text(dumps_mixture(m), encoding="utf-8")


def load_mixture(path: str | Path, tol: float = WEIGHT_TOL) -> GhzMixture:
    return loads_mixture(Path(path).read_text(encoding="utf-8"), tol)
