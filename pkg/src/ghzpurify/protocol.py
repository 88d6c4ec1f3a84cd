"""Purification rounds on two copies of an N-party GHZ-diagonal mixture.

Each party holds one atom of each copy. A photon in ``(|L>+|R>)/sqrt2``
reflects off the copy-1 cavity and then the copy-2 cavity and is measured
in the diagonal basis:

* ``"f"`` (flip): photon found in ``(|L>-|R>)/sqrt2``; the two atoms have
  even parity.
* ``"k"`` (keep): photon found in ``(|L>+|R>)/sqrt2``; odd parity.

A round is accepted when every party sees the same outcome (bit-flip
mode) or when every photon flipped (phase-flip mode). Copy 2 is then
Hadamard-rotated and read out, and a Pauli correction on copy 1 restores
the GHZ sign.

:func:`simulate_round_exact` enumerates every branch with density
matrices; :func:`recursion_step` is the closed-form weight update it must
agree with; :func:`monte_carlo_round` samples trajectories.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import faraday, ghz, qsim
from .faraday import CavityParams, SingleCavityGate
from .ghz import GhzMixture
from .qsim import Basis, Copy, DensityMatrix, PureState
from .resources import EfficiencyParams, success_probability

KEEP, FLIP = "k", "f"
FAMILY_TOL = 1e-15


class ErrorMode(str, enum.Enum):
    BIT_FLIP = "bit-flip"
    PHASE_FLIP = "phase-flip"


class StagnationError(RuntimeError):
    """Further rounds cannot raise the fidelity."""


@dataclass(frozen=True)
class RoundConfig:
    n_parties: int
    error_mode: ErrorMode = ErrorMode.BIT_FLIP
    cavity: CavityParams | None = None
    seed: int = 0
    leakage_tol: float | None = ghz.LEAKAGE_TOL
    allow_absorption: bool = False

    def __post_init__(self):
        object.__setattr__(self, "error_mode", ErrorMode(self.error_mode))
        if self.n_parties < 2:
            raise ValueError("need at least two parties")
        if 2 * self.n_parties + 1 > qsim.MAX_QUBITS:
            raise qsim.RegisterOverflowError(
                f"{self.n_parties} parties need {2 * self.n_parties + 1} qubits "
                f"(limit {qsim.MAX_QUBITS})")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def gate(self) -> SingleCavityGate:
        return faraday.single_cavity_gate(self.cavity, allow_absorption=self.allow_absorption)

    def accepts(self, pattern: str) -> bool:
        if self.error_mode is ErrorMode.PHASE_FLIP:
            return set(pattern) == {FLIP}
        return len(set(pattern)) == 1


@dataclass(frozen=True, eq=False)
class RoundOutcome:
    accepted: bool
    detector_pattern: str
    atom_readout: str | None
    corrections: tuple[tuple[int, str], ...]
    kept_state: DensityMatrix | None
    branch_probability: float
    kept_fidelity: float | None = None


@dataclass(frozen=True, eq=False)
class RoundResult:
    p_success: float
    kept: GhzMixture
    kept_density: DensityMatrix
    leakage: float
    branches: list[RoundOutcome] = field(repr=False)

    @property
    def fidelity(self) -> float:
        return self.kept.fidelity


def _outcome_vector(o: str) -> np.ndarray:
    return np.array([1, 1 if o == KEEP else -1]) / np.sqrt(2)


def _photon_amplitude(gate: SingleCavityGate, o: str, u: int, v: int) -> complex:
    """``<o| G(u, v) |+>`` for the photon after reflecting off atoms in ``u`` then ``v``."""
    b = _outcome_vector(o)
    return sum(b[pol] * gate.phase(pol, u) * gate.phase(pol, v) / np.sqrt(2) for pol in (0, 1))


def branch_sign(gate: SingleCavityGate, outcome: str, n: int) -> complex:
    """Relative phase between the two GHZ terms after an all-``outcome`` pattern.

    Measured relative to the term whose copy-1 string starts with ``g_L``.
    For the ideal gate it is ``(-1)**n`` for all-flip and ``+1`` for all-keep.
    """
    if outcome == FLIP:
        r = _photon_amplitude(gate, FLIP, 1, 1) / _photon_amplitude(gate, FLIP, 0, 0)
    else:
        r = _photon_amplitude(gate, KEEP, 1, 0) / _photon_amplitude(gate, KEEP, 0, 1)
    return complex((r / abs(r)) ** n)


def _corrections(cfg: RoundConfig, sign: complex, readout: str) -> tuple[tuple[int, str], ...]:
    if cfg.error_mode is ErrorMode.PHASE_FLIP:
        return tuple((k, "Z") for k, bit in enumerate(readout) if bit == "1")
    parity = -1 if readout.count("1") % 2 else 1
    return ((0, "Z"),) if (sign * parity).real < 0 else ()


def _apply_corrections(s, corrections, n):
    c1 = qsim.atoms(n, Copy.FIRST)
    for party, pauli in corrections:
        s = qsim.apply_local(qsim.PAULIS[pauli], [c1[party]], s)
    return s


def _prepare_pair(first: qsim.State, second: qsim.State, cfg: RoundConfig) -> qsim.State:
    s = qsim.tensor(first, second)
    if cfg.error_mode is ErrorMode.PHASE_FLIP:
        s = ghz.hadamard_all(s, s.register)
    return s


def _parity_check(s: qsim.State, party: int, u2: np.ndarray) -> qsim.State:
    ph = faraday.plus_photon(party)
    if isinstance(s, DensityMatrix):
        ph = ph.to_density()
    s = qsim.tensor(s, ph)
    return qsim.apply_local(u2, [qsim.photon(party), qsim.atom(party, Copy.FIRST),
                                 qsim.atom(party, Copy.SECOND)], s)


def _photon_outcomes(s: qsim.State, party: int):
    """Yield ``(outcome, probability, post_state)``; zero-probability outcomes have no state."""
    p = qsim.photon(party)
    probs = qsim.outcome_probabilities(s, [p], Basis.DIAGONAL)
    for bit, o in (("0", KEEP), ("1", FLIP)):
        if probs[int(bit)] <= qsim.PROB_TOL:
            yield o, 0.0, None
            continue
        rec, post = qsim.measure(s, [p], Basis.DIAGONAL, outcome=bit)
        yield o, rec.probability, post


def _readout_stage(s: qsim.State, pattern: str, cfg: RoundConfig):
    """Hadamard and read out copy 2, then correct copy 1.

    Yields ``(readout, probability, corrections, kept_state)``.
    """
    n = cfg.n_parties
    c1, c2 = qsim.atoms(n, Copy.FIRST), qsim.atoms(n, Copy.SECOND)
    if cfg.error_mode is ErrorMode.BIT_FLIP and pattern[0] == KEEP:
        s = qsim.apply_each(qsim.PAULI_X, c2, s)
    s = ghz.hadamard_all(s, c2)
    sign = branch_sign(cfg.gate(), pattern[0], n)
    probs = qsim.outcome_probabilities(s, c2)
    for y, py in enumerate(probs):
        readout = format(y, f"0{n}b")
        if py <= qsim.PROB_TOL:
            continue
        _, post = qsim.measure(s, c2, outcome=readout)
        corr = _corrections(cfg, sign, readout)
        post = _apply_corrections(post, corr, n)
        if cfg.error_mode is ErrorMode.PHASE_FLIP:
            post = ghz.hadamard_all(post, c1)
        yield readout, float(py), corr, post


def simulate_round_exact(m: GhzMixture, cfg: RoundConfig | None = None) -> RoundResult:
    """One purification round on ``m (x) m``, enumerating every branch exactly."""
    cfg = RoundConfig(m.n_parties) if cfg is None else cfg
    if cfg.n_parties != m.n_parties:
        raise ValueError(f"config for {cfg.n_parties} parties, mixture has {m.n_parties}")
    n = m.n_parties
    u2 = faraday.two_cavity_gate(cfg.gate())
    target = ghz.ghz_state(ghz.phi(0, "+", n), n)
    rho = _prepare_pair(ghz.mixture_to_density(m, Copy.FIRST),
                        ghz.mixture_to_density(m, Copy.SECOND), cfg)

    branches: list[RoundOutcome] = []
    kept = []
    frontier = [("", 1.0, rho)]
    while frontier:
        prefix, prob, s = frontier.pop()
        if len(prefix) == n:
            if not cfg.accepts(prefix):
                branches.append(RoundOutcome(False, prefix, None, (), None, prob))
                continue
            for readout, py, corr, post in _readout_stage(s, prefix, cfg):
                kept.append((prob * py, post))
                branches.append(RoundOutcome(True, prefix, readout, corr, post, prob * py,
                                             qsim.fidelity(post, target)))
            continue
        s_k = _parity_check(s, len(prefix), u2)
        for o, p_o, post in _photon_outcomes(s_k, len(prefix)):
            if post is None:
                branches.append(RoundOutcome(False, prefix + o, None, (), None, 0.0))
            else:
                frontier.append((prefix + o, prob * p_o, post))

    branches.sort(key=lambda b: (b.detector_pattern, b.atom_readout or ""))
    p_success = sum(p for p, _ in kept)
    if p_success <= qsim.PROB_TOL:
        raise qsim.ImpossibleBranchError("no accepted branch has non-zero probability")
    kept_density = qsim.mix((p / p_success, s) for p, s in kept)
    proj = ghz.density_to_mixture(kept_density, cfg.leakage_tol)
    return RoundResult(p_success, proj.mixture, kept_density, proj.leakage, branches)


def accepted_weight(first: PureState, second: PureState, cfg: RoundConfig) -> float:
    """Total probability that ``first (x) second`` passes the photon stage."""
    u2 = faraday.two_cavity_gate(cfg.gate())
    total = 0.0
    frontier = [("", 1.0, _prepare_pair(first, second, cfg))]
    while frontier:
        prefix, prob, s = frontier.pop()
        if len(prefix) == cfg.n_parties:
            total += prob if cfg.accepts(prefix) else 0.0
            continue
        for o, p_o, post in _photon_outcomes(_parity_check(s, len(prefix), u2), len(prefix)):
            if post is not None:
                frontier.append((prefix + o, prob * p_o, post))
    return total


def _in_family(m: GhzMixture, mode: ErrorMode) -> np.ndarray:
    w = m.weights
    if mode is ErrorMode.BIT_FLIP:
        outside, family = w[1::2], w[0::2]
    else:
        outside, family = w[2:], w[:2]
    if outside.max(initial=0.0) > FAMILY_TOL:
        raise ValueError(f"mixture has weight outside the {mode.value} family")
    return family


def recursion_step(m: GhzMixture, mode: ErrorMode | str = ErrorMode.BIT_FLIP,
                   ) -> tuple[GhzMixture, float]:
    """Closed-form round: ``w_i -> w_i**2 / sum_j w_j**2``.

    Bit-flip mode takes weights on the ``Phi+_i`` family; phase-flip mode
    takes weights on ``{Phi+_0, Phi-_0}``. The success probability is
    ``sum_j w_j**2`` for bit flips, and ``sum_j w_j**2 / 2**(n-1)`` for
    phase flips, where only the all-flip pattern is kept and the
    Hadamard-rotated copies match on one even-weight string in ``2**(n-1)``.
    """
    mode = ErrorMode(mode)
    family = _in_family(m, mode)
    sq = family ** 2
    total = float(sq.sum())
    new = np.zeros_like(m.weights)
    if mode is ErrorMode.BIT_FLIP:
        new[0::2] = sq / total
        return GhzMixture(m.n_parties, new), total
    new[:2] = sq / total
    return GhzMixture(m.n_parties, new), total / 2 ** (m.n_parties - 1)


@dataclass(frozen=True)
class Threshold:
    purifiable: bool
    bound: float | None
    reason: str | None = None

    def __bool__(self):
        return self.purifiable


def threshold_bound(f1: float, f2: float) -> float | None:
    """Smallest ``F0`` above which a round raises ``F0`` (``None`` if never)."""
    disc = 1 + 4 * (f1 + f2) - 12 * (f1 ** 2 + f2 ** 2) - 8 * f1 * f2
    if disc < 0:
        return None
    return (3 - 2 * f1 - 2 * f2 - math.sqrt(disc)) / 4


def threshold_check(f0: float, f1: float, f2: float) -> Threshold:
    """Whether one bit-flip round raises ``F0`` for weights ``(F0, F1, F2, 1-F0-F1-F2)``."""
    f3 = 1 - f0 - f1 - f2
    if min(f0, f1, f2) < 0 or max(f0, f1, f2) > 1 or f3 < -1e-12:
        raise ValueError(f"weights ({f0}, {f1}, {f2}, {f3}) are not a distribution")
    bound = threshold_bound(f1, f2)
    if bound is None:
        return Threshold(False, None, "negative discriminant: no F0 improves")
    return Threshold(bool(f0 > bound), float(bound))


@dataclass(frozen=True)
class RecursionState:
    weights: GhzMixture
    rounds_done: int
    p_success: float
    pairs_consumed_expected: float
    cumulative_success_probability: float

    @property
    def fidelity(self) -> float:
        return self.weights.fidelity


def iterate(m: GhzMixture, rounds: int | None = None, target: float | None = None,
            eff: EfficiencyParams | None = None,
            mode: ErrorMode | str = ErrorMode.BIT_FLIP, *,
            per_photon_losses: bool = False, max_rounds: int = 1000) -> list[RecursionState]:
    """Repeat :func:`recursion_step`, one entry per completed round.

    Every attempt consumes two pairs, so reaching round ``r`` takes
    ``prod 2/p`` initial pairs on average, ``p`` being the per-round success
    probability (times the physical efficiencies when ``eff`` is given).
    Stops after ``rounds`` rounds or once the fidelity reaches ``target``.
    """
    if (rounds is None) == (target is None):
        raise ValueError("give exactly one of rounds= or target=")
    if rounds is not None and rounds < 0:
        raise ValueError("rounds must be non-negative")
    if target is not None:
        if target >= 1:
            raise StagnationError("fidelity 1 is only reached asymptotically")
        if target <= m.fidelity:
            raise ValueError(f"target {target} is not above the current fidelity {m.fidelity}")
    limit = rounds if rounds is not None else max_rounds

    states: list[RecursionState] = []
    pairs, cumulative = 1.0, 1.0
    while len(states) < limit:
        new, p = recursion_step(m, mode)
        if eff is not None:
            p = success_probability(m.n_parties, eff, p_p=p, per_photon_losses=per_photon_losses)
        if new.fidelity <= m.fidelity and m.fidelity < 1:
            raise StagnationError(
                f"fidelity {m.fidelity:.17g} does not improve (fixed point or below threshold)")
        if p <= 0:
            raise StagnationError("success probability is zero")
        pairs *= 2 / p
        cumulative *= p
        m = new
        states.append(RecursionState(m, len(states) + 1, p, pairs, cumulative))
        if target is not None and m.fidelity >= target:
            return states
    if target is not None:
        raise StagnationError(f"target {target} not reached in {max_rounds} rounds")
    return states


@dataclass(frozen=True)
class MonteCarloResult:
    trials: int
    accepted: int
    fidelity_sum: float
    fidelity_sq_sum: float

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.trials

    @property
    def acceptance_stderr(self) -> float:
        p = self.acceptance_rate
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def kept_fidelity(self) -> float:
        return self.fidelity_sum / self.accepted if self.accepted else float("nan")

    @property
    def kept_fidelity_stderr(self) -> float:
        k = self.accepted
        if k < 2:
            return float("nan")
        mean = self.fidelity_sum / k
        var = max(self.fidelity_sq_sum / k - mean ** 2, 0.0) * k / (k - 1)
        return math.sqrt(var / k)

    def merge(self, other: MonteCarloResult) -> MonteCarloResult:
        return MonteCarloResult(self.trials + other.trials, self.accepted + other.accepted,
                                self.fidelity_sum + other.fidelity_sum,
                                self.fidelity_sq_sum + other.fidelity_sq_sum)


class _Trajectories:
    """Pure-state trajectories of one round, memoized per (components, outcomes so far).

    Sampling walks the same conditional distributions as a fresh simulation
    would; caching only avoids recomputing identical states.
    """

    def __init__(self, m: GhzMixture, cfg: RoundConfig):
        self.cfg = cfg
        self.n = m.n_parties
        self.u2 = faraday.two_cavity_gate(cfg.gate())
        self.components = np.flatnonzero(m.weights > 0)
        self.cdf = np.cumsum(m.weights[self.components])
        self.target = ghz.ghz_state(ghz.phi(0, "+", self.n), self.n)
        self._nodes: dict = {}
        self._states: dict = {}
        self._readouts: dict = {}

    def _component(self, rng: np.random.Generator) -> int:
        k = int(np.searchsorted(self.cdf, rng.random() * self.cdf[-1], side="right"))
        return int(self.components[min(k, len(self.components) - 1)])

    def _root(self, i: int, j: int) -> PureState:
        n = self.n
        a = ghz.ghz_state(ghz.GhzIndex.from_position(i, n), n, Copy.FIRST)
        b = ghz.ghz_state(ghz.GhzIndex.from_position(j, n), n, Copy.SECOND)
        return _prepare_pair(a, b, self.cfg)

    def _children(self, key):
        """``(p_keep, {outcome: state})`` for the node ``key = (i, j, prefix)``."""
        if key not in self._nodes:
            i, j, prefix = key
            s = self._root(i, j) if not prefix else self._states[key]
            s_k = _parity_check(s, len(prefix), self.u2)
            out, p_keep = {}, 0.0
            for o, p_o, post in _photon_outcomes(s_k, len(prefix)):
                if o == KEEP:
                    p_keep = p_o
                if post is not None:
                    out[o] = post
                    self._states[(i, j, prefix + o)] = post
            self._nodes[key] = (p_keep, out)
        return self._nodes[key]

    def _readout_table(self, i, j, pattern):
        key = (i, j, pattern)
        if key not in self._readouts:
            rows = list(_readout_stage(self._states[key], pattern, self.cfg))
            cdf = np.cumsum([py for _, py, _, _ in rows])
            fids = [qsim.fidelity(post, self.target) for _, _, _, post in rows]
            self._readouts[key] = (cdf, fids)
        return self._readouts[key]

    def run(self, trials: int, rng: np.random.Generator) -> MonteCarloResult:
        accepted, fsum, fsq = 0, 0.0, 0.0
        for _ in range(trials):
            i, j = self._component(rng), self._component(rng)
            prefix = ""
            for _k in range(self.n):
                p_keep, _ = self._children((i, j, prefix))
                prefix += KEEP if rng.random() < p_keep else FLIP
            if not self.cfg.accepts(prefix):
                continue
            cdf, fids = self._readout_table(i, j, prefix)
            y = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), len(fids) - 1)
            accepted += 1
            fsum += fids[y]
            fsq += fids[y] ** 2
        return MonteCarloResult(trials, accepted, fsum, fsq)


MC_CHUNK = 10_000


def trial_stream(seed: int, chunk: int) -> np.random.Generator:
    """Generator for trials ``chunk*MC_CHUNK`` .. ``(chunk+1)*MC_CHUNK - 1``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chunk,)))


def monte_carlo_round(m: GhzMixture, cfg: RoundConfig | None = None,
                      trials: int = 100_000) -> MonteCarloResult:
    """Sample ``trials`` rounds: draw a GHZ component per copy, then every measurement.

    Trials are split into chunks of :data:`MC_CHUNK`; chunk ``c`` draws from
    ``SeedSequence(cfg.seed, spawn_key=(c,))``, so results do not depend on
    how chunks are scheduled.
    """
    cfg = RoundConfig(m.n_parties) if cfg is None else cfg
    if trials < 1:
        raise ValueError("need at least one trial")
    runner = _Trajectories(m, cfg)
    total = MonteCarloResult(0, 0, 0.0, 0.0)
    for chunk, start in enumerate(range(0, trials, MC_CHUNK)):
        size = min(MC_CHUNK, trials - start)
        total = total.merge(runner.run(size, trial_stream(cfg.seed, chunk)))
    return total

