"""Exact and sampled depth series for the noisy walk channel.

One layer of the simulated circuit is the superoperator S = N . M_G, with
M_G the conjugated walk operator and N the noise channel; depth n applies
the same layer n times. The depth statistic is

    t_n = <<rho_tilde | S^n | rho_tilde>>

which a hardware run assembles from four prepare/measure probabilities with
signs (+, -, -, +). Noiseless, t_n = 2 |c|^2 cos(n theta_ch).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import NoiseSpec, noise_superop
from .errors import NonPhysicalChannelError
from .model import EstimationProblem, conjugation_superop, grover, rho_tilde, vectorize
from .rng import substream

_CLAMP_TOL = 1e-6
_IMAG_TOL = 1e-8

EXACT_DIVISION_GUARD = 1e-9


def problem_tag(problem: EstimationProblem) -> str:
    h = hashlib.sha256()
    h.update(problem.mode.encode())
    h.update(np.ascontiguousarray(problem.psi).tobytes())
    h.update(np.ascontiguousarray(problem.second_state()).tobytes())
    return h.hexdigest()[:12]


def _clamped_real(value: complex, context: str) -> float:
    if abs(value.imag) > _IMAG_TOL:
        raise NonPhysicalChannelError(f"{context}: non-real probability {value}")
    p = value.real
    if p < -_CLAMP_TOL or p > 1.0 + _CLAMP_TOL:
        raise NonPhysicalChannelError(f"{context}: probability {p} outside [0, 1]")
    return float(min(max(p, 0.0), 1.0))


class CircuitSimulator:
    """Propagates vectorized preparations through layers of N . M_G.

    Binary powers of the step superoperator are cached, so a fresh depth
    costs O(log n) matrix products and repeated depths are free.
    noise_matrix, when given, overrides the built-in channel kinds with an
    explicit superoperator (used by the perturbation checks).
    """

    def __init__(self, problem: EstimationProblem, noise: NoiseSpec = NoiseSpec(),
                 noise_matrix: Optional[np.ndarray] = None):
        self.problem = problem
        self.noise = noise
        n_op = noise_matrix if noise_matrix is not None else noise_superop(noise, problem.qubits)
        self.step = np.asarray(n_op, dtype=complex) @ conjugation_superop(grover(problem))
        self._squares = {1: self.step}
        self._powers = {0: np.eye(self.step.shape[0], dtype=complex), 1: self.step}
        self._t_cache: dict[int, float] = {}
        self.rho_tilde_vec = vectorize(rho_tilde(problem))

    def power(self, n: int) -> np.ndarray:
        if n < 0:
            raise ValueError(f"negative depth {n}")
        if n in self._powers:
            return self._powers[n]
        result = None
        bit = 1
        remaining = n
        while remaining:
            if bit not in self._squares:
                half = self._squares[bit // 2]
                self._squares[bit] = half @ half
            if remaining & 1:
                block = self._squares[bit]
                result = block if result is None else block @ result
            remaining >>= 1
            bit <<= 1
        self._powers[n] = result
        return result

    def prob(self, prep, meas, n: int) -> float:
        """Probability of projecting onto meas after n layers from prep."""
        prep_vec = vectorize(np.outer(prep, np.conj(prep)))
        meas_vec = vectorize(np.outer(meas, np.conj(meas)))
        raw = complex(np.vdot(meas_vec, self.power(n) @ prep_vec))
        return _clamped_real(raw, f"depth {n}")

    def _signed_pairs(self):
        psi = self.problem.psi
        sec = self.problem.second_state()
        return ((sec, sec, 1.0), (psi, sec, -1.0), (sec, psi, -1.0), (psi, psi, 1.0))

    def exact_t(self, n: int) -> float:
        """<<rho_tilde | S^n | rho_tilde>>, cached per depth."""
        if n not in self._t_cache:
            raw = complex(np.vdot(self.rho_tilde_vec, self.power(n) @ self.rho_tilde_vec))
            if abs(raw.imag) > _IMAG_TOL:
                raise NonPhysicalChannelError(f"depth {n}: non-real t value {raw}")
            self._t_cache[n] = float(raw.real)
        return self._t_cache[n]

    def sampled_t(self, n: int, shots: int, seed: int, trial: int = 0, boost: int = 1) -> float:
        """Binomial estimate of t_n from four independently sampled circuits.

        Each of the four probabilities is drawn from its own substream keyed
        by (trial, depth, term, boost), so any value is reproducible in
        isolation and a retry with boosted shots is a fresh measurement.
        """
        if shots < 1:
            raise ValueError(f"shots must be >= 1, got {shots}")
        total = 0.0
        eff = shots * boost
        for term, (prep, meas, sign) in enumerate(self._signed_pairs()):
            p = self.prob(prep, meas, n)
            gen = substream(seed, trial, n, term, boost)
            total += sign * gen.binomial(eff, p) / eff
        return total


def circuit_prob(prep, meas, n: int, problem: EstimationProblem,
                 noise: NoiseSpec = NoiseSpec()) -> float:
    return CircuitSimulator(problem, noise).prob(prep, meas, n)


def exact_t(n: int, problem: EstimationProblem, noise: NoiseSpec = NoiseSpec()) -> float:
    return CircuitSimulator(problem, noise).exact_t(n)


def sampled_t(n: int, shots: int, problem: EstimationProblem, noise: NoiseSpec = NoiseSpec(),
              seed: int = 0, trial: int = 0) -> float:
    return CircuitSimulator(problem, noise).sampled_t(n, shots, seed, trial)


def t_halfwidth(shots: int, delta: float = 0.5) -> float:
    """Hoeffding half-width of a sampled t value.

    t is a signed sum of four Binomial(shots, p)/shots terms, so a union
    bound gives |t_hat - t| <= 4 sqrt(ln(2/delta) / (2 shots)) with
    probability at least 1 - 4 delta.
    """
    return 4.0 * np.sqrt(np.log(2.0 / delta) / (2.0 * shots))


@dataclass
class TSeries:
    """Record of measured t values keyed by depth."""

    problem: str = ""
    noise: str = ""
    seed: Optional[int] = None
    shots: Optional[int] = None
    entries: dict = field(default_factory=dict)

    def record(self, n: int, value: float):
        self.entries.setdefault(n, float(value))

    def depths(self):
        return sorted(self.entries)

    def value(self, n: int) -> float:
        return self.entries[n]


class ExactTProvider:
    """Serves exact expectations; division guard at float-noise scale."""

    def __init__(self, problem: EstimationProblem, noise: NoiseSpec = NoiseSpec(),
                 noise_matrix: Optional[np.ndarray] = None):
        self.sim = CircuitSimulator(problem, noise, noise_matrix=noise_matrix)
        self.eps_div = EXACT_DIVISION_GUARD
        self.series = TSeries(problem=problem_tag(problem), noise=noise.tag())

    def triplet(self, n: int, boost: int = 1):
        values = tuple(self.sim.exact_t(m) for m in (n, 2 * n, 3 * n))
        for m, v in zip((n, 2 * n, 3 * n), values):
            self.series.record(m, v)
        return values

    def calls_for(self, n: int, boost: int = 1) -> int:
        return 0


class SampledTProvider:
    """Serves binomial-sampled t values with per-depth caching.

    The guard eps_div is three Hoeffding half-widths of t at the configured
    shot count (delta = 0.5 working point), so a ratio is formed only when
    the denominator clears its own statistical noise by a wide margin.
    """

    def __init__(self, problem: EstimationProblem, noise: NoiseSpec, shots: int,
                 seed: int, trial: int = 0):
        self.sim = CircuitSimulator(problem, noise)
        self.shots = shots
        self.seed = seed
        self.trial = trial
        self.eps_div = 3.0 * t_halfwidth(shots)
        self.series = TSeries(problem=problem_tag(problem), noise=noise.tag(),
                              seed=seed, shots=shots)
        self._cache: dict[tuple, float] = {}

    def triplet(self, n: int, boost: int = 1):
        out = []
        for m in (n, 2 * n, 3 * n):
            key = (m, boost)
            if key not in self._cache:
                self._cache[key] = self.sim.sampled_t(m, self.shots, self.seed,
                                                      self.trial, boost=boost)
            out.append(self._cache[key])
            if boost == 1:
                self.series.record(m, self._cache[key])
        return tuple(out)

    def calls_for(self, n: int, boost: int = 1) -> int:
        # Four circuits at each of the depths n, 2n, 3n.
        return self.shots * boost * 4 * (n + 2 * n + 3 * n)


class PerturbedTProvider:
    """Exact values plus a signed offset eps per depth (robustness sweeps).

    The sign is drawn once per (trial, depth) from a seeded substream; the
    guard scales with the perturbation the way the sampled guard scales
    with shot noise.
    """

    def __init__(self, problem: EstimationProblem, noise: NoiseSpec, eps: float,
                 seed: int, trial: int = 0):
        if eps < 0:
            raise ValueError(f"perturbation must be >= 0, got {eps}")
        self.sim = CircuitSimulator(problem, noise)
        self.eps = eps
        self.seed = seed
        self.trial = trial
        self.eps_div = max(3.0 * eps, EXACT_DIVISION_GUARD)
        self.series = TSeries(problem=problem_tag(problem), noise=noise.tag(), seed=seed)
        self._cache: dict[int, float] = {}

    def _value(self, n: int) -> float:
        if n not in self._cache:
            sign = 1.0 if substream(self.seed, self.trial, n).integers(0, 2) else -1.0
            self._cache[n] = self.sim.exact_t(n) + sign * self.eps
        return self._cache[n]

    def triplet(self, n: int, boost: int = 1):
        values = tuple(self._value(m) for m in (n, 2 * n, 3 * n))
        for m, v in zip((n, 2 * n, 3 * n), values):
            self.series.record(m, v)
        return values

    def calls_for(self, n: int, boost: int = 1) -> int:
        return 0


def t_triplet(n: int, problem: EstimationProblem, noise: NoiseSpec = NoiseSpec(),
              shots: Optional[int] = None, seed: int = 0, trial: int = 0):
    """t at depths (n, 2n, 3n), exact when shots is None."""
    if shots is None:
        return ExactTProvider(problem, noise).triplet(n)
    return SampledTProvider(problem, noise, shots, seed, trial).triplet(n)
