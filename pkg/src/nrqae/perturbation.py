"""First-order eigenstructure checks for the noisy walk channel.

With M_G the noiseless conjugated walk operator and N(s) = (1 - s) I + s N
an interpolated noise channel, the step operator S(s) = N(s) M_G perturbs
the two rotating eigenvectors vec(phi_+ phi_-^dag) and its conjugate. The
checks quantify, on a grid of interpolation strengths:

* lemma1_check: the matched eigenvalue minus (ideal + first-order term),
  which should shrink like s^2 (slope 2 on a log-log fit);
* lemma2_check: the least-squares coefficients of rho_tilde on the two
  perturbed eigenvectors against the ideal c and conj(c), and the residual
  off the perturbed plane, all shrinking like s (slope 1);
* theorem1_check: the exact depth series against the two-mode model
  |c1|^2 lambda1^n + |c2|^2 lambda2^n; the error should be O(s) uniformly
  in depth. At s = 0 the model collapses to 2|c|^2 cos(n theta_ch), the
  exact noiseless series.

Eigenpairs are matched to the ideal ones by eigenvector overlap; a row is
flagged when the best overlap drops below 0.5, which signals that the
perturbation is too strong for first-order tracking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import NoiseSpec, noise_superop
from .circuits import CircuitSimulator
from .errors import DegenerateProblemError
from .linalg import eig_dense, frob_norm
from .model import EstimationProblem, conjugation_superop, grover, rho_tilde, vectorize

OVERLAP_FLAG_THRESHOLD = 0.5


@dataclass(frozen=True)
class SubspaceBasis:
    """Rotating-plane data of the noiseless walk operator.

    vectors holds the four vectorized dyads (phi_+ phi_+^dag,
    phi_+ phi_-^dag, phi_- phi_+^dag, phi_- phi_-^dag) as columns; the
    middle two carry channel phases +theta_ch and -theta_ch. c is the
    coefficient <<phi_+ phi_-^dag | rho_tilde>>.
    """

    vectors: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    theta_g: float
    theta_ch: float
    c: complex


def subspace_basis(problem: EstimationProblem) -> SubspaceBasis:
    g = grover(problem)
    psi = problem.psi
    sec = problem.second_state()
    overlap = complex(np.vdot(psi, sec))
    perp = sec - overlap * psi
    nrm = np.linalg.norm(perp)
    if nrm < 1e-9:
        raise DegenerateProblemError("the two states are parallel; no rotation plane")
    u2 = perp / nrm
    basis = np.stack([psi, u2], axis=1)
    g2 = basis.conj().T @ g @ basis
    spec = eig_dense(g2)
    phases = np.angle(spec.eigenvalues)
    plus_idx = int(np.argmax(phases))
    minus_idx = 1 - plus_idx
    theta_g = float(phases[plus_idx])
    if theta_g < 1e-9 or theta_g > np.pi - 1e-9:
        raise DegenerateProblemError(f"degenerate rotation phase {theta_g}")

    def lifted(idx: int) -> np.ndarray:
        v = basis @ spec.eigenvectors[:, idx]
        v = v / np.linalg.norm(v)
        j = int(np.argmax(np.abs(v)))
        return v * np.exp(-1j * np.angle(v[j]))

    phi_plus = lifted(plus_idx)
    phi_minus = lifted(minus_idx)
    dyads = [np.outer(phi_plus, phi_plus.conj()), np.outer(phi_plus, phi_minus.conj()),
             np.outer(phi_minus, phi_plus.conj()), np.outer(phi_minus, phi_minus.conj())]
    vectors = np.stack([vectorize(d) for d in dyads], axis=1)
    c = complex(np.vdot(vectors[:, 1], vectorize(rho_tilde(problem))))
    return SubspaceBasis(vectors=vectors, phi_plus=phi_plus, phi_minus=phi_minus,
                         theta_g=theta_g, theta_ch=2.0 * theta_g, c=c)


def interpolated_noise(noise_matrix: np.ndarray, s: float) -> np.ndarray:
    """N(s) = (1 - s) I + s N on superoperators."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"interpolation strength {s} outside [0, 1]")
    n = np.asarray(noise_matrix, dtype=complex)
    return (1.0 - s) * np.eye(n.shape[0]) + s * n


def _matched_pair(step: np.ndarray, target_vec: np.ndarray):
    spec = eig_dense(step)
    overlaps = np.abs(spec.eigenvectors.conj().T @ target_vec)
    idx = int(np.argmax(overlaps))
    vec = spec.eigenvectors[:, idx]
    phase = np.vdot(target_vec, vec)
    if abs(phase) > 0:
        vec = vec * np.exp(-1j * np.angle(phase))
    return spec.eigenvalues[idx], vec, float(overlaps[idx])


@dataclass
class Lemma1Row:
    s: float
    eps: float
    eigenvalue: complex
    prediction: complex
    residual: float
    overlap: float
    flagged: bool


def lemma1_check(problem: EstimationProblem, noise: NoiseSpec, s_values) -> list:
    """First-order eigenvalue residuals on the +theta_ch branch."""
    sub = subspace_basis(problem)
    mg = conjugation_superop(grover(problem))
    n_full = noise_superop(noise, problem.qubits)
    b2 = sub.vectors[:, 1]
    lam0 = np.exp(1j * sub.theta_ch)
    rows = []
    for s in s_values:
        step = interpolated_noise(n_full, s) @ mg
        delta = step - mg
        first = complex(np.vdot(b2, delta @ b2))
        lam, _, overlap = _matched_pair(step, b2)
        resid = abs(lam - (lam0 + first))
        rows.append(Lemma1Row(s=float(s), eps=frob_norm(delta), eigenvalue=complex(lam),
                              prediction=lam0 + first, residual=float(resid),
                              overlap=overlap, flagged=overlap < OVERLAP_FLAG_THRESHOLD))
    return rows


@dataclass
class Lemma2Row:
    s: float
    eps: float
    c1_error: float
    c2_error: float
    span_residual: float
    overlap: float
    flagged: bool


def lemma2_check(problem: EstimationProblem, noise: NoiseSpec, s_values) -> list:
    """Coefficient drift and off-plane residual of rho_tilde."""
    sub = subspace_basis(problem)
    mg = conjugation_superop(grover(problem))
    n_full = noise_superop(noise, problem.qubits)
    rho_vec = vectorize(rho_tilde(problem))
    rows = []
    for s in s_values:
        step = interpolated_noise(n_full, s) @ mg
        delta = step - mg
        lam1, v1, ov1 = _matched_pair(step, sub.vectors[:, 1])
        lam2, v2, ov2 = _matched_pair(step, sub.vectors[:, 2])
        plane = np.stack([v1, v2], axis=1)
        coef, *_ = np.linalg.lstsq(plane, rho_vec, rcond=None)
        resid = float(np.linalg.norm(rho_vec - plane @ coef))
        overlap = min(ov1, ov2)
        rows.append(Lemma2Row(s=float(s), eps=frob_norm(delta),
                              c1_error=float(abs(coef[0] - sub.c)),
                              c2_error=float(abs(coef[1] - np.conj(sub.c))),
                              span_residual=resid, overlap=overlap,
                              flagged=overlap < OVERLAP_FLAG_THRESHOLD))
    return rows


@dataclass
class Theorem1Row:
    s: float
    n: int
    t_exact: float
    t_model: float
    error: float
    flagged: bool


def theorem1_check(problem: EstimationProblem, noise: NoiseSpec, s_values,
                   depths=(1, 2, 4, 8, 16, 32, 64)) -> list:
    """Exact depth series vs the two-mode model, per (s, n)."""
    sub = subspace_basis(problem)
    mg = conjugation_superop(grover(problem))
    n_full = noise_superop(noise, problem.qubits)
    rho_vec = vectorize(rho_tilde(problem))
    rows = []
    for s in s_values:
        n_s = interpolated_noise(n_full, s)
        step = n_s @ mg
        lam1, v1, ov1 = _matched_pair(step, sub.vectors[:, 1])
        lam2, v2, ov2 = _matched_pair(step, sub.vectors[:, 2])
        plane = np.stack([v1, v2], axis=1)
        coef, *_ = np.linalg.lstsq(plane, rho_vec, rcond=None)
        w1 = abs(coef[0]) ** 2
        w2 = abs(coef[1]) ** 2
        flagged = min(ov1, ov2) < OVERLAP_FLAG_THRESHOLD
        sim = CircuitSimulator(problem, noise_matrix=n_s)
        for n in depths:
            t_exact = sim.exact_t(n)
            model = w1 * lam1 ** n + w2 * lam2 ** n
            rows.append(Theorem1Row(s=float(s), n=int(n), t_exact=t_exact,
                                    t_model=float(model.real),
                                    error=float(abs(t_exact - model)),
                                    flagged=flagged))
    return rows


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x), positive pairs only."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = (xs > 0) & (ys > 0)
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two positive points for a log-log fit")
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])
