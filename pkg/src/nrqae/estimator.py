"""Depth-ratio phase estimation.

sampled or exact values of t at depths (n, 2n, 3n) feed the scale-free
ratio y = t_n t_3n / t_2n^2. Any per-layer envelope p^n multiplying the
series cancels in y, which is what buys noise resilience. y determines
x = cos(2 n theta) through the quadratic 2(y - 1) x^2 - x + 1 = 0; the 2n
angles consistent with an x value are enumerated and the one nearest the
running estimate is kept. Iteration i uses n = 2^i, so the candidate
spacing halves each round while earlier rounds pin the branch.

The working angle is the series phase in [0, pi], the frequency of
cos(m theta) in the depth series; it is twice the folded state-space
phase. Since cos(2 n theta) is symmetric about pi/2, pi - theta shows up
as a candidate at every depth; the seed fit breaks that tie through the
sign of the fitted scale, and later rounds inherit the branch through
the nearest-candidate rule. What remains is the genuinely
indistinguishable mirror reading reported by theta_to_value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import NoiseSpec
from .circuits import ExactTProvider, PerturbedTProvider, SampledTProvider, TSeries
from .errors import DepthGuardError, EstimationFailure
from .model import EstimationProblem, theta_to_value

_MERGE_TOL = 1e-12
_ROOT_CLIP_TOL = 1e-9
SEED_GRID_SIZE = 2048


def ratio_y(t1: float, t2: float, t3: float, eps_div: float) -> float:
    """y = t1 t3 / t2^2, guarded against an uninformative denominator."""
    if abs(t2) <= eps_div:
        raise DepthGuardError(f"|t_2n| = {abs(t2):.3g} below division guard {eps_div:.3g}")
    return (t1 * t3) / (t2 * t2)


def roots_cos(y: float) -> list:
    """Roots x of 2(y - 1) x^2 - x + 1 = 0 kept inside [-1, 1].

    The quadratic is solved in the numerically stable form (larger-magnitude
    root from the quadratic term, companion root from c / q), duplicates are
    merged, and roots outside [-1, 1] (beyond float slack) are discarded.
    y = 1 degenerates to the linear equation with the single root x = 1.
    """
    if y == 1.0:
        return [1.0]
    a = 2.0 * (y - 1.0)
    disc = 1.0 - 8.0 * (y - 1.0)
    if disc < 0.0:
        return []
    sq = np.sqrt(disc)
    q = (1.0 + sq) / 2.0
    raw = [q / a, 1.0 / q]
    roots = []
    for x in raw:
        if abs(x) > 1.0 + _ROOT_CLIP_TOL:
            continue
        x = float(np.clip(x, -1.0, 1.0))
        if not any(abs(x - r) <= _MERGE_TOL for r in roots):
            roots.append(x)
    return sorted(roots)


def candidate_angles(x: float, n: int) -> list:
    """All theta in [0, pi] with cos(2 n theta) = x, duplicates merged."""
    if n < 1:
        raise ValueError(f"depth must be >= 1, got {n}")
    if abs(x) > 1.0 + _ROOT_CLIP_TOL:
        raise ValueError(f"|x| = {abs(x)} exceeds 1")
    alpha = float(np.arccos(np.clip(x, -1.0, 1.0)))
    raw = []
    for k in range(n):
        raw.append((alpha + 2.0 * np.pi * k) / (2.0 * n))
        raw.append((2.0 * np.pi - alpha + 2.0 * np.pi * k) / (2.0 * n))
    return merge_angles(raw)


def merge_angles(values) -> list:
    out = []
    for v in sorted(float(v) for v in values):
        if not out or v - out[-1] > _MERGE_TOL:
            out.append(v)
    return out


def select_candidate(candidates, theta_prev: float) -> float:
    """Candidate nearest theta_prev; ties (within 1e-12) take the smaller."""
    if len(candidates) == 0:
        raise ValueError("empty candidate list")
    best = None
    best_d = None
    for theta in sorted(candidates):
        d = abs(theta - theta_prev)
        if best is None or d < best_d - _MERGE_TOL:
            best, best_d = theta, d
    return float(best)


def seed_theta(triplet) -> float:
    """Coarse grid fit of the first triplet to c * p^m * cos(m theta), m = 1, 2, 3.

    Minimizes the squared residual over a uniform grid of SEED_GRID_SIZE
    angles on [0, pi] crossed with a coarse envelope grid p in (0, 1], the
    scale c >= 0 fitted in closed form per grid point. Both constraints
    carry information: a decaying series mimics a different pure cosine
    only through a growing envelope (p > 1), and the pi - theta alias only
    through a negative scale, neither of which the model class contains.
    The returned angle is on the series-phase scale, directly comparable
    with candidate_angles output. An all-zero triplet returns 0.0.
    """
    t = np.asarray(triplet, dtype=float)
    grid = np.linspace(0.0, np.pi, SEED_GRID_SIZE)
    decays = np.linspace(0.2, 1.0, 17)
    m = np.array([1.0, 2.0, 3.0])
    # basis[m, theta, p] = p^m cos(m theta)
    basis = np.cos(np.outer(m, grid))[:, :, None] * (decays[None, None, :] ** m[:, None, None])
    denom = np.sum(basis * basis, axis=0)
    c = np.einsum("m,mtp->tp", t, basis) / np.where(denom > 0, denom, 1.0)
    c = np.maximum(c, 0.0)
    resid = np.sum((t[:, None, None] - c[None, :, :] * basis) ** 2, axis=0)
    flat = int(np.argmin(resid))
    return float(grid[flat // decays.size])


def fold_theta(theta: float) -> float:
    """Fold into [0, pi/2]; theta and pi - theta carry the same series."""
    return float(min(theta, np.pi - theta))


def _fold_series(angle: float) -> float:
    """Map any angle to the [0, pi] representative with the same cosine series."""
    a = float(np.mod(angle, 2.0 * np.pi))
    return min(a, 2.0 * np.pi - a)


def _select_seeded(candidates, beta: float, n: int) -> float:
    """First-success selection against a seed fitted to a depth-n triplet.

    seed_theta reads its triplet at unit depth spacing, so on the depths
    (n, 2n, 3n) it estimates the folded angle n * theta rather than theta
    itself; candidates are compared on that measured scale. At n = 1 this
    is plain nearest-candidate selection.
    """
    best = None
    best_d = None
    for theta in sorted(candidates):
        d = abs(_fold_series(n * theta) - beta)
        if best is None or d < best_d - _MERGE_TOL:
            best, best_d = theta, d
    return float(best)


def fit_decay(theta_ch: float, series: TSeries) -> float:
    """Per-layer envelope p from log |t_n / cos(n theta_ch)| regression.

    Depths where |cos(n theta_ch)| <= 0.1 or t_n = 0 are excluded; at least
    two usable depths are required. The fit is clamped into (0, 1].
    """
    ns, ys = [], []
    for n in series.depths():
        den = np.cos(n * theta_ch)
        t = series.value(n)
        if abs(den) <= 0.1 or t == 0.0:
            continue
        ns.append(float(n))
        ys.append(np.log(abs(t / den)))
    if len(set(ns)) < 2:
        raise EstimationFailure(f"envelope fit needs two usable depths, have {sorted(set(ns))}")
    slope = np.polyfit(np.asarray(ns), np.asarray(ys), 1)[0]
    return float(min(np.exp(slope), 1.0))


@dataclass
class IterationRecord:
    index: int
    n: int
    triplet: Optional[tuple] = None
    y: Optional[float] = None
    roots: list = field(default_factory=list)
    candidates: list = field(default_factory=list)
    selected: Optional[float] = None
    ok: bool = False
    reason: Optional[str] = None
    retried: bool = False


@dataclass
class EstimationResult:
    """Final estimate plus the full iteration trail.

    theta_ch is the estimated series phase in [0, pi]; theta is its
    state-space half. value/mirror are the two physical readings the
    ratio method cannot tell apart.
    """

    mode: str
    theta: float
    theta_ch: float
    value: float
    mirror: float
    p_hat: Optional[float]
    oracle_calls: int
    iterations: list
    series: TSeries

    def iteration_thetas(self) -> list:
        """Running state-phase estimate after each iteration (None before the first success)."""
        out = []
        current = None
        for rec in self.iterations:
            if rec.ok:
                current = rec.selected / 2.0
            out.append(current)
        return out


def run(problem: EstimationProblem, noise: NoiseSpec = NoiseSpec(), k: int = 5,
        shots: Optional[int] = None, seed: int = 0, trial: int = 0,
        perturbation: Optional[float] = None, retry: bool = False,
        provider=None) -> EstimationResult:
    """Full estimation run over iterations i = 0..k, depth n = 2^i.

    shots = None runs on exact expectations; perturbation switches to the
    fixed-offset provider used by robustness sweeps. A guard-tripped or
    candidate-free iteration is recorded as failed and the estimate carries;
    with retry=True a failed sampled iteration is re-measured once at 4x
    shots. If every iteration fails, EstimationFailure carries the records.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if provider is None:
        if perturbation is not None:
            provider = PerturbedTProvider(problem, noise, perturbation, seed, trial)
        elif shots is not None:
            provider = SampledTProvider(problem, noise, shots, seed, trial)
        else:
            provider = ExactTProvider(problem, noise)
    theta = None
    calls = 0
    records = []

    def attempt(rec: IterationRecord, n: int, ref: Optional[float], boost: int) -> float:
        rec.triplet = provider.triplet(n, boost=boost)
        t1, t2, t3 = rec.triplet
        if ref is None and n == 1 and max(abs(t1), abs(t2), abs(t3)) <= provider.eps_div:
            # quiet at base depth before any estimate exists: the two
            # preparations coincide to measurement resolution, theta = 0.
            # Deeper depths are excluded since decay can silence a real
            # signal there.
            rec.candidates = [0.0]
            return 0.0
        rec.y = ratio_y(t1, t2, t3, provider.eps_div)
        rec.roots = roots_cos(rec.y)
        cands = []
        for x in rec.roots:
            cands.extend(candidate_angles(x, n))
        rec.candidates = merge_angles(cands)
        if not rec.candidates:
            raise DepthGuardError(f"no candidate angles at depth {n} (y = {rec.y:.6g})")
        if ref is None:
            return _select_seeded(rec.candidates, seed_theta(rec.triplet), n)
        return select_candidate(rec.candidates, ref)

    for i in range(k + 1):
        n = 2 ** i
        rec = IterationRecord(index=i, n=n)
        calls += provider.calls_for(n)
        try:
            selected = attempt(rec, n, theta, boost=1)
        except DepthGuardError as exc:
            rec.reason = str(exc)
            if retry and isinstance(provider, SampledTProvider):
                rec.retried = True
                calls += provider.calls_for(n, boost=4)
                try:
                    selected = attempt(rec, n, theta, boost=4)
                except DepthGuardError as exc2:
                    rec.reason = f"{rec.reason}; retry: {exc2}"
                    records.append(rec)
                    continue
            else:
                records.append(rec)
                continue
        rec.selected = selected
        rec.ok = True
        rec.reason = None
        records.append(rec)
        theta = selected

    if theta is None:
        reasons = "; ".join(f"i={r.index}: {r.reason}" for r in records)
        raise EstimationFailure(f"every iteration failed ({reasons})")

    theta_ch = float(theta)
    pair = theta_to_value(theta_ch, problem.mode)
    try:
        p_hat = fit_decay(theta_ch, provider.series)
    except EstimationFailure:
        p_hat = None
    return EstimationResult(mode=problem.mode, theta=theta_ch / 2.0, theta_ch=theta_ch,
                            value=pair.value, mirror=pair.mirror, p_hat=p_hat,
                            oracle_calls=calls, iterations=records,
                            series=provider.series)
