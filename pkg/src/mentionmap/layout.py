"""Constrained 2D embedding of the term similarity structure.

Minimizes  V(x) = sum_{i<j} s_ij * |x_i - x_j|^2  subject to the mean of
all pairwise distances being 1, with the centroid pinned at the origin.
The constrained problem is equivalent to minimizing the scale-invariant
ratio V(x) / mean_dist(x)^2, which is what the solver descends: projected
gradient steps with a Barzilai-Borwein trial step, Armijo backtracking (so
the recorded objective sequence is strictly monotone non-increasing), and
exact renormalization to the constraint after every accepted step.

Similarities are rescaled by their maximum before optimizing, so scaling
all s_ij by a constant yields the identical iterate sequence; the reported
objective is for the original similarities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput
from .kernels import distance_field, mean_distance, similarity_energy


@dataclass
class LayoutResult:
    """Coordinates plus convergence evidence.

    ``history`` holds the constrained objective after every accepted step
    (non-increasing by construction); ``constraint_residual`` is the final
    |mean pairwise distance - 1|.
    """

    coords: np.ndarray                  # (n, 2), centroid at origin
    objective: float
    constraint_residual: float
    history: list[float] = field(default_factory=list)
    iterations: int = 0
    grad_norm: float = 0.0


def _normalize(coords: np.ndarray) -> np.ndarray:
    coords = coords - coords.mean(axis=0)
    md = mean_distance(coords)
    if md > 0.0:
        coords = coords / md
    return coords


def run_layout(
    n: int,
    si: np.ndarray,
    sj: np.ndarray,
    sv: np.ndarray,
    seed: int = 0,
    max_iterations: int = 2000,
    tolerance: float = 1e-12,
    gtol: float = 1e-7,
) -> LayoutResult:
    """Optimize n points against sparse similarity pairs (si, sj, sv).

    Raises DegenerateInput for n < 2. Deterministic for fixed inputs.
    """
    if n < 2:
        raise DegenerateInput("layout needs at least 2 terms")
    si = np.asarray(si, dtype=np.int64)
    sj = np.asarray(sj, dtype=np.int64)
    sv = np.asarray(sv, dtype=np.float64)

    smax = float(sv.max()) if sv.size else 0.0
    svn = sv / smax if smax > 0.0 else sv

    rng = np.random.default_rng(seed)
    radius = np.sqrt(rng.random(n))
    angle = 2.0 * np.pi * rng.random(n)
    coords = np.column_stack((radius * np.cos(angle), radius * np.sin(angle)))
    if mean_distance(coords) == 0.0:     # coincident init, vanishing chance
        coords[:, 0] += np.arange(n)
    coords = _normalize(coords)

    pair_factor = 2.0 / (n * (n - 1))
    value, grad_v = similarity_energy(coords, si, sj, svn)
    history = [value]
    step = 0.1
    prev_coords: np.ndarray | None = None
    prev_grad: np.ndarray | None = None
    grad_norm = 0.0
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        dsum, grad_d = distance_field(coords)
        dmean = pair_factor * dsum
        grad = grad_v / dmean**2 - (2.0 * value / dmean**3) * pair_factor * grad_d
        grad -= grad.mean(axis=0)
        grad_norm = float(np.sqrt((grad * grad).sum()))
        if grad_norm < gtol:
            break

        if prev_grad is not None:
            dx = coords - prev_coords
            dg = grad - prev_grad
            sy = float((dx * dg).sum())
            yy = float((dg * dg).sum())
            if sy > 0.0 and yy > 0.0:
                step = min(max(sy / yy, 1e-8), 10.0)
        prev_coords = coords
        prev_grad = grad

        accepted = False
        trial_step = step
        for _ in range(60):
            trial = _normalize(coords - trial_step * grad)
            trial_value, trial_grad_v = similarity_energy(trial, si, sj, svn)
            if trial_value <= value - 1e-4 * trial_step * grad_norm**2:
                accepted = True
                break
            trial_step *= 0.5
        if not accepted:
            break
        drop = value - trial_value
        coords, value, grad_v = trial, trial_value, trial_grad_v
        history.append(value)
        step = trial_step
        if drop < tolerance * max(1.0, abs(value)):
            break

    coords = _normalize(coords)
    final_value, _ = similarity_energy(coords, si, sj, svn)
    residual = abs(mean_distance(coords) - 1.0)
    scale = smax if smax > 0.0 else 1.0
    return LayoutResult(
        coords=coords,
        objective=final_value * scale,
        constraint_residual=residual,
        history=[h * scale for h in history],
        iterations=iterations,
        grad_norm=grad_norm,
    )


def layout_term_map(
    tm,
    seed: int = 0,
    max_iterations: int = 2000,
    tolerance: float = 1e-12,
    gtol: float = 1e-7,
) -> LayoutResult:
    """Lay out a TermMap in place from its association strengths."""
    from .terms import association_strength

    if tm.cooccurrence is None:
        raise DegenerateInput("term map has no co-occurrence data")
    terms = tm.terms
    index = {t: i for i, t in enumerate(terms)}
    pairs = sorted(association_strength(tm.cooccurrence).items())
    si = np.array([index[a] for (a, _), _ in pairs], dtype=np.int64)
    sj = np.array([index[b] for (_, b), _ in pairs], dtype=np.int64)
    sv = np.array([s for _, s in pairs], dtype=np.float64)
    result = run_layout(
        len(terms), si, sj, sv,
        seed=seed, max_iterations=max_iterations,
        tolerance=tolerance, gtol=gtol,
    )
    tm.coordinates = {
        t: (float(result.coords[i, 0]), float(result.coords[i, 1]))
        for t, i in index.items()
    }
    tm.layout_objective = result.objective
    tm.constraint_residual = result.constraint_residual
    return result
