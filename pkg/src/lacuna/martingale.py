"""Dyadic martingale machinery on ([0,1], dx).

Functions live on a grid of ``2^J`` samples and are treated as piecewise
constant on level-J dyadic cells, so conditional expectations are exact block
means and the whole calculus (telescoping, tower property, orthogonality) is
exact up to float rounding.

Pieces:

* conditional expectations ``E_k``, differences ``D_k`` (``D_0 = E_0``), and
  the martingale square function ``(sum_{k>=1} |D_k f|^2)^{1/2}``;
* the exponential-integrability check comparing ``||f - E_0 f||`` in the
  ``exp(L^{2/(s+1)})`` norm against the square function in ``exp(L^{2/s})``
  (sup norm at s = 0), plus the sub-Gaussian tail oracle ``2 exp(-t^2/2)``
  for unit-square-function sign martingales;
* a solver for the square-function decomposition problem: find ``f_k = D_k f
  + psi_k`` with ``D_k psi_k = 0`` minimizing the Orlicz norm of
  ``(sum_k |f_k|^2)^{1/2}``.  The objective is convex but nonsmooth, so the
  solver minimizes a smoothed surrogate by projected gradient descent with
  implicit differentiation of the Luxemburg norm, and reports the true
  (unsmoothed) objective plus an exactness certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .orlicz import YoungFunction, exp_norm, luxemburg_avg


def _require_pow2(n: int) -> int:
    if n <= 0 or n & (n - 1):
        raise ValueError("sample count must be a positive power of two")
    return n.bit_length() - 1


@dataclass(frozen=True)
class DyadicFunction:
    """Samples on a 2^J grid over [0, 1), constant on level-J cells."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=float).copy()
        _require_pow2(arr.size)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def max_level(self) -> int:
        return self.n.bit_length() - 1

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n

    def with_samples(self, samples: np.ndarray) -> "DyadicFunction":
        return DyadicFunction(samples)


def _ek(values: np.ndarray, k: int) -> np.ndarray:
    """Level-k block means, broadcast back to the full grid (exact)."""
    n = values.shape[-1]
    j = n.bit_length() - 1
    if not 0 <= k <= j:
        raise ValueError(f"level {k} outside 0..{j}")
    cells = 1 << k
    block = n // cells
    shaped = values.reshape(values.shape[:-1] + (cells, block))
    means = shaped.mean(axis=-1, keepdims=True)
    return np.broadcast_to(means, shaped.shape).reshape(values.shape)


def _dk(values: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return _ek(values, 0)
    return _ek(values, k) - _ek(values, k - 1)


def expectation(f: DyadicFunction, k: int) -> DyadicFunction:
    """E_k f: average over each level-k dyadic cell."""
    return f.with_samples(_ek(f.samples, k))


def difference(f: DyadicFunction, k: int) -> DyadicFunction:
    """D_k f = E_k f - E_{k-1} f, with D_0 f = E_0 f."""
    return f.with_samples(_dk(f.samples, k))


@dataclass(frozen=True)
class MartingaleDecomposition:
    """All difference levels of a function: levels[k] = D_k f, k = 0..J."""

    levels: np.ndarray  # shape (J+1, n)
    e0: np.ndarray

    @property
    def max_level(self) -> int:
        return self.levels.shape[0] - 1

    def reconstruct(self) -> np.ndarray:
        return self.levels.sum(axis=0)


def decompose(f: DyadicFunction) -> MartingaleDecomposition:
    j = f.max_level
    levels = np.stack([_dk(f.samples, k) for k in range(j + 1)])
    return MartingaleDecomposition(levels=levels, e0=_ek(f.samples, 0))


def martingale_square_function(f: DyadicFunction) -> DyadicFunction:
    """(sum_{k>=1} |D_k f|^2)^{1/2} pointwise; level 0 is excluded."""
    j = f.max_level
    acc = np.zeros(f.n)
    for k in range(1, j + 1):
        acc += _dk(f.samples, k) ** 2
    return f.with_samples(np.sqrt(acc))


# -- sign martingales and tail oracle -------------------------------------


def random_sign_martingale(
    j: int,
    rng: np.random.Generator,
    weights: Optional[Sequence[float]] = None,
    count: Optional[int] = None,
) -> np.ndarray:
    """Martingales whose level-k difference is +-weights[k-1] on each level-k
    cell (independent fair signs per level-(k-1) cell).

    Default weights make the square function identically 1.  Returns shape
    (n,) or (count, n).
    """
    if weights is None:
        weights = np.full(j, j**-0.5)
    weights = np.asarray(weights, dtype=float)
    if weights.size != j:
        raise ValueError("need one weight per level 1..J")
    rows = 1 if count is None else count
    n = 1 << j
    out = np.zeros((rows, n))
    for k in range(1, j + 1):
        half = 1 << (k - 1)
        signs = rng.choice([-1.0, 1.0], size=(rows, half))
        # each level-(k-1) cell splits into (+w, -w) or (-w, +w)
        pattern = np.stack([signs, -signs], axis=-1).reshape(rows, 2 * half)
        out += weights[k - 1] * np.repeat(pattern, n // (2 * half), axis=-1)
    return out[0] if count is None else out


def azuma_tail_bound(lam: float) -> float:
    """Sub-Gaussian bound 2 exp(-lam^2/2) for unit-square-function martingales."""
    return 2.0 * math.exp(-(lam**2) / 2.0)


def tail_measure(values: np.ndarray, lam: float) -> float:
    """|{ |f| > lam }| on [0,1] for grid samples."""
    vals = np.asarray(values)
    return float(np.count_nonzero(np.abs(vals) > lam)) / vals.shape[-1]


def cww_check(f: DyadicFunction, sigma: float) -> dict:
    """Exponential-integrability comparison for one function.

    lhs: ||f - E_0 f|| in exp(L^{2/(sigma+1)}), computed as the p-sup norm
    with exponent (sigma+1)/2; rhs: the matching norm of the square function
    with exponent sigma/2 (sup norm when sigma = 0).
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    centered = f.samples - _ek(f.samples, 0)
    sq = martingale_square_function(f).samples
    lhs = exp_norm(centered, (sigma + 1) / 2)
    rhs = float(np.max(sq)) if sigma == 0 else exp_norm(sq, sigma / 2)
    ratio = math.inf if rhs == 0 and lhs > 0 else (0.0 if lhs == 0 else lhs / rhs)
    return {"lhs": lhs, "rhs": rhs, "ratio": ratio, "sigma": sigma}


# -- the decomposition solver ---------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 5000
    patience: int = 20
    rel_tol: float = 1e-6
    epsilon_scale: float = 1e-6
    armijo: float = 1e-4
    shrink: float = 0.5
    grow: float = 2.0
    init_step: float = 1.0


@dataclass
class DecompositionResult:
    f_k: np.ndarray  # shape (J+1, n): D_k f + psi_k
    psi: np.ndarray
    objective: float  # unsmoothed Luxemburg norm of the l2 aggregate
    baseline: float  # objective at psi = 0
    iterations: int
    converged: bool
    trace: list
    certificate: dict


def project_to_constraint(psi: np.ndarray) -> np.ndarray:
    """Zero out the level-k difference of row k (the feasible subspace)."""
    out = psi.copy()
    for k in range(psi.shape[0]):
        out[k] -= _dk(out[k], k)
    return out


def _aggregate(diffs: np.ndarray, psi: np.ndarray, eps: float) -> np.ndarray:
    rows = diffs + psi
    return np.sqrt(np.sum(rows**2, axis=0) + eps**2)


def decompose_quotient_norm(
    f: DyadicFunction, sigma: float, config: SolverConfig = SolverConfig()
) -> DecompositionResult:
    """Minimize || (sum_k |D_k f + psi_k|^2)^{1/2} ||_{L log^{sigma/2} L}
    over perturbations with D_k psi_k = 0, by projected gradient descent on
    the smoothed objective.

    The Luxemburg norm is differentiated implicitly: with u = G/lambda at the
    solution of  mean B(G/lambda) = 1,  one has
    d lambda / d G_x = B'(u_x) / sum_y B'(u_y) u_y.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    j = f.max_level
    n = f.n
    diffs = np.stack([_dk(f.samples, k) for k in range(j + 1)])
    young = YoungFunction(sigma / 2)

    l2 = math.sqrt(float(np.mean(f.samples**2)))
    if l2 == 0.0:
        zero = np.zeros_like(diffs)
        cert = {
            "constraint_residual": 0.0,
            "objective": 0.0,
            "baseline": 0.0,
            "sigma": sigma,
            "iterations": 0,
            "converged": True,
        }
        return DecompositionResult(zero, zero, 0.0, 0.0, 0, True, [0.0], cert)

    eps = config.epsilon_scale * l2

    def smoothed(psi: np.ndarray) -> float:
        return luxemburg_avg(_aggregate(diffs, psi, eps), sigma / 2)

    def gradient(psi: np.ndarray) -> np.ndarray:
        g = _aggregate(diffs, psi, eps)
        lam = luxemburg_avg(g, sigma / 2)
        u = g / lam
        bp = young.deriv(u)
        denom = float(np.sum(bp * u))
        weights = bp / denom  # d lambda / d G_x
        grad = (diffs + psi) * (weights / g)
        return project_to_constraint(grad)

    psi = np.zeros_like(diffs)
    current = smoothed(psi)
    trace = [current]
    step = config.init_step
    converged = False
    iterations = 0

    for iterations in range(1, config.max_iter + 1):
        grad = gradient(psi)
        gnorm2 = float(np.sum(grad**2))
        if gnorm2 == 0.0:
            converged = True
            break
        accepted = False
        while step > 1e-18:
            cand = psi - step * grad
            value = smoothed(cand)
            if value <= current - config.armijo * step * gnorm2:
                accepted = True
                break
            step *= config.shrink
        if not accepted:
            converged = True  # no descent direction at fp resolution
            break
        psi, current = cand, value
        trace.append(current)
        step *= config.grow
        if len(trace) > config.patience:
            past = trace[-config.patience - 1]
            if past - current < config.rel_tol * max(past, 1e-300):
                converged = True
                break

    psi = project_to_constraint(psi)  # exact feasibility of the output
    f_k = diffs + psi
    true_objective = luxemburg_avg(np.sqrt(np.sum(f_k**2, axis=0)), sigma / 2)
    baseline = luxemburg_avg(np.sqrt(np.sum(diffs**2, axis=0)), sigma / 2)
    residual = max(
        float(np.max(np.abs(_dk(psi[k], k)))) for k in range(j + 1)
    )
    certificate = {
        "constraint_residual": residual,
        "objective": true_objective,
        "baseline": baseline,
        "sigma": sigma,
        "iterations": iterations,
        "converged": converged,
        "rhs_norm": luxemburg_avg(np.abs(f.samples), (sigma + 1) / 2),
    }
    return DecompositionResult(
        f_k=f_k,
        psi=psi,
        objective=true_objective,
        baseline=baseline,
        iterations=iterations,
        converged=converged,
        trace=trace,
        certificate=certificate,
    )
