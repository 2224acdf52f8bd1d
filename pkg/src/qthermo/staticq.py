"""Non-dynamical deformed entropies and the static pressure on probability vectors.

For a probability vector p the deformed entropy is

    H_q(p) = (sum_j p_j^q - 1) / (1 - q),

Shannon at q = 1, related to the Renyi entropy through
H^R_q = log(1 + (1-q) H_q)/(1-q).  The static pressure of a payoff vector a
at inverse temperature beta is sup_p { H_q(p) + beta <a, p> }.

``static_q_pressure`` returns the closed-form candidate

    p*_j = e_{2-q}(beta a_j) / sum_i e_{2-q}(beta a_i)

and the objective evaluated there.  Caution: for q != 1 this closed form does
NOT satisfy the Lagrange stationarity of the objective above (the multiplier
is pinned to 1/(1-q) instead of being solved from the normalization, and the
final rescaling is not a symmetry of the objective), so it generally sits
strictly below the true supremum.  ``true_static_equilibrium`` solves the
stationarity condition exactly and ``static_q_pressure_scan`` maximizes by
brute force; both agree with each other and exceed the closed form whenever
beta != 0, a is non-constant and q != 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .qfun import CLASSICAL_Q_TOL, exp_q


def _check_prob(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("probability vector must be 1-d with length >= 2")
    if np.any(arr < 0.0) or abs(arr.sum() - 1.0) > 1e-9:
        raise ValueError("entries must be nonnegative and sum to 1")
    return arr


def q_entropy_vec(p, q: float) -> float:
    """Deformed entropy (sum p^q - 1)/(1-q); Shannon at q = 1.

    Zero entries contribute 0 (the 0*log_q(1/0) = 0 convention).
    """
    arr = _check_prob(p)
    if abs(q - 1.0) <= CLASSICAL_Q_TOL:
        pos = arr[arr > 0.0]
        return float(-(pos * np.log(pos)).sum())
    return float(((arr**q).sum() - 1.0) / (1.0 - q))


def renyi_entropy(p, q: float) -> float:
    """Renyi entropy log(sum p^q)/(1-q); Shannon at q = 1."""
    arr = _check_prob(p)
    if abs(q - 1.0) <= CLASSICAL_Q_TOL:
        pos = arr[arr > 0.0]
        return float(-(pos * np.log(pos)).sum())
    return float(math.log((arr**q).sum()) / (1.0 - q))


def renyi_from_q_entropy(hq: float, q: float) -> float:
    """The bridge F(x) = log(1 + (1-q)x)/(1-q) sending H_q to H^R_q."""
    if abs(q - 1.0) <= CLASSICAL_Q_TOL:
        return hq
    return math.log1p((1.0 - q) * hq) / (1.0 - q)


def _objective(p: np.ndarray, a: np.ndarray, q: float, beta: float) -> float:
    if abs(q - 1.0) <= CLASSICAL_Q_TOL:
        pos = p[p > 0.0]
        ent = float(-(pos * np.log(pos)).sum())
    else:
        ent = float(((p**q).sum() - 1.0) / (1.0 - q))
    return ent + beta * float(a @ p)


@dataclass
class StaticEquilibrium:
    pressure: float
    p_star: np.ndarray
    objective_at_p: float
    q: float
    beta: float
    payoff: np.ndarray


def static_q_pressure(payoff, beta: float, q: float) -> StaticEquilibrium:
    """Closed-form static equilibrium p* ~ e_{2-q}(beta a_j), normalized.

    Requires every beta*a_j in the e_{2-q} domain (1 + (q-1) beta a_j > 0).
    Returns the objective H_q(p*) + beta <a, p*> as the pressure field; see
    the module docstring for how this relates to the true supremum.
    """
    a = np.asarray(payoff, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise ValueError("payoff must be a 1-d vector with length >= 2")
    weights = np.asarray(exp_q(beta * a, 2.0 - q), dtype=float)
    p = weights / weights.sum()
    val = _objective(p, a, q, beta)
    return StaticEquilibrium(val, p, val, q, beta, a)


def true_static_equilibrium(payoff, beta: float, q: float) -> StaticEquilibrium:
    """Exact interior maximizer of H_q(p) + beta <a, p> via the multiplier solve.

    Stationarity: beta a_j + q/(1-q) p_j^(q-1) = lam for all j, with lam fixed
    by sum p = 1 (bracketed scalar root find).
    """
    a = np.asarray(payoff, dtype=float)
    if abs(q - 1.0) <= CLASSICAL_Q_TOL:
        w = np.exp(beta * a - np.max(beta * a))
        p = w / w.sum()
        val = _objective(p, a, q, beta)
        return StaticEquilibrium(val, p, val, q, beta, a)

    def p_of_lam(lam):
        t = (1.0 - q) / q * (lam - beta * a)
        with np.errstate(divide="ignore"):  # bracket endpoints may touch t=0
            return t ** (1.0 / (q - 1.0))

    # admissible lam keeps lam - beta a_j on the right side of zero: for q<1
    # the exponent 1/(q-1) is negative so we need lam > max(beta a); for q>1
    # positive p forces lam < min(beta a)
    if q < 1.0:
        lo = float(np.max(beta * a))
        span = max(1.0, float(np.ptp(beta * a)))
        hi = lo + span
        while p_of_lam(hi).sum() > 1.0:
            span *= 2.0
            hi = lo + span
            if span > 1e12:
                raise RuntimeError("multiplier bracket growth failed")
        lo_eff = lo + span * 1e-18
        while p_of_lam(lo_eff).sum() < 1.0:
            lo_eff = lo + (lo_eff - lo) * 8.0
        bracket = (lo_eff, hi)
    else:
        hi = float(np.min(beta * a)) - 1e-18
        span = max(1.0, float(np.ptp(beta * a)))
        lo = hi - span
        while p_of_lam(lo).sum() > 1.0:
            span *= 2.0
            lo = hi - span
            if span > 1e12:
                raise RuntimeError("multiplier bracket growth failed")
        hi_eff = hi
        while p_of_lam(hi_eff).sum() < 1.0 and hi - hi_eff < span:
            hi_eff = hi - max(1e-18, (hi - hi_eff) * 8.0)
        bracket = (lo, hi_eff)

    lam = optimize.brentq(
        lambda t: p_of_lam(t).sum() - 1.0, *bracket, xtol=1e-300, rtol=8.9e-16, maxiter=400
    )
    p = p_of_lam(lam)
    p = p / p.sum()
    val = _objective(p, a, q, beta)
    return StaticEquilibrium(val, p, val, q, beta, a)


def stationarity_defect(p, payoff, beta: float, q: float) -> float:
    """Spread of the Lagrange gradient beta a_j + q/(1-q) p_j^(q-1) across j."""
    arr = _check_prob(p)
    a = np.asarray(payoff, dtype=float)
    grad = beta * a + q / (1.0 - q) * arr ** (q - 1.0)
    return float(np.max(grad) - np.min(grad))


def static_q_pressure_scan(payoff, beta: float, q: float, grid_n: int = 2000) -> StaticEquilibrium:
    """Brute-force maximum of H_q(p) + beta <a, p> on a simplex grid (d=2,3).

    Barycentric stride 1/grid_n, then one coordinate-wise golden-section pass
    around the best grid point.
    """
    a = np.asarray(payoff, dtype=float)
    d = a.size
    if grid_n < 100:
        raise ValueError("grid_n must be >= 100")
    if d == 2:
        t = np.arange(1, grid_n) / grid_n
        pts = np.stack([t, 1.0 - t], axis=1)
    elif d == 3:
        side = max(2, int(round(math.sqrt(grid_n))))
        u = np.arange(1, side) / side
        g1, g2 = np.meshgrid(u, u)
        keep = g1 + g2 < 1.0
        pts = np.stack([g1[keep], g2[keep], 1.0 - g1[keep] - g2[keep]], axis=1)
    else:
        raise ValueError("scan supports d = 2 or 3 only")

    if abs(q - 1.0) <= CLASSICAL_Q_TOL:
        ent = -(pts * np.log(pts)).sum(axis=1)
    else:
        ent = ((pts**q).sum(axis=1) - 1.0) / (1.0 - q)
    vals = ent + beta * pts @ a
    best = pts[int(np.argmax(vals))].copy()

    # golden-section in each free coordinate around the best point
    for axis in range(d - 1):
        rest = best.sum() - best[axis] - best[-1]

        def f(t):
            p = best.copy()
            p[axis] = t
            p[-1] = 1.0 - rest - t
            if p[-1] <= 0.0 or t <= 0.0:
                return math.inf
            return -_objective(p, a, q, beta)

        lo = max(1e-12, best[axis] - 2.0 / grid_n)
        hi = min(1.0 - rest - 1e-12, best[axis] + 2.0 / grid_n)
        res = optimize.minimize_scalar(f, bracket=None, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-13})
        if -res.fun > _objective(best, a, q, beta):
            best[axis] = res.x
            best[-1] = 1.0 - rest - res.x
    val = _objective(best, a, q, beta)
    return StaticEquilibrium(val, best, val, q, beta, a)


def beta_sweep(payoff, q: float, betas) -> list[tuple[float, float | None]]:
    """(beta, pressure) curve from the closed form; inadmissible beta -> None."""
    a = np.asarray(payoff, dtype=float)
    out: list[tuple[float, float | None]] = []
    for b in betas:
        base = 1.0 + (q - 1.0) * float(b) * a
        if np.any(base <= 0.0):
            out.append((float(b), None))
        else:
            out.append((float(b), static_q_pressure(a, float(b), q).pressure))
    return out


def meson_vericat_bernoulli(p, q: float, check_up_to: int = 8) -> float:
    """Block growth rate (1/n) log sum_{|w|=n} mu(w)^q of a Bernoulli measure.

    Cylinder masses factorize, so the quotient is constant in n and equals
    log(sum p_i^q); the first ``check_up_to`` block values are enumerated and
    verified constant to 1e-12 before returning.
    """
    arr = _check_prob(p)
    if not 0.0 < q < 1.0:
        raise ValueError("requires 0 < q < 1")
    target = float(math.log((arr**q).sum()))
    pos = arr[arr > 0.0]
    logp = np.log(pos)
    logmass = np.zeros(1)
    for n in range(1, check_up_to + 1):
        logmass = (logmass[:, None] + logp[None, :]).ravel()
        block = float(logsumexp(q * logmass)) / n
        if abs(block - target) > 1e-12 * max(1.0, abs(target)):
            raise AssertionError(f"block value at n={n} drifted: {block} vs {target}")
    return target


def loloi_closed_form(a1: float, a2: float, b: float) -> tuple[float, float]:
    """q = 1/2 closed form for the static equilibrium components.

    (A variant with (a2 b - b)^2 in the numerator does not normalize; the
    form consistent with the general e_{2-q} expression is (2 - a2 b)^2,
    used here.)
    """
    den = 8.0 - 4.0 * a1 * b - 4.0 * a2 * b + a1**2 * b**2 + a2**2 * b**2
    return (2.0 - a2 * b) ** 2 / den, (2.0 - a1 * b) ** 2 / den
