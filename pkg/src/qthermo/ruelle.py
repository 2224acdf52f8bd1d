"""Classical (extensive) thermodynamic formalism on the full shift.

Transfer matrices for locally constant potentials, leading eigendata by
power iteration, normalization to a Jacobian, stationary Markov equilibrium
states, and the entropy zoo: Kolmogorov-Shannon entropy, dynamical q-entropy,
relative q-entropy, and the variational (infimum) form of the q-entropy.

Conventions.  A potential of memory ``m`` acts on states that are words of
length ``k = max(m - 1, 1)``.  The transfer operator

    (L_A f)(x) = sum_a e^{A(a x)} f(a x)

maps memory-k functions to memory-k functions, and is represented by the
matrix ``M[x, y] = e^{A(prefix_m(y1 x))}`` over pairs of k-words with the
overlap condition ``y[1:] == x[:k-1]``.  The Jacobian of the associated
equilibrium state lives on (k+1)-words and is the backward conditional
probability of the first symbol given the tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import NonConvergenceError, SizeGuardError
from .qfun import QParam, log_q
from .shift import Potential, all_words, word_index

_STATE_GUARD = 4096
_TABLE_GUARD = 16384


def _context_length(m: int) -> int:
    return max(m - 1, 1)


@dataclass(frozen=True)
class TransferMatrix:
    """Matrix form of the transfer operator on memory-k functions."""

    d: int
    k: int
    m: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        n = self.d**self.k
        if self.matrix.shape != (n, n):
            raise ValueError("matrix shape does not match d**k states")
        if np.any(self.matrix < 0.0):
            raise ValueError("transfer matrix entries must be nonnegative")
        object.__setattr__(self, "matrix", self.matrix.copy())
        self.matrix.setflags(write=False)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Action on a state-indexed vector (a memory-k function)."""
        return self.matrix @ np.asarray(f, dtype=float)


def transfer_matrix(A: Potential) -> TransferMatrix:
    """Build the transfer matrix of a locally constant potential.

    Raises
    ------
    SizeGuardError
        when memory exceeds 6 or the state space exceeds the size guard.
    """
    if A.memory > 6:
        raise SizeGuardError(f"memory {A.memory} exceeds the guard (6)")
    d, m = A.d, A.memory
    k = _context_length(m)
    if d**k > _STATE_GUARD:
        raise SizeGuardError(f"{d}**{k} states exceed the guard ({_STATE_GUARD})")
    words = all_words(d, k)
    n = len(words)
    M = np.zeros((n, n))
    for ix, x in enumerate(words):
        for a in range(1, d + 1):
            y = (a,) + x[: k - 1]
            M[ix, word_index(y, d)] = math.exp(A.value(y + x[k - 1 :]))
    return TransferMatrix(d=d, k=k, m=m, matrix=M)


def _power_iterate(M: np.ndarray, tol: float, cap: int) -> tuple[float, np.ndarray]:
    v = np.full(M.shape[0], 1.0 / M.shape[0])
    lam = 0.0
    for _ in range(cap):
        w = M @ v
        lam_new = float(v @ w) / float(v @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            raise NonConvergenceError("transfer matrix annihilated the iterate")
        v = w / nrm
        resid = float(np.max(np.abs(M @ v - lam_new * v)))
        if abs(lam_new - lam) <= tol * abs(lam_new) and resid <= tol * abs(lam_new):
            return lam_new, v
        lam = lam_new
    raise NonConvergenceError(f"power iteration did not converge within {cap} steps")


def leading_eig(
    M: TransferMatrix, tol: float = 1e-13, cap: int = 1_000_000
) -> tuple[float, np.ndarray, np.ndarray]:
    """Leading eigenvalue with right (h) and left (nu) eigenvectors.

    Power iteration stops once successive Rayleigh quotients agree to a
    relative ``tol`` and the residual is below ``5 tol lambda``.  ``nu`` is
    normalized to total mass one and ``h`` so that ``sum(h * nu) = 1``.
    """
    lam, h = _power_iterate(M.matrix, tol, cap)
    lam_left, nu = _power_iterate(M.matrix.T, tol, cap)
    lam = 0.5 * (lam + lam_left)
    h = np.abs(h)
    nu = np.abs(nu)
    nu = nu / nu.sum()
    h = h / float(h @ nu)
    if lam <= 0.0 or np.any(h <= 0.0) or np.any(nu <= 0.0):
        raise NonConvergenceError("leading eigendata is not strictly positive")
    for resid in (
        np.max(np.abs(M.matrix @ h - lam * h)),
        np.max(np.abs(M.matrix.T @ nu - lam * nu)),
    ):
        if resid > 10.0 * tol * lam * max(1.0, float(np.max(h))):
            raise NonConvergenceError("eigen residual above tolerance after convergence")
    return lam, h, nu


def classical_pressure(A: Potential) -> float:
    """log of the leading transfer-operator eigenvalue."""
    lam, _, _ = leading_eig(transfer_matrix(A))
    return math.log(lam)


def normalize(A: Potential) -> tuple[Potential, float, np.ndarray]:
    """Normalize a potential into log-Jacobian form.

    Returns ``(logJ, lambda, h)`` where ``logJ = A + log h - log h o sigma
    - log lambda`` as a memory-(k+1) table; ``exp(logJ)`` sums to one over
    the first symbol for every context.
    """
    M = transfer_matrix(A)
    lam, h, _ = leading_eig(M)
    d, k = M.d, M.k
    log_h = np.log(h)
    words = all_words(d, k + 1)
    vals = np.empty(len(words))
    for i, w in enumerate(words):
        vals[i] = (
            A.value(w)
            + log_h[word_index(w[:k], d)]
            - log_h[word_index(w[1:], d)]
            - math.log(lam)
        )
    return Potential(d=d, memory=k + 1, values=vals), lam, h


@dataclass(frozen=True)
class Jacobian:
    """Backward transition probabilities on (k+1)-words.

    ``values[i]`` is the conditional probability of the first symbol of the
    i-th (k+1)-word given its k-word tail; for every tail these sum to one.
    """

    d: int
    k: int
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.d ** (self.k + 1),):
            raise ValueError("Jacobian table has the wrong length")
        if np.any(vals <= 0.0) or np.any(vals > 1.0 + 1e-12):
            raise ValueError("Jacobian entries must lie in (0, 1]")
        rows = vals.reshape(self.d, -1).sum(axis=0)
        if np.max(np.abs(rows - 1.0)) > 1e-8:
            raise ValueError("Jacobian rows must sum to one for every context")
        object.__setattr__(self, "values", vals.copy())
        self.values.setflags(write=False)

    @classmethod
    def from_log_potential(cls, logJ: Potential) -> "Jacobian":
        return cls(d=logJ.d, k=logJ.memory - 1, values=np.exp(logJ.values))

    def value(self, word: tuple[int, ...]) -> float:
        return float(self.values[word_index(word[: self.k + 1], self.d)])

    def as_log_potential(self) -> Potential:
        return Potential(d=self.d, memory=self.k + 1, values=np.log(self.values))


def random_jacobian(d: int, k: int, seed: int = 0) -> Jacobian:
    """Draw a Jacobian by normalizing gamma weights over the first symbol."""
    rng = np.random.default_rng(seed)
    g = rng.gamma(2.0, 1.0, size=(d, d**k)) + 0.05
    return Jacobian(d=d, k=k, values=(g / g.sum(axis=0)).reshape(-1))


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov measure on k-word states."""

    d: int
    k: int
    P: np.ndarray
    pi: np.ndarray

    def __post_init__(self) -> None:
        n = self.d**self.k
        P = np.asarray(self.P, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        if P.shape != (n, n) or pi.shape != (n,):
            raise ValueError("transition matrix / stationary vector shape mismatch")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("transition rows must sum to one")
        if np.any(pi < 0.0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("stationary vector must be a probability vector")
        if np.max(np.abs(pi @ P - pi)) > 1e-10:
            raise ValueError("pi is not stationary for P")
        object.__setattr__(self, "P", P.copy())
        object.__setattr__(self, "pi", pi.copy())
        self.P.setflags(write=False)
        self.pi.setflags(write=False)

    @classmethod
    def from_transitions(cls, d: int, k: int, P: np.ndarray) -> "MarkovMeasure":
        """Stationary measure of a row-stochastic matrix over k-words."""
        P = np.asarray(P, dtype=float)
        n = P.shape[0]
        # direct solve of pi (P - I) = 0 with one row replaced by the
        # normalization; unlike power iteration this keeps the tiny
        # components of nearly reducible chains componentwise accurate,
        # which the induced jacobian row sums depend on
        M = P.T - np.eye(n)
        M[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        try:
            pi = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            pi = None
        if pi is None or not np.all(np.isfinite(pi)) or float(np.min(pi)) < -1e-9:
            # singular or grossly non-positive: fall back to iterating on
            # (P^T + I)/2, whose spectral gap stays bounded for nearly
            # periodic chains
            damped = 0.5 * (P.T + np.eye(n))
            _, pi = _power_iterate(damped, 1e-14, 1_000_000)
            pi = np.abs(pi)
        pi = np.clip(pi, 0.0, None)
        pi = pi / pi.sum()
        # one exact-balance sweep: pi P is stationary to machine precision
        for _ in range(4):
            pi = pi @ P
            pi = pi / pi.sum()
        return cls(d=d, k=k, P=P, pi=pi)

    def successor(self, ix: int, b: int) -> int:
        """State index reached from state ``ix`` by appending symbol ``b``."""
        word = all_words(self.d, self.k)[ix]
        return word_index(word[1:] + (b,), self.d)

    def cylinder_masses(self, r: int) -> np.ndarray:
        """Masses of all r-cylinders, r >= 1."""
        d, k = self.d, self.k
        if r <= k:
            masses = self.pi.reshape((d,) * k)
            return masses.sum(axis=tuple(range(r, k))).reshape(-1)
        masses = self.pi.copy()
        for step in range(r - k):
            nxt = np.zeros(d ** (k + step + 1))
            for i, w in enumerate(all_words(d, k + step)):
                state = word_index(w[-k:], d)
                for b in range(1, d + 1):
                    j = word_index(w[len(w) - k + 1 :] + (b,), d)
                    nxt[i * d + (b - 1)] = masses[i] * self.P[state, j]
            masses = nxt
        return masses

    def jacobian(self) -> Jacobian:
        """Backward conditionals Q(w) = P(w[:k] -> w[1:]) pi[w[:k]] / pi[w[1:]]."""
        d, k = self.d, self.k
        words = all_words(d, k + 1)
        vals = np.empty(len(words))
        for i, w in enumerate(words):
            a = word_index(w[:k], d)
            b = word_index(w[1:], d)
            vals[i] = self.P[a, b] * self.pi[a] / self.pi[b]
        return Jacobian(d=d, k=k, values=vals)

    def integrate(self, A: Potential) -> float:
        """Integral of a locally constant potential."""
        if A.d != self.d:
            raise ValueError("alphabet mismatch")
        return float(self.cylinder_masses(A.memory) @ A.values)


def equilibrium_markov(J: Jacobian) -> MarkovMeasure:
    """Unique stationary Markov measure whose backward conditionals equal J.

    The k-word masses are the eigenvector (eigenvalue one) of the
    column-stochastic matrix R[x, z] = J(x . z[-1]) over successor pairs;
    forward transitions follow as P(x -> z) = R[x, z] pi[z] / pi[x].
    """
    d, k = J.d, J.k
    words = all_words(d, k)
    n = len(words)
    R = np.zeros((n, n))
    for ix, x in enumerate(words):
        for b in range(1, d + 1):
            z = x[1:] + (b,)
            R[ix, word_index(z, d)] = J.value(x + (b,))
    _, pi = _power_iterate(R, 1e-14, 1_000_000)
    pi = np.abs(pi)
    pi = pi / pi.sum()
    for _ in range(4):
        pi = R @ pi
        pi = pi / pi.sum()
    P = R * pi[None, :] / pi[:, None]
    P = P / P.sum(axis=1, keepdims=True)
    return MarkovMeasure(d=d, k=k, P=P, pi=pi)


def _mass_log_weights(mu: MarkovMeasure) -> tuple[np.ndarray, np.ndarray]:
    """(masses, Q-values) over (k+1)-words, skipping zero-mass words."""
    masses = mu.cylinder_masses(mu.k + 1)
    Q = mu.jacobian().values
    keep = masses > 0.0
    return masses[keep], Q[keep]


def ks_entropy(mu: MarkovMeasure) -> float:
    """Kolmogorov-Shannon entropy: -sum mass(w) log Q(w) over (k+1)-words."""
    masses, Q = _mass_log_weights(mu)
    return float(-(masses @ np.log(Q)))


def q_entropy_markov(mu: MarkovMeasure, q: QParam | float) -> float:
    """Dynamical q-entropy sum mass(w) log_q(1/Q(w)); Shannon at q = 1.

    For q in (0,1) this dominates the Kolmogorov-Shannon entropy (log_q
    dominates log on [1, infinity)), with the ordering reversed for q > 1.
    """
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    if qp.classical:
        return ks_entropy(mu)
    masses, Q = _mass_log_weights(mu)
    return float(masses @ log_q(1.0 / Q, qp))


def relative_q_entropy(
    mu1: MarkovMeasure, mu2: MarkovMeasure, q: QParam | float
) -> float:
    """q-deformed relative entropy int log_q(1/J2) dmu1 - int log_q(1/J1) dmu1.

    At q = 1 this is the Kullback-Leibler divergence rate and is nonnegative.
    For q != 1 it can be negative: the map r -> sum_w mass1(w) log_q(1/r(w))
    is minimized at the escort r proportional to mass1^{1/(2-q)}, not at
    mass1 itself, so nearby measures on the escort side sit below zero.
    """
    if (mu1.d, mu1.k) != (mu2.d, mu2.k):
        raise ValueError("measures must share alphabet and memory")
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    masses = mu1.cylinder_masses(mu1.k + 1)
    Q1 = mu1.jacobian().values
    Q2 = mu2.jacobian().values
    keep = masses > 0.0
    if qp.classical:
        diff = np.log(1.0 / Q2[keep]) - np.log(1.0 / Q1[keep])
    else:
        diff = log_q(1.0 / Q2[keep], qp) - log_q(1.0 / Q1[keep], qp)
    return float(masses[keep] @ diff)


def _variational_objective(
    t: np.ndarray, masses: np.ndarray, d: int, r: int, q: QParam
) -> float:
    u = np.exp(t - t.max()).reshape(d, -1)  # major axis: first symbol of the r-word
    s = u.sum(axis=0)  # sums over the first symbol, indexed by (r-1)-words
    flat_u = u.reshape(-1)
    # at an r-word with flat lexicographic index i, the prefix w[:r-1] has
    # index i // d, so the ratio table is repeat(s, d) / u
    ratios = (s[0] / flat_u) if r == 1 else (np.repeat(s, d) / flat_u)
    return float(masses @ log_q(ratios, q))


def q_entropy_variational(
    mu: MarkovMeasure,
    q: QParam | float,
    u_memory: int = 2,
    restarts: int = 20,
    seed: int = 0,
) -> float:
    """Infimum of int log_q(sum_a u(a x) / u(x)) dmu over memory-r test functions.

    The candidate u runs over strictly positive locally constant functions of
    memory ``u_memory`` (parameterized by the exponential of a real table; the
    objective is scale invariant).  Minimization is quasi-Newton from the flat
    table, from the Jacobian when shapes allow, and from seeded random
    restarts; the smallest value found is returned.

    The value is bounded between the Kolmogorov-Shannon entropy and the
    closed-form q-entropy, but for a generic Gibbs measure with q != 1 it sits
    strictly below ``q_entropy_markov`` - the Jacobian is not the minimizer
    (the objective decreases along escort-type reweightings of J).
    """
    if u_memory < 1 or u_memory > 4:
        raise SizeGuardError("u_memory must be between 1 and 4")
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    masses = mu.cylinder_masses(u_memory)
    return _variational_entropy_from_masses(masses, mu.d, u_memory, qp, restarts, seed, mu)


def _variational_entropy_from_masses(
    masses: np.ndarray,
    d: int,
    r: int,
    q: QParam,
    restarts: int,
    seed: int,
    mu: MarkovMeasure | None = None,
) -> float:
    def objective(t: np.ndarray) -> float:
        return _variational_objective(np.concatenate(([0.0], t)), masses, d, r, q)

    n_free = d**r - 1
    starts = [np.zeros(n_free)]
    if mu is not None and r == mu.k + 1:
        logQ = np.log(mu.jacobian().values)
        starts.append(logQ[1:] - logQ[0])
    rng = np.random.default_rng(seed)
    starts.extend(rng.normal(0.0, 1.5, size=n_free) for _ in range(restarts))
    best = math.inf
    for t0 in starts:
        res = minimize(objective, t0, method="BFGS", options={"maxiter": 500})
        if res.fun < best:
            best = float(res.fun)
    return best


def variational_entropy_of_masses(
    masses: np.ndarray,
    d: int,
    u_memory: int,
    q: QParam | float,
    restarts: int = 20,
    seed: int = 0,
) -> float:
    """Same infimum evaluated directly on r-cylinder masses.

    Accepts mass vectors of arbitrary (not necessarily Markov) invariant
    measures, e.g. convex mixtures of Markov measures.
    """
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    masses = np.asarray(masses, dtype=float)
    if masses.shape != (d**u_memory,):
        raise ValueError("mass vector must enumerate all u_memory-cylinders")
    return _variational_entropy_from_masses(masses, d, u_memory, qp, restarts, seed)
