"""Asymptotic pressure of the n-step deformed transfer sums.

The n-step operator applied to the constant function 1 at a base point x is

    L_n(1)(x) = sum over the d^n preimage words w of exp_q(S_n A(w x)),

with S_n the n-term Birkhoff sum.  Because A is locally constant, the d^n
sums take polynomially many distinct values; ``SumBuckets`` carries exact
arbitrary-precision path counts per distinct (quantized) sum so that L_n is
evaluated exactly for n in the thousands.  The growth exponent
(1/n) log L_n(1)(x0) converges; ``asymptotic_pressure`` estimates the limit
with a tail fit, and ``variational_scan_subadd`` realizes the variational
side over memory-1 Markov measures.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import QExpDomainError, QLogDomainError, QThermoError, SizeGuardError
from .qfun import QParam, exp_q
from .ruelle import MarkovMeasure
from .shift import Potential, all_words, word_index

_QUANTUM = 1e-9


def phi_n(A: Potential, q: QParam | float, w: tuple[int, ...], tail: tuple[int, ...]) -> float:
    """log exp_q of the n-term Birkhoff sum along w extended by tail, n = len(w).

    Raises QLogDomainError when 1 + (1-q) S_n <= 0, which signals the
    sign-changing-potential regime where the deformed weight is undefined.
    """
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    m = A.memory
    if len(tail) < m - 1:
        raise ValueError(f"tail must supply at least memory-1 = {m - 1} symbols")
    n = len(w)
    if n == 0:
        return 0.0
    s = A.birkhoff_sum((w + tail)[: n + m - 1])
    if qp.classical:
        return s
    base = 1.0 + (1.0 - qp.q) * s
    if base <= 0.0:
        raise QLogDomainError(f"1 + (1-q) S_n = {base} <= 0 along {w}")
    return math.log(base) / (1.0 - qp.q)


class SumBuckets:
    """Exact path counts per state and quantized Birkhoff sum.

    ``state`` is the leading memory-1 symbols of the grown word (empty for
    memory-1 potentials); keys are sums in units of the 1e-9 quantum; values
    are exact integers.  For table potentials the distinct sums form a
    lattice, so bucket counts stay polynomial in n while the total count is
    exactly d^n.
    """

    def __init__(self, A: Potential, x0_prefix: tuple[int, ...]):
        if A.memory > 2 or A.d > 3:
            raise SizeGuardError("bucketed evaluation supports memory <= 2, d <= 3")
        if len(x0_prefix) < A.memory - 1:
            raise ValueError("x0_prefix shorter than memory - 1")
        self.A, self.d = A, A.d
        self.n = 0
        # before any step the only word is empty, sitting at sum zero
        self.buckets: dict[tuple[int, ...], dict[int, int]] = {
            tuple(x0_prefix[: A.memory - 1]): {0: 1}
        }

    @staticmethod
    def _key(s: float) -> int:
        return round(s / _QUANTUM)

    def step(self) -> None:
        """Prepend one symbol to every counted word."""
        m = self.A.memory
        new: dict[tuple[int, ...], dict[int, int]] = {}
        for state, kc in self.buckets.items():
            for a in range(1, self.d + 1):
                inc = self._key(self.A.value((a,) + state))
                dest = new.setdefault(((a,) + state)[: m - 1], {})
                for key, cnt in kc.items():
                    k2 = key + inc
                    dest[k2] = dest.get(k2, 0) + cnt
        self.n += 1
        self.buckets = new

    def items(self):
        for state, kc in self.buckets.items():
            for key, cnt in kc.items():
                yield key * _QUANTUM, cnt

    def total_count(self) -> int:
        return sum(cnt for _, kc in self.buckets.items() for cnt in kc.values())

    def log_value(self, q: QParam) -> float:
        """log of sum(count * exp_q(sum)) over all buckets, in log space."""
        terms = []
        for s, cnt in self.items():
            if q.classical:
                lg = s
            else:
                base = 1.0 + (1.0 - q.q) * s
                if base <= 0.0:
                    raise QExpDomainError(
                        f"bucket at S_n = {s} (count {cnt}) outside exp_q domain",
                        argument=s,
                    )
                lg = math.log(base) / (1.0 - q.q)
            terms.append(math.log(cnt) + lg)
        return float(logsumexp(np.array(terms)))

    def log_value_truncated(self, q: QParam) -> tuple[float, float]:
        """(log of the in-domain partial sum, count fraction dropped)."""
        terms, dropped, total = [], 0, 0
        for s, cnt in self.items():
            total += cnt
            base = 1.0 + (1.0 - q.q) * s
            if base <= 0.0:
                dropped += cnt
                continue
            terms.append(math.log(cnt) + math.log(base) / (1.0 - q.q))
        if not terms:
            raise QExpDomainError("all buckets outside exp_q domain", argument=None)
        return float(logsumexp(np.array(terms))), dropped / total


def _check_bucket_sizes(A: Potential, n: int) -> None:
    if A.memory > 2 or A.d > 3:
        raise SizeGuardError("bucketed evaluation supports memory <= 2, d <= 3")
    if n > 5000:
        raise SizeGuardError("n > 5000 exceeds the bucketed-evaluation guard")


def frak_L_n(A: Potential, q: QParam | float, x0_prefix: tuple[int, ...], n: int) -> float:
    """Exact value of the n-step operator sum at the base point, via buckets."""
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    _check_bucket_sizes(A, n)
    if n == 0:
        return 1.0
    sb = SumBuckets(A, x0_prefix)
    for _ in range(n):
        sb.step()
    return math.exp(sb.log_value(qp))


def frak_L_n_enumerate(
    A: Potential, q: QParam | float, x0_prefix: tuple[int, ...], n: int
) -> float:
    """Direct enumeration over all d^n preimage words (oracle for n <= 20)."""
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    if n > 20:
        raise SizeGuardError("direct enumeration capped at n = 20")
    if n == 0:
        return 1.0
    m = A.memory
    pad = tuple(x0_prefix) + (1,) * max(0, m - 1 - len(x0_prefix))
    total = 0.0
    for w in all_words(A.d, n):
        s = A.birkhoff_sum((w + pad)[: n + m - 1])
        total += float(exp_q(s, qp))
    return total


def log_frak_L_sequence(
    A: Potential, q: QParam | float, x0_prefix: tuple[int, ...], n_max: int
) -> np.ndarray:
    """a_n = log L_n(1)(x0) for n = 1..n_max in one incremental DP pass."""
    qp = QParam(float(q)) if not isinstance(q, QParam) else q
    _check_bucket_sizes(A, n_max)
    sb = SumBuckets(A, x0_prefix)
    out = np.empty(n_max)
    for i in range(n_max):
        sb.step()
        out[i] = sb.log_value(qp)
    return out


def asymptotic_pressure(
    A: Potential, q: QParam | float, x0_prefix: tuple[int, ...], n_max: int
) -> tuple[float, list[tuple[int, float]]]:
    """Tail-fit estimate of lim (1/n) log L_n(1)(x0), plus the sequence.

    Requires min A >= 0 (the regime where every bucket stays inside the
    exp_q domain for 0 < q < 1).  The tail n in [n_max/2, n_max] is fitted
    by least squares against 1, (log n)/n and 1/n; the constant is the
    estimate.  The (log n)/n term is essential: the constant-potential
    closed form carries exactly that correction.
    """
    if float(np.min(A.values)) < 0.0:
        raise ValueError("asymptotic pressure requires a nonnegative potential")
    a_n = log_frak_L_sequence(A, q, x0_prefix, n_max)
    ns = np.arange(1, n_max + 1)
    seq = a_n / ns
    lo = n_max // 2
    tail_n = ns[lo - 1 :].astype(float)
    design = np.column_stack(
        [np.ones_like(tail_n), np.log(tail_n) / tail_n, 1.0 / tail_n]
    )
    coef, *_ = np.linalg.lstsq(design, seq[lo - 1 :], rcond=None)
    return float(coef[0]), list(zip(ns.tolist(), seq.tolist()))


class SubaddScan(NamedTuple):
    """Result of the variational scan for the asymptotic pressure."""

    value: float
    argmax: MarkovMeasure
    excluded_fraction: float


def variational_scan_subadd(A: Potential, q: QParam | float, grid_n: int) -> SubaddScan:
    """max of h(nu) over memory-1 Markov nu with int A dnu > 0 (else excluded).

    Along any measure with positive mean potential the n-term deformed
    weights grow logarithmically, so their per-step limit vanishes and the
    variational sum reduces to the entropy alone; measures with
    nonpositive mean are excluded rather than assigned minus infinity.
    """
    if A.d != 2:
        raise SizeGuardError("the scan is implemented for d = 2")
    eps = 1e-4
    t = np.linspace(eps, 1.0 - eps, grid_n)
    p, r = np.meshgrid(t, t, indexing="ij")  # p = P(1->2), r = P(2->1)
    pi1 = r / (p + r)
    pi2 = p / (p + r)

    def hb(x):
        return -(x * np.log(x) + (1.0 - x) * np.log1p(-x))

    h = pi1 * hb(p) + pi2 * hb(r)
    if A.memory == 1:
        mean_A = pi1 * A.value((1,)) + pi2 * A.value((2,))
    elif A.memory == 2:
        mean_A = (
            pi1 * (1.0 - p) * A.value((1, 1))
            + pi1 * p * A.value((1, 2))
            + pi2 * r * A.value((2, 1))
            + pi2 * (1.0 - r) * A.value((2, 2))
        )
    else:
        raise SizeGuardError("potential memory above 2 is not supported")
    feasible = mean_A > 0.0
    if not np.any(feasible):
        raise QThermoError("no grid measure has positive mean potential")
    h_masked = np.where(feasible, h, -np.inf)
    flat = int(np.argmax(h_masked))
    i, j = np.unravel_index(flat, h.shape)
    P = np.array([[1.0 - t[i], t[i]], [t[j], 1.0 - t[j]]])
    nu = MarkovMeasure.from_transitions(2, 1, P)
    return SubaddScan(
        value=float(h[i, j]),
        argmax=nu,
        excluded_fraction=float(1.0 - feasible.mean()),
    )
