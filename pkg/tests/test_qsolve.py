import math

import numpy as np
import pytest

from qthermo.errors import NonConvergenceError, QExpDomainError, SizeGuardError
from qthermo.qfun import QParam, log_q
from qthermo.qsolve import (
    _neg_log_q_inv,
    a_q_transform,
    bridge_general_g,
    bridge_half,
    derivative_identity_report,
    explimeq_family,
    jana_closed_form,
    pressure_derivative,
    q_equilibrium,
    qruelle_residual,
    qruelle_solve,
    supex_closed_form,
    two_symbol_roots,
)
from qthermo.ruelle import classical_pressure, equilibrium_markov, random_jacobian
from qthermo.shift import Potential
from qthermo.variational import q_pressure_scan

JANA = Potential(d=2, memory=2, values=np.array([0.0, 2.0, 3.5, 0.0]))


def test_zero_potential_unique_root_strict():
    # strict odd-order q-tilde: single root c = -log_q(1/d), phi = 0
    for qt in (2.0 / 3.0, 1.5):
        roots = qruelle_solve(Potential.constant(2, 0.0), qt)
        assert len(roots) == 1
        r = roots[0]
        assert r.c == pytest.approx(-float(log_q(0.5, qt)), abs=1e-12)
        assert np.max(np.abs(r.phi)) <= 1e-10
        assert r.residual <= 1e-10
    assert -float(log_q(0.5, 1.5)) == pytest.approx(2.0 * (math.sqrt(2.0) - 1.0), abs=1e-12)


def test_zero_potential_census_even_order():
    # q-tilde = 1/2 squares the base, so extra sign branches appear
    roots = qruelle_solve(Potential.constant(2, 0.0), 0.5)
    cs = sorted(r.c for r in roots)
    assert len(roots) == 2
    assert cs[0] == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-9)
    assert cs[1] == pytest.approx(2.0 + math.sqrt(2.0), abs=1e-9)
    assert all(abs(r.phi[1]) <= 1e-9 for r in roots)
    # exactly one branch has strictly positive summands
    assert sorted(r.summands_positive for r in roots) == [False, True]


def test_zero_potential_boundary_roots_flagged():
    default = qruelle_solve(Potential.constant(2, 0.0), 0.5)
    with_b = qruelle_solve(Potential.constant(2, 0.0), 0.5, allow_boundary=True)
    assert len(with_b) == len(default) + 2
    extra = [r for r in with_b if r.boundary]
    assert len(extra) == 2
    for r in extra:
        assert r.c == pytest.approx(2.0, abs=1e-9)
        assert abs(abs(r.phi[1]) - 2.0) <= 1e-8
    assert not any(r.boundary for r in default)


def test_jana_two_branches_true_constants():
    roots = qruelle_solve(JANA, 0.5)
    assert len(roots) == 2
    cs = sorted(r.c for r in roots)
    assert cs[0] == pytest.approx(3.0442810861169263, abs=1e-9)
    assert cs[1] == pytest.approx(3.7057189138830737, abs=1e-9)
    for r in roots:
        assert r.phi[0] == 0.0
        assert r.phi[1] == pytest.approx(-0.75, abs=1e-9)
        assert r.residual <= 1e-10
        assert not r.summands_positive


@pytest.mark.xfail(
    strict=True,
    reason="the target branch constant 3.85405 solves only the first of the "
    "two context equations; solving the full system gives c = 3.70572 and "
    "c = 3.04428 (both with phi2 = (a12-a21)/2 = -0.75)",
)
def test_jana_target_constant():
    roots = qruelle_solve(JANA, 0.5)
    assert any(abs(r.c - 3.85405) <= 1e-4 for r in roots)


def test_jana_closed_form_pairs():
    pairs = jana_closed_form(2.0, 3.5)
    assert len(pairs) == 2
    cs = {round(c, 6) for _, c in pairs}
    assert cs == {round(3.8540496217739157, 6)}
    phis = sorted(p for p, _ in pairs)
    assert phis[0] == pytest.approx(-2.3959503782260843, abs=1e-12)
    assert phis[1] == pytest.approx(-0.8959503782260843, abs=1e-12)


@pytest.mark.xfail(
    strict=True,
    reason="the pair (phi2, c) = (-0.89595, 3.85405) leaves a residual of "
    "0.1308 on the second context equation; only the first is satisfied",
)
def test_jana_closed_form_full_residual():
    phi2, c = jana_closed_form(2.0, 3.5)[0]
    res = qruelle_residual(JANA, 0.5, np.array([0.0, phi2]), c)
    assert float(np.max(np.abs(res))) <= 1e-4


def test_jana_closed_form_residual_split():
    # first context equation is satisfied, second is off by a frozen margin
    phi2, c = jana_closed_form(2.0, 3.5)[0]
    res = np.abs(qruelle_residual(JANA, 0.5, np.array([0.0, phi2]), c))
    assert res[0] <= 1e-6
    assert res[1] == pytest.approx(0.1307642965739002, abs=1e-6)


def test_two_symbol_roots_solve_the_system():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a12 = float(rng.uniform(0.0, 3.0))
        a21 = float(rng.uniform(0.0, 3.0))
        sbar = 0.5 * (a12 + a21)
        if 8.0 - sbar**2 <= 0.01:
            continue
        phi2, cs = two_symbol_roots(a12, a21)
        A = Potential(d=2, memory=2, values=np.array([0.0, a12, a21, 0.0]))
        for c in cs:
            res = qruelle_residual(A, 0.5, np.array([0.0, phi2]), c)
            assert float(np.max(np.abs(res))) <= 1e-10


def test_supex_closed_form_and_solver():
    phi2, c = supex_closed_form(2.0, 5.5, 0.0, 0.0, 0.0)
    assert c == pytest.approx(5.75, abs=1e-12)
    assert phi2 == pytest.approx(2.718245836551854, abs=1e-9)
    A = Potential(d=2, memory=1, values=np.array([2.0, 5.5]))
    roots = qruelle_solve(A, 0.5)
    assert any(abs(r.c - 5.75) <= 1e-9 for r in roots)
    # solver gauge puts phi=0 on the first context; shift and compare
    best = min(roots, key=lambda r: abs(r.c - 5.75))
    assert abs(-best.phi[1] - phi2) <= 1e-7 or abs(best.phi[1] + 0.78175416) <= 1e-6


def test_supex_derivative():
    A = Potential(d=2, memory=1, values=np.array([2.0, 5.5]))
    for b, want in (((1.0, 0.0), 0.5), ((0.0, 1.0), 0.5), ((1.0, 1.0), 1.0)):
        B = Potential(d=2, memory=1, values=np.array(b))
        d = pressure_derivative(A, B, 1.5)
        assert d == pytest.approx(want, abs=1e-6)


@pytest.mark.parametrize(
    "qt,q1,q2,expected",
    [
        (2.0 / 3.0, 0.3, 0.6, (0.857533, 0.52199, 0.655413, 0.991701)),
        (4.0 / 5.0, 0.2, 0.3, (2.18972, 0.30612, 1.15786, 1.37610)),
    ],
)
def test_explimeq_family(qt, q1, q2, expected):
    a12, a22, phi2, c = explimeq_family(qt, q1, q2)
    for got, want in zip((a12, a22, phi2, c), expected):
        assert got == pytest.approx(want, abs=1e-5)
    A = Potential(d=2, memory=2, values=np.array([0.0, a12, 0.0, a22]))
    res = qruelle_residual(A, qt, np.array([0.0, phi2]), c)
    assert float(np.max(np.abs(res))) <= 1e-12
    roots = qruelle_solve(A, qt)
    rec = min(max(abs(r.c - c), abs(r.phi[1] - phi2)) for r in roots)
    assert rec <= 1e-6
    assert any(r.summands_positive for r in roots)


def test_explimeq_rejects_bad_parameters():
    with pytest.raises(ValueError):
        explimeq_family(0.5, 0.0, 0.5)
    with pytest.raises(ValueError):
        explimeq_family(0.5, 0.3, 1.0)


def test_residual_domain_error_names_context():
    A = Potential.constant(2, 0.0)
    with pytest.raises(QExpDomainError) as err:
        qruelle_residual(A, 2.0 / 3.0, np.zeros(2), 10.0)
    assert "context" in str(err.value)


def test_accepted_roots_satisfy_reported_residual():
    rng = np.random.default_rng(8)
    for _ in range(5):
        A = Potential(d=2, memory=2, values=rng.normal(0.0, 0.7, 4))
        for r in qruelle_solve(A, 0.5):
            res = qruelle_residual(A, 0.5, r.phi, r.c)
            assert float(np.max(np.abs(res))) <= 1e-10


def test_c_set_invariant_under_coboundary():
    # replacing A by A + f(sigma .) - f(.) re-gauges phi but keeps every c
    f = np.array([0.0, 0.6])
    vals = JANA.values.copy()
    for i, (a, b) in enumerate([(1, 1), (1, 2), (2, 1), (2, 2)]):
        vals[i] += f[b - 1] - f[a - 1]
    pert = Potential(d=2, memory=2, values=vals)
    cs0 = sorted(r.c for r in qruelle_solve(JANA, 0.5))
    cs1 = sorted(r.c for r in qruelle_solve(pert, 0.5))
    assert len(cs0) == len(cs1)
    assert np.max(np.abs(np.array(cs0) - np.array(cs1))) <= 1e-8


def test_positive_branch_jacobian_identity():
    # -log_q(1/J) = A + phi - phi.sigma - c as tables, on positive branches
    a12, a22, phi2, c = explimeq_family(2.0 / 3.0, 0.3, 0.6)
    A = Potential(d=2, memory=2, values=np.array([0.0, a12, 0.0, a22]))
    root = next(r for r in qruelle_solve(A, 2.0 / 3.0) if r.summands_positive)
    J = root.jacobian
    lhs = -log_q(1.0 / J.values, QParam(2.0 - 2.0 / 3.0))
    rhs = np.empty(4)
    for i, (a, b) in enumerate([(1, 1), (1, 2), (2, 1), (2, 2)]):
        rhs[i] = A.values[i] + root.phi[a - 1] - root.phi[b - 1] - root.c
    assert float(np.max(np.abs(lhs - rhs))) <= 1e-10


def test_q_equilibrium_zero_potential():
    p, mu, branch = q_equilibrium(Potential.constant(2, 0.0), 0.5)
    assert p == pytest.approx(2.0 * (math.sqrt(2.0) - 1.0), abs=1e-10)
    assert np.allclose(mu.P, 0.5, atol=1e-9)
    assert branch.summands_positive


def test_q_equilibrium_bowen_round_trip():
    J = random_jacobian(2, 1, seed=3)
    A = _neg_log_q_inv(J, QParam(0.5))
    p, mu, branch = q_equilibrium(A, 0.5)
    assert abs(p) <= 1e-10
    muJ = equilibrium_markov(J)
    assert float(np.max(np.abs(mu.P - muJ.P))) <= 1e-10


def test_q_equilibrium_needs_positive_branch():
    with pytest.raises(NonConvergenceError):
        q_equilibrium(JANA, 1.5)


@pytest.mark.xfail(
    strict=True,
    reason="the closed-form Markov q-entropy does not satisfy the claimed "
    "variational principle: for A = -log_q(1/J) (seed 0, q=1/2) the scan "
    "supremum of H_q + int A exceeds the solved constant c = 0 by about "
    "0.05, far beyond grid resolution",
)
def test_positive_branch_matches_scan():
    J = random_jacobian(2, 1, seed=0)
    A = _neg_log_q_inv(J, QParam(0.5))
    p, mu, branch = q_equilibrium(A, 0.5)
    scan = q_pressure_scan(A, 0.5, 400)
    assert abs(scan.value - p) <= 1e-3
    assert float(np.max(np.abs(scan.argmax.P - mu.P))) <= 1e-2


def test_scan_dominates_positive_branch_constant():
    # one directional half survives: the scan value is never below c
    J = random_jacobian(2, 1, seed=0)
    A = _neg_log_q_inv(J, QParam(0.5))
    p, _, _ = q_equilibrium(A, 0.5)
    scan = q_pressure_scan(A, 0.5, 200)
    assert scan.value >= p - 1e-6


def test_a_q_transform():
    A = Potential(d=2, memory=1, values=np.array([0.4, -0.3]))
    same = a_q_transform(A, 1.0)
    assert np.array_equal(same.values, A.values)
    Aq = a_q_transform(A, 0.5)
    assert np.allclose(Aq.values, np.log1p(0.5 * A.values) / 0.5)
    # the transform shrinks the potential, hence the pressure
    assert classical_pressure(A) >= classical_pressure(Aq) - 1e-12
    with pytest.raises(QExpDomainError):
        a_q_transform(Potential(d=2, memory=1, values=np.array([-2.5, 0.0])), 0.5)


def test_bridge_half_zero_potential():
    B, phiB, cB = bridge_half(Potential.constant(2, 0.0))
    assert cB == pytest.approx(math.log(2.0), abs=1e-12)
    assert np.max(np.abs(phiB)) <= 1e-12
    assert np.allclose(B.values, 2.0 + math.log(2.0) - 2.0 * math.sqrt(2.0), atol=1e-12)
    res = qruelle_residual(B, 1.5, phiB, cB)
    assert float(np.max(np.abs(res))) <= 1e-9


def test_bridge_half_random_inputs():
    rng = np.random.default_rng(0)
    for _ in range(10):
        A = Potential(d=2, memory=1, values=rng.uniform(-1.5, 1.5, 2))
        B, phiB, cB = bridge_half(A)
        res = qruelle_residual(B, 1.5, phiB, cB)
        assert float(np.max(np.abs(res))) <= 1e-9


def test_bridge_half_domain_guard():
    with pytest.raises(QExpDomainError):
        bridge_half(Potential(d=2, memory=1, values=np.array([-2.0, 0.5])))


def test_bridge_general_matches_half_form():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a = float(rng.uniform(-1.9, 3.0))
        a1, a2, C = rng.normal(size=3)
        r = a1 - a2 - C
        g = bridge_general_g(a, a1, a2, C, 0.5)
        # scalar identity: exp_{3/2}(g + r) = exp_{1/2}(a) e^r
        lhs = (1.0 - 0.5 * (g + r)) ** -2.0
        rhs = (1.0 + 0.5 * a) ** 2.0 * math.exp(r)
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_derivative_identity_report_frozen():
    J = random_jacobian(2, 1, seed=3)
    A = _neg_log_q_inv(J, QParam(0.5))
    B = Potential(d=2, memory=1, values=np.array([0.4, -0.2]))
    rep = derivative_identity_report(A, B)
    assert rep.dPds == pytest.approx(0.3530849904, abs=1e-7)
    assert rep.defect <= 1e-6
    assert rep.quotient == pytest.approx(rep.dPds, abs=1e-6)


def test_size_guard():
    with pytest.raises(SizeGuardError):
        qruelle_solve(Potential(d=2, memory=5, values=np.zeros(32)), 0.5)
