import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlbm import kinetics, quadrature
from hlbm.kinetics import FieldGradients, HomogenizedMaxwellian


def _random_maxwellian(rng, d):
    eps = rng.uniform(0.5, 2.0)
    varpi = rng.uniform(0.5, 1.0)
    u = rng.uniform(-1.0, 1.0, d)
    # keep |varpi u| eps <= 0.3
    mean = varpi * u * eps
    if np.linalg.norm(mean) > 0.3:
        u *= 0.3 / np.linalg.norm(mean)
    return HomogenizedMaxwellian(n=rng.uniform(0.5, 2.0), u=u, varpi=varpi, eps=eps, m=rng.uniform(0.5, 2.0))


def test_peak_value_and_one_dimensional_value():
    M = HomogenizedMaxwellian(n=2.0, u=[0.3, -0.1], varpi=0.8, eps=1.5)
    peak = 2.0 * 1.5**2 / (2 * math.pi / 3)
    assert kinetics.maxwellian_eval(M, M.mean) == pytest.approx(peak, rel=1e-15)
    M1 = HomogenizedMaxwellian(n=1.0, u=[0.0], varpi=1.0, eps=1.0)
    assert kinetics.maxwellian_eval(M1, [0.0]) == pytest.approx(math.sqrt(3 / (2 * math.pi)), rel=1e-15)
    assert kinetics.maxwellian_eval(M1, [0.0]) == pytest.approx(0.6910, abs=1e-4)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        HomogenizedMaxwellian(n=0.0, u=[0.0], varpi=1.0, eps=1.0)
    with pytest.raises(ValueError):
        HomogenizedMaxwellian(n=1.0, u=[0.0], varpi=1.2, eps=1.0)
    with pytest.raises(ValueError):
        HomogenizedMaxwellian(n=1.0, u=[0.0], varpi=1.0, eps=0.0)


def test_normalization_fifty_draws():
    rng = np.random.default_rng(11)
    for _ in range(50):
        M = _random_maxwellian(rng, int(rng.integers(1, 4)))
        assert quadrature.zeroth(M) == pytest.approx(M.n, rel=1e-10)


def test_node_count_is_converged():
    rng = np.random.default_rng(3)
    M = _random_maxwellian(rng, 2)
    a = quadrature.ccwv(M, nodes=40)
    b = quadrature.ccwv(M, nodes=80)
    assert np.abs(a - b).max() < 1e-12 * max(1.0, np.abs(b).max())


def test_equilibrium_moments_examples():
    M = HomogenizedMaxwellian(n=2.0, u=[1.0, 0.0], varpi=0.9, eps=1.0)
    rho, ueq, p = kinetics.equilibrium_moments(M)
    assert rho == 2.0 and np.allclose(ueq, [0.9, 0.0], atol=0, rtol=1e-15) and p == pytest.approx(2 / 3)
    rho, ueq, _ = kinetics.equilibrium_moments(HomogenizedMaxwellian(1.0, [0.4, 0.2], 1.0, 1.0))
    assert np.array_equal(ueq, [0.4, 0.2])
    _, ueq, p = kinetics.equilibrium_moments(HomogenizedMaxwellian(3.0, [0.0, 0.0], 0.7, 2.0))
    assert np.all(ueq == 0) and p == pytest.approx(3.0 / 12.0, rel=1e-15)


def test_equilibrium_moments_match_quadrature():
    rng = np.random.default_rng(5)
    for _ in range(25):
        M = _random_maxwellian(rng, int(rng.integers(2, 4)))
        rho, ueq, p = kinetics.equilibrium_moments(M)
        assert quadrature.zeroth(M) * M.m == pytest.approx(rho, rel=1e-10)
        assert np.allclose(quadrature.first(M), ueq, rtol=0, atol=1e-10)
        T2 = quadrature.second_central(M)
        assert np.trace(T2) / M.d == pytest.approx(p + M.rho * M.beta**2 * (M.u @ M.u) / M.d, rel=1e-8)


def test_second_moment_examples():
    M = HomogenizedMaxwellian(n=1.0, u=[0.0, 0.0], varpi=0.8, eps=0.5)
    assert np.allclose(kinetics.central_moment2(M), M.pressure * np.eye(2), rtol=1e-15, atol=0)
    M = HomogenizedMaxwellian(n=1.0, u=[0.7, -0.3], varpi=1.0, eps=0.5)
    assert np.allclose(kinetics.central_moment2(M), M.pressure * np.eye(2), rtol=1e-15, atol=0)


def test_second_moment_exact_entry():
    # exact Gaussian value 1/3 + (1 - varpi)^2 u_1^2, confirmed by quadrature
    M = HomogenizedMaxwellian(n=1.0, u=[1.0, 0.0], varpi=0.9, eps=1.0)
    T = kinetics.central_moment2(M)
    assert T[0, 0] == pytest.approx(1 / 3 + 0.01, rel=1e-14)
    assert T[0, 0] == pytest.approx(quadrature.second_central(M)[0, 0], abs=1e-12)


def test_third_moment_examples():
    assert np.all(kinetics.central_moment3(HomogenizedMaxwellian(1.0, [0.0, 0.0], 0.8, 1.0)) == 0)
    assert np.all(kinetics.central_moment3(HomogenizedMaxwellian(1.0, [0.5, 0.1], 1.0, 1.0)) == 0)
    M = HomogenizedMaxwellian(n=1.0, u=[1.0, 0.0], varpi=0.9, eps=1.0)
    T = kinetics.central_moment3(M)
    assert T[0, 0, 0] == pytest.approx(quadrature.third_central(M)[0, 0, 0], abs=1e-8)
    assert T[0, 0, 0] == pytest.approx(-3 * 0.1 / 3 - 0.1**3, rel=1e-14)


def test_mixed_moment_isotropic_entries():
    M = HomogenizedMaxwellian(n=2.0, u=[0.0, 0.0], varpi=0.9, eps=0.7)
    T = kinetics.mixed_moment_ccwv(M)
    lead = 2.0 / (9 * 0.7**4)
    assert T[0, 0, 1, 1] == pytest.approx(lead, rel=1e-14)
    assert T[0, 1, 0, 1] == pytest.approx(lead, rel=1e-14)
    assert T[0, 0, 0, 0] == pytest.approx(3 * lead, rel=1e-14)


def test_mixed_moment_full_tensor_example():
    M = HomogenizedMaxwellian(n=1.0, u=[0.2, 0.1], varpi=0.95, eps=1.0)
    assert np.abs(kinetics.mixed_moment_ccwv(M) - quadrature.ccwv(M)).max() < 1e-8


@pytest.mark.parametrize("d", [2, 3])
def test_closed_forms_match_quadrature(d):
    rng = np.random.default_rng(100 + d)
    pairs = (
        (kinetics.central_moment2, quadrature.second_central),
        (kinetics.central_moment3, quadrature.third_central),
        (kinetics.moment_ccw, quadrature.ccw),
        (kinetics.mixed_moment_ccwv, quadrature.ccwv),
    )
    for _ in range(25):
        M = _random_maxwellian(rng, d)
        for closed, oracle in pairs:
            assert np.abs(closed(M) - oracle(M)).max() < 1e-8


def _rotate(u, T, R):
    idx = "abcd"[: T.ndim]
    out = T
    for k in range(T.ndim):
        sub = idx.replace(idx[k], "z")
        out = np.einsum(f"{idx[k]}z,{sub}->{idx}", R, out)
    return out


def test_ninety_degree_rotation_invariance():
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    M = HomogenizedMaxwellian(n=1.3, u=[0.4, -0.2], varpi=0.85, eps=0.9)
    Mr = HomogenizedMaxwellian(n=1.3, u=R @ M.u, varpi=0.85, eps=0.9)
    for fn in (kinetics.central_moment2, kinetics.central_moment3, kinetics.moment_ccw, kinetics.mixed_moment_ccwv):
        assert np.array_equal(_rotate(M.u, fn(M), R), fn(Mr))


def test_correction_scales_with_fourth_power():
    nu, K = 0.1, 0.5
    u = np.array([0.3, 0.2])
    eps = np.array([0.1, 0.05, 0.025, 0.0125])
    corr = []
    for e in eps:
        vp = 1 - 3 * nu**2 * e**2 / K
        M = HomogenizedMaxwellian(1.0, u, vp, e)
        corr.append(np.abs(kinetics.central_moment2(M) - M.pressure * np.eye(2)).max())
    slope = np.polyfit(np.log(eps), np.log(corr), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.3)


def test_population_reduces_to_equilibrium():
    M = HomogenizedMaxwellian(1.2, [0.3, -0.1], 0.9, 0.8)
    v = np.random.default_rng(0).normal(size=(10, 2))
    f = kinetics.chapman_enskog_population(M, FieldGradients(2), 0.1, v)
    assert np.array_equal(f, kinetics.maxwellian_eval(M, v))


def _linear_fields():
    rho0, u0 = 1.1, np.array([0.3, -0.2])
    grad_rho = np.array([0.2, -0.1])
    grad_u = np.array([[0.3, 0.5], [-0.2, 0.1]])
    dt_u = np.array([0.05, -0.07])
    F = np.array([0.6, 0.4])
    return rho0, u0, grad_rho, grad_u, dt_u, F


def test_material_derivative_against_finite_differences():
    """``(d_t + v.grad_x + F.grad_v) M`` by central differences of the raw density."""
    rho0, u0, gr, gu, dtu, F = _linear_fields()
    vp, eps = 0.85, 0.8
    drho_dt = -(u0 @ gr) - rho0 * np.trace(gu)  # mass conservation

    def M_at(x, t, v):
        rho = rho0 + gr @ x + drho_dt * t
        u = u0 + x @ gu + dtu * t
        return kinetics.maxwellian_eval(HomogenizedMaxwellian(rho, u, vp, eps), v)

    M = HomogenizedMaxwellian(rho0, u0, vp, eps)
    G = FieldGradients(2, grad_u=gu, dt_u=dtu, grad_rho=gr, F=F)
    h = 1e-5
    x0 = np.zeros(2)
    I = np.eye(2)
    for v in (np.array([0.7, -0.4]), np.array([-1.2, 0.9]), np.array([0.0, 0.0])):
        dt = (M_at(x0, h, v) - M_at(x0, -h, v)) / (2 * h)
        adv = sum(v[a] * (M_at(x0 + h * I[a], 0, v) - M_at(x0 - h * I[a], 0, v)) / (2 * h) for a in range(2))
        force = sum(F[a] * (M_at(x0, 0, v + h * I[a]) - M_at(x0, 0, v - h * I[a])) / (2 * h) for a in range(2))
        expected = dt + adv + force
        got = kinetics.material_derivative_factor(M, G, v) * kinetics.maxwellian_eval(M, v)
        assert got == pytest.approx(expected, rel=1e-7, abs=1e-10)


def test_ansatz_zeroth_moment_term_by_term():
    rho0, u0, gr, gu, dtu, F = _linear_fields()
    M = HomogenizedMaxwellian(rho0, u0, 0.9, 0.7)
    nu = 0.1
    e2 = M.eps**2
    full = FieldGradients(2, grad_u=gu, dt_u=dtu, grad_rho=gr, F=F)
    total = quadrature.integrate_density(M, lambda v: kinetics.chapman_enskog_population(M, full, nu, v))
    # closed forms of the zeroth moment of each term, using <c> = -beta u, <c_w> = 0
    beta = M.beta
    a = np.trace(gu)
    b = -beta * (u0 @ gr) / rho0
    d = 3 * e2 * M.varpi * (np.trace(gu) / (3 * e2))  # <c_w,k v_l> = s^2 delta
    expected = M.n * (1 - 3 * e2 * nu * (-a + b + 0.0 + d - 0.0))
    assert total == pytest.approx(expected, rel=1e-10)
    only_div = FieldGradients(2, grad_u=np.diag([0.2, 0.1]))
    z = quadrature.integrate_density(M, lambda v: kinetics.chapman_enskog_population(M, only_div, nu, v))
    assert z == pytest.approx(M.n * (1 + 3 * e2 * nu * 0.3 * (1 - M.varpi)), rel=1e-10)


def test_stress_uniform_flow_is_pressure():
    P, order = kinetics.chapman_enskog_stress(1.3, [0.2, 0.1], FieldGradients(2), 0.1, 0.5, 1.0)
    assert order == 2
    assert np.allclose(P, 1.3 / (3 * 0.25) * np.eye(2), rtol=1e-15, atol=0)


def test_stress_pure_shear_is_newtonian():
    s, nu, rho = 0.7, 0.1, 1.4
    gu = np.zeros((2, 2))
    gu[1, 0] = s  # d u_x / d y
    P, _ = kinetics.chapman_enskog_stress(rho, [0.3, 0.0], FieldGradients(2, grad_u=gu), nu, 0.5, 1.0)
    assert P[0, 1] == pytest.approx(-nu * rho * s, rel=1e-13)
    assert np.allclose(P, kinetics.newtonian_stress(rho, gu, nu, 0.5), rtol=1e-13, atol=1e-15)


def test_population_second_moment_matches_stress():
    rho0, u0, gr, gu, dtu, F = _linear_fields()
    G = FieldGradients(2, grad_u=gu, dt_u=dtu, grad_rho=gr, F=F)
    eps, vp, nu = 0.6, 0.93, 0.1
    M = HomogenizedMaxwellian(rho0, u0, vp, eps)
    Q = quadrature.integrate_density(
        M, lambda v: np.einsum("n,ni,nj->nij", kinetics.chapman_enskog_population(M, G, nu, v), v - u0, v - u0)
    )
    P, _ = kinetics.chapman_enskog_stress(rho0, u0, G, nu, eps, vp)
    assert np.abs(Q - P).max() < 1e-10 * np.abs(P).max()


def test_stress_deviation_is_second_order():
    nu, K = 0.1, 1.0
    rho0, u0, gr, gu, dtu, F = _linear_fields()
    G = FieldGradients(2, grad_u=gu, dt_u=dtu, grad_rho=gr, F=F)
    eps = [0.1, 0.05, 0.025]
    dev = []
    for e in eps:
        vp = 1 - 3 * nu**2 * e**2 / K
        P, _ = kinetics.chapman_enskog_stress(rho0, u0, G, nu, e, vp)
        dev.append(np.abs(P - kinetics.newtonian_stress(rho0, gu, nu, e)).max())
    slope = np.polyfit(np.log(eps), np.log(dev), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.3)


def test_moment_set_pressure_is_mean_trace():
    P = np.array([[2.0, 0.1], [0.1, 4.0]])
    ms = kinetics.moment_set(P, 1.0, [0.0, 0.0])
    assert ms.p == 3.0


def test_momentum_sink_examples():
    assert np.all(kinetics.momentum_balance_rhs(1.0, [0.3, 0.1], 0.1, math.inf) == 0)
    assert np.allclose(kinetics.momentum_balance_rhs(1.0, [1.0, 0.0], 0.1, 0.01), [-10.0, 0.0], rtol=1e-15)


def test_sink_identity_random_samples():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        nu, tau = rng.uniform(0.01, 1.0, 2)
        K = rng.uniform(nu * tau, 100.0)
        rho = rng.uniform(0.5, 2.0)
        u = rng.uniform(-1, 1, 2)
        varpi = 1.0 - nu * tau / K
        a = kinetics.momentum_balance_rhs(rho, u, nu, K)
        b = kinetics.relaxation_sink(rho, u, tau, varpi)
        # measured against the size of the two collision terms rho u / tau that cancel
        worst = max(worst, np.abs(a - b).max() / (rho * np.abs(u).max() / tau))
    assert worst < 1e-14


@settings(max_examples=40, deadline=None)
@given(
    ux=st.floats(-1, 1), uy=st.floats(-1, 1), varpi=st.floats(0.0, 1.0), eps=st.floats(0.3, 3.0)
)
def test_tensors_are_symmetric_in_c_indices(ux, uy, varpi, eps):
    M = HomogenizedMaxwellian(1.0, [ux, uy], varpi, eps)
    T2 = kinetics.central_moment2(M)
    T3 = kinetics.central_moment3(M)
    T4 = kinetics.mixed_moment_ccwv(M)
    assert np.array_equal(T2, T2.T)
    assert np.allclose(T3, T3.transpose(1, 0, 2)) and np.allclose(T3, T3.transpose(2, 1, 0))
    assert np.allclose(T4, T4.transpose(1, 0, 2, 3))
