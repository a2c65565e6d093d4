import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvdv.hilbert import (
    Convention,
    HybridState,
    OscillatorSpace,
    TruncationError,
    QUBIT_E,
    QUBIT_G,
    coherent_state,
    fidelity,
    fock_state,
    gaussian_width_estimate,
    operator_fidelity,
    oscillator_state,
    partial_trace,
    partial_trace_vec,
    position_amplitude,
    purity,
    quadrature_moments,
    spin_profile,
    squeezed_coherent_state,
    squeezed_vacuum,
    vacuum,
    wigner,
)

SP60 = OscillatorSpace(60)
SP60_SYM = OscillatorSpace(60, Convention.SYMMETRIC)


def test_ladder_matrix_elements_exact():
    a = SP60.destroy()
    adag = SP60.create()
    for n in range(59):
        assert adag[n + 1, n] == math.sqrt(n + 1)
        assert a[n, n + 1] == math.sqrt(n + 1)
    assert np.allclose(adag @ a, SP60.number())


def test_commutator_conventions():
    for sp, target in [(SP60, 0.5j), (SP60_SYM, 1j)]:
        x, p = sp.x(), sp.p()
        comm = x @ p - p @ x
        # exact everywhere except the truncation corner
        assert np.allclose(np.diag(comm)[: sp.dim - 1], target)


def test_unitarity_on_guarded_subspace():
    d = SP60.guard_dim
    for u in [SP60.displacement(1.5 + 0.5j), SP60.squeeze(0.4), SP60.phase_rotation(0.7)]:
        dev = (u.conj().T @ u - np.eye(60))[:d, :d]
        assert np.max(np.abs(dev)) < 1e-9


def test_coherent_state_values():
    st0 = coherent_state(SP60, 0.0)
    assert st0.data[0] == 1.0

    c = coherent_state(SP60, 2.0)
    n = np.real(c.expectation(SP60.number()))
    assert abs(n - 4.0) < 1e-6
    assert abs(c.expectation(SP60.destroy()) - 2.0) < 1e-6
    mx, _ = quadrature_moments(c, "x")
    assert abs(mx - 2.0) < 1e-6


def test_coherent_guard():
    with pytest.raises(TruncationError) as exc:
        coherent_state(OscillatorSpace(20), 4.0)
    assert exc.value.suggested_dim > 20


def test_displacement_matches_coherent():
    alpha = 1.3 - 0.4j
    direct = coherent_state(SP60, alpha).data
    via_op = SP60.displacement(alpha)[:, 0]
    assert abs(abs(np.vdot(direct, via_op)) - 1.0) < 1e-8


def test_displacement_loop_phase():
    # D(1)D(i)D(-1)D(-i) walks a unit square; phase is e^{-2i} (twice the area)
    sp = OscillatorSpace(80)
    u = sp.displacement(1) @ sp.displacement(1j) @ sp.displacement(-1) @ sp.displacement(-1j)
    block = u[:40, :40]
    assert np.max(np.abs(block - np.exp(-2j) * np.eye(40))) < 1e-12


@settings(deadline=None, max_examples=15)
@given(
    st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False),
)
def test_displacement_composition_law(alpha, beta):
    sp = OscillatorSpace(48)
    lhs = sp.displacement(beta) @ sp.displacement(alpha)
    phase = np.exp(0.5 * (beta * np.conj(alpha) - np.conj(beta) * alpha))
    rhs = phase * sp.displacement(alpha + beta)
    assert np.max(np.abs((lhs - rhs)[:16, :16])) < 1e-8


def test_displacement_bch_cross_check():
    # scaling-and-squaring vs BCH product e^{-|a|^2/2} e^{a a†} e^{-a* a}
    from scipy.linalg import expm

    sp = OscillatorSpace(60)
    alpha = 0.7 + 0.3j
    a = sp.destroy()
    bch = (
        math.exp(-abs(alpha) ** 2 / 2)
        * expm(alpha * a.conj().T)
        @ expm(-np.conj(alpha) * a)
    )
    d = sp.displacement(alpha)
    assert np.max(np.abs((d - bch)[:40, :40])) < 1e-8


def test_squeezed_coherent_moments_and_nbar():
    sp = OscillatorSpace(100)
    st_ = squeezed_coherent_state(sp, 1.0, 0.5)
    mx, vx = quadrature_moments(st_, "x")
    assert abs(mx - 1.0) < 1e-5
    assert abs(vx - 0.25 ** 2 / 1.0) < 1e-5  # delta^2/4
    nbar = np.real(st_.expectation(sp.number()))
    oracle = 1.0 + (0.25 + 4.0 - 2.0) / 4.0  # alpha^2 + (d^2 + 1/d^2 - 2)/4
    assert abs(nbar - oracle) < 1e-6


def test_squeezed_vacuum_variances():
    sp = OscillatorSpace(100)  # slow Fock tail at delta=0.34 needs headroom
    st_ = squeezed_vacuum(sp, 0.34)
    _, vx = quadrature_moments(st_, "x")
    assert abs(vx - 0.34 ** 2 / 4) < 1e-7
    assert abs(gaussian_width_estimate(st_) - 0.34) < 1e-6
    assert abs(gaussian_width_estimate(vacuum(SP60)) - 1.0) < 1e-9


def test_delta_one_is_vacuum():
    assert fidelity(squeezed_vacuum(SP60, 1.0), vacuum(SP60)) > 1 - 1e-12


def test_envelope_similarity():
    delta = 0.34
    e = SP60.envelope(delta)
    einv = np.diag(1.0 / np.diag(e))
    a = SP60.destroy()
    assert np.max(np.abs(einv @ a @ e - math.exp(-(delta ** 2)) * a)) < 1e-12
    assert abs(e[10, 10] - math.exp(-1.156)) < 1e-12


def test_phase_rotation_is_fourier():
    f = SP60.phase_rotation(math.pi / 2)
    x, p = SP60.x(), SP60.p()
    d = SP60.guard_dim
    assert np.max(np.abs((f.conj().T @ x @ f - p)[:d, :d])) < 1e-8
    assert np.max(np.abs((f.conj().T @ p @ f + x)[:d, :d])) < 1e-8


# ---------------------------------------------------------------------------
# metrics


def test_fidelity_pure_cases():
    c = coherent_state(SP60, 1.0)
    assert abs(fidelity(c, c) - 1.0) < 1e-12
    assert fidelity(fock_state(SP60, 0), fock_state(SP60, 1)) < 1e-15
    f = fidelity(coherent_state(SP60, 1.0), coherent_state(SP60, -1.0))
    assert abs(f - math.exp(-4)) < 1e-8


def test_fidelity_mixed_consistency():
    a = coherent_state(SP60, 0.8)
    b = squeezed_vacuum(SP60, 0.7)
    pure = fidelity(a, b)
    assert abs(fidelity(a, b.density()) - pure) < 1e-10
    # eigh-based Uhlmann keeps ~sqrt(eps) accuracy on rank-1 inputs
    assert abs(fidelity(a.density(), b.density()) - pure) < 1e-6
    # Uhlmann on a genuine mixture: F(rho, rho) = 1
    rho = 0.5 * a.density() + 0.5 * b.density()
    assert abs(fidelity(rho, rho) - 1.0) < 1e-7


def test_operator_fidelity_basics():
    u = SP60.displacement(0.5)
    assert abs(operator_fidelity(u, u, 40) - 1.0) < 1e-12
    assert abs(operator_fidelity(np.eye(60), np.exp(0.3j) * np.eye(60), 40) - 1.0) < 1e-12
    v = SP60.displacement(0.5001)
    f = operator_fidelity(u, v, 40)
    assert 0.9 < f < 1.0


def test_partial_trace_product_and_bell():
    psi = coherent_state(SP60, 1.2).add_qubit(QUBIT_G)
    rho_osc = psi.reduced_density([0])
    assert abs(np.trace(rho_osc) - 1.0) < 1e-10
    assert np.max(np.abs(rho_osc - coherent_state(SP60, 1.2).density())) < 1e-10

    # Bell-like branch state (|b>|+> + |-b>|->)/sqrt2: qubit branches orthogonal,
    # so the reduced oscillator purity is (1 + |<b|-b>|^2)/2 = (1 + e^{-16})/2
    beta = 2.0
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    vec = (
        np.kron(coherent_state(SP60, beta).data, plus)
        + np.kron(coherent_state(SP60, -beta).data, minus)
    ) / math.sqrt(2)
    rho = partial_trace_vec(vec, (60, 2), [0])
    target = 0.5 * (1 + math.exp(-4 * beta ** 2))
    assert abs(purity(rho) - target) < 1e-12
    assert abs(purity(rho) - 0.5) < 1e-6

    # maximally mixed qubit from (|0,g> + |1,e>)/sqrt2
    bell = (
        np.kron(fock_state(SP60, 0).data, QUBIT_G)
        + np.kron(fock_state(SP60, 1).data, QUBIT_E)
    ) / math.sqrt(2)
    rho_q = partial_trace_vec(bell, (60, 2), [1])
    assert np.max(np.abs(rho_q - np.eye(2) / 2)) < 1e-12


@settings(deadline=None, max_examples=20)
@given(st.integers(min_value=0, max_value=59))
def test_partial_trace_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    vec = rng.normal(size=60 * 2) + 1j * rng.normal(size=60 * 2)
    vec /= np.linalg.norm(vec)
    rho = partial_trace_vec(vec, (60, 2), [0])
    assert abs(np.trace(rho).real - 1.0) < 1e-10
    full = np.outer(vec, vec.conj())
    rho2 = partial_trace(full, (60, 2), [0])
    assert np.max(np.abs(rho - rho2)) < 1e-10


# ---------------------------------------------------------------------------
# wavefunctions / Wigner


def test_position_wavefunction_vacuum():
    xs = np.array([0.0, 0.5, 1.0])
    psi = position_amplitude(vacuum(SP60), xs)
    ref = (2 / math.pi) ** 0.25 * np.exp(-xs ** 2)
    assert np.max(np.abs(psi - ref)) < 1e-12


def test_wigner_vacuum_gaussian():
    xs = np.linspace(-3, 3, 61)
    w = wigner(vacuum(SP60), xs, xs)
    assert abs(w[30, 30] - 2 / math.pi) < 1e-9
    # marginal structure: W = (2/pi) e^{-2(x^2+p^2)}
    assert abs(w[30, 40] - (2 / math.pi) * math.exp(-2.0)) < 1e-9
    dx = xs[1] - xs[0]
    assert abs(w.sum() * dx * dx - 1.0) < 0.02
    assert w.min() > -1e-9


def test_wigner_fock_one_negative():
    w = wigner(fock_state(SP60, 1), np.array([0.0]), np.array([0.0]))
    assert abs(w[0, 0] + 2 / math.pi) < 1e-9


def test_wigner_density_matrix_agrees():
    st_ = coherent_state(SP60, 0.7 + 0.2j)
    xs = np.linspace(-1, 1, 5)
    w1 = wigner(st_, xs, xs)
    w2 = wigner(st_.density(), xs, xs, space=SP60)
    assert np.max(np.abs(w1 - w2)) < 1e-9


def test_wigner_cat_fringes_match_analytic():
    alpha = 2.0
    cat = oscillator_state(
        SP60, coherent_state(SP60, alpha).data + coherent_state(SP60, -alpha).data
    ).normalized()

    def analytic(x, p):
        g = lambda xx, pp: (2 / math.pi) * math.exp(-2 * (xx ** 2 + pp ** 2))
        norm = 2 * (1 + math.exp(-2 * alpha ** 2))
        return (g(x - alpha, p) + g(x + alpha, p) + 2 * g(x, p) * math.cos(4 * alpha * p)) / norm

    pts = [(0.0, 0.0), (alpha, 0.0), (0.0, math.pi / 16), (0.0, math.pi / 8), (0.3, 0.1)]
    for x, p in pts:
        w = wigner(cat, np.array([x]), np.array([p]))[0, 0]
        assert abs(w - analytic(x, p)) < 2e-4
    # fringes alternate sign along p at the origin
    w_zero = wigner(cat, np.array([0.0]), np.array([0.0]))[0, 0]
    w_trough = wigner(cat, np.array([0.0]), np.array([math.pi / 8]))[0, 0]
    assert w_zero > 0 > w_trough


def test_wigner_grid_guard_warns():
    with pytest.warns(UserWarning):
        wigner(vacuum(OscillatorSpace(16)), np.array([5.0]), np.array([0.0]))


# ---------------------------------------------------------------------------
# spin textures / width estimate


def test_spin_profile_product_state():
    st_ = coherent_state(SP60, 0.5).add_qubit(QUBIT_G)
    prof = spin_profile(st_, "x", np.linspace(-2, 2, 21))
    assert np.allclose(prof["sz"], 1.0)
    assert np.allclose(prof["sx"], 0.0)
    norm = prof["sx"] ** 2 + prof["sy"] ** 2 + prof["sz"] ** 2
    assert np.all(norm <= 1 + 1e-9)


def test_spin_profile_superposition_axis():
    # (|g>+|e>)/sqrt2 gives sx = 1 at every position
    plus = np.array([1, 1]) / math.sqrt(2)
    st_ = coherent_state(SP60, 0.3).add_qubit(plus)
    prof = spin_profile(st_, "p", np.linspace(-1, 1, 11))
    assert np.allclose(prof["sx"], 1.0, atol=1e-9)


def test_width_estimate_small_cat():
    alpha, s = 0.13, math.exp(-2 * 0.13 ** 2)
    cat = oscillator_state(
        SP60, coherent_state(SP60, alpha).data + coherent_state(SP60, -alpha).data
    ).normalized()
    est = gaussian_width_estimate(cat)
    oracle = math.sqrt(1 + 4 * alpha ** 2 / (1 + s))
    assert est > 1.0
    assert abs(est - oracle) < 1e-6


def test_hybrid_state_shape_checks():
    with pytest.raises(ValueError):
        HybridState(np.zeros(61, dtype=complex), (SP60,), 0)
    st_ = vacuum(SP60).add_qubit()
    assert st_.qubits == 1
    assert st_.data.shape == (120,)
    probs = st_.qubit_probabilities()
    assert np.allclose(probs, [1.0, 0.0])


def test_project_and_drop_qubit():
    plus = np.array([1, 1]) / math.sqrt(2)
    st_ = coherent_state(SP60, 0.4).add_qubit(plus)
    pg = st_.project_qubit(0)
    assert np.allclose(pg.qubit_probabilities(), [1.0, 0.0])
    back = pg.drop_qubit()
    assert fidelity(back, coherent_state(SP60, 0.4)) > 1 - 1e-10
    with pytest.raises(ValueError):
        # entangled qubit cannot be dropped
        bell = (
            np.kron(fock_state(SP60, 0).data, QUBIT_G)
            + np.kron(fock_state(SP60, 1).data, QUBIT_E)
        ) / math.sqrt(2)
        HybridState(bell, (SP60,), 1).drop_qubit()
