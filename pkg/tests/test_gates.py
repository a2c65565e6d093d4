import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from cvdv.gates import (
    BS,
    CD,
    Circuit,
    DurationModel,
    MeasureZ,
    PhaseRot,
    QubitReset,
    Rot,
    Squeeze,
    TMS,
    UncondDisp,
    ZRot,
    apply_cd,
    apply_gate,
    apply_sum_gate,
    circuit_duration,
    circuit_unitary,
    qubit_rotation_matrix,
    reset_qubit,
    run_circuit,
    sum_gate_bloch_messiah,
    tms_bloch_messiah,
)
from cvdv.gates import _bs_matrix, _squeeze_matrix, _tms_matrix
from cvdv.hilbert import (
    HybridState,
    OscillatorSpace,
    coherent_state,
    fidelity,
    spin_profile,
    vacuum,
)

SP = OscillatorSpace(60)


def test_cd_makes_cat():
    out = apply_cd(vacuum(SP).add_qubit(), 1.5, 0.0)
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    ref = (
        np.kron(coherent_state(SP, 1.5).data, plus)
        + np.kron(coherent_state(SP, -1.5).data, minus)
    ) / math.sqrt(2)
    assert abs(np.vdot(out.data, ref)) ** 2 > 1 - 1e-12


def test_cd_zero_is_identity():
    st_ = coherent_state(SP, 0.7).add_qubit()
    out = apply_cd(st_, 0.0, 1.3)
    assert np.max(np.abs(out.data - st_.data)) < 1e-14


def test_rot_pauli_x():
    out = apply_gate(vacuum(SP).add_qubit(), Rot(0.0, math.pi))
    t = out.tensor()
    assert abs(t[0, 0]) < 1e-12
    assert abs(t[0, 1] + 1j) < 1e-12  # -i|e>


def test_zrot_phases():
    u = np.diag([np.exp(-0.25j * math.pi), np.exp(0.25j * math.pi)])
    st_ = vacuum(SP).add_qubit(np.array([1, 1]) / math.sqrt(2))
    out = apply_gate(st_, ZRot(math.pi / 2))
    ref = np.kron(vacuum(SP).data, u @ (np.array([1, 1]) / math.sqrt(2)))
    assert np.max(np.abs(out.data - ref)) < 1e-12


def test_cd_axis_conjugation():
    # CD(b, phi) = ZRot(phi) CD(b, sx) ZRot(-phi) algebraically
    psi = coherent_state(SP, 0.5).add_qubit(np.array([0.6, 0.8j]))
    b, phi = 0.3 - 0.2j, 1.1
    lhs = apply_cd(psi, b, phi)
    rhs = run_circuit(psi, Circuit((ZRot(-phi), CD(b, 0.0), ZRot(phi))))
    assert np.max(np.abs(lhs.data - rhs.data)) < 1e-10


def test_cd_composition_phase():
    # same-axis CDs compose with a branch-independent geometric phase
    sp = OscillatorSpace(40)
    b1, b2 = 0.4 + 0.1j, -0.2 + 0.3j
    u = circuit_unitary(sp, 1, Circuit((CD(b1, 0.0), CD(b2, 0.0))))
    ph = np.exp(0.5 * (b2 * np.conj(b1) - np.conj(b2) * b1))
    v = ph * circuit_unitary(sp, 1, Circuit((CD(b1 + b2, 0.0),)))
    assert np.max(np.abs((u - v)[:40, :40])) < 1e-8


def test_norm_preserved_by_unitaries():
    st_ = coherent_state(SP, 0.8).add_qubit()
    c = Circuit((CD(0.4, 0.3), Rot(0.5, 1.0), ZRot(0.2), UncondDisp(0.3j), PhaseRot(0.7)))
    out = run_circuit(st_, c)
    assert abs(out.norm - 1.0) < 1e-10


def test_inverse_round_trip():
    psi = coherent_state(SP, 0.5).add_qubit(np.array([0.6, 0.8j]))
    c = Circuit((CD(0.3, 0.7), Rot(0.2, 1.1), ZRot(0.5), UncondDisp(0.2 - 0.1j),
                 PhaseRot(0.9), Squeeze(0.3)))
    rt = run_circuit(run_circuit(psi, c), c.inverse())
    assert abs(np.vdot(rt.data, psi.data)) ** 2 > 1 - 1e-9
    with pytest.raises(ValueError):
        Circuit((MeasureZ(),)).inverse()


def test_json_round_trip():
    c = Circuit((CD(0.3 - 0.1j, 0.7), Rot(0.2, 1.1), ZRot(0.5), QubitReset(),
                 MeasureZ(), UncondDisp(0.2j), Squeeze(0.4), PhaseRot(0.9),
                 BS(0.3, 0.1), TMS(0.2, 0.5)))
    c2 = Circuit.from_json(c.to_json())
    assert c2.gates == c.gates
    assert Circuit.from_json(c2.to_json()).gates == c.gates


def test_invalid_targets():
    st_ = vacuum(SP).add_qubit()
    with pytest.raises(ValueError):
        apply_gate(st_, CD(0.1, 0.0, mode=1))
    with pytest.raises(ValueError):
        apply_gate(st_, Rot(0.0, 1.0, qubit=2))


def test_measure_needs_rng_and_collapses():
    cat = apply_cd(vacuum(SP).add_qubit(), 1.5, 0.0)
    with pytest.raises(ValueError):
        apply_gate(cat, MeasureZ())
    rng = np.random.default_rng(7)
    counts = [0, 0]
    for _ in range(64):
        _, outcome = apply_gate(cat, MeasureZ(), rng)
        counts[outcome] += 1
    # symmetric cat: both outcomes occur
    assert counts[0] > 10 and counts[1] > 10
    st_, outcome = apply_gate(cat, MeasureZ(), np.random.default_rng(3))
    assert abs(st_.norm - 1.0) < 1e-10
    probs = st_.qubit_probabilities()
    assert abs(probs[outcome] - 1.0) < 1e-12


def test_reset_dominant_branch():
    st_ = vacuum(SP).add_qubit(np.array([0.0, 1.0]))  # |e>
    out = reset_qubit(st_)
    assert np.allclose(out.qubit_probabilities(), [1.0, 0.0])
    assert fidelity(out, vacuum(SP).add_qubit()) > 1 - 1e-12


# ---------------------------------------------------------------------------
# durations


def test_duration_examples():
    m = DurationModel()
    assert circuit_duration(Circuit(()), m) == 0.0
    assert circuit_duration(Circuit((CD(0.01, 0),)), m) == 48e-9
    assert abs(circuit_duration(Circuit((CD(1.0, 0),)), m) - 1 / (2 * math.pi * 50e3 * 20)) < 1e-15
    assert circuit_duration(Circuit((Rot(0, 1), ZRot(0.5))), m) == 48e-9
    alt = DurationModel(alt_unit_mode=True)
    assert circuit_duration(Circuit((CD(2.0, 0), Rot(0, 1))), alt) == 2e-6


@settings(deadline=None, max_examples=30)
@given(st.floats(0, 3, allow_nan=False), st.floats(0, 3, allow_nan=False))
def test_duration_additive_and_monotone(b1, b2):
    m = DurationModel()
    c1, c2 = Circuit((CD(b1, 0),)), Circuit((CD(b2, 0), Rot(0, 1)))
    together = circuit_duration(c1 + c2, m)
    assert abs(together - circuit_duration(c1, m) - circuit_duration(c2, m)) < 1e-18
    lo, hi = sorted([b1, b2])
    assert circuit_duration(Circuit((CD(lo, 0),)), m) <= circuit_duration(Circuit((CD(hi, 0),)), m)


def test_amplitude_metrics():
    c = Circuit((CD(0.25, 0), CD(-0.5j, 1.0), Rot(0, 1)))
    assert c.cd_count() == 2
    assert abs(c.cd_amplitude_sum() - 2 * (0.25 + 0.5)) < 1e-12


# ---------------------------------------------------------------------------
# spin texture under CD


def test_cd_spin_texture():
    alpha = 0.8
    out = apply_cd(vacuum(SP).add_qubit(), alpha, 0.0)
    xs = np.linspace(-1.5, 1.5, 9)
    prof = spin_profile(out, "x", xs)
    assert np.max(np.abs(prof["sx"] - np.tanh(4 * alpha * xs))) < 1e-10
    assert np.max(np.abs(prof["sz"] - 1 / np.cosh(4 * alpha * xs))) < 1e-10
    assert np.max(np.abs(prof["sy"])) < 1e-10


# ---------------------------------------------------------------------------
# two-mode Gaussian identities


def test_sum_gate_direct_vs_eigentrick():
    d = 25
    sp = OscillatorSpace(d)
    a = sp.destroy()
    x = 0.5 * (a + a.conj().T)
    p = (a - a.conj().T) / 2j
    u = expm(2j * 0.8 * np.kron(x, p))
    st_ = HybridState(
        np.kron(coherent_state(sp, 0.6).data, coherent_state(sp, -0.4j).data), (sp, sp), 0
    )
    out = apply_sum_gate(st_, 0.8)
    assert np.max(np.abs(out.data - u @ st_.data)) < 1e-12


def test_sum_bloch_messiah_identity():
    d = 30
    sp = OscillatorSpace(d)
    a = sp.destroy()
    x = 0.5 * (a + a.conj().T)
    p = (a - a.conj().T) / 2j
    u_direct = expm(2j * 1.0 * np.kron(x, p))
    lam = 1.0
    r = math.asinh(lam / 2)
    tt = math.atan2(-1 / math.cosh(r), math.tanh(r))
    u_circ = (
        _bs_matrix(d, d, math.pi + tt, -math.pi / 2)
        @ np.kron(_squeeze_matrix(d, -r), _squeeze_matrix(d, r))
        @ _bs_matrix(d, d, tt, -math.pi / 2)
    )
    proj = 3  # truncation keeps larger blocks above 1e-6 at this dim
    mask = np.zeros(d)
    mask[:proj] = 1
    pdiag = np.kron(mask, mask)
    tr = np.sum(pdiag * np.einsum("ij,ij->j", u_direct.conj(), u_circ))
    assert 1 - abs(tr / proj ** 2) ** 2 < 1e-6


def test_sum_builder_matches_gate_application():
    d = 30
    sp = OscillatorSpace(d)
    st_ = HybridState(
        np.kron(coherent_state(sp, 0.5).data, coherent_state(sp, 0.3j).data), (sp, sp), 0
    )
    out1 = run_circuit(st_, sum_gate_bloch_messiah(1.0))
    out2 = apply_sum_gate(st_, 1.0)
    assert fidelity(out1, out2) > 1 - 1e-6


def test_tms_bloch_messiah_identity():
    d = 40
    u_tms = _tms_matrix(d, d, 0.5, math.pi / 2)
    u_circ = (
        _bs_matrix(d, d, math.pi / 2, 0.0)
        @ np.kron(_squeeze_matrix(d, 0.5), _squeeze_matrix(d, 0.5))
        @ _bs_matrix(d, d, math.pi / 2, math.pi)
    )
    blk = 5
    idx = [i * d + j for i in range(blk) for j in range(blk)]
    a = u_tms[np.ix_(idx, idx)]
    b = u_circ[np.ix_(idx, idx)]
    ph = np.trace(a.conj().T @ b)
    ph /= abs(ph)
    assert np.max(np.abs(b - ph * a)) < 1e-6


def test_two_mode_gate_application():
    d = 20
    sp = OscillatorSpace(d)
    st_ = HybridState(np.kron(coherent_state(sp, 0.5).data, vacuum(sp).data), (sp, sp), 0)
    out = run_circuit(st_, Circuit((BS(math.pi, 0.0),)))
    # full swap up to phases: photon number moves to mode 2
    n2 = np.kron(np.eye(d), np.diag(np.arange(d))).astype(complex)
    assert abs(np.real(out.expectation(n2)) - 0.25) < 1e-8
    out2 = run_circuit(st_, Circuit((TMS(0.3, 0.0),)))
    assert abs(out2.norm - 1.0) < 1e-9
