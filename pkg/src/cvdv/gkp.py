"""Finite-energy GKP codes on square and hexagonal lattices.

Codewords live on a displacement lattice with an energy envelope
exp(-delta^2 n) applied on top of the infinite-energy comb.  The module
provides the codeword constructions (exact comb, binomial-weighted,
Gaussian-envelope), photon-loss error words, the small-big-small (SBS)
dissipative stabilization circuit, and stabilizer-expectation metrics in
both the non-unitary (envelope-conjugated) and unitary (displacement)
forms.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import expm

from .gates import CD, Circuit, QubitReset, circuit_unitary
from .hilbert import (
    HybridState,
    OscillatorSpace,
    coherent_state,
    position_wavefunctions,
    squeezed_coherent_state,
)


class UnsupportedCodewordError(ValueError):
    """Requested codeword label is not defined for this lattice."""


_FAMILIES = ("square", "rectangular", "hexagonal")

# Stage count for the preparation chain, N * delta^2 = 0.32.  The published
# table wins over the formula where they disagree.
_DEPTH_TABLE = {0.1: 31, 0.2: 7, 0.3: 3, 0.4: 1}


def chain_depth(delta: float) -> int:
    """Number of conditional-displacement stages needed at envelope delta."""
    for key, n in _DEPTH_TABLE.items():
        if abs(delta - key) < 1e-9:
            return n
    return max(1, round(0.32 / delta**2))


@dataclass(frozen=True)
class GkpLattice:
    """Displacement lattice of a GKP code.

    The stabilizer lattice cell has phase-space area 2*pi (Wigner units,
    x = (a + a†)/2), so logical displacements at half a lattice vector
    enclose area pi/d per logical cell.
    """

    family: str = "square"
    d: int = 2
    aspect: Optional[float] = None  # rectangular only; left None = undetermined

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown lattice family {self.family!r}")
        if self.d < 2:
            raise ValueError("qudit dimension must be >= 2")
        if self.aspect is not None and self.aspect <= 0:
            raise ValueError("aspect ratio must be positive")

    @property
    def lattice_constant(self) -> float:
        """Length of a stabilizer lattice generator (Wigner position units)."""
        base = math.sqrt(math.pi * self.d)
        if self.family == "hexagonal":
            return base * math.sqrt(2.0 / math.sqrt(3.0))
        return base

    @property
    def generators(self) -> tuple:
        """Stabilizer displacement generators (g1, g2) as complex amplitudes."""
        l = self.lattice_constant
        if self.family == "hexagonal":
            return (l, l * np.exp(2j * math.pi / 3.0))
        if self.family == "rectangular":
            eta = 1.0 if self.aspect is None else self.aspect
            return (l * math.sqrt(eta), 1j * l / math.sqrt(eta))
        return (l, 1j * l)

    @property
    def logical_vectors(self) -> tuple:
        """(X_L, Z_L) displacement amplitudes, half of the paired generator."""
        g1, g2 = self.generators
        return (g1 / self.d, g2 / self.d)

    def cell_area(self) -> float:
        g1, g2 = self.generators
        return abs(float(np.imag(g1 * np.conj(g2))))


@dataclass(frozen=True)
class GkpCode:
    """A finite-energy GKP code bound to a truncated oscillator space.

    window is the peak index cutoff M of the codeword comb; the default
    keeps the truncated-window norm deficit below 1e-8.
    """

    lattice: GkpLattice
    delta: float
    space: OscillatorSpace
    window: int = 0

    def __post_init__(self):
        if not 0.0 < self.delta <= 0.6:
            raise ValueError("delta outside validated range (0, 0.6]")
        if self.window <= 0:
            need = math.ceil(3.0 / (math.sqrt(math.pi) * self.delta)) + 2
            object.__setattr__(self, "window", max(need, 6))

    @classmethod
    def square(cls, delta: float, dim: Optional[int] = None, d: int = 2) -> "GkpCode":
        if dim is None:
            dim = default_gkp_dim(delta)
        return cls(GkpLattice("square", d), delta, OscillatorSpace(dim))

    @classmethod
    def hexagonal(cls, delta: float, dim: Optional[int] = None, d: int = 2) -> "GkpCode":
        if dim is None:
            dim = default_gkp_dim(delta)
        return cls(GkpLattice("hexagonal", d), delta, OscillatorSpace(dim))

    @property
    def epsilon(self) -> float:
        """SBS small-gate amplitude (l/4) * delta^2."""
        return (self.lattice.lattice_constant / 4.0) * self.delta**2


def default_gkp_dim(delta: float) -> int:
    if not 0.0 < delta <= 0.6:
        raise ValueError("delta must be in (0, 0.6]")
    # envelope amplitude e^{-delta^2 n} < 1e-8 at the cutoff
    return int(math.ceil(18.5 / delta**2)) + 20


def _comb_state(code: GkpCode, positions, weights) -> np.ndarray:
    """Envelope-damped comb of position eigenstates, in the Fock basis."""
    space = code.space
    xs = np.asarray(positions, dtype=float)
    phi = position_wavefunctions(space, xs)  # [n, i]
    vec = phi @ np.asarray(weights, dtype=complex)
    vec *= np.exp(-code.delta**2 * np.arange(space.dim))
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise UnsupportedCodewordError("comb collapsed to zero under envelope")
    return vec / norm


def _square_codeword_vec(code: GkpCode, mu: int) -> np.ndarray:
    l = code.lattice.lattice_constant
    d = code.lattice.d
    m = np.arange(-code.window, code.window + 1)
    xs = (m * d + mu) * (l / d)
    return _comb_state(code, xs, np.ones_like(xs))


def _hex_codeword_vec(code: GkpCode) -> np.ndarray:
    """Group-sum construction: envelope applied to the stabilizer-group
    projection of the vacuum, with the logical-Z coset included to pin mu=0.

    Collinear powers of a displacement compose phase-free, and cross terms
    pick up exp(i m n Im(g1 conj(g2))) = 1 because the cell area is exactly
    2*pi, so the group sum reduces to coherent states with explicit coset
    phases.
    """
    space = code.space
    g1, g2 = code.lattice.generators
    z = g2 / 2.0  # logical Z displacement
    M = max(3, math.ceil(code.window / 2))
    # drop group elements the envelope suppresses below ~1e-8, and in any
    # case stay under the coherent-amplitude truncation bound of the space
    rmax = min(4.5 / code.delta, math.sqrt(space.dim / 4.0))
    vec = np.zeros(space.dim, dtype=complex)
    for m in range(-M, M + 1):
        for n in range(-M, M + 1):
            gamma = m * g1 + n * g2
            if abs(gamma) > rmax:
                continue
            vec += coherent_state(space, gamma).data
            phase = np.exp(1j * np.imag(gamma * np.conj(z)))
            if abs(gamma + z) <= rmax:
                vec += phase * coherent_state(space, gamma + z).data
    vec *= np.exp(-code.delta**2 * np.arange(space.dim))
    return vec / np.linalg.norm(vec)


def _lowdin_pair(v0: np.ndarray, v1: np.ndarray) -> tuple:
    """Symmetrically orthonormalize two nearly orthogonal unit vectors."""
    s = np.vdot(v0, v1)
    basis = np.stack([v0, v1], axis=1)
    gram = np.array([[1.0, s], [np.conj(s), 1.0]])
    evals, evecs = np.linalg.eigh(gram)
    inv_sqrt = evecs @ np.diag(evals**-0.5) @ evecs.conj().T
    ortho = basis @ inv_sqrt
    return ortho[:, 0], ortho[:, 1]


def codeword(code: GkpCode, mu: Union[int, str] = 0) -> HybridState:
    """Exact finite-energy codeword: envelope times the infinite comb.

    Square lattices support mu in {0, .., d-1, "+", "-", "+H", "-H"};
    hexagonal supports mu = 0 only.  The +H/-H magic pair is built on the
    symmetrically orthonormalized codewords so it is exactly orthogonal.
    """
    fam = code.lattice.family
    if fam == "rectangular":
        raise UnsupportedCodewordError(
            "rectangular codewords need an aspect ratio convention; none is defined"
        )
    if fam == "hexagonal":
        if mu != 0:
            raise UnsupportedCodewordError("hexagonal codewords support mu=0 only")
        return HybridState(_hex_codeword_vec(code), (code.space,), 0)

    if isinstance(mu, str):
        if code.lattice.d != 2:
            raise UnsupportedCodewordError("superposition labels are qubit-only")
        v0 = _square_codeword_vec(code, 0)
        v1 = _square_codeword_vec(code, 1)
        if mu in ("+", "-"):
            sign = 1.0 if mu == "+" else -1.0
            vec = v0 + sign * v1
            vec /= np.linalg.norm(vec)
        elif mu in ("+H", "-H"):
            o0, o1 = _lowdin_pair(v0, v1)
            c, s = math.cos(math.pi / 8.0), math.sin(math.pi / 8.0)
            vec = c * o0 + s * o1 if mu == "+H" else -s * o0 + c * o1
        else:
            raise UnsupportedCodewordError(f"unknown codeword label {mu!r}")
        return HybridState(vec, (code.space,), 0)

    if not 0 <= int(mu) < code.lattice.d:
        raise UnsupportedCodewordError(f"qudit index {mu} outside 0..{code.lattice.d - 1}")
    return HybridState(_square_codeword_vec(code, int(mu)), (code.space,), 0)


def binomial_codeword(code: GkpCode, mu: int = 0) -> HybridState:
    """Binomial-weighted comb of squeezed displaced states.

    Peak probabilities follow binomial coefficients over N + 1 peaks with
    N = chain_depth(delta): the state the finite preparation chain actually
    converges to, and the reference for its reported fidelity.
    """
    if code.lattice.family != "square" or mu not in (0, 1):
        raise UnsupportedCodewordError("binomial codewords: square lattice, mu in {0,1}")
    l = code.lattice.lattice_constant
    n = chain_depth(code.delta)
    vec = np.zeros(code.space.dim, dtype=complex)
    for m in range(n + 1):
        pos = (2 * (m - n / 2.0) + mu) * (l / 2.0)
        w = math.sqrt(math.comb(n, m))
        vec += w * squeezed_coherent_state(code.space, pos, code.delta).data
    return HybridState(vec / np.linalg.norm(vec), (code.space,), 0)


def envelope_codeword(code: GkpCode, mu: int = 0, offset: float = 0.0) -> HybridState:
    """Gaussian-envelope comb: weights exp(-pi pos^2 delta^2) at positions
    pos (in lattice units) offset by mu/2; offset shifts the whole comb and
    lets callers match a half-period-displaced preparation frame."""
    if code.lattice.family != "square" or mu not in (0, 1):
        raise UnsupportedCodewordError("envelope codewords: square lattice, mu in {0,1}")
    l = code.lattice.lattice_constant
    # keep every peak well inside the Fock truncation
    xmax = math.sqrt(max(code.space.dim - 40, 10) / 4.0)
    vec = np.zeros(code.space.dim, dtype=complex)
    m = 0
    while True:
        added = False
        for mm in ({0} if m == 0 else {m, -m}):
            pos = mm + mu / 2.0 + offset
            if abs(pos) * l > xmax:
                continue
            w = math.exp(-math.pi * pos**2 * code.delta**2)
            if w < 1e-10:
                continue
            vec += w * squeezed_coherent_state(code.space, pos * l, code.delta).data
            added = True
        if not added and m > 2:
            break
        m += 1
    return HybridState(vec / np.linalg.norm(vec), (code.space,), 0)


_ERROR_OPS = ("a", "adag", "n")


def error_word(code: GkpCode, op: str = "a", mu: int = 0) -> HybridState:
    """Normalized single-error word op|mu_delta>."""
    if op not in _ERROR_OPS:
        raise ValueError(f"op must be one of {_ERROR_OPS}")
    base = codeword(code, mu)
    mat = {
        "a": code.space.destroy(),
        "adag": code.space.create(),
        "n": code.space.number(),
    }[op]
    vec = mat @ base.data
    return HybridState(vec / np.linalg.norm(vec), (code.space,), 0)


def mean_photon_number(code: GkpCode, mu: int = 0) -> float:
    """<n> of the codeword; equals ||a|mu>||^2 on the normalized state."""
    base = codeword(code, mu)
    vec = code.space.destroy() @ base.data
    return float(np.real(np.vdot(vec, vec)))


# ---------------------------------------------------------------------------
# SBS stabilization


def sbs_circuit(code: GkpCode, axis: str = "x") -> Circuit:
    """One small-big-small half-round along a logical axis.

    The big conditional displacement is half a stabilizer generator on the
    sigma_x axis; the two small gates carry epsilon = (l/4) delta^2 along the
    perpendicular direction on sigma_y.  A trailing reset marker closes the
    half-round.
    """
    axis = axis.lower()
    if axis not in ("x", "z"):
        raise ValueError("axis must be 'x' or 'z'")
    g1, g2 = code.lattice.generators
    big = g1 / 2.0 if axis == "x" else -g2 / 2.0
    small = 1j * (big / abs(big)) * code.epsilon
    gates = (
        CD(small, math.pi / 2.0),
        CD(big, 0.0),
        CD(small, math.pi / 2.0),
        QubitReset(),
    )
    return Circuit(gates, label=f"sbs-{axis}", provenance=f"delta={code.delta}")


@dataclass
class StabRow:
    index: int
    axis: Optional[str]
    time: float
    s_x: float
    s_p: float
    s_x_disp: float
    s_p_disp: float
    weight_g: Optional[float] = None
    weight_e: Optional[float] = None


@dataclass
class StabilizeTrace:
    rows: list
    round_weights: list  # one {gg, ge, eg, ee} dict per full round
    rho: np.ndarray      # final oscillator density matrix
    code: GkpCode = field(repr=False, default=None)

    def final_expectations(self) -> dict:
        last = self.rows[-1]
        return {"s_x": last.s_x, "s_p": last.s_p}


def _stab_operator(code: GkpCode, which: str, form: str) -> np.ndarray:
    """Stabilizer matrix on the oscillator space.

    which selects the generator: "x" pairs with g2 (its expectation tests the
    position comb on square lattices), "p" with g1.  form "conjugated" is the
    envelope-similarity-transformed stabilizer (non-unitary, equal to 1 on the
    exact codeword); "displacement" is the unitary approximation
    D(cosh(d^2) g - i sinh(d^2) g).
    """
    if which not in ("x", "p"):
        raise ValueError("which must be 'x' or 'p'")
    g1, g2 = code.lattice.generators
    gamma = g2 if which == "x" else g1
    d2 = code.delta**2
    a = code.space.destroy()
    if form == "conjugated":
        gen = gamma * math.exp(-d2) * a.conj().T - np.conj(gamma) * math.exp(d2) * a
    elif form == "displacement":
        gd = math.cosh(d2) * gamma - 1j * math.sinh(d2) * gamma
        gen = gd * a.conj().T - np.conj(gd) * a
    else:
        raise ValueError("form must be 'conjugated' or 'displacement'")
    return expm(gen)


_STAB_CACHE: dict = {}


def _stab_operator_cached(code: GkpCode, which: str, form: str) -> np.ndarray:
    key = (code.space.dim, round(code.delta, 12), code.lattice.family,
           code.lattice.d, which, form)
    op = _STAB_CACHE.get(key)
    if op is None:
        op = _stab_operator(code, which, form)
        _STAB_CACHE[key] = op
    return op


def _oscillator_density(state) -> np.ndarray:
    """Oscillator reduced density matrix from a HybridState or a raw rho."""
    if isinstance(state, np.ndarray) and state.ndim == 2:
        return state
    dim = state.spaces[0].dim
    data = state.data.reshape(dim, -1)
    return data @ data.conj().T


def stabilizer_expectation(state, code: GkpCode, which: str = "x",
                           form: str = "conjugated") -> float:
    """Re <S_{which, delta}> with the qubit (if any) traced out."""
    if which not in ("x", "p"):
        raise ValueError("which must be 'x' or 'p'")
    op = _stab_operator_cached(code, which, form)
    rho = _oscillator_density(state)
    return float(np.trace(op @ rho).real)


def _strip_reset(circ: Circuit) -> Circuit:
    return Circuit(tuple(g for g in circ.gates if not isinstance(g, QubitReset)))


def stabilize(state, code: GkpCode, rounds: int, noise=None,
              start_axis: str = "x", duration_model=None) -> StabilizeTrace:
    """Dissipative SBS stabilization with unconditional resets.

    One round is an X half-round followed by a Z half-round (start_axis
    flips the order); the qubit is reset after each half-round, so the
    evolution is a channel on the oscillator.  The trace records both
    stabilizer expectations after every half-round plus the qubit outcome
    weights; per-round joint outcome weights {gg, ge, eg, ee} sum to one.
    """
    if start_axis not in ("x", "z"):
        raise ValueError("start_axis must be 'x' or 'z'")
    dim = code.space.dim
    if isinstance(state, np.ndarray) and state.ndim == 2:
        rho_osc = state
    else:
        rho_osc = _oscillator_density(state)

    if duration_model is None:
        from .prep import DurationModel
        duration_model = DurationModel()

    axes = (start_axis, "z" if start_axis == "x" else "x")
    circs = {ax: sbs_circuit(code, ax) for ax in ("x", "z")}
    unitaries = None
    if noise is None:
        unitaries = {ax: circuit_unitary((code.space,), 1, _strip_reset(circs[ax]))
                     for ax in ("x", "z")}
    else:
        from . import noise as noise_mod

    half_time = {ax: duration_model.circuit_duration(_strip_reset(circs[ax]))
                 for ax in ("x", "z")}

    def embed(rosc):
        r4 = np.zeros((dim, 2, dim, 2), dtype=complex)
        r4[:, 0, :, 0] = rosc
        return r4

    def measure(rosc, idx, axis, t, wg=None, we=None):
        st_x = float(np.trace(_stab_operator_cached(code, "x", "conjugated") @ rosc).real)
        st_p = float(np.trace(_stab_operator_cached(code, "p", "conjugated") @ rosc).real)
        sd_x = float(np.trace(_stab_operator_cached(code, "x", "displacement") @ rosc).real)
        sd_p = float(np.trace(_stab_operator_cached(code, "p", "displacement") @ rosc).real)
        return StabRow(idx, axis, t, st_x, st_p, sd_x, sd_p, wg, we)

    rows = [measure(rho_osc, 0, None, 0.0)]
    round_weights = []
    t = 0.0
    idx = 0
    for _ in range(rounds):
        # branch bookkeeping inside the round for joint outcome weights
        branches = [(1.0, "", rho_osc)]
        for ax in axes:
            idx += 1
            t += half_time[ax]
            new_branches = []
            for w, lbl, rosc in branches:
                r4 = embed(rosc).reshape(2 * dim, 2 * dim)
                if noise is None:
                    u = unitaries[ax]
                    r4 = u @ r4 @ u.conj().T
                else:
                    r4 = noise_mod.evolve_density(
                        _strip_reset(circs[ax]), r4, (code.space,), 1,
                        noise, duration_model)
                r4t = r4.reshape(dim, 2, dim, 2)
                bg = r4t[:, 0, :, 0]
                be = r4t[:, 1, :, 1]
                wg = float(np.trace(bg).real)
                we = float(np.trace(be).real)
                if wg > 1e-14:
                    new_branches.append((w * wg, lbl + "g", bg / wg))
                if we > 1e-14:
                    new_branches.append((w * we, lbl + "e", be / we))
            branches = new_branches
            rho_osc = sum(w * r for w, _, r in branches)
            half_w = {"g": 0.0, "e": 0.0}
            for w, lbl, _ in branches:
                half_w[lbl[-1]] += w
            rows.append(measure(rho_osc, idx, ax, t, half_w["g"], half_w["e"]))
            # collapse identical-label branches to cap the branch count
            merged = {}
            for w, lbl, r in branches:
                if lbl in merged:
                    pw, pr = merged[lbl]
                    merged[lbl] = (pw + w, (pw * pr + w * r) / (pw + w))
                else:
                    merged[lbl] = (w, r)
            branches = [(w, lbl, r) for lbl, (w, r) in merged.items()]
        weights = {"gg": 0.0, "ge": 0.0, "eg": 0.0, "ee": 0.0}
        for w, lbl, _ in branches:
            weights[lbl] += w
        round_weights.append(weights)
    return StabilizeTrace(rows, round_weights, rho_osc, code)
