"""Truncated Fock-space linear algebra for hybrid oscillator-qubit systems.

States live in a dense complex vector space (oscillator modes tensor qubits,
oscillator index major, qubit bits minor, first qubit most significant).
Quadrature conventions are selectable per oscillator space:

* Wigner units:    x = (a + a†)/2,  p = (a - a†)/(2i),  [x, p] = i/2
* Symmetric units: x = (a + a†)/√2, p = (a - a†)/(√2 i), [x, p] = i

Gate amplitudes are always stored in (a, a†) form, which is convention free;
only quadrature readout depends on the convention.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm


class Convention(enum.Enum):
    WIGNER = "wigner"
    SYMMETRIC = "symmetric"


class TruncationError(ValueError):
    """Raised when a construction would push significant population past the cutoff."""

    def __init__(self, message, suggested_dim=None):
        super().__init__(message)
        self.suggested_dim = suggested_dim


# population allowed in the top decile of Fock levels before we flag truncation
GUARD_POPULATION = 1e-6


@dataclass(frozen=True)
class OscillatorSpace:
    """A truncated oscillator mode with a fixed quadrature convention."""

    dim: int
    convention: Convention = Convention.WIGNER

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("oscillator dimension must be at least 2")

    # ---- operator factory ------------------------------------------------

    def destroy(self) -> np.ndarray:
        a = np.zeros((self.dim, self.dim), dtype=complex)
        ns = np.arange(1, self.dim)
        a[ns - 1, ns] = np.sqrt(ns)
        return a

    def create(self) -> np.ndarray:
        return self.destroy().conj().T

    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dim, dtype=float)).astype(complex)

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def x(self) -> np.ndarray:
        a = self.destroy()
        s = 0.5 if self.convention is Convention.WIGNER else 1.0 / math.sqrt(2.0)
        return s * (a + a.conj().T)

    def p(self) -> np.ndarray:
        a = self.destroy()
        s = 0.5 if self.convention is Convention.WIGNER else 1.0 / math.sqrt(2.0)
        return s * (a - a.conj().T) / 1j

    def quadrature(self, vx: float, vp: float) -> np.ndarray:
        """vx*x + vp*p for lattice-vector generators."""
        return vx * self.x() + vp * self.p()

    def displacement(self, alpha: complex) -> np.ndarray:
        """D(alpha) = exp(alpha a† - alpha* a)."""
        a = self.destroy()
        return expm(alpha * a.conj().T - np.conj(alpha) * a)

    def squeeze(self, r: float) -> np.ndarray:
        """S(r) = exp((r/2)(a² - a†²)); r > 0 squeezes x."""
        a = self.destroy()
        return expm(0.5 * r * (a @ a - a.conj().T @ a.conj().T))

    def phase_rotation(self, theta: float) -> np.ndarray:
        """P(theta) = exp(-i theta n̂)."""
        return np.diag(np.exp(-1j * theta * np.arange(self.dim)))

    def envelope(self, delta: float) -> np.ndarray:
        """Gaussian envelope E = exp(-delta² n̂); non-unitary."""
        return np.diag(np.exp(-(delta ** 2) * np.arange(self.dim))).astype(complex)

    def parity(self) -> np.ndarray:
        return np.diag((-1.0) ** np.arange(self.dim)).astype(complex)

    # ---- truncation guard ------------------------------------------------

    @property
    def guard_dim(self) -> int:
        """Highest Fock index kept outside the top-decile guard band."""
        return self.dim - max(1, math.ceil(0.1 * self.dim))

    def guard_projector(self) -> np.ndarray:
        pr = np.zeros(self.dim)
        pr[: self.guard_dim] = 1.0
        return np.diag(pr).astype(complex)

    def check_guard(self, vec: np.ndarray, label: str = "state"):
        pop = float(np.sum(np.abs(vec[self.guard_dim:]) ** 2))
        if pop > GUARD_POPULATION:
            navg = float(np.sum(np.arange(self.dim) * np.abs(vec) ** 2))
            raise TruncationError(
                f"{label}: population {pop:.2e} in top-decile guard band "
                f"(dim={self.dim}); increase the cutoff",
                suggested_dim=int(4 * max(navg, 1.0)) + 16,
            )


QUBIT_G = np.array([1.0, 0.0], dtype=complex)
QUBIT_E = np.array([0.0, 1.0], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_P = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g|
SIGMA_M = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|


def sigma_phi(phi: float) -> np.ndarray:
    """Equatorial Pauli axis cos(phi) σx + sin(phi) σy."""
    return math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y


def qubit_state(theta_axis: float) -> np.ndarray:
    """+1 eigenstate of sigma_phi(theta_axis): (|g> + e^{i phi}|e>)/√2."""
    return np.array([1.0, np.exp(1j * theta_axis)], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class HybridState:
    """Pure state on (osc modes) ⊗ (qubits); amplitudes oscillator-major."""

    data: np.ndarray
    spaces: tuple
    qubits: int = 0

    def __post_init__(self):
        expected = int(np.prod([s.dim for s in self.spaces])) * 2 ** self.qubits
        if self.data.shape != (expected,):
            raise ValueError(f"amplitude vector has shape {self.data.shape}, expected ({expected},)")
        if self.data.dtype != complex:
            object.__setattr__(self, "data", self.data.astype(complex))
        self.data.flags.writeable = False

    # ---- structure -------------------------------------------------------

    @property
    def space(self) -> OscillatorSpace:
        if len(self.spaces) != 1:
            raise ValueError("state has more than one oscillator mode")
        return self.spaces[0]

    @property
    def subsystem_dims(self) -> tuple:
        return tuple(s.dim for s in self.spaces) + (2,) * self.qubits

    def tensor(self) -> np.ndarray:
        return self.data.reshape(self.subsystem_dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalized(self) -> "HybridState":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        return HybridState(self.data / n, self.spaces, self.qubits)

    def with_data(self, data: np.ndarray) -> "HybridState":
        return HybridState(data, self.spaces, self.qubits)

    # ---- composition -----------------------------------------------------

    def add_qubit(self, qubit_vec: np.ndarray = QUBIT_G) -> "HybridState":
        return HybridState(np.kron(self.data, qubit_vec), self.spaces, self.qubits + 1)

    def overlap(self, other: "HybridState") -> complex:
        return complex(np.vdot(self.data, other.data))

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.vdot(self.data, op @ self.data))

    def density(self) -> np.ndarray:
        return np.outer(self.data, self.data.conj())

    # ---- reductions --------------------------------------------------------

    def reduced_density(self, keep) -> np.ndarray:
        """Density matrix of the listed subsystems (ids: 0..n_modes-1 oscillators,
        then n_modes..n_modes+qubits-1 qubits), others traced out."""
        if isinstance(keep, int):
            keep = [keep]
        return partial_trace_vec(self.data, self.subsystem_dims, keep)

    def qubit_probabilities(self, qubit: int = 0) -> np.ndarray:
        t = self.tensor()
        axis = len(self.spaces) + qubit
        t = np.moveaxis(t, axis, -1).reshape(-1, 2)
        return np.sum(np.abs(t) ** 2, axis=0).real

    def project_qubit(self, outcome: int, qubit: int = 0, renormalize: bool = True) -> "HybridState":
        """Project the given qubit onto |g> (0) or |e> (1); keeps the qubit in place."""
        t = self.tensor().copy()
        axis = len(self.spaces) + qubit
        idx = [slice(None)] * t.ndim
        idx[axis] = 1 - outcome
        t[tuple(idx)] = 0.0
        out = HybridState(t.reshape(-1), self.spaces, self.qubits)
        return out.normalized() if renormalize else out

    def drop_qubit(self, qubit: int = 0) -> "HybridState":
        """Remove a qubit that is in a product state (after projection/reset)."""
        t = self.tensor()
        axis = len(self.spaces) + qubit
        t = np.moveaxis(t, axis, -1)
        flat = t.reshape(-1, 2)
        norms = np.linalg.norm(flat, axis=0)
        branch = int(np.argmax(norms))
        if norms[1 - branch] > 1e-6 * max(norms[branch], 1e-300):
            raise ValueError("qubit is entangled; project it before dropping")
        return HybridState(np.ascontiguousarray(flat[:, branch]), self.spaces, self.qubits - 1).normalized()


def oscillator_state(space: OscillatorSpace, amplitudes: np.ndarray) -> HybridState:
    vec = np.array(amplitudes, dtype=complex)  # copy: states own their buffers
    return HybridState(vec, (space,), 0)


def fock_state(space: OscillatorSpace, n: int) -> HybridState:
    if not 0 <= n < space.dim:
        raise ValueError("Fock index outside the truncated space")
    vec = np.zeros(space.dim, dtype=complex)
    vec[n] = 1.0
    return oscillator_state(space, vec)


def vacuum(space: OscillatorSpace) -> HybridState:
    return fock_state(space, 0)


def coherent_state(space: OscillatorSpace, alpha: complex) -> HybridState:
    if abs(alpha) ** 2 > space.dim / 4:
        raise TruncationError(
            f"coherent amplitude {alpha} too large for dim={space.dim}",
            suggested_dim=int(4 * abs(alpha) ** 2) + 16,
        )
    c = np.zeros(space.dim, dtype=complex)
    c[0] = 1.0
    for n in range(1, space.dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    c *= math.exp(-abs(alpha) ** 2 / 2.0)
    vec = c / np.linalg.norm(c)
    space.check_guard(vec, "coherent state")
    return oscillator_state(space, vec)


def squeezed_vacuum(space: OscillatorSpace, delta: float) -> HybridState:
    """Gaussian of Wigner-units position width delta: psi(x) ∝ e^{-x²/delta²}.

    delta = 1 is the vacuum; the Wigner-units variance is delta²/4.
    """
    if not 0.05 < delta <= 5:
        raise ValueError("delta outside the supported range (0.05, 5]")
    r = -math.log(delta)
    vec = space.squeeze(r)[:, 0]
    space.check_guard(vec, "squeezed state")
    return oscillator_state(space, vec).normalized()


def squeezed_coherent_state(space: OscillatorSpace, alpha: float, delta: float) -> HybridState:
    """Displaced squeezed state: <x> = alpha, Var(x) = delta²/4 in Wigner units."""
    base = squeezed_vacuum(space, delta)
    vec = space.displacement(alpha) @ base.data
    space.check_guard(vec, "squeezed coherent state")
    return oscillator_state(space, vec).normalized()


# ---------------------------------------------------------------------------
# metrics


def fidelity(a, b) -> float:
    """State fidelity; accepts HybridState or density matrix in any mix.

    Pure/pure: |<a|b>|²; pure/mixed: <a|rho|a>; mixed/mixed: Uhlmann."""
    pa, pb = isinstance(a, HybridState), isinstance(b, HybridState)
    if pa and pb:
        if a.data.shape != b.data.shape:
            raise ValueError("state dimension mismatch")
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    if pa:
        return float(np.real(np.vdot(a.data, np.asarray(b) @ a.data)))
    if pb:
        return fidelity(b, a)
    rho, nu = np.asarray(a), np.asarray(b)
    if rho.shape != nu.shape:
        raise ValueError("state dimension mismatch")
    w, v = np.linalg.eigh(rho)
    w = np.clip(w.real, 0.0, None)
    sq = (v * np.sqrt(w)) @ v.conj().T
    inner = sq @ nu @ sq
    ev = np.clip(np.linalg.eigvalsh(inner).real, 0.0, None)
    return float(np.sum(np.sqrt(ev)) ** 2)


def operator_fidelity(u: np.ndarray, v: np.ndarray, d: int, qubit_dim: int = 1) -> float:
    """|Tr(P U†V)/(d*qubit_dim)|² with P projecting onto the lowest d Fock levels
    (tensored with the full qubit space when qubit_dim > 1)."""
    n = u.shape[0]
    osc_dim = n // qubit_dim
    if d > osc_dim:
        raise ValueError("projector larger than the oscillator space")
    mask = np.zeros(osc_dim)
    mask[:d] = 1.0
    pdiag = np.repeat(mask, qubit_dim)
    tr = np.sum(pdiag * np.einsum("ij,ij->j", u.conj(), v))
    return float(abs(tr / (d * qubit_dim)) ** 2)


def partial_trace_vec(vec: np.ndarray, dims, keep) -> np.ndarray:
    t = vec.reshape(dims)
    n = len(dims)
    keep = sorted(keep)
    drop = [i for i in range(n) if i not in keep]
    perm = keep + drop
    t = np.transpose(t, perm)
    dk = int(np.prod([dims[i] for i in keep]))
    t = t.reshape(dk, -1)
    return t @ t.conj().T


def partial_trace(rho: np.ndarray, dims, keep) -> np.ndarray:
    dims = tuple(dims)
    n = len(dims)
    keep = sorted([keep] if isinstance(keep, int) else keep)
    drop = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    perm = keep + drop + [i + n for i in keep] + [i + n for i in drop]
    t = np.transpose(t, perm)
    dk = int(np.prod([dims[i] for i in keep], dtype=int))
    dd = int(np.prod([dims[i] for i in drop], dtype=int))
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def check_density(rho: np.ndarray):
    """Assert density-operator invariants (hermiticity, trace, positivity)."""
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("density matrix is not Hermitian within 1e-10")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise ValueError("density matrix trace differs from 1 beyond 1e-9")
    if np.min(np.linalg.eigvalsh(rho).real) < -1e-9:
        raise ValueError("density matrix has eigenvalues below -1e-9")


# ---------------------------------------------------------------------------
# wavefunctions, Wigner functions, spin textures


def position_wavefunctions(space: OscillatorSpace, xs: np.ndarray) -> np.ndarray:
    """Matrix phi[n, i] = <x_i|n> in Wigner units (vacuum ∝ e^{-x²})."""
    xi = np.sqrt(2.0) * np.asarray(xs, dtype=float)  # symmetric-units coordinate
    out = np.zeros((space.dim, xi.size))
    out[0] = np.pi ** -0.25 * np.exp(-xi ** 2 / 2.0)
    if space.dim > 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(2, space.dim):
        out[n] = math.sqrt(2.0 / n) * xi * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out * 2.0 ** 0.25  # Jacobian of x -> xi


def position_amplitude(state: HybridState, xs: np.ndarray) -> np.ndarray:
    """psi(x) for a single-mode pure state (no qubits), Wigner-units x."""
    phi = position_wavefunctions(state.space, np.asarray(xs, dtype=float))
    return state.data @ phi


def wigner(state, xs, ps, space: OscillatorSpace = None) -> np.ndarray:
    """W(x, p) on the grid, Wigner-units axes; rows index p, columns index x.

    Evaluated from the definition W = (2/pi) ∫ psi*(x+y) psi(x-y) e^{4ipy} dy
    by quadrature; density matrices are eigendecomposed into pure states first.
    """
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    ref = state.space if isinstance(state, HybridState) else space
    if ref is not None:
        lim = math.sqrt(ref.dim) / 2.0
        if np.max(np.abs(xs), initial=0.0) > lim or np.max(np.abs(ps), initial=0.0) > lim:
            warnings.warn("Wigner grid extends past sqrt(dim)/2; values there are unreliable")
    if isinstance(state, HybridState):
        if state.qubits:
            raise ValueError("trace out the qubits before computing a Wigner function")
        space = state.space
        vecs, weights = [state.data], [1.0]
    else:
        rho = np.asarray(state)
        if space is None:
            raise ValueError("pass the oscillator space along with a density matrix")
        w, v = np.linalg.eigh(rho)
        sel = w.real > 1e-12
        vecs = [v[:, i] for i in np.nonzero(sel)[0]]
        weights = list(w.real[sel])

    half_width = math.sqrt(space.dim) / 2.0 + 1.0
    n_y = max(257, 8 * int(half_width * (4 * max(np.max(np.abs(ps)), 1.0) + 8)))
    ys = np.linspace(-half_width, half_width, n_y)
    dy = ys[1] - ys[0]
    phase = np.exp(4j * np.outer(ps, ys))  # (n_p, n_y)

    out = np.zeros((ps.size, xs.size))
    for vec, wt in zip(vecs, weights):
        st = oscillator_state(space, vec)
        for j, x in enumerate(xs):
            right = position_amplitude(st, x - ys)
            left = np.conj(position_amplitude(st, x + ys))
            integrand = left * right  # (n_y,)
            vals = (phase @ integrand) * dy
            out[:, j] += wt * (2.0 / math.pi) * vals.real
    return out


def spin_profile(state: HybridState, quadrature: str, grid) -> dict:
    """Conditional qubit Bloch components vs oscillator position or momentum."""
    if state.qubits != 1 or len(state.spaces) != 1:
        raise ValueError("spin_profile expects one oscillator mode and one qubit")
    grid = np.asarray(grid, dtype=float)
    space = state.space
    t = state.tensor()  # (dim, 2)
    if quadrature == "p":
        rot = space.phase_rotation(-math.pi / 2.0)
        t = np.stack([rot @ t[:, 0], rot @ t[:, 1]], axis=1)
    elif quadrature != "x":
        raise ValueError("quadrature must be 'x' or 'p'")
    phi = position_wavefunctions(space, grid)  # (dim, npts)
    psi_g = t[:, 0] @ phi
    psi_e = t[:, 1] @ phi
    dens = np.abs(psi_g) ** 2 + np.abs(psi_e) ** 2
    safe = np.where(dens > 1e-300, dens, 1.0)
    cross = np.conj(psi_g) * psi_e
    return {
        "density": dens,
        "sx": 2.0 * cross.real / safe,
        "sy": 2.0 * cross.imag / safe,
        "sz": (np.abs(psi_g) ** 2 - np.abs(psi_e) ** 2) / safe,
    }


def quadrature_moments(state: HybridState, which: str = "x"):
    """(mean, variance) of x̂ or p̂ on the oscillator, qubits traced out."""
    space = state.spaces[0]
    op = space.x() if which == "x" else space.p()
    if state.qubits == 0 and len(state.spaces) == 1:
        m1 = np.real(state.expectation(op))
        m2 = np.real(state.expectation(op @ op))
    else:
        rho = state.reduced_density([0])
        m1 = float(np.real(np.trace(rho @ op)))
        m2 = float(np.real(np.trace(rho @ op @ op)))
    return float(m1), float(m2 - m1 ** 2)


def gaussian_width_estimate(state: HybridState) -> float:
    """Delta-hat = 2 sqrt(Var x̂) in Wigner units; vacuum gives 1."""
    space = state.spaces[0]
    xw = space.x() if space.convention is Convention.WIGNER else space.x() / math.sqrt(2.0)
    if state.qubits == 0 and len(state.spaces) == 1:
        m1 = np.real(state.expectation(xw))
        m2 = np.real(state.expectation(xw @ xw))
    else:
        rho = state.reduced_density([0])
        m1 = float(np.real(np.trace(rho @ xw)))
        m2 = float(np.real(np.trace(rho @ xw @ xw)))
    return float(2.0 * math.sqrt(max(m2 - m1 ** 2, 0.0)))
