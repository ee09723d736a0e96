"""The discrete beam splitter and its channels.

The two-register unitary sends |i, j> to |s i + t j, -t i + s j> (all
arithmetic componentwise mod d), so it is stored as an index permutation and
materialized densely only on demand.  The channel traces out the second
register against a fixed environment state; the complementary channel traces
out the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .linalg import frobenius_distance, partial_trace
from .states import DensityMatrix, mean_characteristic_table
from .weyl import (
    BSParams,
    CharacteristicTable,
    QuditParams,
    WeylIndex,
    characteristic_function,
    monomial_conjugate,
    parity_operator,
    scale_indices,
    weyl_action,
    weyl_operator,
    _digit_table,
    _powers,
)

CHOI_PSD_TOL = 1e-10
CHOI_TP_TOL = 1e-10
CHANNEL_EQ_TOL = 1e-9


@lru_cache(maxsize=None)
def _joint_permutation(d: int, n: int, s: int, t: int) -> np.ndarray:
    """perm[(i, j)] = encoding of (s i + t j, -t i + s j); read-only."""
    dim = d**n
    digits = _digit_table(d, n)
    powers = _powers(d, n)
    i_dig = np.repeat(digits, dim, axis=0)
    j_dig = np.tile(digits, (dim, 1))
    a = (s * i_dig + t * j_dig) % d
    b = (-t * i_dig + s * j_dig) % d
    return (a @ powers) * dim + (b @ powers)


@lru_cache(maxsize=None)
def _joint_permutation_inverse(d: int, n: int, s: int, t: int) -> np.ndarray:
    perm = _joint_permutation(d, n, s, t)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    return inv


def beam_splitter_permutation(bsparams: BSParams) -> np.ndarray:
    return _joint_permutation(bsparams.params.d, bsparams.params.n, bsparams.s, bsparams.t)


def beam_splitter_unitary(bsparams: BSParams) -> np.ndarray:
    """Dense two-register permutation unitary."""
    perm = beam_splitter_permutation(bsparams)
    dim2 = perm.size
    out = np.zeros((dim2, dim2), dtype=complex)
    out[perm, np.arange(dim2)] = 1.0
    return out


def _permute_conjugate(matrix: np.ndarray, inv: np.ndarray) -> np.ndarray:
    """U M U^dag for the permutation U, via (U M U^dag)[x, y] = M[inv x, inv y]."""
    return matrix[np.ix_(inv, inv)]


@dataclass(frozen=True)
class BeamSplitterChannel:
    """Beam splitter with a fixed environment in the second register."""

    bsparams: BSParams
    environment: DensityMatrix

    def __post_init__(self):
        if self.environment.params != self.bsparams.params:
            raise ValueError("environment layout does not match the beam-splitter parameters")

    @property
    def params(self) -> QuditParams:
        return self.bsparams.params

    def apply_matrix(self, rho_matrix: np.ndarray, complement: bool = False) -> np.ndarray:
        """Channel action on a raw matrix; no state validation (hot path)."""
        p = self.params
        inv = _joint_permutation_inverse(p.d, p.n, self.bsparams.s, self.bsparams.t)
        joint = np.kron(rho_matrix, self.environment.matrix)
        rotated = _permute_conjugate(joint, inv)
        keep = [1] if complement else [0]
        return partial_trace(rotated, [p.dim, p.dim], keep=keep)

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        self._check_input(rho)
        return DensityMatrix(self.params, self.apply_matrix(rho.matrix))

    def apply_complement(self, rho: DensityMatrix) -> DensityMatrix:
        self._check_input(rho)
        return DensityMatrix(self.params, self.apply_matrix(rho.matrix, complement=True))

    def _check_input(self, rho: DensityMatrix):
        if rho.params != self.params:
            raise ValueError(f"input layout {rho.params} does not match channel {self.params}")

    def choi(self, complement: bool = False, post_unitary: np.ndarray | None = None) -> "ChoiMatrix":
        """Choi matrix of the channel (optionally with a unitary applied after).

        Built from the maximally entangled input vector and the environment
        eigenvectors, one Stinespring branch per eigenvector.
        """
        p = self.params
        dim = p.dim
        perm = beam_splitter_permutation(self.bsparams)
        evals, evecs = np.linalg.eigh(self.environment.matrix)
        phi = np.eye(dim, dtype=complex) / np.sqrt(dim)  # phi[r, a] amplitudes
        out = np.zeros((dim * dim, dim * dim), dtype=complex)
        for weight, m in zip(evals, evecs.T):
            if weight < 1e-14:
                continue
            branch = np.einsum("ra,b->rab", phi, m).reshape(dim, dim * dim)
            rotated = np.zeros_like(branch)
            rotated[:, perm] = branch
            cube = rotated.reshape(dim, dim, dim)  # [reference, out_a, out_b]
            if complement:
                cube = cube.transpose(0, 2, 1)
            w = cube.reshape(dim * dim, dim)
            out += weight * (w @ w.conj().T)
        if post_unitary is not None:
            lifted = np.kron(np.eye(dim), post_unitary)
            out = lifted @ out @ lifted.conj().T
        return ChoiMatrix(dim, dim, out)


@dataclass(frozen=True)
class ChoiMatrix:
    """(I x channel) applied to the maximally entangled projector."""

    input_dim: int
    output_dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        expected = (self.input_dim * self.output_dim,) * 2
        if m.shape != expected:
            raise ValueError(f"Choi shape {m.shape} != {expected}")
        low = float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])
        if low < -CHOI_PSD_TOL:
            raise ValueError(f"Choi matrix has negative eigenvalue {low:.3e}")
        reduced = partial_trace(m, [self.input_dim, self.output_dim], keep=[0])
        defect = float(np.max(np.abs(reduced - np.eye(self.input_dim) / self.input_dim)))
        if defect > CHOI_TP_TOL:
            raise ValueError(f"Choi reduction misses I/d_in by {defect:.3e}")


def convolve(bsparams: BSParams, rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
    """Binary convolution: channel output with sigma as the environment."""
    return BeamSplitterChannel(bsparams, sigma).apply(rho)


def convolve_complement(bsparams: BSParams, rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
    return BeamSplitterChannel(bsparams, sigma).apply_complement(rho)


def iterate_convolution(bsparams: BSParams, rho: DensityMatrix, steps: int) -> list[tuple[int, float]]:
    """Sup-norm characteristic-table distance to the mean state, per step.

    Step k holds the distance of the k-fold repeated self-convolution.  The
    iteration runs entirely in table space via the scaling identity
    Xi_out(x) = Xi_prev(s x) * Xi_rho(t x).
    """
    if steps < 1:
        raise ValueError("need at least one step")
    p = bsparams.params
    base = characteristic_function(rho)
    mean = mean_characteristic_table(base)
    s_idx = scale_indices(p.d, p.n, bsparams.s)
    t_idx = scale_indices(p.d, p.n, bsparams.t)
    scaled_base = base.values[np.ix_(t_idx, t_idx)]
    current = base.values
    out = []
    for step in range(1, steps + 1):
        if step > 1:
            current = current[np.ix_(s_idx, s_idx)] * scaled_base
        out.append((step, float(np.max(np.abs(current - mean)))))
    return out


def phase_inversion(rho: DensityMatrix) -> DensityMatrix:
    """Conjugation by the parity operator (|k> -> |-k>)."""
    a0 = parity_operator(rho.params)
    return rho.conjugated(a0)


def displace(rho: DensityMatrix, x: WeylIndex) -> DensityMatrix:
    rows, phases = weyl_action(rho.params, x)
    return DensityMatrix(rho.params, monomial_conjugate(rho.matrix, rows, phases))


@dataclass(frozen=True)
class ChannelIdentityReport:
    description: str
    frobenius_distance: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.frobenius_distance <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "frobenius_distance": self.frobenius_distance,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def complement_identity_check(bsparams: BSParams, sigma: DensityMatrix) -> ChannelIdentityReport:
    """Certify that the complement equals parity-conjugation after the
    swapped-weight channel run on the parity-conjugated environment.

    Both sides are compared as Choi matrices in Frobenius norm.
    """
    left = BeamSplitterChannel(bsparams, sigma).choi(complement=True)
    swapped = BSParams(bsparams.params, bsparams.t, bsparams.s)
    right = BeamSplitterChannel(swapped, phase_inversion(sigma)).choi(
        post_unitary=parity_operator(bsparams.params)
    )
    dist = frobenius_distance(left.matrix, right.matrix)
    return ChannelIdentityReport(
        description="complement vs parity-conjugated swapped-weight channel",
        frobenius_distance=dist,
        tolerance=CHANNEL_EQ_TOL,
    )


@dataclass(frozen=True)
class DegradationReport:
    frobenius_distance: float
    tolerance: float
    degradable: bool
    anti_degradable: bool
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.frobenius_distance <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "frobenius_distance": self.frobenius_distance,
            "tolerance": self.tolerance,
            "degradable": self.degradable,
            "anti_degradable": self.anti_degradable,
            "pass": self.passed,
            "notes": list(self.notes),
        }


def degradation_witness(
    bsparams: BSParams, sigma: DensityMatrix, displacement: WeylIndex | None = None
) -> DegradationReport:
    """Constructive degradation certificate for balanced weights.

    Preconditions (each failure raises with the failing check named): the
    weights satisfy s = t mod d, and the environment is a displaced copy of a
    parity-symmetric state, sigma = w(a) sigma0 w(a)^dag with
    parity-symmetric sigma0.

    On pass, the complement equals a unitary post-processing (parity after a
    displacement) of the channel itself, so the channel is simultaneously
    degradable and anti-degradable, which forces zero quantum capacity.
    """
    p = bsparams.params
    d = p.d
    if bsparams.s % d != bsparams.t % d:
        raise ValueError(f"precondition failed: s={bsparams.s} and t={bsparams.t} differ mod {d}")
    a = displacement if displacement is not None else WeylIndex.zero(p)
    sigma0 = displace(sigma, a.neg(d))
    sym_defect = frobenius_distance(phase_inversion(sigma0), sigma0)
    if sym_defect > CHANNEL_EQ_TOL:
        raise ValueError(
            "precondition failed: displaced-back environment is not parity symmetric "
            f"(defect {sym_defect:.3e})"
        )
    left = BeamSplitterChannel(bsparams, sigma).choi(complement=True)
    shift = a.scale(-2 * bsparams.s, d)
    shift_op = weyl_operator(p, shift)
    post = parity_operator(p) @ shift_op
    right = BeamSplitterChannel(bsparams, sigma).choi(post_unitary=post)
    dist = frobenius_distance(left.matrix, right.matrix)
    passed = dist <= CHANNEL_EQ_TOL
    return DegradationReport(
        frobenius_distance=dist,
        tolerance=CHANNEL_EQ_TOL,
        degradable=passed,
        anti_degradable=passed,
        notes=(
            "degrading map is unitary (parity after a displacement), so degradable and "
            "anti-degradable hold simultaneously",
        ),
    )


def stinespring_isometry(chan: BeamSplitterChannel) -> np.ndarray:
    """V rho V^dag realizes the joint evolution for a pure environment.

    Only defined when the environment is pure; raises otherwise.
    """
    env = chan.environment
    vals, vecs = np.linalg.eigh(env.matrix)
    if vals[-1] < 1.0 - 1e-10:
        raise ValueError("Stinespring isometry through a single branch needs a pure environment")
    ket = vecs[:, -1]
    dim = chan.params.dim
    perm = beam_splitter_permutation(chan.bsparams)
    v = np.zeros((dim * dim, dim), dtype=complex)
    for a in range(dim):
        joint = np.zeros(dim * dim, dtype=complex)
        joint[a * dim : (a + 1) * dim] = ket
        rotated = np.zeros_like(joint)
        rotated[perm] = joint
        v[:, a] = rotated
    return v


def choi_from_kraus(kraus: list[np.ndarray], input_dim: int) -> ChoiMatrix:
    out_dim = kraus[0].shape[0]
    total = np.zeros((input_dim * out_dim, input_dim * out_dim), dtype=complex)
    for k in kraus:
        w = (k.T / np.sqrt(input_dim)).reshape(-1)  # [r, o] = k[o, r] / sqrt(d_in)
        total += np.outer(w, w.conj())
    return ChoiMatrix(input_dim, out_dim, total)
