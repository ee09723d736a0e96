"""State construction and the stabilizer universe.

Density matrices, named preset states, enumeration of the minimal
stabilizer-projection family, mean states, purification, group dephasing,
phase-space inversion symmetry, random state sampling, and the JSON state
file format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .linalg import frobenius_distance, partial_trace, von_neumann_entropy
from .weyl import (
    BSParams,
    CharacteristicTable,
    QuditParams,
    WeylIndex,
    characteristic_function,
    inverse_weyl_transform,
    parity_operator,
    monomial_conjugate,
    symplectic_form,
    weyl_action,
    clifford_from_word,
    random_clifford,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
UNIT_MODULUS_TOL = 1e-9
MEMBER_MATCH_TOL = 1e-8

PRESET_NAMES = (
    "ket-zero",
    "uniform-01",
    "symmetric-pm1",
    "appc-a",
    "appc-b",
    "appe-magic",
    "maximally-mixed",
)


@dataclass(frozen=True)
class DensityMatrix:
    """A d^n x d^n positive unit-trace matrix tagged with its qudit layout."""

    params: QuditParams
    matrix: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", m)
        dim = self.params.dim
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not match dim {dim}")
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > HERMITIAN_TOL:
            raise ValueError(f"not Hermitian (defect {defect:.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} differs from 1")
        low = float(np.linalg.eigvalsh(m)[0])
        if low < -PSD_TOL:
            raise ValueError(f"negative eigenvalue {low:.3e}")

    @classmethod
    def from_ket(cls, params: QuditParams, amplitudes: Sequence[complex]) -> "DensityMatrix":
        v = np.asarray(amplitudes, dtype=complex)
        if v.shape != (params.dim,):
            raise ValueError(f"ket length {v.shape} does not match dim {params.dim}")
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise ValueError("zero vector cannot be normalized")
        v = v / norm
        return cls(params, np.outer(v, v.conj()))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        if other.params.d != self.params.d:
            raise ValueError("tensor factors must share the local dimension")
        params = QuditParams(self.params.d, self.params.n + other.params.n)
        return DensityMatrix(params, np.kron(self.matrix, other.matrix))

    def conjugated(self, unitary: np.ndarray) -> "DensityMatrix":
        return DensityMatrix(self.params, unitary @ self.matrix @ unitary.conj().T)

    def entropy(self) -> float:
        return von_neumann_entropy(self.matrix)


@dataclass(frozen=True)
class PurifiedState:
    """Joint pure vector on reference x system whose marginal is the target."""

    params: QuditParams
    ref_dim: int
    vector: np.ndarray  # shape (ref_dim * d^n,), reference factor first

    def joint_projector(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def reduced(self) -> np.ndarray:
        return partial_trace(self.joint_projector(), [self.ref_dim, self.params.dim], keep=[1])


def _basis_ket(dim: int, k: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[k % dim] = 1.0
    return v


def preset_state(name: str, params: QuditParams, bsparams: BSParams | None = None) -> DensityMatrix:
    """Named states used across the verification suites.

    ``appe-magic`` is (|0> + |t>)/sqrt(2) and therefore needs beam-splitter
    parameters.  Only ``ket-zero`` and ``maximally-mixed`` generalize to
    n > 1; the other presets are single-qudit.
    """
    d, dim = params.d, params.dim
    if name == "maximally-mixed":
        return DensityMatrix(params, np.eye(dim) / dim)
    if name == "ket-zero":
        return DensityMatrix.from_ket(params, _basis_ket(dim, 0))
    if params.n != 1:
        raise ValueError(f"preset {name!r} is defined for single qudits only")
    if name == "uniform-01":
        return DensityMatrix.from_ket(params, _basis_ket(d, 0) + _basis_ket(d, 1))
    if name == "symmetric-pm1":
        if d < 3:
            raise ValueError("symmetric-pm1 needs d >= 3")
        return DensityMatrix.from_ket(params, _basis_ket(d, 1) + _basis_ket(d, -1 % d))
    if name == "appc-a":
        return DensityMatrix.from_ket(
            params, np.sqrt(2 / 5) * _basis_ket(d, 0) + np.sqrt(3 / 5) * _basis_ket(d, 1)
        )
    if name == "appc-b":
        return DensityMatrix.from_ket(
            params, np.sqrt(2 / 5) * _basis_ket(d, 0) + np.sqrt(3 / 5) * _basis_ket(d, -1 % d)
        )
    if name == "appe-magic":
        if bsparams is None:
            raise ValueError("preset 'appe-magic' needs beam-splitter parameters for t")
        return DensityMatrix.from_ket(params, _basis_ket(d, 0) + _basis_ket(d, bsparams.t))
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


# ---------------------------------------------------------------------------
# Stabilizer enumeration
# ---------------------------------------------------------------------------


@dataclass
class StabilizerMember:
    """One minimal stabilizer-projection state.

    ``generators`` holds (label, character) pairs meaning
    ``w(label) state = character * state``; ``rank`` is the number of
    independent generators (n for pure members, 0 for the maximally mixed
    state).
    """

    rank: int
    generators: tuple[tuple[WeylIndex, complex], ...]
    state: DensityMatrix | None = None


@dataclass
class StabilizerFamily:
    params: QuditParams
    members: list[StabilizerMember] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)

    def state_at(self, i: int) -> DensityMatrix:
        member = self.members[i]
        if member.state is None:
            member.state = _materialize_member(self.params, member)
        return member.state

    def pure_states(self) -> list[DensityMatrix]:
        return [self.state_at(i) for i, m in enumerate(self.members) if m.rank == self.params.n]

    def nearest_member_distance(self, rho: DensityMatrix) -> tuple[int, float]:
        best_i, best = -1, np.inf
        for i in range(len(self.members)):
            dist = frobenius_distance(self.state_at(i), rho)
            if dist < best:
                best_i, best = i, dist
        return best_i, best


def _materialize_member(params: QuditParams, member: StabilizerMember) -> DensityMatrix:
    """Build (1/d^n) sum over the generated group of char-weighted Weyl terms."""
    d, dim = params.d, params.dim
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    exponents = np.ndindex(*([d] * member.rank)) if member.rank else [()]
    for ks in exponents:
        label = WeylIndex.zero(params)
        char = 1.0 + 0j
        for k, (gen_label, gen_char) in zip(ks, member.generators):
            label = label.add(gen_label.scale(k, d), d)
            char *= gen_char**k
        rows, phases = weyl_action(params, label)
        out[rows, cols] += np.conj(char) * phases
    return DensityMatrix(params, out / dim)


def _line_directions(params: QuditParams) -> list[WeylIndex]:
    """One primitive representative per line through the phase-space origin (n=1)."""
    d = params.d
    dirs = [WeylIndex.make(params, 0, 1)]
    dirs += [WeylIndex.make(params, 1, m) for m in range(d)]
    return dirs


def enumerate_stabilizers(
    params: QuditParams, heavy: bool = False, cache_path=None
) -> StabilizerFamily:
    """All minimal stabilizer-projection states for (d, n).

    n=1: the d eigenstates of each of the d+1 phase-space directions (all
    d(d+1) pure states) plus the maximally mixed state, states materialized
    eagerly.  n=2 is supported for d=7 only behind ``heavy=True``: members
    are enumerated as generator descriptors (19,600 pure states and the
    lower-rank projections) and materialized lazily; pass ``cache_path`` to
    persist/reuse the descriptor table.
    """
    params.require_odd()
    if params.n == 1:
        return _enumerate_single(params)
    if params.n == 2 and params.d == 7 and heavy:
        return _enumerate_heavy_two(params, cache_path)
    raise ValueError(
        f"stabilizer enumeration unsupported for (d={params.d}, n={params.n}); "
        "n=2 requires d=7 and heavy=True"
    )


@lru_cache(maxsize=None)
def _enumerate_single(params: QuditParams) -> StabilizerFamily:
    d = params.d
    omega = np.exp(2j * np.pi / d)
    family = StabilizerFamily(params)
    for direction in _line_directions(params):
        for j in range(d):
            member = StabilizerMember(rank=1, generators=((direction, omega**j),))
            member.state = _materialize_member(params, member)
            family.members.append(member)
    family.members.append(
        StabilizerMember(rank=0, generators=(), state=preset_state("maximally-mixed", params))
    )
    return family


def stabilizer_family(params: QuditParams) -> StabilizerFamily:
    """Cached n=1 enumeration."""
    return _enumerate_single(params)


def pure_stabilizer_projectors(params: QuditParams) -> np.ndarray:
    """Stack (count, dim, dim) of all pure stabilizer projectors (n=1 only)."""
    if params.n != 1:
        raise ValueError("pure stabilizer projector stack is available for n=1 only")
    family = stabilizer_family(params)
    return np.stack([s.matrix for s in family.pure_states()])


def _primitive_points(d: int, n: int) -> list[tuple[int, ...]]:
    """One representative per line through the origin of Z_d^{2n}."""
    from .weyl import _digit_table  # reuse cached digit machinery

    digits = _digit_table(d, 2 * n)
    reps = []
    seen = set()
    for row in digits[1:]:
        vec = tuple(int(v) for v in row)
        if vec in seen:
            continue
        # canonicalize: first nonzero component scaled to 1
        lead = next(v for v in vec if v)
        inv = pow(lead, -1, d)
        canon = tuple((inv * v) % d for v in vec)
        if canon not in seen:
            reps.append(canon)
        for k in range(1, d):
            seen.add(tuple((k * v) % d for v in vec))
    return reps


def _vec_to_index(params: QuditParams, vec: Sequence[int]) -> WeylIndex:
    n = params.n
    return WeylIndex.make(params, vec[:n], vec[n:])


def _enumerate_heavy_two(params: QuditParams, cache_path) -> StabilizerFamily:
    d = params.d
    if cache_path is not None:
        try:
            payload = np.load(cache_path, allow_pickle=False)
            return _family_from_arrays(params, payload["gens"], payload["chars"], payload["ranks"])
        except (FileNotFoundError, OSError):
            pass

    points = _primitive_points(d, params.n)
    omega = np.exp(2j * np.pi / d)

    def symp(u, v):
        n = params.n
        return sum(u[i] * v[n + i] - v[i] * u[n + i] for i in range(n)) % d

    # maximal isotropic planes: pairs of commuting independent directions
    planes = {}
    for i, u in enumerate(points):
        for v in points[i + 1 :]:
            if symp(u, v) != 0:
                continue
            span = set()
            for a in range(d):
                for b in range(d):
                    span.add(tuple((a * u[k] + b * v[k]) % d for k in range(len(u))))
            key = tuple(sorted(span))
            planes.setdefault(key, (u, v))

    family = StabilizerFamily(params)
    for u, v in planes.values():
        gu, gv = _vec_to_index(params, u), _vec_to_index(params, v)
        for ja in range(d):
            for jb in range(d):
                family.members.append(
                    StabilizerMember(rank=2, generators=((gu, omega**ja), (gv, omega**jb)))
                )
    for u in points:
        gu = _vec_to_index(params, u)
        for j in range(d):
            family.members.append(StabilizerMember(rank=1, generators=((gu, omega**j),)))
    family.members.append(StabilizerMember(rank=0, generators=()))

    if cache_path is not None:
        gens, chars, ranks = _family_to_arrays(params, family)
        np.savez_compressed(cache_path, gens=gens, chars=chars, ranks=ranks)
    return family


def _family_to_arrays(params: QuditParams, family: StabilizerFamily):
    n = params.n
    count = len(family.members)
    gens = np.zeros((count, n, 2 * n), dtype=np.int64)
    chars = np.zeros((count, n), dtype=complex)
    ranks = np.zeros(count, dtype=np.int64)
    for i, member in enumerate(family.members):
        ranks[i] = member.rank
        for g, (label, char) in enumerate(member.generators):
            gens[i, g, :n] = label.p
            gens[i, g, n:] = label.q
            chars[i, g] = char
    return gens, chars, ranks


def _family_from_arrays(params: QuditParams, gens, chars, ranks) -> StabilizerFamily:
    n = params.n
    family = StabilizerFamily(params)
    for i in range(len(ranks)):
        rank = int(ranks[i])
        generators = tuple(
            (_vec_to_index(params, [int(v) for v in gens[i, g]]), complex(chars[i, g]))
            for g in range(rank)
        )
        family.members.append(StabilizerMember(rank=rank, generators=generators))
    return family


# ---------------------------------------------------------------------------
# Mean state, purification, dephasing, symmetry
# ---------------------------------------------------------------------------


def mean_characteristic_table(table: CharacteristicTable) -> np.ndarray:
    """Keep unit-modulus entries (within UNIT_MODULUS_TOL), zero the rest."""
    keep = np.abs(table.values) >= 1.0 - UNIT_MODULUS_TOL
    return np.where(keep, table.values, 0.0)


def mean_state(rho: DensityMatrix, verify_membership: bool = True) -> DensityMatrix:
    """Stabilizer state keeping only the unit-modulus characteristic values.

    For n=1 the result is matched against the enumerated family (Frobenius
    distance <= 1e-8) as a sanity check.
    """
    table = characteristic_function(rho)
    kept = mean_characteristic_table(table)
    out = inverse_weyl_transform(CharacteristicTable(rho.params, kept))
    out = (out + out.conj().T) / 2
    result = DensityMatrix(rho.params, out)
    if verify_membership and rho.params.n == 1:
        _, dist = stabilizer_family(rho.params).nearest_member_distance(result)
        if dist > MEMBER_MATCH_TOL:
            raise RuntimeError(f"mean state landed {dist:.3e} away from the enumerated family")
    return result


def purify(rho: DensityMatrix) -> PurifiedState:
    """Eigen-purification with reference dimension equal to rank(rho)."""
    vals, vecs = np.linalg.eigh(rho.matrix)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    rank = int(np.sum(vals > 1e-12))
    rank = max(rank, 1)
    dim = rho.params.dim
    joint = np.zeros((rank, dim), dtype=complex)
    for r in range(rank):
        joint[r] = np.sqrt(max(vals[r], 0.0)) * vecs[:, r]
    vec = joint.reshape(-1)
    vec = vec / np.linalg.norm(vec)
    return PurifiedState(rho.params, rank, vec)


def dephasing_channel(generators: Sequence[WeylIndex], rho: DensityMatrix) -> DensityMatrix:
    """Average of conjugations over the abelian Weyl group the labels generate.

    Raises ValueError when two generators fail to commute (nonzero symplectic
    form).
    """
    params = rho.params
    d = params.d
    for i, a in enumerate(generators):
        for b in generators[i + 1 :]:
            form = symplectic_form(a, b, d)
            if form != 0:
                raise ValueError(f"generators {a} and {b} do not commute (form {form})")
    group: set[WeylIndex] = {WeylIndex.zero(params)}
    frontier = list(group)
    while frontier:
        label = frontier.pop()
        for g in generators:
            new = label.add(g, d)
            if new not in group:
                group.add(new)
                frontier.append(new)
    acc = np.zeros_like(rho.matrix)
    for label in group:
        rows, phases = weyl_action(params, label)
        acc += monomial_conjugate(rho.matrix, rows, phases)
    return DensityMatrix(params, acc / len(group))


def is_phase_inversion_symmetric(rho: DensityMatrix, tol: float = 1e-9) -> bool:
    """True when conjugation by the parity operator fixes the state.

    Computed both directly and as the characteristic-function test
    Xi(x) = Xi(-x); the two routes must agree.
    """
    a0 = parity_operator(rho.params)
    direct = float(np.linalg.norm(a0 @ rho.matrix @ a0.conj().T - rho.matrix))
    table = characteristic_function(rho)
    neg = table.scaled(rho.params.d - 1)
    spectral = float(np.max(np.abs(table.values - neg)))
    direct_ok = direct <= tol
    spectral_ok = spectral <= 10 * tol  # table route accumulates slightly more noise
    if direct_ok != spectral_ok:
        raise RuntimeError(
            f"symmetry routes disagree: matrix distance {direct:.3e}, table distance {spectral:.3e}"
        )
    return direct_ok


# ---------------------------------------------------------------------------
# Random states and composite environments
# ---------------------------------------------------------------------------


def random_pure_state(params: QuditParams, rng: np.random.Generator) -> DensityMatrix:
    v = rng.normal(size=params.dim) + 1j * rng.normal(size=params.dim)
    return DensityMatrix.from_ket(params, v)


def random_density_matrix(
    params: QuditParams, rng: np.random.Generator, rank: int | None = None
) -> DensityMatrix:
    rank = params.dim if rank is None else rank
    g = rng.normal(size=(params.dim, rank)) + 1j * rng.normal(size=(params.dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(params, m / np.trace(m).real)


def clifford_dressed_environment(
    params: QuditParams,
    magic: DensityMatrix,
    copies: int,
    seed=None,
    word: Sequence[str] | None = None,
) -> DensityMatrix:
    """k copies of a single-qudit state padded with |0>, optionally Clifford-rotated."""
    if magic.params.n != 1 or magic.params.d != params.d:
        raise ValueError("the repeated factor must be a single qudit of matching dimension")
    if not 1 <= copies <= params.n:
        raise ValueError(f"copies={copies} must lie in 1..{params.n}")
    state = magic
    for _ in range(copies - 1):
        state = state.tensor(magic)
    pad = preset_state("ket-zero", QuditParams(params.d, 1))
    for _ in range(params.n - copies):
        state = state.tensor(pad)
    if word is not None:
        return state.conjugated(clifford_from_word(params, word))
    if seed is not None:
        return state.conjugated(random_clifford(params, seed))
    return state


# ---------------------------------------------------------------------------
# JSON state files
# ---------------------------------------------------------------------------


def state_to_payload(rho: DensityMatrix, form: str = "dense") -> dict:
    if form == "dense":
        return {
            "d": rho.params.d,
            "n": rho.params.n,
            "form": "dense",
            "re": rho.matrix.real.tolist(),
            "im": rho.matrix.imag.tolist(),
        }
    raise ValueError(f"unsupported serialization form {form!r}")


def state_from_payload(payload: dict) -> DensityMatrix:
    params = QuditParams(int(payload["d"]), int(payload.get("n", 1)))
    form = payload.get("form", "dense")
    if form == "dense":
        m = np.asarray(payload["re"], dtype=float) + 1j * np.asarray(payload["im"], dtype=float)
        return DensityMatrix(params, m)
    if form == "ket":
        amps = np.asarray([complex(re, im) for re, im in payload["amplitudes"]])
        return DensityMatrix.from_ket(params, amps)
    if form == "preset":
        bs = None
        if "s" in payload and "t" in payload:
            bs = BSParams(params, int(payload["s"]), int(payload["t"]))
        return preset_state(payload["preset"], params, bs)
    raise ValueError(f"unknown state form {form!r}")


def write_state(path, rho: DensityMatrix, form: str = "dense"):
    with open(path, "w") as fh:
        json.dump(state_to_payload(rho, form), fh, sort_keys=True)
        fh.write("\n")


def read_state(path) -> DensityMatrix:
    with open(path) as fh:
        return state_from_payload(json.load(fh))
