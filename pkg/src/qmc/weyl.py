"""Discrete phase space for prime-dimensional qudits.

Weyl (generalized Pauli) operators, characteristic functions, phase-space
point operators, discrete Wigner functions, beam-splitter parameter
enumeration, and word-based Clifford sampling.

Conventions, fixed once here and relied on everywhere else:

* ``X |k> = |k+1 mod d>`` and ``Z |k> = w^k |k>`` with ``w = exp(2*pi*i/d)``.
* For odd prime ``d`` the single-qudit Weyl operator is
  ``w(p, q) = w^{-h p q} Z^p X^q`` with ``h = (d+1)/2`` the inverse of 2
  mod d.  Operator products compose right-to-left, so
  ``w(p, q)|k> = w^{p(k+q) - h p q} |k+q>``.
  This is the unique phase making ``w(x)^d = I`` and ``w(x)^dag = w(-x)``.
* n-qudit Weyl operators are tensor products of the locals; a phase-space
  point is a pair of length-n vectors over Z_d.
* The characteristic function of a state is ``Xi(x) = Tr[rho w(-x)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

MAX_DIM = 343


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    f = 2
    while f * f <= k:
        if k % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class QuditParams:
    """Local dimension and qudit count.

    ``d = 2`` is representable (so the no-nontrivial-parameters fact can be
    demonstrated) but the Weyl machinery rejects it.
    """

    d: int
    n: int = 1

    def __post_init__(self):
        if not is_prime(self.d):
            raise ValueError(f"d={self.d} must be prime")
        if self.n < 1:
            raise ValueError(f"n={self.n} must be positive")
        if self.d**self.n > MAX_DIM:
            raise ValueError(f"d^n = {self.d ** self.n} exceeds supported size {MAX_DIM}")

    @property
    def dim(self) -> int:
        return self.d**self.n

    @property
    def half(self) -> int:
        """Multiplicative inverse of 2 mod d, i.e. (d+1)/2 for odd d."""
        return (self.d + 1) // 2

    def require_odd(self):
        if self.d == 2:
            raise ValueError("d=2 is unsupported here: the Weyl phase convention needs odd prime d")


@dataclass(frozen=True)
class WeylIndex:
    """A phase-space point: exponent vectors (p, q) over Z_d."""

    p: tuple[int, ...]
    q: tuple[int, ...]

    @classmethod
    def make(cls, params: QuditParams, p: Sequence[int] | int, q: Sequence[int] | int) -> "WeylIndex":
        if isinstance(p, int):
            p = (p,)
        if isinstance(q, int):
            q = (q,)
        if len(p) != params.n or len(q) != params.n:
            raise ValueError(f"expected length-{params.n} vectors, got {p}, {q}")
        return cls(tuple(int(v) % params.d for v in p), tuple(int(v) % params.d for v in q))

    @classmethod
    def zero(cls, params: QuditParams) -> "WeylIndex":
        return cls((0,) * params.n, (0,) * params.n)

    def is_zero(self) -> bool:
        return not any(self.p) and not any(self.q)

    def neg(self, d: int) -> "WeylIndex":
        return WeylIndex(tuple((-v) % d for v in self.p), tuple((-v) % d for v in self.q))

    def scale(self, k: int, d: int) -> "WeylIndex":
        return WeylIndex(tuple((k * v) % d for v in self.p), tuple((k * v) % d for v in self.q))

    def add(self, other: "WeylIndex", d: int) -> "WeylIndex":
        return WeylIndex(
            tuple((a + b) % d for a, b in zip(self.p, other.p)),
            tuple((a + b) % d for a, b in zip(self.q, other.q)),
        )


def symplectic_form(x: WeylIndex, y: WeylIndex, d: int) -> int:
    """[x, y] = p_x . q_y - p_y . q_x mod d; w(x) w(y) = w^{[x,y]} w(y) w(x)."""
    acc = 0
    for px, qx, py, qy in zip(x.p, x.q, y.p, y.q):
        acc += px * qy - py * qx
    return acc % d


@lru_cache(maxsize=None)
def _digit_table(d: int, n: int) -> np.ndarray:
    """Base-d digits (most significant first) of 0..d^n-1; treat as read-only."""
    idx = np.arange(d**n)
    out = np.empty((d**n, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[:, pos] = idx % d
        idx = idx // d
    return out


@lru_cache(maxsize=None)
def _powers(d: int, n: int) -> np.ndarray:
    return d ** np.arange(n - 1, -1, -1)


def encode_digits(params: QuditParams, digits: Sequence[int]) -> int:
    return int(np.dot([v % params.d for v in digits], _powers(params.d, params.n)))


@lru_cache(maxsize=None)
def scale_indices(d: int, n: int, k: int) -> np.ndarray:
    """Index map enc(v) -> enc(k*v mod d) on flat base-d encodings; read-only."""
    table = (_digit_table(d, n) * (k % d)) % d
    return table @ _powers(d, n)


@lru_cache(maxsize=None)
def _shift_indices(d: int, n: int, shift_enc: int) -> np.ndarray:
    """Index map enc(v) -> enc(v + shift mod d); read-only."""
    shift = _digit_table(d, n)[shift_enc]
    table = (_digit_table(d, n) + shift) % d
    return table @ _powers(d, n)


def phase_space_points(params: QuditParams) -> Iterator[WeylIndex]:
    """All d^{2n} phase-space points, row-major in (enc(p), enc(q))."""
    digits = _digit_table(params.d, params.n)
    for pe in range(params.dim):
        p = tuple(int(v) for v in digits[pe])
        for qe in range(params.dim):
            yield WeylIndex(p, tuple(int(v) for v in digits[qe]))


def flat_index(params: QuditParams, x: WeylIndex) -> tuple[int, int]:
    return encode_digits(params, x.p), encode_digits(params, x.q)


def weyl_action(params: QuditParams, x: WeylIndex) -> tuple[np.ndarray, np.ndarray]:
    """Monomial form of w(x): w(x)|k> = phases[k] |rows[k]>.

    Returns (rows, phases) with rows a permutation of 0..dim-1.  This is the
    cheap representation used by every bulk phase-space computation.
    """
    params.require_odd()
    d, n = params.d, params.n
    digits = _digit_table(d, n)
    q_enc = encode_digits(params, x.q)
    rows = _shift_indices(d, n, q_enc)
    # exponent of w per basis ket: sum_i p_i (k_i + q_i) - h p_i q_i (mod d)
    p = np.asarray(x.p, dtype=np.int64)
    q = np.asarray(x.q, dtype=np.int64)
    expo = (digits + q) @ p - params.half * int(p @ q)
    omega = np.exp(2j * np.pi / d)
    return rows, omega ** (expo % d)


def weyl_operator(params: QuditParams, x: WeylIndex) -> np.ndarray:
    """Dense n-qudit Weyl operator w(p, q); unitary, w(0,0) = identity."""
    rows, phases = weyl_action(params, x)
    out = np.zeros((params.dim, params.dim), dtype=complex)
    out[rows, np.arange(params.dim)] = phases
    return out


def monomial_conjugate(matrix: np.ndarray, rows: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """w M w^dag for a monomial w given in (rows, phases) form."""
    out = np.empty_like(matrix, dtype=complex)
    out[np.ix_(rows, rows)] = np.outer(phases, phases.conj()) * matrix
    return out


@dataclass(frozen=True)
class CharacteristicTable:
    """Xi(x) = Tr[rho w(-x)] for every phase-space point x.

    ``values[enc(p), enc(q)]`` holds Xi(p, q).
    """

    params: QuditParams
    values: np.ndarray

    def value(self, x: WeylIndex) -> complex:
        pe, qe = flat_index(self.params, x)
        return complex(self.values[pe, qe])

    def scaled(self, k: int) -> np.ndarray:
        """Table of x -> Xi(k*x), as a plain array."""
        idx = scale_indices(self.params.d, self.params.n, k)
        return self.values[np.ix_(idx, idx)]


def characteristic_function(rho) -> CharacteristicTable:
    """Characteristic table of a state (anything with .params and .matrix)."""
    params: QuditParams = rho.params
    m = np.asarray(rho.matrix, dtype=complex)
    dim = params.dim
    cols = np.arange(dim)
    values = np.empty((dim, dim), dtype=complex)
    digits = _digit_table(params.d, params.n)
    for pe in range(dim):
        p = tuple(int(v) for v in digits[pe])
        for qe in range(dim):
            x = WeylIndex(p, tuple(int(v) for v in digits[qe]))
            rows, phases = weyl_action(params, x.neg(params.d))
            # Tr[rho w] for monomial w = sum_k phases[k] |rows[k]><k|
            values[pe, qe] = np.sum(phases * m[cols, rows])
    return CharacteristicTable(params, values)


def inverse_weyl_transform(table: CharacteristicTable) -> np.ndarray:
    """Reconstruct the operator (1/d^n) sum_x Xi(x) w(x) from its table."""
    params = table.params
    dim = params.dim
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    digits = _digit_table(params.d, params.n)
    for pe in range(dim):
        p = tuple(int(v) for v in digits[pe])
        for qe in range(dim):
            x = WeylIndex(p, tuple(int(v) for v in digits[qe]))
            rows, phases = weyl_action(params, x)
            out[rows, cols] += table.values[pe, qe] * phases
    return out / dim


def parity_operator(params: QuditParams) -> np.ndarray:
    """The zero-point phase-space operator: the permutation |k> -> |-k>."""
    params.require_odd()
    dim = params.dim
    neg = scale_indices(params.d, params.n, params.d - 1)
    out = np.zeros((dim, dim), dtype=complex)
    out[neg, np.arange(dim)] = 1.0
    return out


def phase_point_operator(params: QuditParams, x: WeylIndex) -> np.ndarray:
    """A(x) = w(x) A(0) w(x)^dag; Hermitian, trace one, A(0)^2 = identity."""
    a0 = parity_operator(params)
    if x.is_zero():
        return a0
    rows, phases = weyl_action(params, x)
    return monomial_conjugate(a0, rows, phases)


def wigner_function(rho) -> np.ndarray:
    """Raw discrete Wigner table W(x) = Tr[rho A(x)]; sums to d^n.

    Divide by d^n for the quasi-probability normalization.  Raises if the
    imaginary residue exceeds 1e-10 (the exact value is real).
    """
    params: QuditParams = rho.params
    params.require_odd()
    m = np.asarray(rho.matrix, dtype=complex)
    dim = params.dim
    neg = scale_indices(params.d, params.n, params.d - 1)
    values = np.empty((dim, dim), dtype=complex)
    digits = _digit_table(params.d, params.n)
    ar = np.arange(dim)
    for pe in range(dim):
        p = tuple(int(v) for v in digits[pe])
        for qe in range(dim):
            x = WeylIndex(p, tuple(int(v) for v in digits[qe]))
            rows, phases = weyl_action(params, x)
            # Tr[rho w A0 w^dag] = sum_a conj(ph[a]) ph[neg a] rho[rows[a], rows[neg a]]
            values[pe, qe] = np.sum(phases.conj() * phases[neg] * m[rows, rows[neg]])
    residue = float(np.max(np.abs(values.imag)))
    if residue > 1e-10:
        raise ValueError(f"Wigner table has imaginary residue {residue:.3e}")
    return values.real.copy()


@dataclass(frozen=True)
class BSParams:
    """Beam-splitter weights (s, t) with s^2 + t^2 = 1 mod d."""

    params: QuditParams
    s: int
    t: int

    def __post_init__(self):
        d = self.params.d
        object.__setattr__(self, "s", self.s % d)
        object.__setattr__(self, "t", self.t % d)
        if (self.s**2 + self.t**2) % d != 1:
            raise ValueError(f"(s, t)=({self.s}, {self.t}) violates s^2+t^2=1 mod {d}")

    @property
    def nontrivial(self) -> bool:
        d = self.params.d
        return (self.s**2) % d not in (0, 1) and (self.t**2) % d not in (0, 1)


def valid_st_pairs(params: QuditParams) -> list[BSParams]:
    """All (s, t) with s^2 + t^2 = 1 mod d, trivial ones included.

    For d = 2 only (0,1) and (1,0) survive, so the nontrivial set is empty.
    """
    d = params.d
    out = []
    for s in range(d):
        for t in range(d):
            if (s * s + t * t) % d == 1:
                out.append(BSParams(params, s, t))
    return out


# ---------------------------------------------------------------------------
# Word-based Clifford sampling
# ---------------------------------------------------------------------------


def fourier_matrix(d: int) -> np.ndarray:
    """F[k, j] = w^{-kj}/sqrt(d); satisfies F Z F^dag = X exactly."""
    omega = np.exp(2j * np.pi / d)
    k = np.arange(d)
    return omega ** (-np.outer(k, k) % d) / np.sqrt(d)


def quadratic_phase_matrix(d: int) -> np.ndarray:
    """diag(w^{h k^2}) with h = (d+1)/2; maps X to w(1,1) under conjugation."""
    omega = np.exp(2j * np.pi / d)
    h = (d + 1) // 2
    k = np.arange(d)
    return np.diag(omega ** ((h * k * k) % d))


def _embed(params: QuditParams, local: np.ndarray, wire: int) -> np.ndarray:
    mats = [np.eye(params.d, dtype=complex)] * params.n
    mats[wire] = local
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _cx_matrix(params: QuditParams, control: int, target: int) -> np.ndarray:
    d, n = params.d, params.n
    dim = params.dim
    digits = _digit_table(d, n)
    out = np.zeros((dim, dim), dtype=complex)
    powers = _powers(d, n)
    shifted = digits.copy()
    shifted[:, target] = (shifted[:, target] + shifted[:, control]) % d
    rows = shifted @ powers
    out[rows, np.arange(dim)] = 1.0
    return out


def clifford_generators(params: QuditParams) -> dict[str, np.ndarray]:
    """Named generating set: Fourier, quadratic phase, shift/clock displacements, CX."""
    params.require_odd()
    d = params.d
    gens: dict[str, np.ndarray] = {}
    f = fourier_matrix(d)
    p = quadratic_phase_matrix(d)
    x = weyl_operator(QuditParams(d, 1), WeylIndex((0,), (1,)))
    z = weyl_operator(QuditParams(d, 1), WeylIndex((1,), (0,)))
    if params.n == 1:
        gens.update(F=f, P=p, X=x, Z=z)
        return gens
    for wire in range(params.n):
        gens[f"F{wire}"] = _embed(params, f, wire)
        gens[f"P{wire}"] = _embed(params, p, wire)
        gens[f"X{wire}"] = _embed(params, x, wire)
        gens[f"Z{wire}"] = _embed(params, z, wire)
    for c in range(params.n):
        for t in range(params.n):
            if c != t:
                gens[f"CX{c}{t}"] = _cx_matrix(params, c, t)
    return gens


def clifford_from_word(params: QuditParams, word: Sequence[str]) -> np.ndarray:
    """Multiply out a word over the generator alphabet; empty word gives identity."""
    gens = clifford_generators(params)
    out = np.eye(params.dim, dtype=complex)
    for token in word:
        if token not in gens:
            raise ValueError(f"unknown generator {token!r}; choose from {sorted(gens)}")
        out = gens[token] @ out
    return out


def random_clifford(params: QuditParams, seed, length: int = 24) -> np.ndarray:
    """Unitary from a random generator word of the given length (>= 20).

    Sampling is word-based, not uniform over the Clifford group; callers only
    rely on the conjugation action (Weyl -> phase times Weyl).
    """
    if params.n > 2:
        raise ValueError("Clifford sampling supports n in {1, 2}")
    if length < 20:
        raise ValueError("word length below 20 gives poor mixing; use >= 20")
    rng = np.random.default_rng(seed)
    names = sorted(clifford_generators(params))
    word = [names[i] for i in rng.integers(0, len(names), size=length)]
    return clifford_from_word(params, word)
