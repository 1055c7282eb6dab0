"""Dense operators on named registers.

Registers are stored left to right; the leftmost register is the most
significant tensor factor.  A register of dimension ``2**q`` holds ``q``
qubits, again most significant first, so basis index ``z`` of an n-qubit
register is the bit string ``format(z, f"0{n}b")``.  The x basis of such a
register is ``|x~> = H^{(x)n} |x>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, NamedTuple, Sequence

import numpy as np

from .gf2 import LinearHash

TOL_HERM = 1e-10
TOL_ROUNDTRIP = 1e-9
TOL_PSD = 1e-10
RANK_CUTOFF = 1e-12

Basis = Literal["z", "x"]


def qubit_count(dim: int) -> int:
    q = int(round(math.log2(dim)))
    if 2**q != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return q


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        regs = tuple((str(n), int(d)) for n, d in self.registers)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"register names must be unique: {names}")
        if any(d < 2 for _, d in regs):
            raise ValueError(f"register dimensions must be >= 2: {regs}")
        object.__setattr__(self, "registers", regs)

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "RegisterLayout":
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown register {name!r}; layout has {self.names}") from None

    def dim(self, name: str) -> int:
        return self.dims[self.index(name)]

    def subset(self, names: Iterable[str]) -> "RegisterLayout":
        return RegisterLayout(tuple((n, self.dim(n)) for n in names))

    def __add__(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.registers + other.registers)

    def to_json(self) -> list:
        return [[n, d] for n, d in self.registers]


def _complex_to_json(a: np.ndarray) -> list:
    if a.ndim == 1:
        return [[float(v.real), float(v.imag)] for v in a]
    return [_complex_to_json(row) for row in a]


def _complex_from_json(doc) -> np.ndarray:
    arr = np.asarray(doc, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class QOperator:
    """Hermitian operator on a register layout."""

    layout: RegisterLayout
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        d = self.layout.total_dim
        if M.shape != (d, d):
            raise ValueError(f"matrix shape {M.shape} does not match layout dimension {d}")
        dev = np.max(np.abs(M - M.conj().T)) if d else 0.0
        if dev > TOL_HERM:
            raise ValueError(f"operator is not Hermitian (deviation {dev:.3g})")
        M = (M + M.conj().T) / 2
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_array(cls, matrix, registers: Sequence[tuple[str, int]]) -> "QOperator":
        return cls(RegisterLayout(tuple(registers)), matrix)

    @property
    def names(self) -> tuple[str, ...]:
        return self.layout.names

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def scaled(self, c: float) -> "QOperator":
        return QOperator(self.layout, c * self.matrix)

    def check_state(self) -> "QOperator":
        """Raise unless this is a sub-normalised positive semidefinite operator."""
        lam = self.eigvalsh()
        if lam.size and lam[0] < -TOL_PSD:
            raise ValueError(f"operator is not positive semidefinite (min eigenvalue {lam[0]:.3g})")
        tr = self.trace
        if not 0 < tr <= 1 + TOL_HERM:
            raise ValueError(f"state trace {tr} outside (0, 1]")
        return self

    def to_json(self) -> dict:
        return {"layout": self.layout.to_json(), "matrix": _complex_to_json(self.matrix)}

    @classmethod
    def from_json(cls, doc: dict) -> "QOperator":
        layout = RegisterLayout(tuple((n, d) for n, d in doc["layout"]))
        return cls(layout, _complex_from_json(doc["matrix"]))

    def to_text(self, precision: int = 6) -> str:
        header = " x ".join(f"{n}[{d}]" for n, d in self.layout.registers)
        rows = [
            "  ".join(f"{v.real:+.{precision}f}{v.imag:+.{precision}f}j" for v in row)
            for row in self.matrix
        ]
        return "\n".join([header] + rows)


@dataclass(frozen=True, eq=False)
class PureState:
    layout: RegisterLayout
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != self.layout.total_dim:
            raise ValueError("amplitude vector does not match layout dimension")
        nrm = float(np.vdot(v, v).real)
        if not 0 < nrm <= 1 + TOL_HERM:
            raise ValueError(f"squared norm {nrm} outside (0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def density(self) -> QOperator:
        v = self.amplitudes
        return QOperator(self.layout, np.outer(v, v.conj()))

    def to_json(self) -> dict:
        return {"layout": self.layout.to_json(), "amplitudes": _complex_to_json(self.amplitudes)}

    @classmethod
    def from_json(cls, doc: dict) -> "PureState":
        layout = RegisterLayout(tuple((n, d) for n, d in doc["layout"]))
        return cls(layout, _complex_from_json(doc["amplitudes"]))


# ---------------------------------------------------------------- structure


def _permute_matrix(M: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    k = len(dims)
    T = M.reshape(tuple(dims) * 2)
    T = T.transpose(list(perm) + [p + k for p in perm])
    d = math.prod(dims)
    return T.reshape(d, d)


def _permute_vector(v: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    return v.reshape(tuple(dims)).transpose(list(perm)).reshape(-1)


def reorder(s: QOperator, names: Sequence[str]) -> QOperator:
    """Same operator with registers listed in the order ``names``."""
    if sorted(names) != sorted(s.names):
        raise ValueError(f"{names} is not a permutation of {s.names}")
    perm = [s.layout.index(n) for n in names]
    return QOperator(s.layout.subset(names), _permute_matrix(s.matrix, s.layout.dims, perm))


def reorder_pure(psi: PureState, names: Sequence[str]) -> PureState:
    if sorted(names) != sorted(psi.layout.names):
        raise ValueError(f"{names} is not a permutation of {psi.layout.names}")
    perm = [psi.layout.index(n) for n in names]
    return PureState(psi.layout.subset(names), _permute_vector(psi.amplitudes, psi.layout.dims, perm))


def rename(s: QOperator, mapping: dict[str, str]) -> QOperator:
    regs = tuple((mapping.get(n, n), d) for n, d in s.layout.registers)
    return QOperator(RegisterLayout(regs), s.matrix)


def tensor(a: QOperator, b: QOperator) -> QOperator:
    clash = set(a.names) & set(b.names)
    if clash:
        raise ValueError(f"register names clash: {sorted(clash)}")
    return QOperator(a.layout + b.layout, np.kron(a.matrix, b.matrix))


def partial_trace(s: QOperator, drop: Iterable[str]) -> QOperator:
    drop = list(drop)
    for n in drop:
        s.layout.index(n)
    keep = [n for n in s.names if n not in drop]
    if not keep:
        raise ValueError("cannot trace out every register")
    if not drop:
        return s
    dims = s.layout.dims
    perm = [s.layout.index(n) for n in keep + drop]
    M = _permute_matrix(s.matrix, dims, perm)
    dk = math.prod(s.layout.dim(n) for n in keep)
    dd = math.prod(s.layout.dim(n) for n in drop)
    red = np.einsum("ijkj->ik", M.reshape(dk, dd, dk, dd))
    return QOperator(s.layout.subset(keep), red)


def marginal(s: QOperator, keep: Sequence[str]) -> QOperator:
    """Reduced operator on ``keep``, listed in that order."""
    red = partial_trace(s, [n for n in s.names if n not in keep])
    return reorder(red, list(keep))


def pure_marginal(psi: PureState, keep: Sequence[str]) -> QOperator:
    """Reduced state of a pure state, computed from the amplitudes directly."""
    drop = [n for n in psi.layout.names if n not in keep]
    perm = [psi.layout.index(n) for n in list(keep) + drop]
    v = _permute_vector(psi.amplitudes, psi.layout.dims, perm)
    dk = math.prod(psi.layout.dim(n) for n in keep)
    V = v.reshape(dk, -1)
    return QOperator(psi.layout.subset(keep), V @ V.conj().T)


def embed_local(layout: RegisterLayout, reg: str, U: np.ndarray) -> np.ndarray:
    """``I (x) U (x) I`` acting on register ``reg`` of ``layout``."""
    i = layout.index(reg)
    before = math.prod(layout.dims[:i])
    after = math.prod(layout.dims[i + 1 :])
    return np.kron(np.kron(np.eye(before), U), np.eye(after))


def conjugate(s: QOperator, reg: str, U: np.ndarray) -> QOperator:
    """``(I (x) U (x) I) s (I (x) U (x) I)^dagger`` by contraction on the register axes."""
    i = s.layout.index(reg)
    d = s.layout.dims[i]
    before = math.prod(s.layout.dims[:i])
    after = math.prod(s.layout.dims[i + 1 :])
    T = s.matrix.reshape(before, d, after, before, d, after)
    T = np.einsum("ab,ibjklm->iajklm", U, T, optimize=True)
    T = np.einsum("ibjkam,ca->ibjkcm", T, U.conj(), optimize=True)
    return QOperator(s.layout, T.reshape(s.matrix.shape))


def hadamard(dim: int) -> np.ndarray:
    """``H^{(x)q}`` for a ``2**q``-dimensional register."""
    q = qubit_count(dim)
    H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
    H = np.ones((1, 1))
    for _ in range(q):
        H = np.kron(H, H1)
    return H


def to_z_basis(s: QOperator, reg: str, basis: Basis) -> QOperator:
    """Rotate register ``reg`` so that its ``basis`` eigenstates become computational."""
    if basis == "z":
        return s
    if basis != "x":
        raise ValueError(f"basis must be 'z' or 'x', got {basis!r}")
    H = hadamard(s.layout.dim(reg))
    return conjugate(s, reg, H)


def _z_dephase_matrix(M: np.ndarray, dims: Sequence[int], i: int) -> np.ndarray:
    k = len(dims)
    T = M.reshape(tuple(dims) * 2).copy()
    d = dims[i]
    mask_shape = [1] * (2 * k)
    mask_shape[i] = d
    mask_shape[i + k] = d
    T = T * np.eye(d).reshape(mask_shape)
    n = math.prod(dims)
    return T.reshape(n, n)


def dephase(s: QOperator, reg: str, basis: Basis = "z") -> QOperator:
    """Pinch register ``reg`` in the z or x product basis."""
    i = s.layout.index(reg)
    if basis == "z":
        return QOperator(s.layout, _z_dephase_matrix(s.matrix, s.layout.dims, i))
    rotated = to_z_basis(s, reg, basis)
    pinched = QOperator(s.layout, _z_dephase_matrix(rotated.matrix, s.layout.dims, i))
    return to_z_basis(pinched, reg, basis)


def classical_deviation(s: QOperator, reg: str, basis: Basis = "z") -> float:
    return float(np.max(np.abs(s.matrix - dephase(s, reg, basis).matrix)))


def is_classical(s: QOperator, reg: str, basis: Basis = "z", tol: float = TOL_HERM) -> bool:
    return classical_deviation(s, reg, basis) <= tol


def classical_blocks(s: QOperator, reg: str) -> tuple[np.ndarray, RegisterLayout | None]:
    """Diagonal blocks ``<z|s|z>`` on the other registers (kept in order).

    Returns an array of shape ``(d_reg, d_rest, d_rest)`` and the layout of the
    remaining registers (``None`` if ``reg`` is the only register).
    """
    rest = [n for n in s.names if n != reg]
    if not rest:
        return np.diag(s.matrix).reshape(-1, 1, 1).copy(), None
    M = reorder(s, [reg] + rest).matrix
    d = s.layout.dim(reg)
    r = M.shape[0] // d
    T = M.reshape(d, r, d, r)
    blocks = np.stack([T[z, :, z, :] for z in range(d)])
    return blocks, s.layout.subset(rest)


# ------------------------------------------------------------- states


def _psd_eigh(M: np.ndarray, tol: float = TOL_PSD) -> tuple[np.ndarray, np.ndarray]:
    lam, V = np.linalg.eigh(M)
    if lam.size and lam[0] < -tol:
        raise ValueError(f"operator is not positive semidefinite (min eigenvalue {lam[0]:.3g})")
    return np.clip(lam, 0.0, None), V


def psd_sqrt(M: np.ndarray) -> np.ndarray:
    lam, V = _psd_eigh(M, tol=np.inf)
    return (V * np.sqrt(lam)) @ V.conj().T


def psd_inv_sqrt(M: np.ndarray, cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """Pseudo-inverse square root; eigenvalues below ``cutoff`` are treated as zero."""
    lam, V = np.linalg.eigh(M)
    inv = np.zeros_like(lam)
    mask = lam > cutoff
    inv[mask] = 1.0 / np.sqrt(lam[mask])
    return (V * inv) @ V.conj().T


def support_basis(M: np.ndarray, cutoff: float = RANK_CUTOFF) -> np.ndarray:
    """Orthonormal columns spanning the eigenvectors of ``M`` above ``cutoff``."""
    lam, V = np.linalg.eigh(M)
    scale = max(1.0, float(np.max(np.abs(lam)))) if lam.size else 1.0
    return V[:, lam > cutoff * scale][:, ::-1]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        return v
    return v * (abs(v[k]) / v[k])


def purify(s: QOperator, ancilla_name: str) -> PureState:
    """Purification ``sum_i sqrt(l_i) |v_i> (x) |i>`` with eigenvalues in descending order.

    The ancilla dimension is the rank padded to a power of two (at least 2);
    each eigenvector is phased so its largest-magnitude component is real
    positive.
    """
    if ancilla_name in s.names:
        raise ValueError(f"ancilla name {ancilla_name!r} already used")
    s.check_state()
    lam, V = _psd_eigh(s.matrix)
    order = np.argsort(lam)[::-1]
    lam, V = lam[order], V[:, order]
    r = int(np.sum(lam > RANK_CUTOFF * max(1.0, lam[0])))
    r = max(r, 1)
    da = max(2, 1 << (r - 1).bit_length())
    psi = np.zeros((s.layout.total_dim, da), dtype=complex)
    for i in range(r):
        psi[:, i] = math.sqrt(lam[i]) * _fix_phase(V[:, i])
    layout = s.layout + RegisterLayout(((ancilla_name, da),))
    return PureState(layout, psi.reshape(-1))


def apply_classical_function(
    s: QOperator,
    reg: str,
    basis: Basis,
    h: LinearHash,
    out_name: str,
    keep_input: bool = False,
) -> QOperator:
    """Compute ``h`` of the classical value held in ``reg``.

    With ``keep_input=False`` the input register is replaced (in place) by
    ``out_name`` holding ``h(value)``, i.e. fibre sums ``sum_{z in h^-1(k)} rho^z``.
    With ``keep_input=True`` the input is kept and ``out_name`` is appended,
    giving ``sum_x |x><x| (x) rho^x (x) |h(x)><h(x)|``.
    """
    dev = classical_deviation(s, reg, basis)
    if dev > TOL_HERM:
        raise ValueError(f"state is not classical on {reg!r} in the {basis} basis (deviation {dev:.3g})")
    d = s.layout.dim(reg)
    if 2**h.n != d:
        raise ValueError(f"hash input length {h.n} does not match register {reg!r} of dimension {d}")
    if out_name in s.names:
        raise ValueError(f"register {out_name!r} already exists")
    table = h.table()
    dk = 2**h.m
    rotated = to_z_basis(s, reg, basis)
    blocks, rest = classical_blocks(rotated, reg)
    r = blocks.shape[1]
    if not keep_input:
        out = np.zeros((dk, r, r), dtype=complex)
        for z in range(d):
            out[table[z]] += blocks[z]
        M = np.zeros((dk * r, dk * r), dtype=complex)
        for k in range(dk):
            M[k * r : (k + 1) * r, k * r : (k + 1) * r] = out[k]
        rest_regs = rest.registers if rest is not None else ()
        layout = RegisterLayout(((out_name, dk),) + rest_regs)
        res = QOperator(layout, M)
        i = s.layout.index(reg)
        names = list(s.names)
        names[i] = out_name
        return reorder(res, names)
    # keep_input: sum_z |z><z| (x) rho^z (x) |h(z)><h(z)|, with the original order of registers
    full = rotated.layout.total_dim
    M = np.zeros((full * dk, full * dk), dtype=complex)
    order = [reg] + ([n for n in s.names if n != reg])
    for z in range(d):
        blk = np.zeros((d, d))
        blk[z, z] = 1.0
        proj = np.zeros((dk, dk))
        proj[table[z], table[z]] = 1.0
        M += np.kron(np.kron(blk, blocks[z]), proj)
    layout = s.layout.subset(order) + RegisterLayout(((out_name, dk),))
    res = reorder(QOperator(layout, M), list(s.names) + [out_name])
    if basis == "x":
        res = to_z_basis(res, reg, "x")
    return res


def pauli_operator(string: Sequence[int], basis: Basis) -> np.ndarray:
    """``Z^{s_1} (x) ... (x) Z^{s_n}`` (or the X version)."""
    P1 = np.diag([1.0, -1.0]) if basis == "z" else np.array([[0.0, 1.0], [1.0, 0.0]])
    out = np.ones((1, 1))
    for b in string:
        out = np.kron(out, P1 if b else np.eye(2))
    return out


class PauliMeasurement(NamedTuple):
    probs: dict[int, float]
    states: dict[int, PureState | None]


def pauli_string_measure(psi: PureState, reg: str, string: Sequence[int], basis: Basis) -> PauliMeasurement:
    """Projective measurement of a Z- or X-type Pauli string on ``reg``.

    Outcome ``+1`` corresponds to parity bit 0.  Probabilities are relative to
    the norm of ``psi``; post-measurement states are renormalised to that norm.
    """
    d = psi.layout.dim(reg)
    if len(string) != qubit_count(d):
        raise ValueError(f"Pauli string has length {len(string)}, register {reg!r} holds {qubit_count(d)} qubits")
    P = embed_local(psi.layout, reg, pauli_operator(string, basis))
    v = psi.amplitudes
    total = psi.norm2
    probs: dict[int, float] = {}
    states: dict[int, PureState | None] = {}
    for sign in (+1, -1):
        w = (v + sign * (P @ v)) / 2
        p = float(np.vdot(w, w).real)
        probs[sign] = p / total
        states[sign] = PureState(psi.layout, w * math.sqrt(total / p)) if p > 1e-300 else None
    return PauliMeasurement(probs, states)


def project_pauli(v: np.ndarray, layout: RegisterLayout, reg: str, string: Sequence[int], basis: Basis, bit: int) -> np.ndarray:
    """Unnormalised projection of amplitudes ``v`` onto parity ``bit`` of a Pauli string."""
    P = embed_local(layout, reg, pauli_operator(string, basis))
    sign = 1 if bit == 0 else -1
    return (v + sign * (P @ v)) / 2


# ------------------------------------------------------------- distances


def l1_distance(a: QOperator, b: QOperator) -> float:
    if a.layout != b.layout:
        raise ValueError("operators live on different layouts")
    return float(np.sum(np.linalg.svd(a.matrix - b.matrix, compute_uv=False)))


def trace_norm(M: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def root_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``|| sqrt(a) sqrt(b) ||_1`` for positive semidefinite matrices."""
    return trace_norm(psd_sqrt(a) @ psd_sqrt(b))


def generalized_fidelity(a: QOperator, b: QOperator) -> float:
    if a.layout != b.layout:
        raise ValueError("operators live on different layouts")
    ta, tb = a.trace, b.trace
    extra = math.sqrt(max(0.0, (1 - ta)) * max(0.0, (1 - tb)))
    F = root_fidelity(a.matrix, b.matrix) + extra
    return float(min(max(F, 0.0), 1 + 1e-9))


def purified_distance(a: QOperator, b: QOperator) -> float:
    F = generalized_fidelity(a, b)
    return math.sqrt(max(0.0, 1 - F * F))


# ------------------------------------------------------------- standard form


class StandardForm(NamedTuple):
    pure: PureState
    rho_ZAE: QOperator
    rho_XAB: QOperator


def standard_form_from(s: QOperator, given: Basis = "z") -> StandardForm:
    """Build the pure tripartite state linking rho_{Z^A E} and rho_{X^A B}.

    ``s`` has two registers: the classical register ``A`` first and the side
    register second (``E`` when ``given == "z"``, ``B`` when ``given == "x"``).
    The state is purified, the unneeded side is traced out, and ``A`` is
    measured in the other basis.  The returned pure state is ordered (A, B, E).
    """
    if len(s.names) != 2:
        raise ValueError("standard_form_from expects a two-register state (A, side)")
    a_name, side_name = s.names
    if a_name != "A":
        s = rename(s, {a_name: "A"})
    dev = classical_deviation(s, "A", given)
    if dev > TOL_HERM:
        raise ValueError(f"input is not classical in {given.upper()}^A (deviation {dev:.3g})")
    if given == "z":
        s = rename(s, {side_name: "E"})
        psi = reorder_pure(purify(s, "B"), ["A", "B", "E"])
        rho_AB = pure_marginal(psi, ["A", "B"])
        return StandardForm(psi, s, dephase(rho_AB, "A", "x"))
    s = rename(s, {side_name: "B"})
    psi = reorder_pure(purify(s, "E"), ["A", "B", "E"])
    rho_AE = pure_marginal(psi, ["A", "E"])
    return StandardForm(psi, dephase(rho_AE, "A", "z"), s)


# ------------------------------------------------------------- random states


def haar_pure(dims: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    d = math.prod(dims)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(dim: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    M = G @ G.conj().T
    return M / np.trace(M).real


def basis_projector(dim: int, k: int) -> np.ndarray:
    P = np.zeros((dim, dim))
    P[k, k] = 1.0
    return P
