"""Binary linear algebra, linear hash families and their exact certification.

Bit order convention used throughout the package: index 0 is the leftmost
(most significant) bit of a string, and row ``i`` of a hash matrix produces
output bit ``i``.  An integer ``z`` in ``[0, 2**n)`` therefore corresponds to
the bit string ``format(z, f"0{n}b")``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ENUMERATION_CAP = 2**20


class EnumerationCapError(ValueError):
    """Raised when an exhaustive enumeration would exceed the configured cap."""


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - k)) & 1 for k in range(width)], dtype=np.uint8)


def bits_to_int(bits: Iterable[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def all_bit_vectors(n: int) -> np.ndarray:
    """All ``2**n`` vectors of length ``n`` as rows, ordered by integer value."""
    idx = np.arange(2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Dense immutable matrix over GF(2)."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"BitMatrix needs at least one row and column, got shape {arr.shape}")
        if np.any((arr != 0) & (arr != 1)):
            raise ValueError("BitMatrix entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "BitMatrix":
        """Build from bit strings, e.g. ``BitMatrix.from_rows(["110", "011"])``."""
        return cls(np.array([[int(ch) for ch in r] for r in rows]))

    @classmethod
    def from_hex(cls, rows: Sequence[str], cols: int) -> "BitMatrix":
        return cls(np.array([int_to_bits(int(h, 16), cols) for h in rows]))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(np.eye(n, dtype=np.uint8))

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    def to_strings(self) -> list[str]:
        return ["".join(str(int(b)) for b in row) for row in self.bits]

    def to_hex(self) -> list[str]:
        return [format(bits_to_int(row), "x") for row in self.bits]

    def apply(self, x: int) -> int:
        """Image of the integer-encoded vector ``x`` (as an integer)."""
        v = int_to_bits(x, self.cols)
        return bits_to_int((self.bits.astype(np.int64) @ v) % 2)

    def image_table(self) -> np.ndarray:
        """``table[z] = f(z)`` for every input ``z``."""
        xs = all_bit_vectors(self.cols).astype(np.int64)
        out = (xs @ self.bits.T.astype(np.int64)) % 2
        weights = 1 << np.arange(self.rows - 1, -1, -1, dtype=np.int64)
        return out @ weights

    def __eq__(self, other):
        return isinstance(other, BitMatrix) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))

    def __repr__(self):
        return f"BitMatrix({self.to_strings()})"


def _rref(bits: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    R = np.array(bits, dtype=np.uint8) % 2
    nrows, ncols = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        hits = np.nonzero(R[row:, col])[0]
        if hits.size == 0:
            continue
        p = row + hits[0]
        if p != row:
            R[[row, p]] = R[[p, row]]
        for r in range(nrows):
            if r != row and R[r, col]:
                R[r] ^= R[row]
        pivots.append(col)
        row += 1
    return R, pivots


def rank(m: BitMatrix) -> int:
    """GF(2) rank by row reduction."""
    return len(_rref(m.bits)[1])


def kernel_basis(m: BitMatrix) -> BitMatrix | None:
    """Basis of ``{x : m x^T = 0}`` in reduced row echelon form.

    Returns ``None`` (the empty basis) when the kernel is trivial.
    """
    R, pivots = _rref(m.bits)
    free = [c for c in range(m.cols) if c not in pivots]
    if not free:
        return None
    basis = np.zeros((len(free), m.cols), dtype=np.uint8)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for r, pc in enumerate(pivots):
            basis[k, pc] = R[r, fc]
    canon, _ = _rref(basis)
    return BitMatrix(canon)


def row_space_mask(m: BitMatrix) -> np.ndarray:
    """Boolean mask over all ``2**cols`` vectors marking the row space of ``m``."""
    mask = np.zeros(2**m.cols, dtype=bool)
    rows = [bits_to_int(r) for r in m.bits]
    for coeffs in itertools.product((0, 1), repeat=len(rows)):
        v = 0
        for c, r in zip(coeffs, rows):
            if c:
                v ^= r
        mask[v] = True
    return mask


@dataclass(frozen=True)
class LinearHash:
    """A linear map ``{0,1}^n -> {0,1}^m`` given by an ``m x n`` matrix."""

    matrix: BitMatrix

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "LinearHash":
        return cls(BitMatrix.from_rows(rows))

    @property
    def n(self) -> int:
        return self.matrix.cols

    @property
    def m(self) -> int:
        return self.matrix.rows

    @property
    def surjective(self) -> bool:
        return rank(self.matrix) == self.m

    def __call__(self, x: int) -> int:
        return self.matrix.apply(x)

    def table(self) -> np.ndarray:
        return self.matrix.image_table()


def is_dual_pair(f: LinearHash, g: LinearHash) -> bool:
    """Duality predicate: both full rank, ranks complementary, and ``f g^T = 0``."""
    if f.n != g.n or f.m + g.m != f.n:
        return False
    prod = (f.matrix.bits.astype(np.int64) @ g.matrix.bits.T.astype(np.int64)) % 2
    return bool(not prod.any() and f.surjective and g.surjective)


def dual_of(f: LinearHash) -> LinearHash:
    """Canonical dual ``g`` with ``f g^T = 0`` (row-reduced kernel basis of ``f``)."""
    if not f.surjective:
        raise ValueError("dual_of needs a surjective hash; apply make_surjective first")
    if f.m >= f.n:
        raise ValueError(f"no nontrivial dual for m = n = {f.n}")
    basis = kernel_basis(f.matrix)
    assert basis is not None
    return LinearHash(basis)


def make_surjective(f: LinearHash) -> LinearHash:
    """Drop linearly dependent output rows, keeping the first independent set."""
    kept: list[np.ndarray] = []
    current = 0
    for row in f.matrix.bits:
        trial = np.array(kept + [row])
        r = len(_rref(trial)[1])
        if r > current:
            kept.append(row)
            current = r
    if not kept:
        raise ValueError("the zero map has no surjective restriction")
    return LinearHash(BitMatrix(np.array(kept)))


@dataclass(frozen=True)
class HashFamily:
    """Finite probability distribution over linear hashes sharing ``(n, m)``."""

    members: tuple[LinearHash, ...]
    probs: tuple[Fraction, ...]
    name: str = "custom"

    def __post_init__(self):
        members = tuple(self.members)
        probs = tuple(Fraction(p) for p in self.probs)
        if not members or len(members) != len(probs):
            raise ValueError("family needs matching, non-empty members and probs")
        shapes = {(h.n, h.m) for h in members}
        if len(shapes) != 1:
            raise ValueError(f"family members have mixed (n, m): {sorted(shapes)}")
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise ValueError("probabilities must be nonnegative and sum to exactly 1")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, members: Sequence[LinearHash], name: str = "custom") -> "HashFamily":
        k = len(members)
        return cls(tuple(members), tuple(Fraction(1, k) for _ in range(k)), name)

    @property
    def n(self) -> int:
        return self.members[0].n

    @property
    def m(self) -> int:
        return self.members[0].m

    def __len__(self) -> int:
        return len(self.members)

    @property
    def all_surjective(self) -> bool:
        return all(h.surjective for h in self.members)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "members": [h.matrix.to_hex() for h in self.members],
            "probs": [str(p) for p in self.probs],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "HashFamily":
        n = int(doc["n"])
        members = tuple(LinearHash(BitMatrix.from_hex(rows, n)) for rows in doc["members"])
        return cls(members, tuple(Fraction(p) for p in doc["probs"]), doc.get("name", "custom"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _check_cap(count: int, cap: int, what: str) -> None:
    if count > cap:
        raise EnumerationCapError(f"{what} needs {count} evaluations, above enumeration cap {cap}")


def family_all_linear(n: int, m: int, cap: int = DEFAULT_ENUMERATION_CAP) -> HashFamily:
    """Uniform family over all ``m x n`` binary matrices (surjective or not)."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    _check_cap(2 ** (m * n), cap, f"family_all_linear({n}, {m})")
    members = []
    for code in range(2 ** (m * n)):
        bits = int_to_bits(code, m * n).reshape(m, n)
        members.append(LinearHash(BitMatrix(bits)))
    return HashFamily.uniform(members, name=f"all-linear({n},{m})")


def toeplitz_matrix(seed: int, n: int, m: int) -> BitMatrix:
    """Toeplitz matrix with ``T[i, j] = s[j - i + m - 1]`` for seed bits ``s``."""
    s = int_to_bits(seed, n + m - 1)
    T = np.empty((m, n), dtype=np.uint8)
    for i in range(m):
        for j in range(n):
            T[i, j] = s[j - i + m - 1]
    return BitMatrix(T)


def family_toeplitz(n: int, m: int, cap: int = DEFAULT_ENUMERATION_CAP) -> HashFamily:
    """Uniform family over all ``2**(n+m-1)`` Toeplitz matrices."""
    if not 1 <= m <= n:
        raise ValueError("Toeplitz family needs 1 <= m <= n")
    count = 2 ** (n + m - 1)
    _check_cap(count, cap, f"family_toeplitz({n}, {m})")
    members = [LinearHash(toeplitz_matrix(s, n, m)) for s in range(count)]
    return HashFamily.uniform(members, name=f"toeplitz({n},{m})")


def surjective_part(fam: HashFamily) -> HashFamily:
    """Condition a family on its full-rank members (probabilities renormalised)."""
    keep = [(h, p) for h, p in zip(fam.members, fam.probs) if h.surjective and p > 0]
    if not keep:
        raise ValueError("family has no surjective member")
    total = sum(p for _, p in keep)
    return HashFamily(
        tuple(h for h, _ in keep), tuple(p / total for _, p in keep), name=f"surjective[{fam.name}]"
    )


def dual_family(fam: HashFamily) -> HashFamily:
    """Member-by-member dual family with the same probability sequence."""
    duals = []
    for i, h in enumerate(fam.members):
        try:
            duals.append(dual_of(h))
        except ValueError as exc:
            raise ValueError(f"member {i} of {fam.name}: {exc}") from exc
    return HashFamily(tuple(duals), fam.probs, name=f"dual[{fam.name}]")


def _weights(probs: Sequence[Fraction]) -> tuple[np.ndarray, int]:
    denom = math.lcm(*(p.denominator for p in probs))
    w = np.array([p.numerator * (denom // p.denominator) for p in probs], dtype=object)
    return w, denom


def zero_probability_table(fam: HashFamily, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Fraction]:
    """``Pr_F[F(x) = 0]`` for every input ``x`` (exact)."""
    _check_cap(len(fam) * 2**fam.n, cap, f"certifying {fam.name}")
    w, denom = _weights(fam.probs)
    counts = [0] * (2**fam.n)
    for wi, h in zip(w, fam.members):
        zeros = np.nonzero(h.table() == 0)[0]
        for x in zeros:
            counts[x] += wi
    return [Fraction(c, denom) for c in counts]


def delta_universal(fam: HashFamily, cap: int = DEFAULT_ENUMERATION_CAP) -> Fraction:
    """Smallest ``delta`` with ``Pr[F(x)=0] <= 2**-m * delta`` for all ``x != 0``."""
    table = zero_probability_table(fam, cap)
    return 2**fam.m * max(table[1:])


def delta_dual_universal_rowspace(fam: HashFamily, cap: int = DEFAULT_ENUMERATION_CAP) -> Fraction:
    """``2**(n-m) * max_{x != 0} Pr[x in rowspace(F)]``.

    For a family of surjective members this equals the universality parameter
    of the dual family, since the kernel of ``f^perp`` is the row space of ``f``.
    """
    _check_cap(len(fam) * 2**fam.n, cap, f"certifying {fam.name}")
    w, denom = _weights(fam.probs)
    counts = [0] * (2**fam.n)
    for wi, h in zip(w, fam.members):
        for x in np.nonzero(row_space_mask(h.matrix))[0]:
            counts[x] += wi
    return 2 ** (fam.n - fam.m) * Fraction(max(counts[1:]), denom)


def universal_lower_bound(n: int, m: int) -> Fraction:
    """Minimum attainable ``delta`` for an ``n -> m`` almost universal2 family."""
    return Fraction(2**n - 2**m, 2**n - 1)


def dual_delta_conversion(delta: Fraction, n: int, m: int) -> Fraction:
    """``2(1 - 2**-m delta) + (delta - 1) 2**(n-m)``.

    If ``F: n -> m`` is delta-almost universal2, its dual family is
    ``dual_delta_conversion(delta, n, m)``-almost universal2.
    """
    delta = Fraction(delta)
    return 2 * (1 - delta / 2**m) + (delta - 1) * 2 ** (n - m)


@dataclass(frozen=True)
class FamilyCertificate:
    delta_universal: Fraction
    delta_dual_universal: Fraction | None
    family_size: int
    n: int
    m: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "family_size": self.family_size,
            "delta_universal": str(self.delta_universal),
            "delta_dual_universal": None
            if self.delta_dual_universal is None
            else str(self.delta_dual_universal),
        }


def certify_family(fam: HashFamily, cap: int = DEFAULT_ENUMERATION_CAP) -> FamilyCertificate:
    """Exact universality parameters by exhaustive enumeration.

    The dual parameter is only defined when every member is surjective (so the
    dual family exists); otherwise it is ``None``.  When defined it is computed
    by enumerating ``dual_family(fam)`` and cross-checked against the
    row-space characterisation.
    """
    d_univ = delta_universal(fam, cap)
    if d_univ < universal_lower_bound(fam.n, fam.m):
        raise AssertionError(f"delta {d_univ} below the counting bound for {fam.name}")
    d_dual = None
    if fam.all_surjective and fam.m < fam.n:
        dual = dual_family(fam)
        d_dual = delta_universal(dual, cap)
        if d_dual != delta_dual_universal_rowspace(fam, cap):
            raise AssertionError(f"dual certificate mismatch for {fam.name}")
        if d_dual < universal_lower_bound(fam.n, fam.n - fam.m):
            raise AssertionError(f"dual delta {d_dual} below the counting bound for {fam.name}")
    return FamilyCertificate(d_univ, d_dual, len(fam), fam.n, fam.m)


def random_surjective(n: int, m: int, rng: np.random.Generator) -> LinearHash:
    """Uniformly random full-rank ``m x n`` map (rejection sampling)."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    while True:
        h = LinearHash(BitMatrix(rng.integers(0, 2, size=(m, n))))
        if h.surjective:
            return h
