"""Symmetric subspace machinery: occupation bases, Dicke isometries, symmetrizers.

The permutation-symmetric subspace of n sites of dimension d has one basis
vector per occupation vector (m_1, ..., m_d) with sum n: the equal-amplitude
superposition of all basis strings of that type. Collecting those vectors as
columns gives an isometry from C^{sym_dim(n, d)} into the full space, and the
orthogonal projector onto the subspace is the isometry times its adjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from definetti.linalg import Operator, PureState


def sym_dim(n: int, d: int) -> int:
    """Dimension C(n+d-1, n) of the symmetric subspace, as an exact integer."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return math.comb(n + d - 1, n)


def occupations(n: int, d: int) -> Iterator[tuple[int, ...]]:
    """All d-tuples of nonnegative integers summing to n, lexicographically ascending."""
    if d == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in occupations(n - first, d - 1):
            yield (first,) + rest


def _site_strings(n: int, d: int) -> np.ndarray:
    """(d**n, n) table of base-d digits; row j spells basis index j, site 1 first."""
    idx = np.arange(d**n)
    digits = np.empty((d**n, n), dtype=np.int64)
    for s in range(n - 1, -1, -1):
        digits[:, s] = idx % d
        idx //= d
    return digits


@dataclass(frozen=True)
class DickeIsometry:
    """Isometry whose columns are the Dicke states of n sites of dimension d.

    Columns follow the lexicographic order of `occupations(n, d)`. The matrix
    satisfies V^dag V = identity and V V^dag = symmetric-subspace projector.
    """

    n: int
    d: int
    occupations: tuple[tuple[int, ...], ...]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def subspace_dim(self) -> int:
        return self.matrix.shape[1]

    def column(self, occupation: tuple[int, ...]) -> np.ndarray:
        return self.matrix[:, self.occupations.index(tuple(occupation))]


def dicke_isometry(n: int, d: int) -> DickeIsometry:
    """Build the full Dicke-basis isometry for n sites of dimension d."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    occs = tuple(occupations(n, d))
    col_index = {occ: i for i, occ in enumerate(occs)}
    digits = _site_strings(n, d)
    counts = np.stack([(digits == s).sum(axis=1) for s in range(d)], axis=1)
    col_of = np.array([col_index[tuple(row)] for row in counts])
    multiplicity = np.bincount(col_of, minlength=len(occs))
    matrix = np.zeros((d**n, len(occs)), dtype=np.complex128)
    matrix[np.arange(d**n), col_of] = 1.0 / np.sqrt(multiplicity[col_of])
    return DickeIsometry(n=n, d=d, occupations=occs, matrix=matrix)


def dicke_state(n: int, d: int, occupation) -> PureState:
    """Equal-amplitude superposition of all basis strings with the given type."""
    occ = tuple(int(x) for x in occupation)
    if len(occ) != d or any(x < 0 for x in occ) or sum(occ) != n:
        raise ValueError(f"occupation {occ} is not a d={d} type of total {n}")
    digits = _site_strings(n, d)
    mask = np.ones(d**n, dtype=bool)
    for s in range(d):
        mask &= (digits == s).sum(axis=1) == occ[s]
    amps = np.zeros(d**n, dtype=np.complex128)
    amps[mask] = 1.0 / math.sqrt(int(mask.sum()))
    return PureState(d, n, amps)


def symmetrizer(n: int, d: int) -> Operator:
    """Orthogonal projector onto the symmetric subspace, built as V V^dag."""
    iso = dicke_isometry(n, d)
    return Operator(d, n, iso.matrix @ iso.matrix.conj().T)


def permutation_operator(n: int, d: int, perm) -> Operator:
    """Unitary that moves the content of site i to site perm[i]."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    digits = _site_strings(n, d)
    moved = np.empty_like(digits)
    moved[:, perm] = digits
    place = d ** np.arange(n - 1, -1, -1)
    new_index = moved @ place
    mat = np.zeros((d**n, d**n), dtype=np.complex128)
    mat[new_index, np.arange(d**n)] = 1.0
    return Operator(d, n, mat)


def random_symmetric_pure(n: int, d: int, seed: int) -> PureState:
    """Haar-like random symmetric state: complex gaussian Dicke coefficients."""
    iso = dicke_isometry(n, d)
    rng = np.random.default_rng(seed)
    coeff = rng.standard_normal(iso.subspace_dim) + 1j * rng.standard_normal(iso.subspace_dim)
    coeff /= np.linalg.norm(coeff)
    return PureState(d, n, iso.matrix @ coeff)


def ghz_state(n: int, d: int) -> PureState:
    """Equal superposition of the d constant strings |j j ... j>."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    amps = np.zeros(d**n, dtype=np.complex128)
    stride = (d**n - 1) // (d - 1)  # 1 + d + ... + d^(n-1)
    amps[np.arange(d) * stride] = 1.0 / math.sqrt(d)
    return PureState(d, n, amps)
