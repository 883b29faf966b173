"""Dense complex linear algebra on multi-site tensor product spaces.

Every object lives on `sites` subsystems of equal dimension `site_dim`.
Site 1 is the most significant index: the basis string (s1, ..., sm) sits
at flat position s1 * d**(m-1) + ... + sm. All operations that remove
subsystems act on the trailing (least significant) sites.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10
TRACE_ONE_ATOL = 1e-10


class DimensionError(ValueError):
    """Operands disagree on site dimension, site count, or shape."""


def _as_complex_readonly(a, shape, what: str) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128, copy=True)
    if arr.shape != shape:
        raise DimensionError(f"{what}: expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Unit vector on `sites` subsystems of dimension `site_dim` each."""

    site_dim: int
    sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.site_dim < 2:
            raise ValueError(f"site_dim must be >= 2, got {self.site_dim}")
        if self.sites < 1:
            raise ValueError(f"sites must be >= 1, got {self.sites}")
        amps = _as_complex_readonly(
            self.amplitudes, (self.site_dim**self.sites,), "PureState amplitudes"
        )
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > NORM_ATOL:
            raise ValueError(f"PureState must be normalized: |norm - 1| = {abs(nrm - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, site_dim: int, sites: int, vector) -> PureState:
        """Build a PureState from an unnormalized nonzero vector."""
        vec = np.asarray(vector, dtype=np.complex128)
        nrm = float(np.linalg.norm(vec))
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(site_dim, sites, vec / nrm)

    @property
    def dim(self) -> int:
        return self.site_dim**self.sites

    def overlap(self, other: PureState) -> complex:
        """Inner product <self|other>."""
        if (self.site_dim, self.sites) != (other.site_dim, other.sites):
            raise DimensionError("overlap requires matching site structure")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> Operator:
        """Rank-1 projector onto this state."""
        return Operator(self.site_dim, self.sites, np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor_power(self, copies: int) -> PureState:
        """The state repeated on `copies * sites` sites."""
        if copies < 1:
            raise ValueError(f"copies must be >= 1, got {copies}")
        return PureState(self.site_dim, self.sites * copies, kron_power(self.amplitudes, copies))


@dataclass(frozen=True)
class Operator:
    """Square matrix acting on `sites` subsystems of dimension `site_dim`.

    `sites` may be 0 (a 1x1 scalar block, the result of tracing out
    everything). Validation only enforces the shape; hermiticity, positivity
    and normalization are checked by the predicates below and by the
    operations that require them.
    """

    site_dim: int
    sites: int
    entries: np.ndarray

    def __post_init__(self):
        if self.site_dim < 2:
            raise ValueError(f"site_dim must be >= 2, got {self.site_dim}")
        if self.sites < 0:
            raise ValueError(f"sites must be >= 0, got {self.sites}")
        side = self.site_dim**self.sites
        entries = _as_complex_readonly(self.entries, (side, side), "Operator entries")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, site_dim: int, sites: int) -> Operator:
        return cls(site_dim, sites, np.eye(site_dim**sites))

    @classmethod
    def zero(cls, site_dim: int, sites: int) -> Operator:
        side = site_dim**sites
        return cls(site_dim, sites, np.zeros((side, side)))

    @property
    def dim(self) -> int:
        return self.site_dim**self.sites

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_defect(self) -> float:
        """Largest entrywise deviation from the adjoint."""
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return self.hermiticity_defect() <= atol

    def is_psd(self, atol: float = PSD_ATOL) -> bool:
        return self.is_hermitian() and float(np.linalg.eigvalsh(self.entries)[0]) >= -atol

    def is_trace_one(self, atol: float = TRACE_ONE_ATOL) -> bool:
        return abs(self.trace() - 1.0) <= atol

    def _require_same_space(self, other: Operator, what: str):
        if (self.site_dim, self.sites) != (other.site_dim, other.sites):
            raise DimensionError(f"{what} requires matching site structure")

    def __add__(self, other: Operator) -> Operator:
        self._require_same_space(other, "addition")
        return Operator(self.site_dim, self.sites, self.entries + other.entries)

    def __sub__(self, other: Operator) -> Operator:
        self._require_same_space(other, "subtraction")
        return Operator(self.site_dim, self.sites, self.entries - other.entries)

    def __neg__(self) -> Operator:
        return Operator(self.site_dim, self.sites, -self.entries)

    def __mul__(self, scalar) -> Operator:
        return Operator(self.site_dim, self.sites, self.entries * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: Operator) -> Operator:
        self._require_same_space(other, "composition")
        return Operator(self.site_dim, self.sites, self.entries @ other.entries)


def kron_power(vector: np.ndarray, copies: int) -> np.ndarray:
    """`copies`-fold Kronecker power of a vector (copies = 0 gives [1])."""
    out = np.ones(1, dtype=np.complex128)
    for _ in range(copies):
        out = np.kron(out, vector)
    return out


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product; `a` occupies the leading (most significant) sites."""
    if a.site_dim != b.site_dim:
        raise DimensionError("tensor requires equal site dimensions")
    return Operator(a.site_dim, a.sites + b.sites, np.kron(a.entries, b.entries))


def partial_trace_last(rho: Operator, k: int) -> Operator:
    """Trace out the trailing k sites."""
    if not 0 <= k <= rho.sites:
        raise DimensionError(f"cannot trace {k} of {rho.sites} sites")
    if k == 0:
        return rho
    keep = rho.site_dim ** (rho.sites - k)
    gone = rho.site_dim**k
    blocks = rho.entries.reshape(keep, gone, keep, gone)
    return Operator(rho.site_dim, rho.sites - k, np.trace(blocks, axis1=1, axis2=3))


def _require_hermitian(a: Operator, what: str):
    defect = a.hermiticity_defect()
    if defect > HERMITIAN_ATOL:
        raise ValueError(f"{what} requires a hermitian operator (defect {defect:.3e})")


def trace_norm(a: Operator) -> float:
    """Sum of absolute eigenvalues of a hermitian operator."""
    _require_hermitian(a, "trace_norm")
    return float(np.abs(np.linalg.eigvalsh(a.entries)).sum())


def min_eigenvalue(a: Operator) -> float:
    """Smallest eigenvalue of a hermitian operator."""
    _require_hermitian(a, "min_eigenvalue")
    return float(np.linalg.eigvalsh(a.entries)[0])


def sandwich_bra_last(rho: Operator, psi: PureState, k: int) -> Operator:
    """(I (x) <psi|^k) rho (I (x) |psi>^k), contracting the trailing k sites.

    The result keeps `rho.sites - k` sites. PSD inputs give PSD outputs with
    trace at most trace(rho).
    """
    if psi.sites != 1:
        raise DimensionError("sandwich_bra_last expects a single-site state")
    if psi.site_dim != rho.site_dim:
        raise DimensionError("sandwich_bra_last requires equal site dimensions")
    if not 0 <= k <= rho.sites:
        raise DimensionError(f"cannot contract {k} of {rho.sites} sites")
    if k == 0:
        return rho
    keep = rho.site_dim ** (rho.sites - k)
    gone = rho.site_dim**k
    phi = kron_power(psi.amplitudes, k)
    blocks = rho.entries.reshape(keep, gone, keep, gone)
    out = np.einsum("x,axby,y->ab", phi.conj(), blocks, phi, optimize=True)
    return Operator(rho.site_dim, rho.sites - k, out)
