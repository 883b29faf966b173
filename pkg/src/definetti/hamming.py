"""Weight projectors counting how many sites differ from a reference state.

For a single-site state psi, each site carries the projector pair
(|psi><psi|, I - |psi><psi|). The weight-i projector Q_i is the sum of all
n-fold tensor products with exactly i factors of the second kind: it picks
out the subspace where exactly i sites deviate from psi. The Q_i are
mutually orthogonal projectors summing to the identity, with
rank C(n, i) (d-1)^i.

Only the n+1 aggregated projectors are ever materialized; the 2^n individual
products are folded in by a per-site recurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from definetti.linalg import Operator, PureState

DISTANCE_TOL = 1e-10
_TRACE_ATOL = 1e-8
_PSD_ATOL = 1e-10


@dataclass(frozen=True)
class WeightProjectorFamily:
    """Projectors Q_0 ... Q_n onto the deviation-weight subspaces for psi."""

    psi: PureState
    n: int
    projectors: tuple[Operator, ...]

    def weight_masses(self, rho: Operator) -> np.ndarray:
        """trace(Q_i rho) for every weight i, as a real vector."""
        return np.array(
            [np.einsum("ij,ji->", q.entries, rho.entries).real for q in self.projectors]
        )


def weight_family(psi: PureState, n: int) -> WeightProjectorFamily:
    """Build the weight projectors for n sites referenced to psi."""
    if psi.sites != 1:
        raise ValueError("weight_family expects a single-site reference state")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    keep = psi.projector().entries
    flip = np.eye(psi.site_dim) - keep
    # per-site recurrence over (matrix, weight) pairs; level m holds the
    # weight-w blocks of the first m sites
    level = [np.ones((1, 1), dtype=np.complex128)]
    for _ in range(n):
        grown = [np.kron(level[0], keep)]
        for w in range(1, len(level)):
            grown.append(np.kron(level[w], keep) + np.kron(level[w - 1], flip))
        grown.append(np.kron(level[-1], flip))
        level = grown
    ops = tuple(Operator(psi.site_dim, n, q) for q in level)
    return WeightProjectorFamily(psi=psi, n=n, projectors=ops)


def threshold_projectors(family: WeightProjectorFamily, r: int) -> tuple[Operator, Operator]:
    """(P_below, P_at_or_above): weights < r and weights >= r."""
    if not 0 <= r <= family.n + 1:
        raise ValueError(f"threshold r={r} outside 0..{family.n + 1}")
    d, n = family.psi.site_dim, family.n
    below = Operator.zero(d, n)
    for i in range(r):
        below = below + family.projectors[i]
    return below, Operator.identity(d, n) - below


def hamming_distance(tau: Operator, psi: PureState, tol: float = DISTANCE_TOL) -> int:
    """Smallest r such that tau has no mass on weights above r.

    tau must be a density operator (PSD, unit trace). Returns the largest
    deviation weight carrying more than `tol` of mass.
    """
    if psi.sites != 1 or psi.site_dim != tau.site_dim:
        raise ValueError("hamming_distance needs a single-site psi on tau's site dimension")
    if abs(tau.trace().real - 1.0) > _TRACE_ATOL or abs(tau.trace().imag) > _TRACE_ATOL:
        raise ValueError(f"tau must have unit trace, got {tau.trace():.6g}")
    if not tau.is_psd(_PSD_ATOL):
        raise ValueError("tau must be positive semidefinite")
    family = weight_family(psi, tau.sites)
    masses = family.weight_masses(tau)
    above = np.concatenate([np.cumsum(masses[::-1])[::-1], [0.0]])  # above[j] = sum_{i >= j}
    for r in range(tau.sites + 1):
        if above[r + 1] <= tol:
            return r
    return tau.sites


def tail_function(n: int, r: int, x: float) -> float:
    """Upper binomial tail sum_{i >= r} C(n, i) x^(n-i) (1-x)^i.

    The probability that at least r of n independent trials fail when each
    succeeds with probability x. Equals 1 at r <= 0 and 0 at r = n + 1.
    """
    _validate_tail_args(n, r, x)
    if r <= 0:
        return 1.0
    if r == n + 1:
        return 0.0
    total = 0.0
    for i in range(r, n + 1):
        total += math.comb(n, i) * x ** (n - i) * (1 - x) ** i
    return total


def tail_function_grid(n: int, r: int, xs: np.ndarray) -> np.ndarray:
    """tail_function evaluated on a vector of x values."""
    xs = np.asarray(xs, dtype=np.float64)
    for x in (float(xs.min(initial=0.0)), float(xs.max(initial=0.0))):
        _validate_tail_args(n, r, x)
    if r <= 0:
        return np.ones_like(xs)
    if r == n + 1:
        return np.zeros_like(xs)
    i = np.arange(r, n + 1)
    coeff = np.array([float(math.comb(n, j)) for j in i])
    terms = coeff[None, :] * xs[:, None] ** (n - i)[None, :] * (1 - xs)[:, None] ** i[None, :]
    return terms.sum(axis=1)


def _validate_tail_args(n: int, r: int, x: float):
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not 0 <= r <= n + 1:
        raise ValueError(f"r={r} outside 0..{n + 1}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
