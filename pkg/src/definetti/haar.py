"""Quadrature rules for averages over Haar-random single-site pure states.

Two rule families:

* exact_qubit_rule(t): a product rule on the Bloch sphere (Gauss-Legendre in
  the polar coordinate, uniform in the azimuthal angle) that integrates every
  polynomial of degree at most t in the entries of |theta><theta| without
  error. Qubits only.
* monte_carlo_rule(d, samples, seed): equal-weight nodes drawn as normalized
  complex gaussians, which are Haar distributed in any dimension.

`integrate` accumulates contributions in fixed node order so that repeated
runs with the same rule reproduce results bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from definetti.linalg import Operator, PureState

WEIGHT_SUM_ATOL = 1e-14

EXACT = "exact"
MONTE_CARLO = "monte_carlo"

# extra polynomial degree used to expose the error of an exact rule applied
# to a non-polynomial integrand
DEGREE_ESCALATION = 4


@dataclass(frozen=True)
class QuadratureRule:
    """Weighted single-site nodes approximating the Haar average.

    `node_matrix` holds one unit row per node; `weights` are nonnegative and
    sum to 1. Exact rules carry the polynomial degree they reproduce.
    """

    d: int
    node_matrix: np.ndarray
    weights: np.ndarray
    kind: str
    exact_degree: int = 0
    samples: int = 0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in (EXACT, MONTE_CARLO):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        nodes = np.array(self.node_matrix, dtype=np.complex128, copy=True)
        weights = np.array(self.weights, dtype=np.float64, copy=True)
        if nodes.ndim != 2 or nodes.shape[1] != self.d or nodes.shape[0] != weights.shape[0]:
            raise ValueError("node matrix and weights disagree in shape")
        if weights.min(initial=0.0) < 0:
            raise ValueError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_ATOL:
            raise ValueError(f"weights must sum to 1, got {weights.sum()!r}")
        row_norms = np.linalg.norm(nodes, axis=1)
        if row_norms.size and np.abs(row_norms - 1.0).max() > 1e-12:
            raise ValueError("nodes must be unit vectors")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "node_matrix", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def node_count(self) -> int:
        return self.weights.shape[0]

    def node(self, j: int) -> PureState:
        return PureState(self.d, 1, self.node_matrix[j])

    @property
    def nodes(self) -> tuple[PureState, ...]:
        return tuple(self.node(j) for j in range(self.node_count))

    def describe(self) -> str:
        if self.kind == EXACT:
            return f"exact(degree={self.exact_degree}, nodes={self.node_count})"
        return f"mc(samples={self.samples}, seed={self.seed})"


def exact_qubit_rule(t: int) -> QuadratureRule:
    """Rule exact for qubit polynomials of degree <= t in |theta><theta|.

    Haar measure on qubit pure states is the uniform measure on the Bloch
    sphere. A monomial of degree <= t in the entries of |theta><theta| is a
    polynomial of degree <= t in the Bloch coordinates, so Gauss-Legendre
    with t+1 points in the polar cosine crossed with 2t+2 uniform azimuthal
    angles integrates it without error.
    """
    if t < 0:
        raise ValueError(f"degree must be >= 0, got {t}")
    u, gauss_w = np.polynomial.legendre.leggauss(t + 1)
    n_phi = 2 * t + 2
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    upper = np.sqrt((1 + u) / 2)
    lower = np.sqrt((1 - u) / 2)
    nodes = np.empty(((t + 1) * n_phi, 2), dtype=np.complex128)
    weights = np.empty((t + 1) * n_phi)
    pos = 0
    for i in range(t + 1):
        for j in range(n_phi):
            nodes[pos, 0] = upper[i]
            nodes[pos, 1] = np.exp(1j * phi[j]) * lower[i]
            weights[pos] = gauss_w[i] / 2 / n_phi
            pos += 1
    return QuadratureRule(d=2, node_matrix=nodes, weights=weights, kind=EXACT, exact_degree=t)


def monte_carlo_rule(d: int, samples: int, seed: int = 0) -> QuadratureRule:
    """Equal-weight Haar samples: normalized standard complex gaussians."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))
    z /= np.linalg.norm(z, axis=1)[:, None]
    weights = np.full(samples, 1.0 / samples)
    return QuadratureRule(
        d=d, node_matrix=z, weights=weights, kind=MONTE_CARLO, samples=samples, seed=seed
    )


def _evaluate(rule: QuadratureRule, f):
    """f at every node, in node order, plus the shape of the first value."""
    values = []
    for j in range(rule.node_count):
        values.append(f(rule.node(j)))
    return values


def integrate(rule: QuadratureRule, f):
    """Weighted sum of f over the nodes, accumulated in fixed node order.

    f may return an Operator, an ndarray, or a scalar; the result has the
    same kind. Fixed-order accumulation keeps repeated runs bit-identical.
    """
    total = None
    meta = None
    for j in range(rule.node_count):
        value = f(rule.node(j))
        if isinstance(value, Operator):
            if meta is None:
                meta = (value.site_dim, value.sites)
            elif meta != (value.site_dim, value.sites):
                raise ValueError("integrand returned operators on different spaces")
            value = value.entries
        contrib = rule.weights[j] * np.asarray(value)
        total = contrib if total is None else total + contrib
    if meta is not None:
        return Operator(meta[0], meta[1], total)
    if total.ndim == 0:
        total = complex(total)
        return total.real if total.imag == 0 else total
    return total


def _discrepancy(a, b) -> float:
    """Distance between two integral values: nuclear norm for matrices."""
    if isinstance(a, Operator):
        a, b = a.entries, b.entries
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim == 2:
        return float(np.linalg.svd(a - b, compute_uv=False).sum())
    return float(np.abs(a - b).max()) if a.ndim else float(abs(a - b))


def integration_error_estimate(rule: QuadratureRule, f) -> float:
    """Error scale of integrate(rule, f).

    Exact rules: the discrepancy against the same integral at degree + 4
    (zero up to roundoff when f is a polynomial within degree). Monte Carlo
    rules: the sample standard error of the mean, maximized over matrix
    entries for operator-valued f.
    """
    if rule.kind == EXACT:
        escalated = exact_qubit_rule(rule.exact_degree + DEGREE_ESCALATION)
        return _discrepancy(integrate(rule, f), integrate(escalated, f))
    count = rule.node_count
    if count < 2:
        # a single sample carries no spread information; keep reports finite
        return 0.0
    values = _evaluate(rule, f)
    stack = np.stack([np.asarray(v.entries if isinstance(v, Operator) else v) for v in values])
    mean = stack.mean(axis=0)
    var = (np.abs(stack - mean) ** 2).sum(axis=0) / (count - 1)
    std_err = np.sqrt(var / count)
    return float(np.max(std_err))


def pure_power_moment(rule: QuadratureRule, s: int) -> Operator:
    """Weighted sum of |theta><theta|^(tensor s) over the nodes.

    Computed as a weighted Gram matrix of stacked tensor-power rows, which
    reassociates the sum; use `integrate` when fixed-order accumulation
    matters. For exact rules of degree >= s this reproduces the symmetric
    projector divided by sym_dim(s, d).
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    rows = np.ones((rule.node_count, 1), dtype=np.complex128)
    for _ in range(s):
        rows = (rows[:, :, None] * rule.node_matrix[:, None, :]).reshape(rule.node_count, -1)
    moment = (rows * rule.weights[:, None]).T @ rows.conj()
    return Operator(rule.d, s, moment)


def haar_state(d: int, rng) -> PureState:
    """One Haar-random single-site state from an existing generator."""
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(d, 1, z / np.linalg.norm(z))
