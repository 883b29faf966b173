"""Trace-distance certification for permutation-invariant pure states.

Given a pure state rho on n+k equal sites supported on the symmetric
subspace, the object under test is the distance between the reduction to the
first n sites and the weighted state average

    integral of  trace(rho_psi) tau_psi  over Haar psi, times sym_dim(k, d),

where rho_psi conditions rho on finding psi^(x)k in the trailing k sites and
tau_psi renormalizes rho_psi after truncation to deviation weights below r.
The certified chain is

    lhs <= 3 sym_dim(k,d) sqrt(integral trace(P_geq_r rho_psi))
        <= 3 sym_dim(k,d) sqrt(sym_dim(n+k,d)) exp(-(r/6) min(k/n, 1)),

with every ingredient (tail maxima, large-deviation slack, the operator
upper bound on rho_psi, the gentle measurement step) exposed as its own
check. Exact qubit rules make every polynomial integral here rigorous;
Monte Carlo rules carry a statistical error bar instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from definetti.hamming import tail_function_grid, threshold_projectors, weight_family
from definetti.haar import QuadratureRule, integrate, integration_error_estimate
from definetti.linalg import (
    Operator,
    PureState,
    kron_power,
    min_eigenvalue,
    partial_trace_last,
    sandwich_bra_last,
    trace_norm,
)
from definetti.symmetric import sym_dim, symmetrizer

PASS = "PASS"
VIOLATION = "VIOLATION"
INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_FALLBACK_TOL = 1e-12
COMPARISON_SLACK = 1e-9
INCONCLUSIVE_FRACTION = 0.05
INCONCLUSIVE_FLOOR = 1e-6

_PURITY_ATOL = 1e-10
_SYMMETRIC_SUPPORT_ATOL = 1e-9
_GRID_SLACK = 1e-12
# trace(rho_psi) never exceeds 1, so this floor makes the fallback
# threshold act as an absolute cutoff of size fallback_tol
_FALLBACK_SCALE_FLOOR = 1.0


class InstanceError(ValueError):
    """The problem instance violates its invariants; nothing was certified."""


@dataclass(frozen=True)
class Instance:
    """A certification problem: sites split as n kept + k conditioned.

    rho must be pure (rank one), unit trace, PSD, and supported on the
    symmetric subspace of n+k sites of dimension d. The truncation threshold
    r lies in 0..n. Violations raise InstanceError at construction.
    """

    d: int
    n: int
    k: int
    r: int
    rho: Operator
    label: str = ""

    def __post_init__(self):
        if self.d < 2:
            raise InstanceError(f"d must be >= 2, got {self.d}")
        if self.n < 1:
            raise InstanceError(f"n must be >= 1, got {self.n}")
        if self.k < 1:
            raise InstanceError(f"k must be >= 1, got {self.k}")
        if not 0 <= self.r <= self.n:
            raise InstanceError(f"r={self.r} outside 0..{self.n}")
        rho = self.rho
        if rho.site_dim != self.d or rho.sites != self.n + self.k:
            raise InstanceError(
                f"rho must act on {self.n + self.k} sites of dimension {self.d}, "
                f"got {rho.sites} sites of dimension {rho.site_dim}"
            )
        if not rho.is_hermitian(1e-12):
            raise InstanceError("rho must be hermitian")
        if not rho.is_trace_one(1e-10):
            raise InstanceError(f"rho must have unit trace, got {rho.trace():.6g}")
        eigs = np.linalg.eigvalsh(rho.entries)
        if eigs[0] < -1e-10:
            raise InstanceError(f"rho must be PSD, smallest eigenvalue {eigs[0]:.3e}")
        if eigs[-2] > _PURITY_ATOL:
            raise InstanceError(f"rho must be pure, second eigenvalue {eigs[-2]:.3e}")
        proj = symmetrizer(self.n + self.k, self.d)
        defect = trace_norm(proj @ rho @ proj - rho)
        if defect > _SYMMETRIC_SUPPORT_ATOL:
            raise InstanceError(
                f"rho must be supported on the symmetric subspace (defect {defect:.3e})"
            )


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one certification run; all numeric fields are finite."""

    lhs: float
    lhs_integration_error: float
    chain_bound: float
    explicit_bound: float
    g_max_value: float
    fallback_node_count: int
    rule_description: str
    status: str


def rho_psi(inst: Instance, psi: PureState) -> Operator:
    """Condition rho on observing psi^(x)k in the trailing k sites."""
    return sandwich_bra_last(inst.rho, psi, inst.k)


def _node_term(inst: Instance, node: PureState, fallback_tol: float):
    """(trace(rho_psi), trace(sigma), tau, used_fallback) at one node."""
    conditioned = rho_psi(inst, node)
    weight = conditioned.trace().real
    family = weight_family(node, inst.n)
    below, _ = threshold_projectors(family, inst.r)
    sigma = below @ conditioned @ below
    sigma_trace = sigma.trace().real
    if sigma_trace > fallback_tol * max(weight, _FALLBACK_SCALE_FLOOR):
        return weight, sigma_trace, (1.0 / sigma_trace) * sigma, False
    return weight, sigma_trace, node.tensor_power(inst.n).projector(), True


def tau_psi(
    inst: Instance, psi: PureState, fallback_tol: float = DEFAULT_FALLBACK_TOL
) -> tuple[float, Operator, bool]:
    """Truncate rho_psi below weight r and renormalize.

    Returns (trace of the truncated state, the normalized state, fallback
    flag). When the truncated trace is negligible (always at r = 0) the
    normalized state falls back to psi^(x)n, which has deviation weight 0.
    """
    _, sigma_trace, tau, used_fallback = _node_term(inst, psi, fallback_tol)
    return sigma_trace, tau, used_fallback


def _approximant_integrand(inst: Instance, fallback_tol: float, counter=None):
    scale = sym_dim(inst.k, inst.d)

    def f(node: PureState) -> Operator:
        weight, _, tau, used_fallback = _node_term(inst, node, fallback_tol)
        if used_fallback and counter is not None:
            counter[0] += 1
        return (scale * weight) * tau

    return f


def approximant(
    inst: Instance, rule: QuadratureRule, fallback_tol: float = DEFAULT_FALLBACK_TOL
) -> Operator:
    """The weighted average sym_dim(k,d) int trace(rho_psi) tau_psi d(psi)."""
    return integrate(rule, _approximant_integrand(inst, fallback_tol))


def nu_weight_normalization(inst: Instance, rule: QuadratureRule) -> float:
    """Total mass sym_dim(k,d) int trace(rho_psi) d(psi); 1 for exact rules."""
    mass = integrate(rule, lambda node: rho_psi(inst, node).trace().real)
    return sym_dim(inst.k, inst.d) * mass


def lhs_distance(
    inst: Instance, rule: QuadratureRule, fallback_tol: float = DEFAULT_FALLBACK_TOL
) -> tuple[float, float]:
    """Trace distance between the n-site reduction and the approximant.

    Returns (value, integration error scale). The integrand is not a
    polynomial (tau_psi carries a normalizing ratio), so even exact rules
    report a degree-escalation discrepancy rather than zero.
    """
    reduced = partial_trace_last(inst.rho, inst.k)
    value = trace_norm(reduced - approximant(inst, rule, fallback_tol))
    err = integration_error_estimate(rule, _approximant_integrand(inst, fallback_tol))
    return value, err


def chain_bound(inst: Instance, rule: QuadratureRule) -> float:
    """3 sym_dim(k,d) sqrt(int trace(P_geq_r rho_psi) d(psi)).

    The integrand is a polynomial of degree n+k in the node projector, so a
    qubit rule of degree >= n+k evaluates the integral without error.
    """

    def escaped_mass(node: PureState) -> float:
        family = weight_family(node, inst.n)
        _, above = threshold_projectors(family, inst.r)
        conditioned = rho_psi(inst, node)
        return float(np.einsum("ij,ji->", above.entries, conditioned.entries).real)

    mass = integrate(rule, escaped_mass)
    return 3.0 * sym_dim(inst.k, inst.d) * math.sqrt(max(mass, 0.0))


def explicit_bound(n: int, k: int, d: int, r: int) -> float:
    """Closed-form bound 3 sym_dim(k,d) sqrt(sym_dim(n+k,d)) e^(-(r/6) min(k/n,1))."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if not 0 <= r <= n:
        raise ValueError(f"r={r} outside 0..{n}")
    rate = min(k / n, 1.0)
    return 3.0 * sym_dim(k, d) * math.sqrt(sym_dim(n + k, d)) * math.exp(-(r / 6.0) * rate)


def g_max(n: int, k: int, r: int) -> float:
    """Max over x in [0,1] of x^k tail(n, r, x), by dense grid plus refinement.

    The maximum never exceeds e^(-(r/3) min(k/n, 1)): for x below 1 - r/(3n)
    the power x^k decays enough, and above that point the binomial tail
    itself is small. That ceiling is asserted before returning.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if not 0 <= r <= n + 1:
        raise ValueError(f"r={r} outside 0..{n + 1}")
    lo, hi = 0.0, 1.0
    best_x, best = 0.0, 0.0
    points = 10001
    for _ in range(3):
        xs = np.linspace(lo, hi, points)
        values = xs**k * tail_function_grid(n, r, xs)
        at = int(values.argmax())
        if values[at] >= best:
            best_x, best = float(xs[at]), float(values[at])
        step = (hi - lo) / (points - 1)
        lo, hi = max(best_x - step, 0.0), min(best_x + step, 1.0)
        points = 201
    ceiling = math.exp(-(r / 3.0) * min(k / n, 1.0))
    if best > ceiling + _GRID_SLACK:
        raise ArithmeticError(
            f"g_max(n={n}, k={k}, r={r}) = {best!r} exceeds its ceiling {ceiling!r}"
        )
    return best


def check_operator_inequality(inst: Instance, psi: PureState, rule: QuadratureRule) -> float:
    """Slack of rho_psi <= sym_dim(n+k,d) int |theta^n><theta^n| |<theta|psi>|^2k.

    Returns the smallest eigenvalue of (right side - rho_psi); for rules of
    exact degree >= n+k it should only dip below zero by roundoff.
    """
    scale = sym_dim(inst.n + inst.k, inst.d)

    def upper_piece(node: PureState) -> Operator:
        power = kron_power(node.amplitudes, inst.n)
        overlap = abs(node.overlap(psi)) ** 2
        return Operator(inst.d, inst.n, np.outer(power, power.conj()) * overlap**inst.k)

    upper = scale * integrate(rule, upper_piece)
    return min_eigenvalue(upper - rho_psi(inst, psi))


def check_gentle(rho: Operator, x_op: Operator) -> tuple[float, float]:
    """Both sides of the gentle measurement inequality.

    Returns (||rho - sqrt(X) rho sqrt(X)||_1, 2 sqrt(tr rho) sqrt(tr rho(I-X)))
    for PSD rho and 0 <= X <= I.
    """
    if not rho.is_psd(1e-10):
        raise ValueError("rho must be PSD")
    if x_op.hermiticity_defect() > 1e-12:
        raise ValueError("X must be hermitian")
    if (rho.site_dim, rho.sites) != (x_op.site_dim, x_op.sites):
        raise ValueError("rho and X must act on the same space")
    eigs, vecs = np.linalg.eigh(x_op.entries)
    if eigs[0] < -1e-10 or eigs[-1] > 1 + 1e-10:
        raise ValueError(f"X must satisfy 0 <= X <= I, spectrum [{eigs[0]:.3e}, {eigs[-1]:.6f}]")
    root = Operator(
        x_op.site_dim, x_op.sites, (vecs * np.sqrt(np.clip(eigs, 0.0, None))) @ vecs.conj().T
    )
    lhs = trace_norm(rho - root @ rho @ root)
    leak = (rho.trace() - (rho @ x_op).trace()).real
    rhs = 2.0 * math.sqrt(rho.trace().real) * math.sqrt(max(leak, 0.0))
    return lhs, rhs


def binary_divergence(p: float, q: float) -> float:
    """Relative entropy p ln(p/q) + (1-p) ln((1-p)/(1-q)) of coin biases."""
    if not 0.0 <= p <= 1.0 or not 0.0 < q < 1.0:
        raise ValueError(f"need p in [0,1] and q in (0,1), got p={p} q={q}")
    first = 0.0 if p == 0.0 else p * math.log(p / q)
    second = 0.0 if p == 1.0 else (1 - p) * math.log((1 - p) / (1 - q))
    return first + second


def check_chernoff_claim(n: int, r: int, grid_points: int = 1000) -> float:
    """Slack of the tail bound on the window where failures are rare.

    On x in [1 - r/(3n), 1) the chance that at least r of n trials fail,
    each failing with probability 1-x, is at most e^(-r/3). Returns the
    smallest value of e^(-r/3) - tail(n, r, x) over the grid, and verifies
    the large-deviation form n D(r/n || 1-x) >= r/3 at every grid point.
    """
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got n={n} r={r}")
    left = 1.0 - r / (3.0 * n)
    xs = left + (1.0 - left) * np.arange(grid_points) / grid_points
    tails = tail_function_grid(n, r, xs)
    slack = float((math.exp(-r / 3.0) - tails).min())
    rate = r / n
    divergences = np.array([binary_divergence(rate, 1.0 - float(x)) for x in xs])
    worst = float((n * divergences - r / 3.0).min())
    if worst < -_GRID_SLACK:
        raise ArithmeticError(
            f"large-deviation form fails at n={n} r={r}: min slack {worst:.3e}"
        )
    return slack


def check_exponent_sandwich(pairs) -> bool:
    """min(k/n, 1) <= 2k/(n+k) <= 2 min(k/n, 1), in exact rational arithmetic."""
    for n, k in pairs:
        if n < 1 or k < 1:
            raise ValueError(f"need n, k >= 1, got n={n} k={k}")
        low = min(Fraction(k, n), Fraction(1))
        mid = Fraction(2 * k, n + k)
        if not low <= mid <= 2 * low:
            return False
    return True


def verify(
    inst: Instance, rule: QuadratureRule, fallback_tol: float = DEFAULT_FALLBACK_TOL
) -> VerificationReport:
    """Run the full certification and classify the outcome.

    PASS requires lhs - err <= chain bound and chain bound <= explicit
    bound, both with 1e-9 slack. A large integration error (above 5% of the
    chain bound) yields INCONCLUSIVE rather than a verdict either way;
    everything else is a VIOLATION.
    """
    counter = [0]
    reduced = partial_trace_last(inst.rho, inst.k)
    approx = integrate(rule, _approximant_integrand(inst, fallback_tol, counter))
    lhs = trace_norm(reduced - approx)
    err = integration_error_estimate(rule, _approximant_integrand(inst, fallback_tol))
    chain = chain_bound(inst, rule)
    explicit = explicit_bound(inst.n, inst.k, inst.d, inst.r)
    tail_peak = g_max(inst.n, inst.k, inst.r)
    if err > INCONCLUSIVE_FRACTION * max(chain, INCONCLUSIVE_FLOOR):
        status = INCONCLUSIVE
    elif lhs - err <= chain + COMPARISON_SLACK and chain <= explicit + COMPARISON_SLACK:
        status = PASS
    else:
        status = VIOLATION
    return VerificationReport(
        lhs=lhs,
        lhs_integration_error=err,
        chain_bound=chain,
        explicit_bound=explicit,
        g_max_value=tail_peak,
        fallback_node_count=counter[0],
        rule_description=rule.describe(),
        status=status,
    )
