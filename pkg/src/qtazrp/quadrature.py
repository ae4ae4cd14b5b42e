"""n-fold contour integration on a common circle |w| = R.

Each variable uses the periodic trapezoid rule on M equally spaced nodes,
which converges geometrically for integrands analytic near the circle. The
rule at M/2 nodes is the even-index sub-grid of the rule at M nodes, so every
evaluation also yields the coarser value and the two give the error estimate.
"""

from __future__ import annotations

import functools
import logging
import math
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from qtazrp.errors import NonConvergence
from qtazrp.models import ContourSpec, RateProfile, StateVector
from qtazrp.qcore import rate_b

logger = logging.getLogger(__name__)

Integrand = Callable[[tuple[Any, ...]], Any]
Factor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SeparableIntegrand:
    """``coupling(w) * prod_v factors[v](w_v)``.

    Per-variable factors are evaluated once per node set instead of once per
    grid point. A ``None`` coupling or factor stands for the constant 1.
    """

    coupling: Integrand | None
    factors: tuple[Factor | None, ...]

    @property
    def n(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    estimated_error: float
    nodes_used: int
    converged: bool
    radius: float


def circle_nodes(radius: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes R e^{2 pi i k / M} and weights z_k / M.

    ``sum(weights * f(nodes))`` approximates (2 pi i)^{-1} times the
    counter-clockwise integral of f over |z| = R.
    """
    if m < 1:
        raise ValueError(f"need at least one node, got {m}")
    nodes = radius * np.exp(2j * np.pi * np.arange(m) / m)
    return nodes, nodes / m


def fixed_sum(values: Iterable[complex]) -> complex:
    """Order-independent, correctly rounded complex sum."""
    values = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def _coupling_on(coupling: Integrand | None, w: tuple[Any, ...], shape: tuple[int, ...]) -> np.ndarray:
    if coupling is None:
        return np.ones(shape, dtype=complex)
    return np.broadcast_to(np.asarray(coupling(w), dtype=complex), shape)


def _evaluate(integrand: SeparableIntegrand, radius: float, m: int, workers: int) -> tuple[complex, complex]:
    """Trapezoid sums at M and at M/2 nodes per variable."""
    n = integrand.n
    nodes, weights = circle_nodes(radius, m)
    scaled = [
        weights if factor is None else weights * np.broadcast_to(factor(nodes), nodes.shape)
        for factor in integrand.factors
    ]
    if n == 1:
        terms = scaled[0] * _coupling_on(integrand.coupling, (nodes,), (m,))
        return fixed_sum(terms), 2 * fixed_sum(terms[::2])

    inner_nodes = np.ix_(*([nodes] * (n - 1)))
    inner_weights = functools.reduce(np.multiply, np.ix_(*scaled[1:]))
    inner_shape = (m,) * (n - 1)
    even = (slice(None, None, 2),) * (n - 1)

    def slab(i: int) -> tuple[complex, complex]:
        values = _coupling_on(integrand.coupling, (nodes[i], *inner_nodes), inner_shape) * inner_weights
        full = complex(scaled[0][i] * values.sum())
        half = complex(scaled[0][i] * values[even].sum()) if i % 2 == 0 else 0j
        return full, half

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(slab, range(m)))
    else:
        partials = [slab(i) for i in range(m)]
    value = fixed_sum(full for full, _ in partials)
    half = 2**n * fixed_sum(half for _, half in partials)
    return value, half


def contour_integral_n(
    integrand: SeparableIntegrand | Integrand,
    n: int,
    spec: ContourSpec,
) -> QuadratureResult:
    """Integrate over the torus |w_1| = ... = |w_n| = R, doubling M until converged.

    A plain callable receives a tuple of n mutually broadcastable arrays.
    Raises :class:`NonConvergence` when ``max_nodes`` is exhausted, unless the
    spec allows unconverged results.
    """
    if not isinstance(integrand, SeparableIntegrand):
        integrand = SeparableIntegrand(coupling=integrand, factors=(None,) * n)
    if integrand.n != n:
        raise ValueError(f"integrand has {integrand.n} variables, expected {n}")

    m = spec.nodes
    while True:
        value, half = _evaluate(integrand, spec.radius, m, spec.workers)
        error = abs(value - half)
        converged = bool(np.isfinite(error)) and error < spec.tol * max(1.0, abs(value))
        result = QuadratureResult(
            value=value,
            estimated_error=error,
            nodes_used=m,
            converged=converged,
            radius=spec.radius,
        )
        if converged or m >= spec.max_nodes:
            break
        logger.debug("n=%d R=%.4g: error %.3e at M=%d, doubling", n, spec.radius, error, m)
        m *= 2

    if not converged:
        message = f"no convergence after M={m} nodes (estimated error {error:.3e}, tol {spec.tol:.1e})"
        logger.warning(message)
        if not spec.allow_unconverged:
            raise NonConvergence(message, result)
    return result


def choose_radius(profile: RateProfile, initial: StateVector, final: StateVector) -> float:
    """Twice the largest b_k over the sites one left of both states through their maxima.

    All b_k and q w_i poles then lie inside |w| = R and all w_l / q outside.
    """
    low = min(min(initial.coords), min(final.coords)) - 1
    high = max(max(initial.coords), max(final.coords))
    return 2.0 * max(rate_b(profile, k) for k in range(low, high + 1))
