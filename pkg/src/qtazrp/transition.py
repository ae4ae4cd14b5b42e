"""Transition probabilities of the q-TAZRP from Bethe-ansatz contour integrals.

u0(X; t) is the sum over permutations sigma of Lambda_Y(X; t; sigma). On
ordered states the transition probability is u0(X; t) / W(X); on arbitrary
integer vectors u0 still makes sense and is what the free-evolution and
boundary residuals probe.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from qtazrp.bethe import Permutation, a_sigma, b_factor, chain_factor, permutations
from qtazrp.errors import HorizonTooLong
from qtazrp.models import (
    ContourOptions,
    ContourSpec,
    PermutationTerm,
    ProbabilityResult,
    RateProfile,
    StateVector,
    TransitionRequest,
)
from qtazrp.qcore import product, q_factorial, rate_b, weight_W
from qtazrp.quadrature import (
    QuadratureResult,
    SeparableIntegrand,
    choose_radius,
    contour_integral_n,
    fixed_sum,
)

logger = logging.getLogger(__name__)

MAX_RADIUS_TIME = 40.0
CONFLUENCE_RTOL = 1e-6


def _variable_factor(profile: RateProfile, lower: int, upper: int, t: float):
    def factor(w):
        return chain_factor(profile, lower, upper, w) * np.exp(-w * t)

    return factor


def lambda_separable(
    final: StateVector,
    initial: StateVector,
    sigma: Permutation,
    t: float,
    profile: RateProfile,
    derivative: bool = False,
) -> SeparableIntegrand:
    """The Lambda_Y(X; t; sigma) integrand split into A_sigma and per-variable chains.

    Variable w_v with v = sigma(j) carries the chain from y_v to x_j and the
    factor e^{-w_v t}. With ``derivative`` the coupling is multiplied by
    -sum(w), which is d/dt of the integrand.
    """
    n = sigma.n
    factors = [None] * n
    for j in range(1, n + 1):
        v = sigma(j)
        factors[v - 1] = _variable_factor(profile, initial.coords[v - 1], final.coords[j - 1], t)

    if sigma == Permutation.identity(n) and not derivative:
        coupling = None
    else:

        def coupling(w):
            value = a_sigma(sigma, w, profile.q)
            if derivative:
                value = value * -sum(w)
            return value

    return SeparableIntegrand(coupling=coupling, factors=tuple(factors))


def lambda_prefactor(final: StateVector, profile: RateProfile) -> float:
    """prod_k (-1 / b_{x_k})."""
    return product(-1.0 / rate_b(profile, x) for x in final.coords)


def _resolve(
    contour: ContourOptions,
    profile: RateProfile,
    initial: StateVector,
    states: Sequence[StateVector],
    t: float,
) -> ContourSpec:
    """One common radius large enough for every state involved."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    auto = max(choose_radius(profile, initial, state) for state in states)
    spec = contour.resolve(auto)
    if spec.radius * t > MAX_RADIUS_TIME:
        raise HorizonTooLong(
            f"R*t = {spec.radius * t:.3g} exceeds {MAX_RADIUS_TIME:g} (R={spec.radius:.4g}, t={t:g}); "
            "cancellation in e^(R t) would swamp the result, use the oracle instead"
        )
    return spec


def _lambda_terms(
    final: StateVector,
    initial: StateVector,
    t: float,
    profile: RateProfile,
    spec: ContourSpec,
    derivative: bool = False,
) -> list[tuple[Permutation, complex, QuadratureResult]]:
    """Lambda for every permutation in lexicographic order, prefactor applied."""
    n = final.n
    prefactor = lambda_prefactor(final, profile)
    sigmas = permutations(n)
    parallel = spec.workers > 1 and n > 1
    inner = spec.model_copy(update={"workers": 1}) if parallel else spec

    def term(sigma: Permutation) -> tuple[Permutation, complex, QuadratureResult]:
        integrand = lambda_separable(final, initial, sigma, t, profile, derivative)
        result = contour_integral_n(integrand, n, inner)
        return sigma, prefactor * result.value, result

    if parallel:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(term, sigmas))
    return [term(sigma) for sigma in sigmas]


def _u0(
    final: StateVector,
    initial: StateVector,
    t: float,
    profile: RateProfile,
    spec: ContourSpec,
    derivative: bool = False,
) -> complex:
    return fixed_sum(value for _, value, _ in _lambda_terms(final, initial, t, profile, spec, derivative))


def transition_probability(req: TransitionRequest) -> ProbabilityResult:
    """P_Y(X; t) = u0(X; t) / W(X), with per-permutation diagnostics."""
    spec = _resolve(req.contour, req.profile, req.initial, [req.final], req.t)
    terms = _lambda_terms(req.final, req.initial, req.t, req.profile, spec)
    weight = weight_W(req.final, req.profile.q)
    prefactor = abs(lambda_prefactor(req.final, req.profile))
    total = fixed_sum(value for _, value, _ in terms) / weight
    logger.debug(
        "P(%s -> %s; t=%g) = %.12g%+.3gi over %d permutations at R=%.4g",
        req.initial,
        req.final,
        req.t,
        total.real,
        total.imag,
        len(terms),
        spec.radius,
    )
    return ProbabilityResult(
        p=total.real,
        imag_leak=abs(total.imag),
        estimated_error=math.fsum(prefactor * result.estimated_error for _, _, result in terms) / weight,
        converged=all(result.converged for _, _, result in terms),
        nodes=max(result.nodes_used for _, _, result in terms),
        radius=spec.radius,
        terms=tuple(
            PermutationTerm(
                images=sigma.images,
                real=value.real,
                imag=value.imag,
                estimated_error=prefactor * result.estimated_error,
                nodes_used=result.nodes_used,
                converged=result.converged,
            )
            for sigma, value, result in terms
        ),
    )


def u0_sum(
    final: StateVector,
    initial: StateVector,
    t: float,
    profile: RateProfile,
    contour: ContourOptions | None = None,
) -> complex:
    """The unnormalized Bethe sum at an arbitrary integer vector ``final``."""
    spec = _resolve(contour or ContourOptions(), profile, initial, [final], t)
    return _u0(final, initial, t, profile, spec)


def one_particle_contour(
    y: int,
    x: int,
    t: float,
    profile: RateProfile,
    contour: ContourOptions | None = None,
) -> float:
    """P_y(x; t) by quadrature of the one-variable integral."""
    req = TransitionRequest(
        initial=StateVector(coords=(y,)),
        final=StateVector(coords=(x,)),
        t=t,
        profile=profile,
        contour=contour or ContourOptions(),
    )
    return transition_probability(req).p


def _confluent(values: Sequence[float]) -> bool:
    ordered = sorted(values)
    return any(b - a <= CONFLUENCE_RTOL * b for a, b in zip(ordered, ordered[1:]))


def one_particle_prob(
    y: int,
    x: int,
    t: float,
    profile: RateProfile,
    contour: ContourOptions | None = None,
) -> float:
    """Closed-form residue sum for a single particle.

    Falls back to :func:`one_particle_contour` when two of b_y..b_x coincide.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if x < y:
        return 0.0
    b = [rate_b(profile, k) for k in range(y, x + 1)]
    if x == y:
        return math.exp(-b[0] * t)
    if _confluent(b):
        logger.debug("coincident b on [%d, %d], using the contour form", y, x)
        return one_particle_contour(y, x, t, profile, contour)
    total = math.fsum(
        math.exp(-bk * t) / math.prod(bj - bk for j, bj in enumerate(b) if j != k) for k, bk in enumerate(b)
    )
    return math.prod(b[:-1]) * total


def step_init_prob(
    final: StateVector,
    t: float,
    profile: RateProfile,
    contour: ContourOptions | None = None,
) -> ProbabilityResult:
    """P from all particles at the origin, as a single n-fold integral with B(w)."""
    if not final.ordered:
        raise ValueError(f"final state {final.coords} is not weakly decreasing")
    n = final.n
    initial = StateVector.zeros(n)
    spec = _resolve(contour or ContourOptions(), profile, initial, [final], t)
    integrand = SeparableIntegrand(
        coupling=(lambda w: b_factor(w, profile.q)) if n > 1 else None,
        factors=tuple(_variable_factor(profile, 0, x, t) for x in final.coords),
    )
    result = contour_integral_n(integrand, n, spec)
    scale = q_factorial(n, profile.q) / weight_W(final, profile.q) * lambda_prefactor(final, profile)
    value = scale * result.value
    return ProbabilityResult(
        p=value.real,
        imag_leak=abs(value.imag),
        estimated_error=abs(scale) * result.estimated_error,
        converged=result.converged,
        nodes=result.nodes_used,
        radius=spec.radius,
    )


def free_evolution_residual(
    final: StateVector,
    initial: StateVector,
    t: float,
    profile: RateProfile,
    contour: ContourOptions | None = None,
) -> complex:
    """d/dt u0(X) - sum_k (b_{x_k - 1} u0(X^{k,-}) - b_{x_k} u0(X)).

    The time derivative is taken under the integral sign. Every u0 shares one
    radius so the discretizations match.
    """
    shifted = [final.minus(k) for k in range(1, final.n + 1)]
    spec = _resolve(contour or ContourOptions(), profile, initial, [final, *shifted], t)
    derivative = _u0(final, initial, t, profile, spec, derivative=True)
    at_final = _u0(final, initial, t, profile, spec)
    flow = fixed_sum(
        rate_b(profile, x - 1) * _u0(minus, initial, t, profile, spec) - rate_b(profile, x) * at_final
        for x, minus in zip(final.coords, shifted)
    )
    return derivative - flow


def boundary_residual(
    k: int,
    x: int,
    context: StateVector,
    initial: StateVector,
    t: float,
    profile: RateProfile,
    contour: ContourOptions | None = None,
) -> complex:
    """b_{x-1} u0(.., x-1, x, ..) - q b_{x-1} u0(.., x, x-1, ..) - (1-q) b_x u0(.., x, x, ..).

    Positions k and k+1 (1-based) of ``context`` are overwritten; the other
    coordinates are kept.
    """
    n = context.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"boundary position k={k} out of range for n={n}")
    q = profile.q.q
    rising = context.with_pair(k, x - 1, x)
    falling = context.with_pair(k, x, x - 1)
    stacked = context.with_pair(k, x, x)
    spec = _resolve(contour or ContourOptions(), profile, initial, [rising, falling, stacked], t)
    b_left, b_here = rate_b(profile, x - 1), rate_b(profile, x)
    return (
        b_left * _u0(rising, initial, t, profile, spec)
        - q * b_left * _u0(falling, initial, t, profile, spec)
        - (1.0 - q) * b_here * _u0(stacked, initial, t, profile, spec)
    )
