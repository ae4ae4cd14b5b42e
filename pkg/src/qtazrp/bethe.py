"""Symmetric-group machinery and Bethe-ansatz coefficient algebra.

Variables are indexed from 1 as in the formulas: ``w[i - 1]`` is w_i. A
point ``w`` is any sequence of complex numbers or of mutually broadcastable
numpy arrays, so every function here evaluates on quadrature grids too.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from qtazrp.models import QParams, RateProfile, StateVector
from qtazrp.qcore import check_pole, prod_prime, product, q_factorial, rate_b

ComplexPoint = Sequence[Any]

SEPARATION_RTOL = 1e-3


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..n} in one-line notation: ``images[i - 1] = sigma(i)``."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"{self.images} is not a permutation of 1..{len(self.images)}")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    @cached_property
    def inverse_images(self) -> tuple[int, ...]:
        inverse = [0] * self.n
        for position, image in enumerate(self.images, start=1):
            inverse[image - 1] = position
        return tuple(inverse)

    def inverse(self) -> Permutation:
        return Permutation(self.inverse_images)

    def compose(self, other: Permutation) -> Permutation:
        """(self o other)(i) = self(other(i))."""
        return Permutation(tuple(self(other(i)) for i in range(1, self.n + 1)))

    def swap_positions(self, k: int) -> Permutation:
        """self o (k, k+1): the images at positions k and k+1 exchanged."""
        if not 1 <= k < self.n:
            raise ValueError(f"adjacent position k={k} out of range for n={self.n}")
        images = list(self.images)
        images[k - 1], images[k] = images[k], images[k - 1]
        return Permutation(tuple(images))

    @cached_property
    def inversions(self) -> tuple[tuple[int, int], ...]:
        """Pairs (beta, alpha) with alpha < beta and sigma^-1(alpha) > sigma^-1(beta)."""
        inv = self.inverse_images
        return tuple(
            (beta, alpha)
            for beta in range(2, self.n + 1)
            for alpha in range(1, beta)
            if inv[alpha - 1] > inv[beta - 1]
        )


def permutations(n: int) -> Iterator[Permutation]:
    """Stream S_n in lexicographic order by successor generation."""
    current = list(range(1, n + 1))
    while True:
        yield Permutation(tuple(current))
        i = n - 2
        while i >= 0 and current[i] >= current[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while current[j] <= current[i]:
            j -= 1
        current[i], current[j] = current[j], current[i]
        current[i + 1 :] = reversed(current[i + 1 :])


def inversions(sigma: Permutation) -> list[tuple[int, int]]:
    return list(sigma.inversions)


def s_factor(beta: int, alpha: int, w: ComplexPoint, q: QParams) -> Any:
    """S_(beta, alpha) = -(q w_beta - w_alpha) / (q w_alpha - w_beta)."""
    if not alpha < beta:
        raise ValueError(f"S-factor needs alpha < beta, got ({beta}, {alpha})")
    w_alpha, w_beta = w[alpha - 1], w[beta - 1]
    denominator = q.q * w_alpha - w_beta
    check_pole(denominator, np.maximum(np.abs(q.q * w_alpha), np.abs(w_beta)), f"S({beta},{alpha})")
    return -(q.q * w_beta - w_alpha) / denominator


def a_sigma(sigma: Permutation, w: ComplexPoint, q: QParams) -> Any:
    """Product of S-factors over the inversions of sigma; 1 for the identity."""
    return product(s_factor(beta, alpha, w, q) for beta, alpha in sigma.inversions)


def adjacent_pair_residual(mu: Permutation, k: int, w: ComplexPoint, q: QParams) -> Any:
    """A_nu - A_mu * S_(beta, alpha) for the pair nu = mu o (k, k+1).

    The roles are arranged so that mu(k) = alpha < beta = mu(k+1).
    """
    nu = mu.swap_positions(k)
    if mu(k) > mu(k + 1):
        mu, nu = nu, mu
    alpha, beta = mu(k), mu(k + 1)
    return a_sigma(nu, w, q) - a_sigma(mu, w, q) * s_factor(beta, alpha, w, q)


def b_factor(w: ComplexPoint, q: QParams) -> Any:
    """B(w) = prod_{i<j} (w_i - w_j) / (w_i - q w_j)."""
    value: Any = 1.0
    n = len(w)
    for i in range(n):
        for j in range(i + 1, n):
            denominator = w[i] - q.q * w[j]
            scale = np.maximum(np.abs(w[i]), np.abs(q.q * w[j]))
            check_pole(denominator, scale, f"B factor ({i + 1},{j + 1})")
            value = value * (w[i] - w[j]) / denominator
    return value


def c_function(w: ComplexPoint, q: QParams) -> Any:
    """C(w) = sum_k prod_{j != k} (q w_j - w_k) / (w_j - w_k)."""
    total: Any = 0.0
    n = len(w)
    for k in range(n):
        term: Any = 1.0
        for j in range(n):
            if j == k:
                continue
            denominator = w[j] - w[k]
            check_pole(denominator, np.maximum(np.abs(w[j]), np.abs(w[k])), f"C term ({j + 1},{k + 1})")
            term = term * (q.q * w[j] - w[k]) / denominator
        total = total + term
    return total


def perm_sum_identity_residual(w: ComplexPoint, q: QParams) -> complex:
    """sum_sigma A_sigma(w_{sigma^-1(1)}, ..., w_{sigma^-1(n)}) - [n]_q! B(w)."""
    n = len(w)
    total = 0j
    for sigma in permutations(n):
        permuted = tuple(w[position - 1] for position in sigma.inverse_images)
        total += a_sigma(sigma, permuted, q)
    return total - q_factorial(n, q) * b_factor(w, q)


def chain_factor(profile: RateProfile, lower: int, upper: int, w: Any) -> Any:
    """The extended product of b_k / (b_k - w) for k from ``lower`` to ``upper``."""

    def ratio(k: int) -> Any:
        b = rate_b(profile, k)
        check_pole(b - w, np.maximum(b, np.abs(w)), f"pole b_{k}")
        return b / (b - w)

    return prod_prime(ratio, lower, upper)


def lambda_integrand(
    final: StateVector,
    initial: StateVector,
    sigma: Permutation,
    t: float,
    w: ComplexPoint,
    profile: RateProfile,
) -> Any:
    """Integrand of Lambda_Y(X; t; sigma) without the prod_k(-1/b_{x_k}) prefactor.

    ``final`` is X (any integer vector), ``initial`` is Y.
    """
    value = a_sigma(sigma, w, profile.q)
    for j in range(1, sigma.n + 1):
        v = sigma(j)
        chain = chain_factor(profile, initial.coords[v - 1], final.coords[j - 1], w[v - 1])
        value = value * chain * np.exp(-w[j - 1] * t)
    return value


def well_separated(w: ComplexPoint, q: QParams, rtol: float = SEPARATION_RTOL) -> bool:
    """True when all values {w_i, q w_j} are pairwise further apart than rtol * max|w_i|."""
    w = np.asarray(w, dtype=complex)
    candidates = np.concatenate([w, q.q * w])
    distances = np.abs(candidates[:, None] - candidates[None, :])
    np.fill_diagonal(distances, np.inf)
    return bool(np.min(distances) > rtol * np.max(np.abs(w)))


def random_point(
    n: int,
    q: QParams,
    rng: np.random.Generator,
    radius: float = 3.0,
    rtol: float = SEPARATION_RTOL,
    max_tries: int = 1000,
) -> tuple[complex, ...]:
    """Draw a well-separated point with all coordinates on |w| = radius."""
    for _ in range(max_tries):
        point = radius * np.exp(2j * np.pi * rng.random(n))
        if well_separated(point, q, rtol):
            return tuple(complex(z) for z in point)
    raise ValueError(f"no well-separated point found for n={n} after {max_tries} draws")
