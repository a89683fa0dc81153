"""
Polynomials on configurations, restricted cubics and linear functionals.

A polynomial of degree N is a list of coefficient tensors (f_0, ..., f_N)
acting on a configuration eta as sum_j <f_j, eta^{(x)j}>. Only the
symmetric part of f_j is observable, so coefficients are symmetrized on
construction and two polynomials are equal exactly when their coefficients
agree.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config_space import Configuration
from .exceptions import DimensionError
from .moments import (
    MAX_ORDER,
    FiniteMeasure,
    MomentTensor,
    power_moments,
    tensor_power,
    symmetrize,
    weighted_mass,
)
from .utils import max_abs, pair, rational_array, to_fraction, zeros

logger = logging.getLogger(__name__)


class Polynomial:
    """An element of the degree-N polynomial space, N <= 3."""

    def __init__(self, coefficients: Sequence[Any], n_sites: Optional[int] = None):
        if not coefficients:
            coefficients = [Fraction(0)]
        if len(coefficients) - 1 > MAX_ORDER:
            raise DimensionError(f"degree {len(coefficients) - 1} exceeds {MAX_ORDER}")

        levels = []
        for j, coefficient in enumerate(coefficients):
            array = rational_array(coefficient)
            if array.ndim != j:
                raise DimensionError(f"coefficient f{j} must have order {j}, got {array.ndim}")
            if j > 0:
                if len(set(array.shape)) != 1:
                    raise DimensionError(f"coefficient f{j} is not square: {array.shape}")
                if n_sites is None:
                    n_sites = array.shape[0]
                elif array.shape[0] != n_sites:
                    raise DimensionError(
                        f"coefficient f{j} has dimension {array.shape[0]}, expected {n_sites}"
                    )
            levels.append(symmetrize(array))
        self.coefficients: List[np.ndarray] = levels
        self.n_sites = n_sites

    @classmethod
    def constant(cls, value, n_sites: Optional[int] = None) -> "Polynomial":
        return cls([Fraction(value)], n_sites)

    @classmethod
    def linear(cls, f0, f1: Sequence[Any]) -> "Polynomial":
        return cls([f0, list(f1)])

    @classmethod
    def indicator(cls, site: int, n_sites: int) -> "Polynomial":
        """The count k_site at one site."""
        f1 = [Fraction(1) if i == site else Fraction(0) for i in range(n_sites)]
        return cls([Fraction(0), f1])

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, j: int) -> np.ndarray:
        """f_j, or the zero tensor when j exceeds the stored degree."""
        if j < len(self.coefficients):
            return self.coefficients[j]
        if j > 0 and self.n_sites is None:
            raise DimensionError("constant polynomial has no site dimension")
        return zeros((self.n_sites,) * j)

    def effective_degree(self) -> int:
        """Degree after dropping trailing all-zero levels."""
        for j in range(self.degree, 0, -1):
            if any(v != 0 for v in np.ravel(self.coefficients[j])):
                return j
        return 0

    def max_abs_coefficient(self) -> Fraction:
        return max_abs(v for level in self.coefficients for v in np.ravel(level))

    def normalized(self) -> "Polynomial":
        """Scale so the largest absolute coefficient is 1."""
        scale = self.max_abs_coefficient()
        if scale == 0:
            return self
        return Polynomial([level / scale for level in self.coefficients], self.n_sites)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        top = max(self.degree, other.degree)
        if top > 0 and self.n_sites is not None and other.n_sites is not None \
                and self.n_sites != other.n_sites:
            return False
        for j in range(top + 1):
            a = self.coefficients[j] if j <= self.degree else None
            b = other.coefficients[j] if j <= other.degree else None
            if a is None:
                a = zeros(b.shape)
            if b is None:
                b = zeros(a.shape)
            if not bool(np.all(a == b)):
                return False
        return True

    def __repr__(self) -> str:
        return f"Polynomial(degree={self.degree}, coefficients={[c.tolist() for c in self.coefficients]})"


def _check_sites(n_sites: Optional[int], config: Configuration, what: str):
    if n_sites is not None and n_sites != len(config):
        raise DimensionError(f"{what} has {n_sites} sites, configuration has {len(config)}")


def evaluate(p: Polynomial, eta: Configuration) -> Fraction:
    """p(eta) = f0 + sum f1(x) k_x + sum f2(x,y) k_x k_y + ..."""
    _check_sites(p.n_sites if p.degree > 0 else None, eta, "polynomial")
    return sum((pair(f, tensor_power(eta, j).entries) for j, f in enumerate(p.coefficients)),
               Fraction(0))


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    """Product in the algebra: f_n (x) g_m contributes to order n + m."""
    degree = p.degree + q.degree
    if degree > MAX_ORDER:
        raise DimensionError(f"product degree {degree} exceeds {MAX_ORDER}")
    n_sites = p.n_sites if p.n_sites is not None else q.n_sites
    if p.n_sites is not None and q.n_sites is not None and p.n_sites != q.n_sites:
        raise DimensionError(f"site counts differ: {p.n_sites} vs {q.n_sites}")
    if degree > 0 and n_sites is None:
        raise DimensionError("cannot infer the site dimension of the product")

    levels = [zeros((n_sites,) * j) if j else zeros(()) for j in range(degree + 1)]
    for n, f in enumerate(p.coefficients):
        for m, g in enumerate(q.coefficients):
            levels[n + m] = levels[n + m] + np.multiply.outer(f, g)
    return Polynomial(levels, n_sites)


@dataclass(frozen=True)
class RestrictedCubic:
    """
    f0 + f1 eta + f2 eta^{(x)2} + f3 (sum_x gamma(x) k_x)^3.

    gamma == 1 everywhere gives the compact-space restricted cubic.
    """

    f0: Fraction
    f1: Tuple[Fraction, ...]
    f2: Tuple[Tuple[Fraction, ...], ...]
    f3: Fraction
    gamma: Tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.gamma)
        gamma = tuple(rational_array(list(self.gamma), (n,)).tolist())
        if any(g <= 0 for g in gamma):
            raise DimensionError(f"gamma entries must be positive, got {gamma}")
        f1 = rational_array(list(self.f1), (n,), "$.f1")
        f2 = rational_array([list(row) for row in self.f2], (n, n), "$.f2")
        if not bool(np.all(f2 == f2.T)):
            raise DimensionError("f2 of a restricted cubic must be symmetric")
        object.__setattr__(self, "f0", Fraction(self.f0))
        object.__setattr__(self, "f1", tuple(f1.tolist()))
        object.__setattr__(self, "f2", tuple(tuple(row) for row in f2.tolist()))
        object.__setattr__(self, "f3", Fraction(self.f3))
        object.__setattr__(self, "gamma", gamma)

    @property
    def n_sites(self) -> int:
        return len(self.gamma)

    def quadratic_part(self) -> Polynomial:
        return Polynomial([self.f0, list(self.f1), [list(r) for r in self.f2]])

    def max_abs_coefficient(self) -> Fraction:
        values = [self.f0, self.f3, *self.f1, *(v for row in self.f2 for v in row)]
        return max_abs(values)

    def normalized(self) -> "RestrictedCubic":
        scale = self.max_abs_coefficient()
        if scale == 0:
            return self
        return RestrictedCubic(
            self.f0 / scale,
            tuple(v / scale for v in self.f1),
            tuple(tuple(v / scale for v in row) for row in self.f2),
            self.f3 / scale,
            self.gamma,
        )


def evaluate_restricted_cubic(q: RestrictedCubic, eta: Configuration) -> Fraction:
    """q(eta) including the cubed weighted-mass term."""
    _check_sites(q.n_sites, eta, "restricted cubic")
    return evaluate(q.quadratic_part(), eta) + q.f3 * weighted_mass(eta, q.gamma) ** 3


class MomentFunctional:
    """
    The linear functional L on polynomials of degree <= N, given by its
    moment tensors (ell0, ell1, ell2[, ell3]).
    """

    def __init__(self, ell0, ell1: Any, ell2: Any, ell3: Any = None,
                 probability: bool = False):
        self.ell0 = to_fraction(ell0, "$.L.ell0")
        first = MomentTensor(ell1)
        if first.order != 1:
            raise DimensionError("ell1 must be a vector")
        n_sites = first.n_sites
        self.tensors: List[MomentTensor] = [MomentTensor(self.ell0), first,
                                            MomentTensor(ell2, n_sites)]
        if self.tensors[2].order != 2:
            raise DimensionError("ell2 must be a matrix")
        if ell3 is not None:
            third = MomentTensor(ell3, n_sites)
            if third.order != 3:
                raise DimensionError("ell3 must be an order-3 tensor")
            self.tensors.append(third)
        self.probability = probability
        if probability and not (0 < self.ell0 <= 1):
            raise DimensionError(f"a (sub)probability functional needs 0 < ell0 <= 1, got {self.ell0}")

    @classmethod
    def from_tensors(cls, tensors: Sequence[MomentTensor]) -> "MomentFunctional":
        if len(tensors) < 3:
            raise DimensionError("a moment functional needs orders 0, 1 and 2")
        ell3 = tensors[3].entries if len(tensors) > 3 else None
        return cls(tensors[0].entries[()], tensors[1].entries, tensors[2].entries, ell3)

    @classmethod
    def from_measure(cls, mu: FiniteMeasure, degree: int = 2,
                     n_sites: Optional[int] = None) -> "MomentFunctional":
        """Moments of a finite measure."""
        return cls.from_tensors(power_moments(mu, degree, n_sites))

    @property
    def n_sites(self) -> int:
        return self.tensors[1].n_sites

    @property
    def degree(self) -> int:
        return len(self.tensors) - 1

    @property
    def ell1(self) -> np.ndarray:
        return self.tensors[1].entries

    @property
    def ell2(self) -> np.ndarray:
        return self.tensors[2].entries

    @property
    def ell3(self) -> Optional[np.ndarray]:
        return self.tensors[3].entries if self.degree >= 3 else None

    def with_ell0(self, ell0) -> "MomentFunctional":
        tensors = [MomentTensor(Fraction(ell0))] + self.tensors[1:]
        return MomentFunctional.from_tensors(tensors)

    def vector(self) -> List[Fraction]:
        """All moment entries flattened order by order (the LP right-hand side)."""
        return [v for tensor in self.tensors for v in np.ravel(tensor.entries)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentFunctional):
            return NotImplemented
        return self.degree == other.degree and all(
            a == b for a, b in zip(self.tensors, other.tensors))

    def __repr__(self) -> str:
        return f"MomentFunctional(n_sites={self.n_sites}, degree={self.degree}, ell0={self.ell0})"


def apply_functional(L: MomentFunctional, p: Polynomial) -> Fraction:
    """L(p) = f0 ell0 + <f1, ell1> + <f2, ell2> (+ <f3, ell3>)."""
    degree = p.effective_degree()
    if degree > L.degree:
        raise DimensionError(f"polynomial of degree {degree} exceeds the data of L (degree {L.degree})")
    if p.degree > 0 and p.n_sites != L.n_sites:
        raise DimensionError(f"polynomial has {p.n_sites} sites, L has {L.n_sites}")
    return sum((pair(p.coefficients[j], L.tensors[j].entries) for j in range(degree + 1)),
               Fraction(0))


def ratio_bound(b: Polynomial, gamma: Sequence[Any]) -> Fraction:
    """
    lambda_b = |f0| + max_x |f1(x)|/gamma(x) + max_{x,y} |f2(x,y)|/(gamma(x)gamma(y)).

    Upper bound for |b(eta)| / (1 + (sum gamma k)^3) over all configurations,
    since (a + c t + d t^2) / (1 + t^3) <= a + c + d for t >= 0.
    """
    gamma = [Fraction(g) for g in rational_array(list(gamma)).tolist()]
    if any(g <= 0 for g in gamma):
        raise DimensionError(f"gamma entries must be positive, got {gamma}")
    if b.effective_degree() > 2:
        raise DimensionError("ratio bounds are defined for degree <= 2")
    if b.degree > 0 and b.n_sites != len(gamma):
        raise DimensionError(f"gamma has {len(gamma)} entries, polynomial has {b.n_sites} sites")

    n = len(gamma)
    f1 = b.coefficient(1) if b.degree >= 1 else zeros((n,))
    f2 = b.coefficient(2) if b.degree >= 2 else zeros((n, n))
    lambda1 = max_abs(f1[x] / gamma[x] for x in range(n))
    lambda2 = max_abs(f2[x, y] / (gamma[x] * gamma[y]) for x in range(n) for y in range(n))
    return abs(b.coefficients[0][()]) + lambda1 + lambda2


def empirical_ratio_max(b: Polynomial, gamma: Sequence[Any],
                        configurations: Iterable[Configuration]) -> Fraction:
    """max |b(eta)| / (1 + (sum gamma k)^3) over the given configurations."""
    gamma = [Fraction(g) for g in gamma]
    best = Fraction(0)
    for eta in configurations:
        ratio = abs(evaluate(b, eta)) / (1 + weighted_mass(eta, gamma) ** 3)
        best = max(best, ratio)
    return best


def separating_polynomial(eta: Configuration, other: Configuration) -> Polynomial:
    """A degree <= 1 polynomial that takes different values on two configurations."""
    if len(eta) != len(other):
        raise DimensionError("configurations live on different site spaces")
    for site, (a, b) in enumerate(zip(eta.counts, other.counts)):
        if a != b:
            return Polynomial.indicator(site, len(eta))
    raise DimensionError(f"configurations {eta} and {other} are equal")
