"""
Known-realizable point processes on finite site spaces.

Every generator returns a FiniteMeasure of total weight exactly 1, so its
moments can be fed back to the solver as a forward oracle. Randomized
generators draw from ``Lcg64``, a 64-bit linear congruential recurrence

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2^64

whose outputs are the high 32 bits of the state; the same seed gives the
same measure on every platform.
"""

import logging
from fractions import Fraction
from math import factorial
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .config import DEFAULT_ENUMERATION_CAP
from .config_space import (
    Configuration,
    KSpec,
    KVariant,
    SiteSpace,
    contains,
    enumerate_configurations,
    iter_configurations,
)
from .exceptions import GeneratorError
from .moments import FiniteMeasure
from .polynomial import MomentFunctional, Polynomial
from .realizer import RealizabilityInstance
from .utils import format_rational, to_fraction, zeros

logger = logging.getLogger(__name__)


class Lcg64:
    """Seeded 64-bit LCG; state is local to the instance."""

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int = 0):
        self.state = int(seed) & self.MASK

    def next_u32(self) -> int:
        self.state = (self.MULTIPLIER * self.state + self.INCREMENT) & self.MASK
        return self.state >> 32

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n)."""
        if n <= 0:
            raise GeneratorError(f"range must be positive, got {n}")
        return self.next_u32() % n

    def between(self, low: int, high: int) -> int:
        """Integer in [low, high]."""
        return low + self.below(high - low + 1)

    def coin(self) -> bool:
        return self.next_u32() >> 31 == 1

    def rational(self, low: int, high: int, max_denominator: int = 4) -> Fraction:
        """Rational in [low, high] with denominator at most ``max_denominator``."""
        den = self.between(1, max_denominator)
        return Fraction(self.between(low * den, high * den), den)

    def choice(self, items: Sequence[Any]) -> Any:
        return items[self.below(len(items))]


def _normalized(weights: Dict[Configuration, Fraction]) -> FiniteMeasure:
    total = sum(weights.values(), Fraction(0))
    return FiniteMeasure.from_weights((c, w / total) for c, w in weights.items())


def bernoulli_field(space: SiteSpace, probs: Sequence[Any]) -> FiniteMeasure:
    """
    Independent occupation of each site with probability p_i.

    The product weight of a simple configuration is prod p_i^k_i (1 - p_i)^(1 - k_i);
    zero-weight configurations are dropped.
    """
    probs = [to_fraction(p, f"$.probs[{i}]") for i, p in enumerate(probs)]
    if len(probs) != space.size:
        raise GeneratorError(f"{len(probs)} probabilities for {space.size} sites")
    for i, p in enumerate(probs):
        if not 0 <= p <= 1:
            raise GeneratorError(f"probability at site {space.sites[i]} is {p}, outside [0, 1]")

    weights = {}
    for config in iter_configurations(space, KSpec.simple(space.size)):
        w = Fraction(1)
        for p, k in zip(probs, config.counts):
            w *= p if k else 1 - p
        if w:
            weights[config] = w
    return FiniteMeasure.from_weights(weights.items())


def truncated_poisson(space: SiteSpace, intensities: Sequence[Any], cap: int) -> FiniteMeasure:
    """Independent Poisson counts truncated at ``cap`` per site, renormalized exactly."""
    intensities = [to_fraction(v, f"$.intensities[{i}]") for i, v in enumerate(intensities)]
    if len(intensities) != space.size:
        raise GeneratorError(f"{len(intensities)} intensities for {space.size} sites")
    if any(v <= 0 for v in intensities):
        raise GeneratorError(f"intensities must be positive, got {intensities}")
    if cap < 0:
        raise GeneratorError(f"cap must be nonnegative, got {cap}")

    per_site = [[lam ** k / factorial(k) for k in range(cap + 1)] for lam in intensities]
    weights = {}
    for counts in np.ndindex(*([cap + 1] * space.size)):
        w = Fraction(1)
        for site, k in enumerate(counts):
            w *= per_site[site][k]
        weights[Configuration(counts)] = w
    return _normalized(weights)


def _hardcore_weights(space: SiteSpace, z: Any, D: Any, Q: int,
                      cap: int) -> Dict[Configuration, Fraction]:
    z = to_fraction(z, "$.z")
    if z <= 0:
        raise GeneratorError(f"activity must be positive, got {z}")
    if space.distances is None:
        raise GeneratorError("hard-core process needs a distance matrix")
    configs = enumerate_configurations(space, KSpec.hard_core(D, Q), cap)
    return {c: z ** c.total_mass for c in configs}


def hardcore_partition_function(space: SiteSpace, z: Any, D: Any, Q: int,
                                cap: int = DEFAULT_ENUMERATION_CAP) -> Fraction:
    """Sum of z^eta(X) over hard-core configurations with at most Q points."""
    return sum(_hardcore_weights(space, z, D, Q, cap).values(), Fraction(0))


def gibbs_hardcore(space: SiteSpace, z: Any, D: Any, Q: int,
                   cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteMeasure:
    """mu(eta) proportional to z^eta(X) on the hard-core configuration set."""
    weights = _hardcore_weights(space, z, D, Q, cap)
    logger.debug(f"Hard-core partition function over {len(weights)} configurations")
    return _normalized(weights)


def random_measure(space: SiteSpace, kspec: KSpec, seed: int,
                   cap: int = DEFAULT_ENUMERATION_CAP,
                   max_weight: int = 9) -> FiniteMeasure:
    """Random support subset of K with positive integer weights, normalized to 1."""
    rng = Lcg64(seed)
    configs = enumerate_configurations(space, kspec, cap)
    chosen = [c for c in configs if rng.coin()]
    if not chosen:
        chosen = [rng.choice(configs)]
    weights = {c: Fraction(rng.between(1, max_weight)) for c in chosen}
    return _normalized(weights)


def random_kspec(rng: Lcg64, space: SiteSpace, max_q: int = 2) -> KSpec:
    """Random K-spec over the space; hard-core only when distances exist."""
    variants = [KVariant.AT_MOST, KVariant.EXACTLY, KVariant.SIMPLE]
    if space.distances is not None:
        variants.append(KVariant.HARD_CORE)
    variant = rng.choice(variants)
    q = rng.between(0, max_q)
    if variant is KVariant.HARD_CORE:
        return KSpec.hard_core(Fraction(rng.between(1, 3), 2), q)
    return KSpec(variant, q)


def random_functional(rng: Lcg64, n_sites: int, degree: int = 2,
                      low: int = -1, high: int = 3) -> MomentFunctional:
    """Arbitrary symmetric moment data; realizable or not."""
    tensors = []
    for order in range(degree + 1):
        entries = zeros((n_sites,) * order)
        for index in np.ndindex(entries.shape):
            key = tuple(sorted(index))
            if key == index:
                entries[index] = rng.rational(low, high)
            else:
                entries[index] = entries[key]
        tensors.append(entries)
    tensors[0] = tensors[0][()]
    return MomentFunctional(*tensors)


def random_polynomial(rng: Lcg64, n_sites: int, degree: int,
                      low: int = -3, high: int = 3) -> Polynomial:
    levels = [zeros((n_sites,) * j) for j in range(degree + 1)]
    for level in levels:
        for index in np.ndindex(level.shape):
            level[index] = rng.rational(low, high)
    return Polynomial(levels, n_sites)


def instance_from_measure(mu: FiniteMeasure, space: SiteSpace, kspec: KSpec,
                          gamma: Optional[Sequence[Any]] = None, degree: int = 2,
                          meta: Optional[Dict[str, Any]] = None) -> RealizabilityInstance:
    """
    Build a realizability instance whose moment data are the moments of ``mu``.

    Raises:
        GeneratorError: if the support of mu leaves K
    """
    for config in mu.configurations:
        if not contains(space, kspec, config):
            raise GeneratorError(f"configuration {config} of the measure is not in {kspec.describe()}")

    L = MomentFunctional.from_measure(mu, degree, space.size)
    meta = dict(meta or {})
    meta.setdefault("source", "measure")
    meta.setdefault("total_weight", format_rational(mu.total_weight))
    return RealizabilityInstance(space, kspec, L,
                                 tuple(gamma) if gamma is not None else None,
                                 meta=meta)


def sample_instances(seed: int, count: int, max_sites: int = 3,
                     max_q: int = 2) -> List[RealizabilityInstance]:
    """Seeded random instances with arbitrary (possibly unrealizable) moment data."""
    rng = Lcg64(seed)
    instances = []
    for _ in range(count):
        n = rng.between(1, max_sites)
        space = SiteSpace.on_line([f"s{i}" for i in range(n)]) if rng.coin() \
            else SiteSpace(tuple(f"s{i}" for i in range(n)))
        kspec = random_kspec(rng, space, max_q)
        instances.append(RealizabilityInstance(space, kspec, random_functional(rng, n)))
    return instances
