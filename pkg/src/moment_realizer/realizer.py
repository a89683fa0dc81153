"""
Truncated K-moment problems decided through exact linear programming.

For a finite configuration set K the moment vectors of measures on K form a
finitely generated closed cone, so a functional L has a K-representing
measure exactly when it is K-positive. The moment LP has one column
(1, k, vec(k⊗k)[, vec(k⊗k⊗k)]) per configuration; either it is feasible
and the solution is a representing measure, or its Farkas vector gives a
polynomial that is nonnegative on K and negative under L.
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from .config import Config, DEFAULT_ENUMERATION_CAP
from .config_space import (
    Configuration,
    KSpec,
    SiteSpace,
    contains,
    count_configurations,
    enumerate_configurations,
)
from .exceptions import (
    DimensionError,
    InstanceFormatError,
    MomentRealizerError,
    SolverContractError,
)
from .moments import FiniteMeasure, power_moments, tensor_power, weighted_mass, weighted_third_moment
from .polynomial import (
    MomentFunctional,
    Polynomial,
    RestrictedCubic,
    apply_functional,
    evaluate,
    evaluate_restricted_cubic,
)
from .simplex import DEFAULT_MAX_PIVOTS, DEFAULT_SIZE_CAP, LinearProgram, RowSense, solve
from .utils import to_fraction

logger = logging.getLogger(__name__)


@dataclass
class RealizabilityInstance:
    """Site space, configuration set K and the moment data to realize."""

    space: SiteSpace
    kspec: KSpec
    L: MomentFunctional
    gamma: Optional[Tuple[Fraction, ...]] = None
    r_max: Optional[Fraction] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.kspec.validate_for(self.space)
        if self.L.n_sites != self.space.size:
            raise DimensionError(
                f"moment data has {self.L.n_sites} sites, space has {self.space.size}"
            )
        if self.gamma is not None:
            gamma = tuple(to_fraction(g, f"$.gamma[{i}]") for i, g in enumerate(self.gamma))
            if len(gamma) != self.space.size:
                raise DimensionError(f"gamma has {len(gamma)} entries for {self.space.size} sites")
            if any(g <= 0 for g in gamma):
                raise DimensionError(f"gamma entries must be positive, got {gamma}")
            self.gamma = gamma
        if self.r_max is not None:
            self.r_max = to_fraction(self.r_max, "$.r_max")
            if self.r_max <= 0:
                raise DimensionError(f"r_max must be positive, got {self.r_max}")

    def with_kspec(self, kspec: KSpec) -> "RealizabilityInstance":
        return replace(self, kspec=kspec, meta=dict(self.meta))


@dataclass(frozen=True)
class RepresentingMeasure:
    """A measure on K reproducing L; realized_R is its Gamma-weighted third moment."""

    measure: FiniteMeasure
    realized_R: Optional[Fraction] = None
    r_max: Optional[Fraction] = None

    @property
    def is_measure(self) -> bool:
        return True


@dataclass(frozen=True)
class PositivityCertificate:
    """A polynomial (or restricted cubic) nonnegative on K with negative pairing."""

    q: Union[Polynomial, RestrictedCubic]
    r_max: Optional[Fraction] = None

    @property
    def is_measure(self) -> bool:
        return False

    @property
    def is_cubic(self) -> bool:
        return isinstance(self.q, RestrictedCubic)


Verdict = Union[RepresentingMeasure, PositivityCertificate]


@dataclass(frozen=True)
class KPositive:
    witness: RepresentingMeasure


@dataclass(frozen=True)
class NotKPositive:
    certificate: PositivityCertificate


@dataclass(frozen=True)
class MinimalThirdMoment:
    """Smallest Gamma-weighted third moment over all representing measures."""

    value: Fraction
    witness: RepresentingMeasure


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(CheckResult(name, passed, detail))

    def __bool__(self) -> bool:
        return self.passed

    def summary(self) -> str:
        if self.passed:
            return f"all {len(self.checks)} checks passed"
        return "; ".join(f"{c.name}: {c.detail}" for c in self.failures)


@dataclass(frozen=True)
class SweepPoint:
    Q: int
    n_configurations: int
    verdict: Verdict


def moment_column(eta: Configuration, degree: int) -> List[Fraction]:
    """(1, k, vec(k⊗k), ...) up to ``degree``, in the row order of L.vector()."""
    return [v for j in range(degree + 1) for v in np.ravel(tensor_power(eta, j).entries)]


def _row_label(order: int, index: Tuple[int, ...], sites: Sequence[str]) -> str:
    if order == 0:
        return "ell0"
    return f"ell{order}[" + ",".join(sites[i] for i in index) + "]"


def _split_levels(y: Sequence[Fraction], degree: int, n: int) -> List[np.ndarray]:
    levels = []
    offset = 0
    for j in range(degree + 1):
        size = n ** j
        chunk = np.array(list(y[offset:offset + size]), dtype=object)
        levels.append(chunk.reshape((n,) * j) if j else chunk[0])
        offset += size
    return levels


class Realizer:
    """Decides realizability instances under fixed resource caps."""

    def __init__(
        self,
        enumeration_cap: int = DEFAULT_ENUMERATION_CAP,
        lp_size_cap: int = DEFAULT_SIZE_CAP,
        max_pivots: int = DEFAULT_MAX_PIVOTS,
        debug_tableau: bool = False
    ):
        """
        Args:
            enumeration_cap: Maximum size of K
            lp_size_cap: Maximum tableau size (rows x columns)
            max_pivots: Simplex pivot ceiling
            debug_tableau: Dump every tableau at DEBUG level
        """
        self.enumeration_cap = enumeration_cap
        self.lp_size_cap = lp_size_cap
        self.max_pivots = max_pivots
        self.debug_tableau = debug_tableau

    @classmethod
    def from_config(cls, config: Config) -> "Realizer":
        return cls(
            enumeration_cap=config.limits.enumeration_cap,
            lp_size_cap=config.limits.lp_size_cap,
            max_pivots=config.limits.max_pivots,
            debug_tableau=config.solver.debug_tableau,
        )

    def configurations(self, instance: RealizabilityInstance) -> List[Configuration]:
        configs = enumerate_configurations(instance.space, instance.kspec, self.enumeration_cap)
        logger.info(f"K = {instance.kspec.describe()} has {len(configs)} configurations")
        return configs

    def _solve(self, lp: LinearProgram):
        logger.info(f"Solving LP with {lp.n_rows} rows and {lp.n_cols} columns")
        return solve(lp, size_cap=self.lp_size_cap, max_pivots=self.max_pivots,
                     debug=self.debug_tableau)

    @staticmethod
    def _moment_lp(configs: List[Configuration], L: MomentFunctional,
                   extra_row: Optional[List[Fraction]] = None,
                   extra_rhs: Optional[Fraction] = None,
                   objective: Optional[List[Fraction]] = None) -> LinearProgram:
        columns = [moment_column(eta, L.degree) for eta in configs]
        rows = [list(r) for r in zip(*columns)] if columns else [[] for _ in L.vector()]
        rhs = L.vector()
        senses = [RowSense.EQ] * len(rows)
        if extra_row is not None:
            rows.append(extra_row)
            rhs.append(extra_rhs)
            senses.append(RowSense.LE)
        return LinearProgram(rows, rhs, senses, objective,
                             column_names=[str(eta) for eta in configs])

    @staticmethod
    def _measure_from(configs: List[Configuration], x: Sequence[Fraction]) -> FiniteMeasure:
        return FiniteMeasure(tuple((eta, w) for eta, w in zip(configs, x) if w > 0))

    @staticmethod
    def _polynomial_from(y: Sequence[Fraction], degree: int, n: int) -> Polynomial:
        return Polynomial(_split_levels(y, degree, n), n)

    def _ensure_sound(self, instance: RealizabilityInstance, verdict,
                      configs: List[Configuration]):
        report = self.verify_verdict(instance, verdict, configs)
        if not report.passed:
            raise SolverContractError(f"verdict failed its re-check: {report.summary()}")

    def _measure_verdict(self, instance: RealizabilityInstance, measure: FiniteMeasure,
                         r_max: Optional[Fraction] = None) -> RepresentingMeasure:
        realized = weighted_third_moment(measure, instance.gamma) if instance.gamma else None
        return RepresentingMeasure(measure, realized_R=realized, r_max=r_max)

    def find_representing_measure(self, instance: RealizabilityInstance) -> Verdict:
        """
        Decide the truncated K-moment problem.

        Returns:
            RepresentingMeasure when L is realizable on K, otherwise a
            PositivityCertificate whose polynomial is >= 0 on K with L(q) < 0

        Raises:
            CapExceededError: K or the LP exceeds its cap
        """
        configs = self.configurations(instance)
        L = instance.L
        outcome = self._solve(self._moment_lp(configs, L))

        if outcome.is_feasible:
            verdict = self._measure_verdict(instance, self._measure_from(configs, outcome.x))
            logger.info(f"Realizable: measure with {len(verdict.measure)} atoms")
        else:
            q = self._polynomial_from(outcome.y, L.degree, instance.space.size).normalized()
            verdict = PositivityCertificate(q)
            logger.info(f"Not realizable: degree-{q.effective_degree()} certificate")

        self._ensure_sound(instance, verdict, configs)
        return verdict

    def check_k_positivity(self, instance: RealizabilityInstance) -> Union[KPositive, NotKPositive]:
        """K-positivity of L, with the representing measure as witness when it holds."""
        verdict = self.find_representing_measure(instance)
        if verdict.is_measure:
            return KPositive(verdict)
        return NotKPositive(verdict)

    def _cubic_inputs(self, instance: RealizabilityInstance):
        if instance.gamma is None:
            raise InstanceFormatError("the restricted-cubic problem needs gamma", "$.gamma")
        if instance.L.degree != 2:
            raise DimensionError(
                f"the restricted-cubic problem takes degree-2 moment data, got degree {instance.L.degree}"
            )
        configs = self.configurations(instance)
        cubes = [weighted_mass(eta, instance.gamma) ** 3 for eta in configs]
        return configs, cubes

    def extend_with_cubic(self, instance: RealizabilityInstance,
                          r_max: Optional[Fraction] = None) -> Verdict:
        """
        Realize L with a measure whose Gamma-weighted third moment is at most r_max.

        On failure the Farkas vector of the extra <= row becomes f3 >= 0 of a
        restricted cubic certificate q with L(f0 + f1 k + f2 k⊗k) + f3 r_max < 0.
        """
        r_max = instance.r_max if r_max is None else to_fraction(r_max, "$.r_max")
        if r_max is None:
            raise InstanceFormatError("the restricted-cubic problem needs r_max", "$.r_max")
        if r_max <= 0:
            raise DimensionError(f"r_max must be positive, got {r_max}")

        configs, cubes = self._cubic_inputs(instance)
        outcome = self._solve(self._moment_lp(configs, instance.L, cubes, r_max))

        if outcome.is_feasible:
            verdict = self._measure_verdict(instance, self._measure_from(configs, outcome.x), r_max)
            logger.info(f"Extension exists: realized R = {verdict.realized_R} <= {r_max}")
        else:
            n = instance.space.size
            quadratic = self._polynomial_from(outcome.y[:-1], 2, n)
            cubic = RestrictedCubic(
                quadratic.coefficients[0][()],
                tuple(quadratic.coefficients[1].tolist()),
                tuple(tuple(row) for row in quadratic.coefficients[2].tolist()),
                outcome.y[-1],
                instance.gamma,
            ).normalized()
            verdict = PositivityCertificate(cubic, r_max)
            logger.info(f"No extension with R <= {r_max}: restricted cubic with f3 = {cubic.f3}")

        self._ensure_sound(instance, verdict, configs)
        return verdict

    def minimal_third_moment(self, instance: RealizabilityInstance
                             ) -> Union[MinimalThirdMoment, PositivityCertificate]:
        """R* = min of sum x (Gamma k)^3 over representing measures, or a degree-2 certificate."""
        configs, cubes = self._cubic_inputs(instance)
        outcome = self._solve(self._moment_lp(configs, instance.L, objective=cubes))

        if not outcome.is_feasible:
            q = self._polynomial_from(outcome.y, 2, instance.space.size).normalized()
            verdict = PositivityCertificate(q)
            self._ensure_sound(instance, verdict, configs)
            return verdict

        witness = self._measure_verdict(instance, self._measure_from(configs, outcome.x))
        result = MinimalThirdMoment(outcome.objective_value, witness)
        self._ensure_sound(instance, result, configs)
        logger.info(f"Minimal third moment R* = {result.value}")
        return result

    def sweep_q(self, instance: RealizabilityInstance, q_values: Iterable[int],
                progress: bool = False) -> List[SweepPoint]:
        """One verdict per total-mass cap Q, same variant and same L."""
        points = []
        for q in tqdm(list(q_values), desc="Sweeping Q", disable=not progress):
            sub = instance.with_kspec(instance.kspec.with_q(q))
            verdict = self.find_representing_measure(sub)
            points.append(SweepPoint(q, count_configurations(sub.space, sub.kspec), verdict))
        return points

    def verify_verdict(self, instance: RealizabilityInstance, verdict: Any,
                       configurations: Optional[List[Configuration]] = None) -> VerificationReport:
        """
        Independently re-check a verdict. Never raises; every failure is reported
        as a named check.
        """
        report = VerificationReport()
        try:
            if isinstance(verdict, KPositive):
                verdict = verdict.witness
            elif isinstance(verdict, NotKPositive):
                verdict = verdict.certificate

            if isinstance(verdict, MinimalThirdMoment):
                self._verify_measure(instance, verdict.witness, report)
                report.add("minimal-R", verdict.witness.realized_R == verdict.value,
                           f"witness realizes {verdict.witness.realized_R}, reported {verdict.value}")
            elif isinstance(verdict, RepresentingMeasure):
                self._verify_measure(instance, verdict, report)
            elif isinstance(verdict, PositivityCertificate):
                if configurations is None:
                    configurations = enumerate_configurations(
                        instance.space, instance.kspec, self.enumeration_cap)
                self._verify_certificate(instance, verdict, configurations, report)
            else:
                report.add("verdict-type", False, f"unknown verdict {type(verdict).__name__}")
        except (MomentRealizerError, ValueError, TypeError) as e:
            report.add("well-formed", False, str(e))
        return report

    def _verify_measure(self, instance: RealizabilityInstance, verdict: RepresentingMeasure,
                        report: VerificationReport):
        mu = verdict.measure
        outside = [eta for eta in mu.configurations
                   if not contains(instance.space, instance.kspec, eta)]
        report.add("support-in-K", not outside,
                   f"configuration {outside[0]} is not in K" if outside else "")
        report.add("weights-positive", all(w > 0 for _, w in mu.support))

        L = instance.L
        got = power_moments(mu, L.degree, instance.space.size)
        for order in range(L.degree + 1):
            expected = L.tensors[order].entries
            actual = got[order].entries
            clean = True
            for index in np.ndindex(expected.shape):
                if actual[index] != expected[index]:
                    clean = False
                    report.add(_row_label(order, index, instance.space.sites), False,
                               f"measure gives {actual[index]}, L has {expected[index]}")
            if clean:
                report.add(f"ell{order}", True)

        if verdict.realized_R is not None:
            if instance.gamma is None:
                report.add("realized-R", False, "realized R reported without gamma")
            else:
                actual_R = weighted_third_moment(mu, instance.gamma)
                report.add("realized-R", actual_R == verdict.realized_R,
                           f"measure gives {actual_R}, reported {verdict.realized_R}")
        if verdict.r_max is not None:
            report.add("R-within-cap", verdict.realized_R is not None and verdict.realized_R <= verdict.r_max,
                       f"R = {verdict.realized_R} exceeds r_max = {verdict.r_max}")

    def _verify_certificate(self, instance: RealizabilityInstance,
                            verdict: PositivityCertificate,
                            configurations: List[Configuration],
                            report: VerificationReport):
        q = verdict.q
        if isinstance(q, RestrictedCubic):
            def value_at(eta):
                return evaluate_restricted_cubic(q, eta)
            report.add("f3-nonnegative", q.f3 >= 0, f"f3 = {q.f3}")
            if instance.gamma is not None:
                report.add("gamma-matches", tuple(q.gamma) == tuple(instance.gamma),
                           f"certificate gamma {q.gamma} differs from instance gamma")
        else:
            def value_at(eta):
                return evaluate(q, eta)

        witness = None
        for eta in configurations:
            value = value_at(eta)
            if value < 0:
                witness = (eta, value)
                break
        report.add("nonnegative-on-K", witness is None,
                   f"q{witness[0]} = {witness[1]} < 0" if witness else "")

        if isinstance(q, RestrictedCubic):
            r_max = verdict.r_max if verdict.r_max is not None else instance.r_max
            if r_max is None:
                report.add("pairing-negative", False, "no r_max to pair f3 with")
                return
            pairing = apply_functional(instance.L, q.quadratic_part()) + q.f3 * r_max
        else:
            pairing = apply_functional(instance.L, q)
        report.add("pairing-negative", pairing < 0, f"L(q) = {pairing}")


def _default() -> Realizer:
    return Realizer()


def find_representing_measure(instance: RealizabilityInstance,
                              realizer: Optional[Realizer] = None) -> Verdict:
    return (realizer or _default()).find_representing_measure(instance)


def check_k_positivity(instance: RealizabilityInstance,
                       realizer: Optional[Realizer] = None) -> Union[KPositive, NotKPositive]:
    return (realizer or _default()).check_k_positivity(instance)


def extend_with_cubic(instance: RealizabilityInstance, r_max: Optional[Fraction] = None,
                      realizer: Optional[Realizer] = None) -> Verdict:
    return (realizer or _default()).extend_with_cubic(instance, r_max)


def minimal_third_moment(instance: RealizabilityInstance,
                         realizer: Optional[Realizer] = None
                         ) -> Union[MinimalThirdMoment, PositivityCertificate]:
    return (realizer or _default()).minimal_third_moment(instance)


def verify_verdict(instance: RealizabilityInstance, verdict: Any,
                   realizer: Optional[Realizer] = None) -> VerificationReport:
    return (realizer or _default()).verify_verdict(instance, verdict)


def sweep_q(instance: RealizabilityInstance, q_values: Iterable[int],
            realizer: Optional[Realizer] = None) -> List[SweepPoint]:
    return (realizer or _default()).sweep_q(instance, q_values)
