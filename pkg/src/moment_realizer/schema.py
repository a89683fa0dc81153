"""
JSON instance and result documents.

Rationals are written as "p/q" strings in lowest terms (plain integers are
accepted on input); floats are rejected everywhere. Errors carry the JSON
path of the offending value, e.g. ``$.L.ell2[1][0]``.

Instance::

    {"sites": [...], "distances": [[...]]?,
     "kspec": {"variant", "Q", "D"?, "configurations"?},
     "L": {"ell0"?, "ell1", "ell2", "ell3"?},
     "gamma": [...]?, "r_max": "p/q"?, "meta": {...}?}

Result::

    {"verdict": "measure" | "certificate",
     "support": [{"counts", "weight"}]?, "realized_R"?, "minimal_R"?, "r_max"?,
     "certificate": {"f0", "f1", "f2", "f3"?, "gamma"?}?,
     "caps": {"Q", "enumeration"}}
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from .config_space import Configuration, KSpec, KVariant, SiteSpace
from .exceptions import DimensionError, InstanceFormatError, KSpecError
from .moments import FiniteMeasure, MomentTensor, factorial_to_power
from .polynomial import MomentFunctional, Polynomial, RestrictedCubic
from .realizer import MinimalThirdMoment, PositivityCertificate, RealizabilityInstance, RepresentingMeasure
from .utils import format_rational, rational_array, rational_to_json, to_fraction, zeros

logger = logging.getLogger(__name__)

VERDICT_MEASURE = "measure"
VERDICT_CERTIFICATE = "certificate"


def _require(data: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(data, dict):
        raise InstanceFormatError("expected an object", path)
    if key not in data:
        raise InstanceFormatError(f"missing required field {key!r}", path)
    return data[key]


def _integer(value: Any, path: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"expected an integer, got {value!r}", path)
    if value < minimum:
        raise InstanceFormatError(f"must be >= {minimum}, got {value}", path)
    return value


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise InstanceFormatError(f"expected an array, got {type(value).__name__}", path)
    return value


def read_json(path: Union[str, Path]) -> Any:
    """Load a JSON file, turning syntax errors into InstanceFormatError."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InstanceFormatError(f"file not found: {path}")
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"invalid JSON in {path.name} (line {e.lineno}, column {e.colno}): {e.msg}")
    except UnicodeDecodeError as e:
        raise InstanceFormatError(f"{path.name} is not valid UTF-8 ({e.reason} at byte {e.start})")
    except OSError as e:
        raise InstanceFormatError(f"cannot read {path}: {e.strerror or e}")


def write_json(data: Any, path: Union[str, Path], indent: int = 2) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=indent)
        f.write("\n")
    return path


# -- site spaces and K-specs -------------------------------------------------

def parse_space(data: Dict[str, Any]) -> SiteSpace:
    sites = _list(_require(data, "sites", "$"), "$.sites")
    for i, label in enumerate(sites):
        if not isinstance(label, str):
            raise InstanceFormatError(f"site labels must be strings, got {label!r}", f"$.sites[{i}]")
    distances = data.get("distances")
    if distances is not None:
        matrix = rational_array(distances, (len(sites), len(sites)), "$.distances")
        distances = tuple(tuple(row) for row in matrix.tolist())
    try:
        return SiteSpace(tuple(sites), distances)
    except DimensionError as e:
        raise InstanceFormatError(str(e), "$.distances" if distances is not None else "$.sites")


def space_to_dict(space: SiteSpace) -> Dict[str, Any]:
    data: Dict[str, Any] = {"sites": list(space.sites)}
    if space.distances is not None:
        data["distances"] = rational_to_json(space.distances)
    return data


def parse_configuration(value: Any, path: str, n_sites: Optional[int] = None) -> Configuration:
    counts = [_integer(c, f"{path}[{i}]") for i, c in enumerate(_list(value, path))]
    if n_sites is not None and len(counts) != n_sites:
        raise InstanceFormatError(f"expected {n_sites} counts, got {len(counts)}", path)
    return Configuration(tuple(counts))


def parse_kspec(data: Any, path: str = "$.kspec", n_sites: Optional[int] = None) -> KSpec:
    variant = _require(data, "variant", path)
    try:
        variant = KVariant(variant)
    except ValueError:
        choices = ", ".join(v.value for v in KVariant)
        raise InstanceFormatError(f"unknown variant {variant!r} (expected one of {choices})", f"{path}.variant")

    try:
        if variant is KVariant.LISTED:
            raw = _list(_require(data, "configurations", path), f"{path}.configurations")
            configs = [parse_configuration(c, f"{path}.configurations[{i}]", n_sites)
                       for i, c in enumerate(raw)]
            return KSpec.from_list([c.counts for c in configs])
        q = _integer(_require(data, "Q", path), f"{path}.Q")
        if variant is KVariant.HARD_CORE:
            D = to_fraction(_require(data, "D", path), f"{path}.D")
            return KSpec.hard_core(D, q)
        return KSpec(variant, q)
    except KSpecError as e:
        raise InstanceFormatError(str(e), path)


def kspec_to_dict(kspec: KSpec) -> Dict[str, Any]:
    data: Dict[str, Any] = {"variant": kspec.variant.value, "Q": kspec.Q}
    if kspec.D is not None:
        data["D"] = format_rational(kspec.D)
    if kspec.variant is KVariant.LISTED:
        data["configurations"] = [list(c.counts) for c in kspec.listed]
    return data


# -- moment data ----------------------------------------------------------------

def parse_tensors(data: Dict[str, Any], path: str, n_sites: int,
                  default_ell0: Optional[Any] = None) -> List[MomentTensor]:
    """Read ell0..ell3 into symmetric tensors (ell3 optional)."""
    if "ell0" in data:
        ell0 = to_fraction(data["ell0"], f"{path}.ell0")
    elif default_ell0 is not None:
        ell0 = to_fraction(default_ell0, f"{path}.ell0")
    else:
        raise InstanceFormatError("missing required field 'ell0'", path)

    tensors = [MomentTensor(ell0)]
    for order in (1, 2, 3):
        key = f"ell{order}"
        if key not in data:
            if order < 3:
                raise InstanceFormatError(f"missing required field {key!r}", path)
            break
        entries = rational_array(data[key], (n_sites,) * order, f"{path}.{key}")
        try:
            tensors.append(MomentTensor(entries, n_sites))
        except DimensionError as e:
            raise InstanceFormatError(str(e), f"{path}.{key}")
    return tensors


def tensors_to_dict(tensors: Sequence[MomentTensor]) -> Dict[str, Any]:
    return {f"ell{n}": rational_to_json(t.entries) for n, t in enumerate(tensors)}


def parse_functional(data: Any, n_sites: int, path: str = "$.L",
                     default_ell0: Optional[Any] = None,
                     factorial: bool = False) -> MomentFunctional:
    """
    Moment data of an instance. With ``factorial`` the tensors are read as
    correlation functions and converted to moment functions.
    """
    if not isinstance(data, dict):
        raise InstanceFormatError("expected an object", path)
    tensors = parse_tensors(data, path, n_sites, default_ell0)
    if factorial:
        tensors = factorial_to_power(tensors)
    return MomentFunctional.from_tensors(tensors)


def functional_to_dict(L: MomentFunctional) -> Dict[str, Any]:
    return tensors_to_dict(L.tensors)


def parse_instance(data: Any, default_ell0: Optional[Any] = None,
                   factorial: bool = False) -> RealizabilityInstance:
    if not isinstance(data, dict):
        raise InstanceFormatError("an instance must be a JSON object")
    space = parse_space(data)
    kspec = parse_kspec(_require(data, "kspec", "$"), "$.kspec", space.size)
    if kspec.variant is KVariant.HARD_CORE and space.distances is None:
        raise InstanceFormatError("hard-core K-spec requires a distance matrix", "$.distances")
    L = parse_functional(_require(data, "L", "$"), space.size, "$.L", default_ell0, factorial)

    gamma = None
    if data.get("gamma") is not None:
        gamma = tuple(rational_array(data["gamma"], (space.size,), "$.gamma").tolist())
        for i, g in enumerate(gamma):
            if g <= 0:
                raise InstanceFormatError(f"gamma must be positive, got {g}", f"$.gamma[{i}]")
    r_max = None
    if data.get("r_max") is not None:
        r_max = to_fraction(data["r_max"], "$.r_max")
        if r_max <= 0:
            raise InstanceFormatError(f"r_max must be positive, got {r_max}", "$.r_max")
    meta = data.get("meta") or {}
    if not isinstance(meta, dict):
        raise InstanceFormatError("meta must be an object", "$.meta")

    try:
        return RealizabilityInstance(space, kspec, L, gamma, r_max, dict(meta))
    except (DimensionError, KSpecError) as e:
        raise InstanceFormatError(str(e))


def load_instance(path: Union[str, Path], default_ell0: Optional[Any] = None,
                  factorial: bool = False) -> RealizabilityInstance:
    instance = parse_instance(read_json(path), default_ell0, factorial)
    logger.debug(f"Loaded instance {path}: {instance.space.size} sites, {instance.kspec.describe()}")
    return instance


def instance_to_dict(instance: RealizabilityInstance) -> Dict[str, Any]:
    data = space_to_dict(instance.space)
    data["kspec"] = kspec_to_dict(instance.kspec)
    data["L"] = functional_to_dict(instance.L)
    if instance.gamma is not None:
        data["gamma"] = rational_to_json(list(instance.gamma))
    if instance.r_max is not None:
        data["r_max"] = format_rational(instance.r_max)
    if instance.meta:
        data["meta"] = instance.meta
    return data


# -- measures and polynomials -----------------------------------------------------

def measure_to_list(mu: FiniteMeasure) -> List[Dict[str, Any]]:
    return [{"counts": list(c.counts), "weight": format_rational(w)} for c, w in mu.support]


def parse_measure(data: Any, path: str = "$.support",
                  n_sites: Optional[int] = None) -> FiniteMeasure:
    atoms = []
    for i, atom in enumerate(_list(data, path)):
        at = f"{path}[{i}]"
        config = parse_configuration(_require(atom, "counts", at), f"{at}.counts", n_sites)
        weight = to_fraction(_require(atom, "weight", at), f"{at}.weight")
        if weight <= 0:
            raise InstanceFormatError(f"weight must be positive, got {weight}", f"{at}.weight")
        atoms.append((config, weight))
    try:
        return FiniteMeasure(tuple(atoms))
    except DimensionError as e:
        raise InstanceFormatError(str(e), path)


def load_measure(path: Union[str, Path]) -> FiniteMeasure:
    """A measure file is either {"support": [...]} or the bare support list."""
    data = read_json(path)
    if isinstance(data, dict):
        return parse_measure(_require(data, "support", "$"))
    return parse_measure(data, "$")


def polynomial_to_dict(q: Union[Polynomial, RestrictedCubic]) -> Dict[str, Any]:
    if isinstance(q, RestrictedCubic):
        return {
            "f0": format_rational(q.f0),
            "f1": rational_to_json(list(q.f1)),
            "f2": rational_to_json([list(r) for r in q.f2]),
            "f3": format_rational(q.f3),
            "gamma": rational_to_json(list(q.gamma)),
        }
    return {f"f{j}": rational_to_json(f) for j, f in enumerate(q.coefficients)}


def parse_polynomial(data: Any, path: str = "$.certificate",
                     n_sites: Optional[int] = None) -> Union[Polynomial, RestrictedCubic]:
    """A polynomial {f0, f1?, f2?, f3?}; with "gamma" it is a restricted cubic."""
    if not isinstance(data, dict):
        raise InstanceFormatError("expected an object", path)
    f0 = to_fraction(_require(data, "f0", path), f"{path}.f0")

    if data.get("gamma") is not None:
        gamma = rational_array(data["gamma"], path=f"{path}.gamma")
        if gamma.ndim != 1:
            raise InstanceFormatError("gamma must be a vector", f"{path}.gamma")
        n = gamma.shape[0]
        f1 = rational_array(_require(data, "f1", path), (n,), f"{path}.f1")
        f2 = rational_array(_require(data, "f2", path), (n, n), f"{path}.f2")
        f3 = to_fraction(_require(data, "f3", path), f"{path}.f3")
        try:
            return RestrictedCubic(f0, tuple(f1.tolist()), tuple(tuple(r) for r in f2.tolist()),
                                   f3, tuple(gamma.tolist()))
        except DimensionError as e:
            raise InstanceFormatError(str(e), path)

    present = [order for order in (1, 2, 3) if data.get(f"f{order}") is not None]
    if present and n_sites is None:
        key = f"f{present[0]}"
        first = rational_array(data[key], path=f"{path}.{key}")
        if first.ndim != present[0]:
            raise InstanceFormatError(f"expected an order-{present[0]} array", f"{path}.{key}")
        n_sites = first.shape[0]

    # absent levels below the highest given one are zero
    levels: List[Any] = [f0]
    for order in range(1, max(present, default=0) + 1):
        key = f"f{order}"
        if order in present:
            levels.append(rational_array(data[key], (n_sites,) * order, f"{path}.{key}"))
        else:
            levels.append(zeros((n_sites,) * order))
    try:
        return Polynomial(levels, n_sites)
    except DimensionError as e:
        raise InstanceFormatError(str(e), path)


def load_polynomial(path: Union[str, Path]) -> Union[Polynomial, RestrictedCubic]:
    data = read_json(path)
    if isinstance(data, dict) and "certificate" in data:
        return parse_polynomial(data["certificate"])
    return parse_polynomial(data, "$")


# -- results ------------------------------------------------------------------------

def verdict_to_dict(verdict: Any, instance: Optional[RealizabilityInstance] = None,
                    enumeration_cap: Optional[int] = None) -> Dict[str, Any]:
    """Serialize a RepresentingMeasure, PositivityCertificate or MinimalThirdMoment."""
    data: Dict[str, Any] = {}
    if isinstance(verdict, MinimalThirdMoment):
        data["verdict"] = VERDICT_MEASURE
        data["support"] = measure_to_list(verdict.witness.measure)
        data["realized_R"] = format_rational(verdict.witness.realized_R)
        data["minimal_R"] = format_rational(verdict.value)
    elif isinstance(verdict, RepresentingMeasure):
        data["verdict"] = VERDICT_MEASURE
        data["support"] = measure_to_list(verdict.measure)
        if verdict.realized_R is not None:
            data["realized_R"] = format_rational(verdict.realized_R)
        if verdict.r_max is not None:
            data["r_max"] = format_rational(verdict.r_max)
    elif isinstance(verdict, PositivityCertificate):
        data["verdict"] = VERDICT_CERTIFICATE
        data["certificate"] = polynomial_to_dict(verdict.q)
        if verdict.r_max is not None:
            data["r_max"] = format_rational(verdict.r_max)
    else:
        raise InstanceFormatError(f"cannot serialize {type(verdict).__name__}")

    if instance is not None:
        if instance.gamma is not None:
            data["gamma"] = rational_to_json(list(instance.gamma))
        data["caps"] = {"Q": instance.kspec.Q, "enumeration": enumeration_cap}
    return data


def verdict_context(data: Any, n_sites: int) -> Dict[str, Any]:
    """gamma and r_max recorded in a result document, for re-verification."""
    context: Dict[str, Any] = {}
    if not isinstance(data, dict):
        return context
    if data.get("gamma") is not None:
        gamma = rational_array(data["gamma"], (n_sites,), "$.gamma")
        context["gamma"] = tuple(gamma.tolist())
    if data.get("r_max") is not None:
        context["r_max"] = to_fraction(data["r_max"], "$.r_max")
    return context


def parse_verdict(data: Any, n_sites: Optional[int] = None):
    """Inverse of verdict_to_dict."""
    kind = _require(data, "verdict", "$")
    r_max = to_fraction(data["r_max"], "$.r_max") if data.get("r_max") is not None else None

    if kind == VERDICT_MEASURE:
        mu = parse_measure(_require(data, "support", "$"), "$.support", n_sites)
        realized = None
        if data.get("realized_R") is not None:
            realized = to_fraction(data["realized_R"], "$.realized_R")
        witness = RepresentingMeasure(mu, realized, r_max)
        if data.get("minimal_R") is not None:
            return MinimalThirdMoment(to_fraction(data["minimal_R"], "$.minimal_R"), witness)
        return witness
    if kind == VERDICT_CERTIFICATE:
        q = parse_polynomial(_require(data, "certificate", "$"), "$.certificate", n_sites)
        return PositivityCertificate(q, r_max)
    raise InstanceFormatError(f"unknown verdict {kind!r}", "$.verdict")


def moments_to_dict(power: Sequence[MomentTensor],
                    factorial: Sequence[MomentTensor]) -> Dict[str, Any]:
    return {"power": tensors_to_dict(power), "factorial": tensors_to_dict(factorial)}

