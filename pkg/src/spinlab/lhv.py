"""Local hidden-variable models and their Monte Carlo correlations.

A model supplies a sampler for the hidden variable and two deterministic
local response functions. Its correlation is the average of the product
A(a, lam) * B(b, lam) over lam, estimated here by sampling. Responses are
evaluated on whole batches of lam at once, so they take an (n, ...) array
and return n values in {-1, +1}.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .bell import STAT_SIGMAS, BellTriple, InequalityReport, statistical_report
from .errors import ConfigError, ModelContractError
from .estimate import CorrelationEstimate
from .qstate import Direction, angle_between

Response = Callable[[Direction, np.ndarray], np.ndarray]

# per-call block size, bounds memory for large n
BLOCK = 1 << 20


@dataclass(frozen=True)
class LHVModel:
    name: str
    sample_lambda: Callable[[np.random.Generator, int], np.ndarray]
    response_a: Response
    response_b: Response
    variates_per_trial: int


def _sign(x: np.ndarray) -> np.ndarray:
    # sign(0) := +1 so ties stay deterministic
    return np.where(x >= 0.0, 1, -1).astype(np.int8)


def sample_unit_sphere(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform points on the sphere from two variates each: cos(theta), then phi."""
    u = rng.random((size, 2))
    z = 2.0 * u[:, 0] - 1.0
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = 2.0 * math.pi * u[:, 1]
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def builtin_sign_model() -> LHVModel:
    """lam uniform on the sphere, A = sign(a.lam), B = -sign(b.lam).

    Perfectly anticorrelated at equal settings; the correlation is
    2 * angle / pi - 1, linear in the angle between the axes.
    """
    return LHVModel(
        name="sign",
        sample_lambda=sample_unit_sphere,
        response_a=lambda axis, lam: _sign(lam @ axis.vector),
        response_b=lambda axis, lam: -_sign(lam @ axis.vector),
        variates_per_trial=2,
    )


def sign_model_correlation(axis_a: Direction, axis_b: Direction) -> float:
    """Closed form for the sign model, 2 * angle / pi - 1."""
    return 2.0 * angle_between(axis_a, axis_b) / math.pi - 1.0


_REGISTRY: dict[str, Callable[[], LHVModel]] = {"sign": builtin_sign_model}


def register_model(name: str, factory: Callable[[], LHVModel]) -> None:
    """Make a model available by name (e.g. to :func:`get_model` and the CLI)."""
    _REGISTRY[name] = factory


def get_model(name: str) -> LHVModel:
    try:
        return _REGISTRY[name]()
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise ConfigError(f"unknown LHV model {name!r} (known: {known})") from None


def available_models() -> list[str]:
    return sorted(_REGISTRY)


def _checked(values, n: int, model: LHVModel, side: str) -> np.ndarray:
    values = np.asarray(values)
    if values.shape != (n,):
        raise ModelContractError(f"model {model.name!r} response {side} returned shape "
                                 f"{values.shape}, expected ({n},)")
    if not np.all((values == 1) | (values == -1)):
        raise ModelContractError(f"model {model.name!r} response {side} returned values "
                                 f"outside {{-1, +1}}")
    return values.astype(np.int8)


def sample_pairs(model: LHVModel, axis_a: Direction, axis_b: Direction, n: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Outcomes (A, B) for ``n`` hidden-variable draws."""
    lam = model.sample_lambda(rng, n)
    return (_checked(model.response_a(axis_a, lam), n, model, "A"),
            _checked(model.response_b(axis_b, lam), n, model, "B"))


def lhv_correlation(model: LHVModel, axis_a: Direction, axis_b: Direction, n: int,
                    rng: np.random.Generator) -> CorrelationEstimate:
    """Monte Carlo estimate of the factorized correlation over ``n`` draws."""
    if n < 1:
        raise ValueError("n must be at least 1")
    total = 0
    for start in range(0, n, BLOCK):
        m = min(BLOCK, n - start)
        a, b = sample_pairs(model, axis_a, axis_b, m, rng)
        total += int(np.sum(a.astype(np.int64) * b))
    return CorrelationEstimate.from_sum(float(total), n)


def lhv_bell_check(model: LHVModel, triples: list[BellTriple], n: int,
                   rng: np.random.Generator) -> list[InequalityReport]:
    """Bell reports for each triple, from independent estimates of its three pairs."""
    if STAT_SIGMAS / math.sqrt(n) >= 0.05:
        raise ValueError(f"n = {n} too small for a statistical decision; need n > 6400")
    reports = []
    for triple in triples:
        estimates = tuple(lhv_correlation(model, a, b, n, rng) for a, b in triple.pairs())
        reports.append(statistical_report(estimates))
    return reports
