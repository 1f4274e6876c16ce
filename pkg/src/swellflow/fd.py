"""Central finite differences with one Richardson level.

Derivatives of functions of a :class:`MixtureState` are taken along a
*selector*: a coordinate together with the set of variables held fixed.
The same physical derivative differs between selector families, e.g. the
partial with respect to one partial density (other densities fixed) versus
the partial with respect to total density (mass fractions fixed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .state import MixtureState


@dataclass(frozen=True)
class StepPolicy:
    rel: float = 1e-6
    abs: float = 1e-9
    richardson: bool = True
    max_shrink: int = 4
    shrink_factor: float = 0.1

    def step(self, x: float) -> float:
        # a power of two keeps x +- h exactly representable for most x
        h = max(self.rel * abs(x), self.abs)
        return math.ldexp(1.0, round(math.log2(h))) if h > 0 else h


DEFAULT_STEP = StepPolicy()


@dataclass(frozen=True)
class FDResult:
    value: float
    error_estimate: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class Selector:
    """Coordinate of a state plus the rule for moving along it."""

    name: str
    get: Callable[[MixtureState], float]
    set: Callable[[MixtureState, float], MixtureState]


def partial_density(j: int) -> Selector:
    """rho_j with T, eps and every other rho_k held fixed."""

    def _set(s, v):
        rho = s.partial_densities.copy()
        rho[j] = v
        return s.replace(partial_densities=rho)

    return Selector(f"rho[{j}]|rho_k", lambda s: float(s.partial_densities[j]), _set)


def total_density() -> Selector:
    """Total density with mass fractions (and T, eps) held fixed."""

    def _set(s, v):
        return s.replace(partial_densities=s.mass_fractions * v)

    return Selector("rho|C", lambda s: s.density, _set)


def mass_fraction(k: int) -> Selector:
    """C_k (k < N-1) with rho and the other independent fractions fixed.

    The solvent fraction C_N = 1 - sum_{l<N} C_l absorbs the change.
    """

    def _set(s, v):
        c = s.mass_fractions.copy()
        if k >= c.size - 1:
            raise DomainError("mass_fraction selector only applies to non-solvent species")
        c[k] = v
        c[-1] = 1.0 - c[:-1].sum()
        return s.replace(partial_densities=c * s.density)

    return Selector(f"C[{k}]|rho,C_l", lambda s: float(s.mass_fractions[k]), _set)


def volume_fraction() -> Selector:
    """eps with every partial density fixed."""
    return Selector("eps|rho_j", lambda s: s.volume_fraction,
                    lambda s, v: s.replace(volume_fraction=v))


def volume_fraction_fixed_content() -> Selector:
    """eps with the liquid content eps*rho_j of every species fixed."""

    def _set(s, v):
        return s.replace(volume_fraction=v,
                         partial_densities=s.partial_densities * (s.volume_fraction / v))

    return Selector("eps|eps*rho_j", lambda s: s.volume_fraction, _set)


def temperature() -> Selector:
    return Selector("T", lambda s: s.temperature, lambda s, v: s.replace(temperature=v))


def pressure(model) -> Selector:
    """Liquid pressure with T, mass fractions and eps held fixed."""
    from .thermo import liquid_pressure

    return Selector("p|T,C,eps", lambda s: liquid_pressure(model, s),
                    lambda s, v: model.state_at(s.temperature, v, s.mass_fractions,
                                                s.volume_fraction, s.electric_potential))


def _central(g, x, h):
    xp, xm = x + h, x - h
    return (g(xp) - g(xm)) / (xp - xm)


def fd_derivative(g: Callable[[float], float], x: float,
                  policy: StepPolicy = DEFAULT_STEP) -> FDResult:
    """Derivative of a scalar function of one float."""
    h = policy.step(x)
    last_exc = None
    for _ in range(policy.max_shrink + 1):
        try:
            d1 = _central(g, x, h)
            if not policy.richardson:
                return FDResult(d1, float("nan"))
            d2 = _central(g, x, h / 2.0)
            value = (4.0 * d2 - d1) / 3.0
            return FDResult(value, abs(value - d2))
        except DomainError as exc:
            last_exc = exc
            h *= policy.shrink_factor
    raise DomainError(f"state too close to the domain boundary for a central difference "
                      f"at x={x!r}: {last_exc}")


def fd_partial(f: Callable[[MixtureState], float], selector: Selector | None,
               state, policy: StepPolicy = DEFAULT_STEP) -> FDResult:
    """Partial derivative of ``f`` at ``state`` along ``selector``.

    With ``selector=None`` the state is a plain float and ``f`` a scalar function.
    """
    if selector is None:
        return fd_derivative(f, float(state), policy)
    x0 = selector.get(state)
    return fd_derivative(lambda v: f(selector.set(state, v)), x0, policy)


def fd_gradient(f: Callable[[float], np.ndarray], x: float,
                policy: StepPolicy) -> np.ndarray:
    """Componentwise derivative of a vector-valued function of one float."""
    h = policy.step(x)

    def central(hh):
        xp, xm = x + hh, x - hh
        return (np.asarray(f(xp)) - np.asarray(f(xm))) / (xp - xm)

    d1 = central(h)
    if not policy.richardson:
        return d1
    d2 = central(h / 2.0)
    return (4.0 * d2 - d1) / 3.0
