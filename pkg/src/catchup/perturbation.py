"""Set-valued perturbations and their near-minimal-norm selections.

The stepper never sees the set-valued map directly; it consumes a selection
f(t, x) whose squared norm exceeds the minimum over F(t, x) by less than a
fixed gamma, together with per-cell time integrals of that selection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import Array, Box, SetDescription, as_vec
from .oracles import ProjectorConfig, approx_project

DEFAULT_GAMMA = 1e-8
DEFAULT_QUAD_NODES = 4


@dataclass(frozen=True)
class Perturbation:
    """F(t, x) as closed convex values plus its growth data.

    h bounds the distance from the origin to F(t, x); L_h is its Lipschitz
    constant.  k, when present, is the monotonicity modulus
    <y - y', x - x'> <= k(t) ||x - x'||^2 over selections.  Upper
    semicontinuity of F(t, .) is a contract on the supplied map, not a
    runtime check.
    """

    values: Callable[[float, Array], SetDescription]
    h: Callable[[Array], float]
    lipschitz_h: float
    k: Optional[Callable[[float], float]] = None
    time_independent: bool = False


@dataclass(frozen=True)
class Selection:
    f: Callable[[float, Array], Array]
    gamma: float
    time_independent: bool = False


def min_norm_selection(p: Perturbation, t: float, x, gamma: float = DEFAULT_GAMMA) -> Array:
    """A feasible element of F(t, x) with squared norm within gamma of minimal."""
    if not gamma > 0.0:
        raise ValueError("gamma must be positive")
    x = as_vec(x)
    d = x.shape[0]
    res = approx_project(p.values(t, x), np.zeros(d), ProjectorConfig(eps=gamma))
    return res.point


def make_selection(p: Perturbation, gamma: float = DEFAULT_GAMMA) -> Selection:
    return Selection(
        f=lambda t, x: min_norm_selection(p, t, x, gamma),
        gamma=gamma,
        time_independent=p.time_independent,
    )


def cell_integral(sel: Selection, x, a: float, b: float, q: int = DEFAULT_QUAD_NODES) -> Array:
    """Approximate integral of s -> sel.f(s, x) over [a, b], x frozen.

    Composite midpoint rule with q sub-nodes; a single evaluation when the
    selection is declared time-independent, which makes the value exact.
    The rule is exact on integrands linear in time; otherwise the per-cell
    error is bounded by (b-a)^3 * M2 / (24 q^2) for |d^2 f/dt^2| <= M2.
    """
    if a > b:
        raise ValueError("need a <= b")
    x = as_vec(x)
    if a == b:
        return np.zeros_like(x)
    if sel.time_independent:
        return (b - a) * as_vec(sel.f(a, x))
    h = (b - a) / q
    total = np.zeros_like(x)
    for j in range(q):
        total += as_vec(sel.f(a + (j + 0.5) * h, x))
    return h * total


# ---------------------------------------------------------------------------
# built-in catalog


def zero_perturbation() -> Perturbation:
    """F(t, x) = {0}."""

    def values(t: float, x: Array) -> SetDescription:
        z = np.zeros_like(as_vec(x))
        return Box(z, z)

    return Perturbation(values=values, h=lambda x: 0.0, lipschitz_h=0.0,
                        k=lambda t: 0.0, time_independent=True)


def linear_decay_perturbation() -> Perturbation:
    """F(t, x) = {-x}; drives the interior exponential-decay dynamics."""

    def values(t: float, x: Array) -> SetDescription:
        v = -as_vec(x)
        return Box(v, v)

    return Perturbation(
        values=values,
        h=lambda x: float(np.linalg.norm(x)),
        lipschitz_h=1.0,
        k=lambda t: 0.0,  # <(-x) - (-x'), x - x'> = -||x - x'||^2 <= 0
        time_independent=True,
    )


def constant_set_perturbation(s: SetDescription, h_bound: float) -> Perturbation:
    """A fixed closed convex value F(t, x) = s with d(0, s) <= h_bound."""
    return Perturbation(
        values=lambda t, x: s,
        h=lambda x: h_bound,
        lipschitz_h=0.0,
        k=lambda t: 0.0,
        time_independent=True,
    )
