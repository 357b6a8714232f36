"""Piecewise time structures: step/linear functions, Radon measures, time changes.

Everything here is exact: masses, integrals and pushforwards of the
piecewise-constant / piecewise-linear representations are evaluated in closed
form, never by quadrature.  All objects are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "PiecewiseFn",
    "RadonMeasure",
    "TimeChange",
    "measure_of_interval",
    "pushforward_functional",
    "reverse_measure",
]


def _as_float_tuple(xs: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(x) for x in xs)


@dataclass(frozen=True)
class PiecewiseFn:
    """A piecewise function of time on ``[0, inf)``.

    Parameters
    ----------
    breakpoints : increasing times ``0 = tau_0 < tau_1 < ... < tau_n``.
    values : in ``step`` mode, the value on ``[tau_i, tau_{i+1})`` (right
        continuous, ``n`` values); in ``linear`` mode, the node values at the
        breakpoints (``n + 1`` values, continuous interpolation).
    mode : ``"step"`` or ``"linear"``.

    Beyond ``tau_n`` the function extends with its last value (slope zero in
    linear mode).
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]
    mode: str = "step"

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", _as_float_tuple(self.breakpoints))
        object.__setattr__(self, "values", _as_float_tuple(self.values))
        bp = np.asarray(self.breakpoints)
        if bp.size < 2:
            raise DomainError("need at least two breakpoints (one piece)")
        if bp[0] != 0.0:
            raise DomainError("first breakpoint must be 0")
        if np.any(np.diff(bp) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        expected = bp.size - 1 if self.mode == "step" else bp.size
        if self.mode not in ("step", "linear"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if len(self.values) != expected:
            raise DomainError(
                f"{self.mode} mode with {bp.size} breakpoints needs "
                f"{expected} values, got {len(self.values)}"
            )

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, mode: str = "step") -> "PiecewiseFn":
        if mode == "step":
            return cls((0.0, 1.0), (value,), "step")
        return cls((0.0, 1.0), (value, value), "linear")

    @classmethod
    def step(cls, breakpoints: Sequence[float], values: Sequence[float]) -> "PiecewiseFn":
        return cls(tuple(breakpoints), tuple(values), "step")

    @classmethod
    def linear(cls, breakpoints: Sequence[float], values: Sequence[float]) -> "PiecewiseFn":
        return cls(tuple(breakpoints), tuple(values), "linear")

    # -- evaluation --------------------------------------------------------

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        bp = np.asarray(self.breakpoints)
        vals = np.asarray(self.values)
        if np.any(u < 0):
            raise DomainError("time must be >= 0")
        if self.mode == "step":
            idx = np.clip(np.searchsorted(bp, u, side="right") - 1, 0, vals.size - 1)
            out = vals[idx]
        else:
            out = np.interp(u, bp, vals)
        return out if out.shape else float(out)

    def integral(self, s: float, t: float) -> float:
        """Exact ``int_s^t f(u) du`` (constant extension beyond the grid)."""
        if not 0 <= s <= t:
            raise DomainError("need 0 <= s <= t")
        if s == t:
            return 0.0
        grid = self._grid_on(s, t)
        if self.mode == "step":
            mids = 0.5 * (grid[:-1] + grid[1:])
            return float(np.sum(np.diff(grid) * self(mids)))
        vals = self(grid)
        return float(np.sum(0.5 * (vals[:-1] + vals[1:]) * np.diff(grid)))

    def _grid_on(self, s: float, t: float) -> np.ndarray:
        bp = np.asarray(self.breakpoints)
        inner = bp[(bp > s) & (bp < t)]
        return np.concatenate(([s], inner, [t]))

    def pieces_on(self, s: float, t: float) -> list[tuple[float, float, float]]:
        """Step mode only: ``(a, b, value)`` pieces exactly covering ``[s, t]``."""
        if self.mode != "step":
            raise DomainError("pieces_on is defined for step mode")
        grid = self._grid_on(s, t)
        return [
            (float(a), float(b), float(self(0.5 * (a + b))))
            for a, b in zip(grid[:-1], grid[1:])
        ]

    def linear_pieces_on(self, s: float, t: float) -> list[tuple[float, float, float, float]]:
        """Linear mode only: ``(a, b, value_at_a, slope)`` pieces covering ``[s, t]``."""
        if self.mode != "linear":
            raise DomainError("linear_pieces_on is defined for linear mode")
        grid = self._grid_on(s, t)
        out = []
        for a, b in zip(grid[:-1], grid[1:]):
            va, vb = self(a), self(b)
            out.append((float(a), float(b), float(va), float((vb - va) / (b - a))))
        return out

    # -- derived quantities -------------------------------------------------

    def min_on(self, s: float, t: float) -> float:
        grid = self._grid_on(s, t)
        if self.mode == "step":
            mids = 0.5 * (grid[:-1] + grid[1:])
            return float(np.min(self(mids)))
        return float(np.min(self(grid)))

    def max_on(self, s: float, t: float) -> float:
        grid = self._grid_on(s, t)
        if self.mode == "step":
            mids = 0.5 * (grid[:-1] + grid[1:])
            return float(np.max(self(mids)))
        return float(np.max(self(grid)))

    def is_zero_on(self, s: float, t: float) -> bool:
        return self.max_on(s, t) == 0.0 and self.min_on(s, t) == 0.0

    def breakpoints_on(self, s: float, t: float) -> np.ndarray:
        return self._grid_on(s, t)

    # -- algebra -------------------------------------------------------------

    def shifted(self, s: float) -> "PiecewiseFn":
        """The function ``u -> f(s + u)``."""
        if s < 0:
            raise DomainError("shift must be >= 0")
        if s == 0:
            return self
        bp = np.asarray(self.breakpoints)
        inner = bp[bp > s] - s
        new_bp = np.concatenate(([0.0], inner))
        if self.mode == "step":
            if new_bp.size < 2:
                new_bp = np.array([0.0, 1.0])
            mids = 0.5 * (new_bp[:-1] + new_bp[1:])
            return PiecewiseFn(tuple(new_bp), tuple(self(mids + s)), "step")
        if new_bp.size < 2:
            new_bp = np.array([0.0, 1.0])
        return PiecewiseFn(tuple(new_bp), tuple(self(new_bp + s)), "linear")

    def time_scaled(self, c: float) -> "PiecewiseFn":
        """The function ``u -> f(c * u)`` for ``c > 0``."""
        if c <= 0:
            raise DomainError("time scale must be > 0")
        bp = tuple(b / c for b in self.breakpoints)
        return PiecewiseFn(bp, self.values, self.mode)

    def scaled(self, c: float) -> "PiecewiseFn":
        """The function ``c * f``."""
        return PiecewiseFn(self.breakpoints, tuple(c * v for v in self.values), self.mode)

    def reversed_about(self, t: float) -> "PiecewiseFn":
        """Step mode: the function ``u -> f(t - u)`` on ``[0, t]``.

        The result is again represented right-continuously; it differs from
        the literal reflection only on the (null) set of breakpoints.
        """
        if self.mode != "step":
            raise DomainError("reversal is defined for step mode")
        pieces = self.pieces_on(0.0, t)
        new_bp = [0.0] + [t - a for a, _, _ in reversed(pieces)]
        new_vals = [v for _, _, v in reversed(pieces)]
        return PiecewiseFn(tuple(new_bp), tuple(new_vals), "step")

    def __add__(self, other: "PiecewiseFn") -> "PiecewiseFn":
        if self.mode != "step" or other.mode != "step":
            raise DomainError("sum is implemented for step mode")
        bp = np.union1d(self.breakpoints, other.breakpoints)
        mids = 0.5 * (bp[:-1] + bp[1:])
        vals = np.atleast_1d(self(mids)) + np.atleast_1d(other(mids))
        return PiecewiseFn(tuple(bp), tuple(vals), "step")

    def refined_to_step(self, n_sub: int, horizon: float) -> "PiecewiseFn":
        """Midpoint piecewise-constant approximation on ``[0, horizon]``.

        Each linear piece is split into ``n_sub`` equal sub-pieces carrying the
        midpoint value; step inputs are returned unchanged.
        """
        if self.mode == "step":
            return self
        grid_parts = []
        for a, b, _, _ in self.linear_pieces_on(0.0, horizon):
            grid_parts.append(np.linspace(a, b, n_sub + 1)[:-1])
        grid = np.concatenate(grid_parts + [[horizon]])
        mids = 0.5 * (grid[:-1] + grid[1:])
        return PiecewiseFn(tuple(grid), tuple(np.atleast_1d(self(mids))), "step")


@dataclass(frozen=True)
class RadonMeasure:
    """A positive measure on ``[0, horizon]``: atoms plus a step density.

    Atom locations must lie in ``(0, horizon]``; equal locations are merged on
    construction.  The mass of any interval is computable exactly.
    """

    density: PiecewiseFn
    atoms: tuple[tuple[float, float], ...] = ()
    horizon: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.horizon is None:
            object.__setattr__(self, "horizon", float(self.density.breakpoints[-1]))
        horizon = float(self.horizon)
        if not np.isfinite(horizon) or horizon <= 0:
            raise DomainError("horizon must be finite and > 0")
        if self.density.mode != "step":
            raise DomainError("density must be a step function")
        if min(self.density.values) < 0:
            raise DomainError("density must be >= 0")
        merged: dict[float, float] = {}
        for loc, w in self.atoms:
            loc, w = float(loc), float(w)
            if w <= 0:
                raise DomainError("atom weights must be > 0")
            if not 0 < loc <= horizon:
                raise DomainError(f"atom at {loc} outside (0, {horizon}]")
            merged[loc] = merged.get(loc, 0.0) + w
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))
        object.__setattr__(self, "horizon", horizon)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, horizon: float) -> "RadonMeasure":
        return cls(PiecewiseFn.step((0.0, horizon), (0.0,)), (), horizon)

    @classmethod
    def lebesgue(cls, horizon: float, scale: float = 1.0) -> "RadonMeasure":
        if scale < 0:
            raise DomainError("density scale must be >= 0")
        return cls(PiecewiseFn.step((0.0, horizon), (scale,)), (), horizon)

    @classmethod
    def dirac(cls, loc: float, weight: float, horizon: float | None = None) -> "RadonMeasure":
        horizon = loc if horizon is None else horizon
        return cls(PiecewiseFn.step((0.0, horizon), (0.0,)), ((loc, weight),), horizon)

    # -- measure algebra -----------------------------------------------------

    def mass(self, s: float, t: float) -> float:
        """Mass of the closed interval ``[s, t]`` (endpoint atoms included)."""
        if not 0 <= s <= t <= self.horizon:
            raise DomainError(f"[{s}, {t}] outside [0, {self.horizon}]")
        atom_mass = sum(w for loc, w in self.atoms if s <= loc <= t)
        return self.density.integral(s, t) + atom_mass

    def total_mass(self) -> float:
        return self.mass(0.0, self.horizon)

    def is_zero(self) -> bool:
        return not self.atoms and max(self.density.values) == 0.0

    def scaled(self, c: float) -> "RadonMeasure":
        if c < 0:
            raise DomainError("measure scale must be >= 0")
        atoms = tuple((loc, c * w) for loc, w in self.atoms) if c > 0 else ()
        return RadonMeasure(self.density.scaled(c), atoms, self.horizon)

    def restricted(self, u: float, v: float) -> "RadonMeasure":
        """The measure shifted to ``[0, v - u]``, keeping atoms in ``(u, v]``."""
        if not 0 <= u < v <= self.horizon:
            raise DomainError("need 0 <= u < v <= horizon")
        pieces = self.density.pieces_on(u, v)
        bp = [0.0] + [b - u for _, b, _ in pieces]
        vals = [val for _, _, val in pieces]
        atoms = tuple((loc - u, w) for loc, w in self.atoms if u < loc <= v)
        return RadonMeasure(PiecewiseFn.step(bp, vals), atoms, v - u)

    def events_on(self, u: float, v: float) -> list[tuple[str, float, float]]:
        """Time-ordered pieces of the measure over ``[u, v]``.

        Returns ``("density", m, dt)`` and ``("atom", w, loc)`` entries; an
        atom shares its location with the end of the density piece to its left
        (atoms at ``u`` are excluded, atoms at ``v`` included).
        """
        if not 0 <= u <= v:
            raise DomainError("need 0 <= u <= v")
        if u == v:
            return []
        cap = min(v, self.horizon)
        events: list[tuple[str, float, float]] = []
        cursor = u
        pending = [(loc, w) for loc, w in self.atoms if u < loc <= v]
        stops = sorted({loc for loc, _ in pending} | {cap})
        for stop in stops:
            if stop > cursor:
                for a, b, m in self.density.pieces_on(cursor, stop):
                    events.append(("density", m, b - a))
                cursor = stop
            for loc, w in pending:
                if loc == stop:
                    events.append(("atom", w, loc))
        if v > cap:
            events.append(("density", 0.0, v - cap))
        return events

    def breakpoints_on(self, u: float, v: float) -> np.ndarray:
        cap = min(v, self.horizon)
        pts = set(self.density.breakpoints_on(u, cap).tolist()) | {u, v}
        pts |= {loc for loc, _ in self.atoms if u < loc <= v}
        return np.array(sorted(pts))


def measure_of_interval(mu: RadonMeasure, s: float, t: float) -> float:
    """Exact mass of ``[s, t]`` under ``mu`` (closed-interval atom pickup)."""
    return mu.mass(s, t)


def reverse_measure(mu: RadonMeasure, t: float) -> RadonMeasure:
    """Image of ``mu`` under ``s -> t - s``; requires support inside ``[0, t]``."""
    if any(loc > t for loc, _ in mu.atoms):
        raise DomainError("measure support exceeds the reversal time")
    if mu.horizon > t and mu.density.integral(t, mu.horizon) > 0:
        raise DomainError("measure support exceeds the reversal time")
    if any(loc == t for loc, _ in mu.atoms):
        raise DomainError("atom at the reversal time would map to location 0")
    density = mu.density if mu.horizon >= t else PiecewiseFn.step(
        tuple(mu.density.breakpoints) + (t,), tuple(mu.density.values) + (0.0,)
    )
    flipped = density.reversed_about(t)
    atoms = tuple((t - loc, w) for loc, w in mu.atoms)
    return RadonMeasure(flipped, atoms, t)


@dataclass(frozen=True)
class TimeChange:
    """Strictly increasing piecewise-linear map ``f`` with ``f(0) = 0``.

    Stored as a step function of slopes; the inverse is exact and again
    piecewise linear.
    """

    slopes: PiecewiseFn

    def __post_init__(self) -> None:
        if self.slopes.mode != "step":
            raise DomainError("slopes must be a step function")
        if min(self.slopes.values) <= 0:
            raise DomainError("slopes must be > 0 on every piece")

    @classmethod
    def identity(cls) -> "TimeChange":
        return cls(PiecewiseFn.constant(1.0))

    @classmethod
    def linear(cls, c: float) -> "TimeChange":
        return cls(PiecewiseFn.constant(c))

    @classmethod
    def from_slopes(cls, breakpoints: Sequence[float], slopes: Sequence[float]) -> "TimeChange":
        return cls(PiecewiseFn.step(breakpoints, slopes))

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([self.slopes.integral(0.0, ti) for ti in t_arr])
        return out if np.ndim(t) else float(out[0])

    def slope(self, t) -> float:
        return self.slopes(t)

    def inverse(self, s):
        """Exact inverse ``f^{-1}(s)``."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        bp = np.asarray(self.slopes.breakpoints)
        node_vals = np.array([self(b) for b in bp])
        out = np.empty_like(s_arr)
        for i, si in enumerate(s_arr):
            if si < 0:
                raise DomainError("time-change inverse needs s >= 0")
            j = int(np.clip(np.searchsorted(node_vals, si, side="right") - 1, 0, bp.size - 1))
            if j == bp.size - 1:
                j -= 1
            slope = self.slopes.values[min(j, len(self.slopes.values) - 1)]
            out[i] = bp[j] + (si - node_vals[j]) / slope
        return out if np.ndim(s) else float(out[0])

    def image_breakpoints(self, T: float) -> np.ndarray:
        grid = self.slopes.breakpoints_on(0.0, T)
        return np.array([self(g) for g in grid])


def pushforward_functional(g: PiecewiseFn, f: TimeChange, T: float) -> RadonMeasure:
    """Measure ``mu`` on ``[0, f(T)]`` with ``int_0^T g(s) X_{f(s)} ds = int X dmu``.

    Exact for step ``g`` and piecewise-linear ``f``: the image density
    ``s -> g(f^{-1}(s)) / f'(f^{-1}(s))`` is again piecewise constant.
    """
    if g.mode != "step":
        raise DomainError("pushforward needs a step-mode integrand")
    if min(g.values) < 0:
        raise DomainError("integrand must be >= 0")
    if T <= 0:
        raise DomainError("horizon must be > 0")
    grid = np.union1d(g.breakpoints_on(0.0, T), f.slopes.breakpoints_on(0.0, T))
    image_bp = [0.0]
    vals = []
    for a, b in zip(grid[:-1], grid[1:]):
        mid = 0.5 * (a + b)
        image_bp.append(float(f(b)))
        vals.append(float(g(mid)) / float(f.slope(mid)))
    return RadonMeasure(PiecewiseFn.step(image_bp, vals), (), image_bp[-1])
