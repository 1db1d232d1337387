"""Steady 1-D open-channel forward model.

Water levels along a prismatic rectangular reach are obtained by marching the
gradually varied flow equation

    dh/da = (S0 - Sf) / (1 - Fr^2)

from the downstream rating curve up to the inlet with a fixed-step RK4
scheme. The friction slope follows Manning-Strickler. The model maps an input
pair ``(Q, Ks3)`` to the water elevation at ``M`` observation stations.

All abscissas exposed to the user are in km; the integrator works in metres.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "DomainError",
    "TranscriticalFlowError",
    "CrossSection",
    "FrictionZones",
    "RatingCurve",
    "ChannelModel",
    "BackwaterProfile",
    "friction_slope",
    "froude_squared",
    "normal_depth",
    "solve_backwater",
    "garonne_analog",
    "uniform_channel",
    "write_geometry_csv",
    "read_geometry_csv",
]

GRAVITY = 9.81


class DomainError(ValueError):
    """Raised when a hydraulic quantity is requested outside its domain."""


class TranscriticalFlowError(RuntimeError):
    """Raised when the marched profile leaves the subcritical regime.

    ``inputs`` holds the offending ``(Q, Ks3)`` rows.
    """

    def __init__(self, message, inputs=None):
        super().__init__(message)
        self.inputs = np.empty((0, 2)) if inputs is None else np.atleast_2d(inputs)


# -- closed-form hydraulics ----------------------------------------------------


def friction_slope(Q, h, Ks, W):
    """Manning-Strickler friction slope of a rectangular section.

    ``Sf = Q^2 / (Ks^2 A^2 R^(4/3))`` with ``A = W h`` and
    ``R = W h / (W + 2 h)``. Arguments broadcast.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DomainError("water depth must be positive")
    area = W * h
    radius = area / (W + 2.0 * h)
    return np.asarray(Q, dtype=float) ** 2 / (Ks**2 * area**2 * radius ** (4.0 / 3.0))


def froude_squared(Q, h, W, g=GRAVITY):
    """Squared Froude number ``Q^2 / (g W^2 h^3)`` of a rectangular section."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DomainError("water depth must be positive")
    return np.asarray(Q, dtype=float) ** 2 / (g * W**2 * h**3)


def normal_depth(Q: float, Ks: float, W: float, S0: float) -> float:
    """Depth at which friction balances the bed slope, found by bracketing."""
    if Q <= 0 or Ks <= 0 or W <= 0 or S0 <= 0:
        raise DomainError("normal depth needs positive Q, Ks, W and S0")

    def excess(h):
        area = W * h
        return Ks * area * (area / (W + 2.0 * h)) ** (2.0 / 3.0) * math.sqrt(S0) - Q

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
    return brentq(excess, 1e-9, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


# -- geometry and boundary conditions -----------------------------------------


@dataclass(frozen=True)
class CrossSection:
    abscissa: float  # km
    bed_elevation: float  # m
    width: float  # m

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"cross-section width must be positive, got {self.width}")


@dataclass(frozen=True)
class FrictionZones:
    """Piecewise-constant Strickler coefficients.

    ``edges`` has one more entry than ``strickler``; zone ``k`` covers
    ``[edges[k], edges[k+1])``. The zone named by ``random_zone`` takes its
    coefficient from the model input instead of ``strickler``.
    """

    edges: tuple[float, ...]
    strickler: tuple[float, ...]
    random_zone: int = -1

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
        object.__setattr__(self, "strickler", tuple(float(k) for k in self.strickler))
        if len(self.edges) != len(self.strickler) + 1:
            raise ValueError("need exactly one more zone edge than Strickler value")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("zone edges must be strictly increasing")
        if any(k <= 0 for k in self.strickler):
            raise ValueError("Strickler coefficients must be positive")
        object.__setattr__(self, "random_zone", self.random_zone % len(self.strickler))

    def zone_index(self, a_km) -> np.ndarray:
        idx = np.searchsorted(self.edges, a_km, side="right") - 1
        return np.clip(idx, 0, len(self.strickler) - 1)


@dataclass(frozen=True)
class RatingCurve:
    """Downstream stage-discharge law, depth = coefficient * Q**exponent."""

    coefficient: float
    exponent: float

    def __post_init__(self):
        if self.coefficient <= 0 or self.exponent <= 0:
            raise ValueError("rating curve must be strictly increasing")

    def __call__(self, Q):
        Q = np.asarray(Q, dtype=float)
        if np.any(Q <= 0):
            raise DomainError("discharge must be positive")
        return self.coefficient * Q**self.exponent

    @classmethod
    def from_normal_depth(cls, Q0, Ks, W, S0, rel_step=1e-4):
        """Power law matching the normal depth and its log-slope at ``Q0``."""
        h0 = normal_depth(Q0, Ks, W, S0)
        hp = normal_depth(Q0 * (1 + rel_step), Ks, W, S0)
        hm = normal_depth(Q0 * (1 - rel_step), Ks, W, S0)
        exponent = (math.log(hp) - math.log(hm)) / (
            math.log1p(rel_step) - math.log1p(-rel_step)
        )
        return cls(h0 / Q0**exponent, exponent)


# -- model ---------------------------------------------------------------------


@dataclass(frozen=True)
class BackwaterProfile:
    abscissa: np.ndarray  # km, grid nodes
    depth: np.ndarray
    elevation: np.ndarray
    station_abscissa: np.ndarray
    station_depth: np.ndarray
    station_elevation: np.ndarray
    discharge: float


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Immutable description of the reach and its discretisation.

    Calling the model on an ``(n, 2)`` array of ``(Q, Ks3)`` rows returns the
    ``(n, M)`` water elevations at the stations.
    """

    sections: tuple[CrossSection, ...]
    friction: FrictionZones
    rating_curve: RatingCurve
    stations: tuple[float, ...]  # km
    grid_step: float = 50.0  # m
    gravity: float = GRAVITY
    crit_margin: float = 0.01
    _grid: dict = field(init=False, repr=False)

    def __post_init__(self):
        sections = tuple(self.sections)
        object.__setattr__(self, "sections", sections)
        object.__setattr__(self, "stations", tuple(float(s) for s in self.stations))
        if len(sections) < 2:
            raise ValueError("need at least two cross-sections")
        a = np.array([s.abscissa for s in sections])
        if np.any(np.diff(a) <= 0):
            raise ValueError("cross-section abscissas must be strictly increasing")
        length_m = (a[-1] - a[0]) * 1000.0
        n_steps = round(length_m / self.grid_step)
        if n_steps < 1 or abs(n_steps * self.grid_step - length_m) > 1e-6 * length_m:
            raise ValueError(
                f"grid step {self.grid_step} m does not divide the reach length {length_m} m"
            )
        st = np.asarray(self.stations)
        if st.size == 0 or np.any(st < a[0]) or np.any(st > a[-1]):
            raise ValueError("stations must lie within the reach")
        object.__setattr__(self, "_grid", self._discretise(a, n_steps))

    @property
    def a_in(self) -> float:
        return self.sections[0].abscissa

    @property
    def a_out(self) -> float:
        return self.sections[-1].abscissa

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    def nearest_station(self, a_km: float) -> int:
        """0-based index of the station closest to ``a_km``."""
        return int(np.argmin(np.abs(np.asarray(self.stations) - a_km)))

    def bed_elevation(self, a_km):
        a = np.array([s.abscissa for s in self.sections])
        z = np.array([s.bed_elevation for s in self.sections])
        return np.interp(a_km, a, z)

    def width(self, a_km):
        a = np.array([s.abscissa for s in self.sections])
        w = np.array([s.width for s in self.sections])
        return np.interp(a_km, a, w)

    def _discretise(self, a_sec, n_steps):
        nodes_m = a_sec[0] * 1000.0 + self.grid_step * np.arange(n_steps + 1)
        nodes_m[-1] = a_sec[-1] * 1000.0
        mids_m = 0.5 * (nodes_m[:-1] + nodes_m[1:])
        z_sec = np.array([s.bed_elevation for s in self.sections])
        sec_m = a_sec * 1000.0
        # bed slope is piecewise constant between sections; take it at step midpoints
        seg = np.clip(np.searchsorted(sec_m, mids_m, side="right") - 1, 0, len(sec_m) - 2)
        slope = -(z_sec[seg + 1] - z_sec[seg]) / (sec_m[seg + 1] - sec_m[seg])
        zone = self.friction.zone_index(mids_m / 1000.0)
        ks_fixed = np.array(self.friction.strickler)[zone]
        is_random = zone == self.friction.random_zone

        st_m = np.asarray(self.stations) * 1000.0
        pos = (st_m - nodes_m[0]) / self.grid_step
        left = np.clip(np.floor(pos + 1e-9).astype(int), 0, n_steps - 1)
        frac = np.clip(pos - left, 0.0, 1.0)
        return {
            "nodes_m": nodes_m,
            "width_node": self.width(nodes_m / 1000.0),
            "width_mid": self.width(mids_m / 1000.0),
            "bed_node": self.bed_elevation(nodes_m / 1000.0),
            "slope": slope,
            "ks_fixed": ks_fixed,
            "is_random": is_random,
            "st_left": left,
            "st_frac": frac,
        }

    # evaluator protocol: (n, 2) inputs -> (n, M) station elevations
    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        depth = self._march(X[:, 0], X[:, 1], keep_profile=False)
        return depth + self._station_bed()

    def station_depths(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._march(X[:, 0], X[:, 1], keep_profile=False)

    def _station_bed(self):
        g = self._grid
        bed = g["bed_node"]
        return (1 - g["st_frac"]) * bed[g["st_left"]] + g["st_frac"] * bed[g["st_left"] + 1]

    def _march(self, Q, ks3, keep_profile):
        g = self._grid
        Q = np.asarray(Q, dtype=float)
        ks3 = np.asarray(ks3, dtype=float)
        if np.any(Q <= 0):
            raise DomainError("discharge must be positive")
        if np.any(ks3 <= 0):
            raise DomainError("Strickler coefficient must be positive")
        n_steps = g["slope"].size
        dx = g["nodes_m"][1:] - g["nodes_m"][:-1]
        grav = self.gravity
        Q2 = Q**2
        fr_max = np.zeros_like(Q)

        def rhs(h, W, S0, ks):
            area = W * h
            radius = area / (W + 2.0 * h)
            sf = Q2 / (ks * ks * area * area * radius ** (4.0 / 3.0))
            fr2 = Q2 / (grav * W * W * h * h * h)
            np.maximum(fr_max, fr2, out=fr_max)
            return (S0 - sf) / (1.0 - fr2)

        needed = np.zeros(n_steps + 1, dtype=bool)
        needed[g["st_left"]] = True
        needed[g["st_left"] + 1] = True
        store = {}
        profile = np.empty((n_steps + 1, Q.size)) if keep_profile else None

        h = np.array(self.rating_curve(Q), dtype=float)
        if keep_profile:
            profile[n_steps] = h
        if needed[n_steps]:
            store[n_steps] = h.copy()
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            for j in range(n_steps - 1, -1, -1):
                step = -dx[j]
                S0 = g["slope"][j]
                ks = ks3 if g["is_random"][j] else g["ks_fixed"][j]
                w1 = g["width_node"][j + 1]
                wm = g["width_mid"][j]
                w0 = g["width_node"][j]
                k1 = rhs(h, w1, S0, ks)
                k2 = rhs(h + 0.5 * step * k1, wm, S0, ks)
                k3 = rhs(h + 0.5 * step * k2, wm, S0, ks)
                k4 = rhs(h + step * k3, w0, S0, ks)
                h = h + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if keep_profile:
                    profile[j] = h
                if needed[j]:
                    store[j] = h.copy()

        bad = ~np.isfinite(fr_max) | (fr_max >= 1.0 - self.crit_margin)
        if keep_profile:
            bad |= ~np.all(np.isfinite(profile) & (profile > 0), axis=0)
        else:
            bad |= ~(np.isfinite(h) & (h > 0))
        if np.any(bad):
            rows = np.column_stack([Q[bad], ks3[bad]])
            raise TranscriticalFlowError(
                f"{bad.sum()} input(s) reach Fr^2 >= {1 - self.crit_margin:g} or a "
                f"non-positive depth, first offender (Q, Ks3) = {tuple(rows[0])}",
                rows,
            )

        left, frac = g["st_left"], g["st_frac"]
        st = np.stack(
            [(1 - f) * store[i] + f * store[i + 1] for i, f in zip(left, frac)], axis=-1
        )
        if keep_profile:
            return st, profile
        return st


def solve_backwater(model: ChannelModel, x) -> BackwaterProfile:
    """Backwater profile for a single input pair ``x = (Q, Ks3)``."""
    Q, ks3 = (float(v) for v in x)
    st, profile = model._march(np.array([Q]), np.array([ks3]), keep_profile=True)
    g = model._grid
    depth = profile[:, 0]
    return BackwaterProfile(
        abscissa=g["nodes_m"] / 1000.0,
        depth=depth,
        elevation=depth + g["bed_node"],
        station_abscissa=np.asarray(model.stations),
        station_depth=st[0],
        station_elevation=st[0] + model._station_bed(),
        discharge=Q,
    )


# -- channel factories and geometry files -------------------------------------


def evenly_spaced_stations(a_in: float, a_out: float, m: int = 14) -> tuple[float, ...]:
    """Stations at the centres of ``m`` equal sub-reaches."""
    span = (a_out - a_in) / m
    return tuple(a_in + (k + 0.5) * span for k in range(m))


def garonne_analog(
    a_in: float = 13.0,
    a_out: float = 62.0,
    mean_slope: float = 0.65,  # m/km
    width: float = 250.0,
    outlet_bed: float = 10.0,
    bumps: Sequence[tuple[float, float, float]] = ((34.0, -1.5, 1.0), (38.0, 1.5, 1.0)),
    zone_edges: Sequence[float] = (13.0, 26.0, 36.0, 62.0),
    strickler: Sequence[float] = (38.0, 38.0, 37.5),
    section_spacing: float = 0.25,  # km
    n_stations: int = 14,
    rating_discharge: float = 4031.0,
    grid_step: float = 50.0,
) -> ChannelModel:
    """Synthetic reach standing in for the Tonneins - La Reole stretch.

    The bed falls linearly at ``mean_slope`` and carries Gaussian
    perturbations ``(centre_km, amplitude_m, std_km)``. The rating curve is
    calibrated on the normal depth of the terminal sub-reach using the
    nominal Strickler coefficient of the last zone.
    """
    n_sec = round((a_out - a_in) / section_spacing)
    a = np.linspace(a_in, a_out, n_sec + 1)
    z = outlet_bed + mean_slope * (a_out - a)
    for centre, amp, std in bumps:
        z = z + amp * np.exp(-0.5 * ((a - centre) / std) ** 2)
    sections = tuple(CrossSection(float(ai), float(zi), width) for ai, zi in zip(a, z))
    friction = FrictionZones(tuple(zone_edges), tuple(strickler), random_zone=-1)
    terminal_slope = -(z[-1] - z[-2]) / ((a[-1] - a[-2]) * 1000.0)
    rc = RatingCurve.from_normal_depth(rating_discharge, strickler[-1], width, terminal_slope)
    return ChannelModel(
        sections=sections,
        friction=friction,
        rating_curve=rc,
        stations=evenly_spaced_stations(a_in, a_out, n_stations),
        grid_step=grid_step,
    )


def uniform_channel(
    Q: float,
    Ks: float,
    slope: float = 0.00033,
    width: float = 250.0,
    a_in: float = 13.0,
    a_out: float = 62.0,
    grid_step: float = 50.0,
    downstream_depth: float | None = None,
    n_stations: int = 14,
) -> ChannelModel:
    """Prismatic channel with one friction value and a linear rating curve.

    The rating curve passes through ``downstream_depth`` at ``Q`` (normal
    depth by default).
    """
    if downstream_depth is None:
        downstream_depth = normal_depth(Q, Ks, width, slope)
    drop = slope * (a_out - a_in) * 1000.0
    sections = (CrossSection(a_in, drop, width), CrossSection(a_out, 0.0, width))
    return ChannelModel(
        sections=sections,
        friction=FrictionZones((a_in, a_out), (Ks,), random_zone=0),
        rating_curve=RatingCurve(downstream_depth / Q, 1.0),
        stations=evenly_spaced_stations(a_in, a_out, n_stations),
        grid_step=grid_step,
    )


def write_geometry_csv(model: ChannelModel, path) -> None:
    """Dump cross-sections with the nominal Strickler coefficient of each."""
    ks = np.array(model.friction.strickler)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["abscissa_km", "bed_elevation_m", "width_m", "Ks"])
        for s in model.sections:
            zone = int(model.friction.zone_index(s.abscissa))
            w.writerow([repr(s.abscissa), repr(s.bed_elevation), repr(s.width), repr(ks[zone])])


def read_geometry_csv(path) -> tuple[CrossSection, ...]:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return tuple(
        CrossSection(float(r["abscissa_km"]), float(r["bed_elevation_m"]), float(r["width_m"]))
        for r in rows
    )
