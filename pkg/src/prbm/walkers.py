"""Monte Carlo walkers realizing the partially reflected Brownian motion.

Jump-reflected walkers in canonical domains reach the boundary in a single
draw from the exact hitting law and then flip a reflection coin, so a
trajectory is just its sequence of boundary contacts; there is no time
discretization. Lattice walkers step site to site with per-face partial
reflection. The ensemble estimators run vectorized chunks on disjoint
counter blocks of one stream and merge them in fixed order, which makes
every estimate a pure function of (seed, stream_id) regardless of thread
count.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ExcessiveCensoring, InvalidParam
from .geometry import (
    MISSING_NEIGHBOR,
    BoundaryTag,
    DomainKind,
    DomainSpec,
    LatticeDomain,
)
from .rng import RngStream

__all__ = [
    "Fate",
    "JumpParams",
    "AbsorptionRecord",
    "MeasureHistogram",
    "sample_threshold",
    "run_jump_walker",
    "run_lattice_walker",
    "estimate_spread_measure",
    "estimate_stopping_time",
]

_TWO_PI = 2.0 * math.pi


class Fate(enum.IntEnum):
    """How a trajectory ended."""

    WORKING = 0
    SOURCE = 1
    CENSORED = 2


@dataclass(frozen=True)
class JumpParams:
    """Parameters of the jump-reflected walk.

    The reflection probability is never stored; it is always the derived
    epsilon = 1/(1 + a/Lambda), which degenerates to 0 at Lambda = 0 (absorb
    on first contact). escape_radius (half-space only) defaults to
    1e4 * max(Lambda, a).
    """

    Lambda: float
    a: float
    max_steps: int = 10_000_000
    escape_radius: float | None = None

    def __post_init__(self) -> None:
        if self.Lambda < 0:
            raise InvalidParam("Lambda must be nonnegative")
        if not self.a > 0:
            raise InvalidParam("jump distance a must be positive")
        if self.max_steps < 1:
            raise InvalidParam("max_steps must be at least 1")
        if self.escape_radius is not None and not self.escape_radius > 0:
            raise InvalidParam("escape_radius must be positive when given")

    @property
    def epsilon(self) -> float:
        if self.Lambda == 0:
            return 0.0
        return self.Lambda / (self.Lambda + self.a)

    def escape_cap(self) -> float:
        if self.escape_radius is not None:
            return self.escape_radius
        return 1e4 * max(self.Lambda, self.a)


@dataclass(frozen=True)
class AbsorptionRecord:
    """Outcome of a single trajectory.

    local_time_proxy is a times the number of working-boundary contacts,
    the final absorbing contact included; for source or censored fates all
    contacts were reflections. point is set only for a working absorption.
    """

    fate: Fate
    point: tuple[float, ...] | None
    n_reflections: int
    local_time_proxy: float
    steps: int


@dataclass
class MeasureHistogram:
    """Binned Monte Carlo estimate of a (spread) harmonic measure.

    For line-like interfaces (half-space) counts carries one extra overflow
    bin at the end, past the configured window; circular interfaces close on
    themselves and per-face lattice bins need no overflow. The exact count
    partition counts.sum() + source_absorbed + censored == total always
    holds. reflection_counts, when requested, tallies absorbed walkers by
    their reflection number with one final overflow slot.
    """

    bin_edges: np.ndarray | None
    counts: np.ndarray
    total: int
    censored: int
    source_absorbed: int
    total_reflections: int = 0
    reflection_counts: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if int(self.counts.sum()) + self.censored + self.source_absorbed != self.total:
            raise InvalidParam("histogram counts do not partition the ensemble")

    @property
    def working_absorbed(self) -> int:
        return int(self.counts.sum())

    @property
    def estimate(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def stderr(self) -> np.ndarray:
        p = self.estimate
        return np.sqrt(p * (1.0 - p) / self.total)

    @property
    def source_fraction(self) -> float:
        return self.source_absorbed / self.total

    @property
    def mean_reflections(self) -> float:
        return self.total_reflections / self.total


def _as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def sample_threshold(Lambda: float, rng: RngStream | np.random.Generator) -> float:
    """Draw the absorption threshold chi, exponential with mean Lambda.

    Lambda = 0 degenerates to chi = 0: absorption at the first contact.
    """
    if Lambda < 0:
        raise InvalidParam("Lambda must be nonnegative")
    if Lambda == 0:
        return 0.0
    return float(_as_generator(rng).exponential(Lambda))


# -- exact hitting laws --------------------------------------------------------


def _mobius_angle(rho: float, phi: float) -> float:
    """Boundary angle hit from radius rho on the axis, phi uniform on the circle.

    The disk automorphism w -> (w + rho)/(1 + rho w) carries the uniform
    hitting law from the center to the hitting law from rho.
    """
    e = complex(math.cos(phi), math.sin(phi))
    w = (e + rho) / (1.0 + rho * e)
    return math.atan2(w.imag, w.real)


def _ball_zonal_cos(rho: float, v: float) -> float:
    """Inverse CDF of cos(polar angle) for the sphere hit from radius rho."""
    if rho < 1e-12:
        return 2.0 * v - 1.0
    q = v * 2.0 * rho / (1.0 - rho * rho) + 1.0 / (1.0 + rho)
    return (1.0 + rho * rho - q ** -2) / (2.0 * rho)


def _zonal_point(axis: np.ndarray, cos_t: float, phi: float) -> np.ndarray:
    """Unit vector at polar angle arccos(cos_t) around axis, azimuth phi."""
    cos_t = min(1.0, max(-1.0, cos_t))
    sin_t = math.sqrt(1.0 - cos_t * cos_t)
    # any vector not parallel to axis seeds the orthonormal pair
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return cos_t * axis + sin_t * (math.cos(phi) * e1 + math.sin(phi) * e2)


# -- single trajectories -------------------------------------------------------


def run_jump_walker(
    dom: DomainSpec,
    start,
    params: JumpParams,
    stream: RngStream,
    mode: str = "local",
) -> AbsorptionRecord:
    """One jump-reflected trajectory in a canonical domain.

    Positions and reflection decisions come from two substreams of the given
    stream. mode="local" flips a Bernoulli(1 - epsilon) coin at every working
    contact; mode="global" draws the whole reflection budget N from the
    geometric law up front, off the same decision stream, so both modes
    produce the same fate from the same stream: the hit sequence never sees
    which rule is in force.
    """
    if not isinstance(dom, DomainSpec):
        raise InvalidParam("run_jump_walker needs a canonical DomainSpec")
    if dom.kind is DomainKind.LATTICE:
        raise InvalidParam("lattice domains use run_lattice_walker")
    if mode not in ("local", "global"):
        raise InvalidParam(f"unknown mode {mode!r}")

    pos = stream.substream(0).generator()
    dec = stream.substream(1).generator()
    eps = params.epsilon
    budget = -1
    if mode == "global":
        budget = 0
        while float(dec.random()) < eps:
            budget += 1

    hits = 0
    refl = 0
    steps = 0
    a = params.a

    def contact_absorbs() -> bool:
        if mode == "local":
            return float(dec.random()) >= eps
        return refl == budget

    kind = dom.kind

    if kind is DomainKind.HALF_SPACE:
        d = dom.dimension
        x = np.asarray(start, dtype=float)
        if x.shape != (d,):
            raise InvalidParam(f"start must be a {d}-vector")
        if not x[-1] > 0:
            raise InvalidParam("start must lie strictly above the boundary")
        esc = params.escape_cap()
        lateral = x[:-1].copy()
        height = float(x[-1])
        while steps < params.max_steps:
            z = pos.standard_normal(d - 1)
            w = pos.standard_normal()
            lateral = lateral + height * z / abs(w)
            steps += 1
            hits += 1
            if contact_absorbs():
                point = tuple(lateral) + (0.0,)
                return AbsorptionRecord(Fate.WORKING, point, refl, a * hits, steps)
            refl += 1
            if np.linalg.norm(lateral) > esc:
                return AbsorptionRecord(Fate.CENSORED, None, refl, a * hits, steps)
            height = a
        return AbsorptionRecord(Fate.CENSORED, None, refl, a * hits, steps)

    if kind in (DomainKind.DISK_INTERIOR, DomainKind.DISK_EXTERIOR):
        interior = kind is DomainKind.DISK_INTERIOR
        x = np.asarray(start, dtype=float)
        if x.shape != (2,):
            raise InvalidParam("start must be a 2-vector")
        r = float(np.hypot(x[0], x[1]))
        if interior and not r < 1.0:
            raise InvalidParam("start must lie strictly inside the unit disk")
        if not interior and not r > 1.0:
            raise InvalidParam("start must lie strictly outside the unit disk")
        if interior and not a < 1.0:
            raise InvalidParam("jump distance must stay below the disk radius")
        ang = math.atan2(x[1], x[0])
        while steps < params.max_steps:
            rho = r if interior else 1.0 / r
            theta = ang + _mobius_angle(rho, float(pos.uniform(0.0, _TWO_PI)))
            steps += 1
            hits += 1
            if contact_absorbs():
                point = (math.cos(theta), math.sin(theta))
                return AbsorptionRecord(Fate.WORKING, point, refl, a * hits, steps)
            refl += 1
            ang = theta
            r = 1.0 - a if interior else 1.0 + a
        return AbsorptionRecord(Fate.CENSORED, None, refl, a * hits, steps)

    if kind in (DomainKind.BALL_INTERIOR, DomainKind.BALL_EXTERIOR):
        interior = kind is DomainKind.BALL_INTERIOR
        x = np.asarray(start, dtype=float)
        if x.shape != (3,):
            raise InvalidParam("start must be a 3-vector")
        r = float(np.linalg.norm(x))
        if interior and not r < 1.0:
            raise InvalidParam("start must lie strictly inside the unit ball")
        if not interior and not r > 1.0:
            raise InvalidParam("start must lie strictly outside the unit ball")
        if interior and not a < 1.0:
            raise InvalidParam("jump distance must stay below the ball radius")
        while steps < params.max_steps:
            if not interior:
                # transient walk: the sphere is reached with probability 1/r,
                # otherwise the walker escapes to the source at infinity
                if float(pos.random()) >= 1.0 / r:
                    steps += 1
                    return AbsorptionRecord(Fate.SOURCE, None, refl, a * hits, steps)
                rho = 1.0 / r
            else:
                rho = r
            axis = x / r if r > 0 else np.array([0.0, 0.0, 1.0])
            cos_t = _ball_zonal_cos(rho, float(pos.random()))
            s = _zonal_point(axis, cos_t, float(pos.uniform(0.0, _TWO_PI)))
            steps += 1
            hits += 1
            if contact_absorbs():
                return AbsorptionRecord(Fate.WORKING, tuple(s), refl, a * hits, steps)
            refl += 1
            x = (1.0 - a) * s if interior else (1.0 + a) * s
            r = 1.0 - a if interior else 1.0 + a
        return AbsorptionRecord(Fate.CENSORED, None, refl, a * hits, steps)

    if kind is DomainKind.ANNULUS:
        R = dom.outer_radius
        if R is None:
            raise InvalidParam("annulus spec is missing its outer radius")
        x = np.asarray(start, dtype=float)
        if x.shape != (2,):
            raise InvalidParam("start must be a 2-vector")
        r = float(np.hypot(x[0], x[1]))
        if not 1.0 < r < R:
            raise InvalidParam("start must lie strictly between the circles")
        if not a < R - 1.0:
            raise InvalidParam("jump distance must fit inside the gap")
        shell = 1e-9 * (R - 1.0)
        x = x.copy()
        while steps < params.max_steps:
            # walk on circles until a hair's breadth from either boundary
            while steps < params.max_steps:
                free = min(r - 1.0, R - r)
                if free < shell:
                    break
                psi = float(pos.uniform(0.0, _TWO_PI))
                x[0] += free * math.cos(psi)
                x[1] += free * math.sin(psi)
                r = float(np.hypot(x[0], x[1]))
                steps += 1
            if steps >= params.max_steps:
                break
            if R - r < r - 1.0:
                return AbsorptionRecord(Fate.SOURCE, None, refl, a * hits, steps)
            theta = math.atan2(x[1], x[0])
            hits += 1
            if contact_absorbs():
                point = (math.cos(theta), math.sin(theta))
                return AbsorptionRecord(Fate.WORKING, point, refl, a * hits, steps)
            refl += 1
            r = 1.0 + a
            x = np.array([r * math.cos(theta), r * math.sin(theta)])
        return AbsorptionRecord(Fate.CENSORED, None, refl, a * hits, steps)

    raise InvalidParam(f"unsupported domain kind {kind}")


def run_lattice_walker(
    dom: LatticeDomain,
    start,
    Lambda: float,
    rng: RngStream | np.random.Generator,
    max_steps: int = 10_000_000,
) -> AbsorptionRecord:
    """One lattice trajectory with partial reflections.

    A step picks one of the 2d directions uniformly. Crossing a working face
    f absorbs with probability 1 - eps_f, eps_f = Lambda/(Lambda + a w_f);
    the face weight scales local absorption exactly as it scales the face's
    surface measure, so the walk realizes the measure-weighted spreading
    operator. Source faces absorb unconditionally, missing neighbours
    reflect in place. start is a bulk-site index or integer coordinate tuple.
    """
    if Lambda < 0:
        raise InvalidParam("Lambda must be nonnegative")
    site = _resolve_site(dom, start)
    gen = _as_generator(rng)
    table = dom.neighbor_table()
    nb = dom.n_bulk
    two_d = 2 * dom.dimension
    a = dom.mesh
    eps_face = np.zeros(dom.n_faces) if Lambda == 0 else Lambda / (Lambda + a * dom.face_weight)
    tag = dom.face_tag
    steps = 0
    hits = 0
    refl = 0
    while steps < max_steps:
        k = int(gen.integers(0, two_d))
        code = int(table[site, k])
        steps += 1
        if code == MISSING_NEIGHBOR:
            continue
        if code < nb:
            site = code
            continue
        f = code - nb
        if tag[f] == BoundaryTag.SOURCE:
            return AbsorptionRecord(Fate.SOURCE, None, refl, a * hits, steps)
        hits += 1
        if float(gen.random()) < eps_face[f]:
            refl += 1
            continue
        mid = 0.5 * a * (dom.face_exterior[f] + dom.face_inward[f] + 1.0)
        return AbsorptionRecord(Fate.WORKING, tuple(mid), refl, a * hits, steps)
    return AbsorptionRecord(Fate.CENSORED, None, refl, a * hits, steps)


def _resolve_site(dom: LatticeDomain, start) -> int:
    if isinstance(start, (int, np.integer)):
        if not 0 <= start < dom.n_bulk:
            raise InvalidParam(f"bulk site index {start} out of range")
        return int(start)
    key = tuple(int(c) for c in np.asarray(start).ravel())
    idx = dom.bulk_index().get(key)
    if idx is None:
        raise InvalidParam(f"{key} is not a bulk site")
    return idx


# -- vectorized ensembles ------------------------------------------------------


def _bin_line(coords: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Histogram with a trailing overflow bin for everything off the window."""
    nb = len(edges) - 1
    out = (coords < edges[0]) | (coords > edges[-1])
    idx = np.clip(np.searchsorted(edges, coords, side="right") - 1, 0, nb - 1)
    return np.bincount(np.where(out, nb, idx), minlength=nb + 1)


def _halfspace_chunk(gen, n, dom, start, params, edges, count_to):
    d = dom.dimension
    eps = params.epsilon
    esc = params.escape_cap()
    nb = len(edges) - 1
    counts = np.zeros(nb + 1, dtype=np.int64)
    lat = np.tile(np.asarray(start[:-1], dtype=float), (n, 1))
    height = float(start[-1])
    censored = 0
    total_refl = 0
    nrefl = np.zeros(n, dtype=np.int64) if count_to is not None else None
    refl_counts = np.zeros(count_to + 2, dtype=np.int64) if count_to is not None else None
    for _ in range(params.max_steps):
        m = lat.shape[0]
        if m == 0:
            break
        z = gen.standard_normal((m, d - 1))
        w = gen.standard_normal(m)
        s = lat + height * z / np.abs(w)[:, None]
        u = gen.random(m)
        absorbed = u >= eps
        coord = s[:, 0] if d == 2 else np.linalg.norm(s, axis=1)
        counts += _bin_line(coord[absorbed], edges)
        if count_to is not None:
            refl_counts += np.bincount(
                np.minimum(nrefl[absorbed], count_to + 1), minlength=count_to + 2
            )
        total_refl += int(m - absorbed.sum())
        keep = ~absorbed
        runaway = keep & (np.linalg.norm(s, axis=1) > esc)
        censored += int(runaway.sum())
        keep &= ~runaway
        lat = s[keep]
        if count_to is not None:
            nrefl = nrefl[keep] + 1
        height = params.a
    censored += lat.shape[0]
    return counts, 0, censored, total_refl, refl_counts


def _disk_chunk(gen, n, dom, start, params, edges, count_to):
    interior = dom.kind is DomainKind.DISK_INTERIOR
    x = np.asarray(start, dtype=float)
    r = float(np.hypot(x[0], x[1]))
    eps = params.epsilon
    nb = len(edges) - 1
    counts = np.zeros(nb, dtype=np.int64)
    ang = np.full(n, math.atan2(x[1], x[0]))
    r_next = 1.0 - params.a if interior else 1.0 + params.a
    total_refl = 0
    nrefl = np.zeros(n, dtype=np.int64) if count_to is not None else None
    refl_counts = np.zeros(count_to + 2, dtype=np.int64) if count_to is not None else None
    for _ in range(params.max_steps):
        m = ang.shape[0]
        if m == 0:
            break
        rho = r if interior else 1.0 / r
        e = np.exp(1j * gen.random(m) * _TWO_PI)
        theta = ang + np.angle((e + rho) / (1.0 + rho * e))
        u = gen.random(m)
        absorbed = u >= eps
        c = np.mod(theta[absorbed], _TWO_PI)
        counts += np.bincount(
            np.minimum((c / _TWO_PI * nb).astype(np.int64), nb - 1), minlength=nb
        )
        if count_to is not None:
            refl_counts += np.bincount(
                np.minimum(nrefl[absorbed], count_to + 1), minlength=count_to + 2
            )
        total_refl += int(m - absorbed.sum())
        ang = theta[~absorbed]
        if count_to is not None:
            nrefl = nrefl[~absorbed] + 1
        r = r_next
    censored = ang.shape[0]
    return counts, 0, censored, total_refl, refl_counts


def _lattice_chunk(gen, n, dom, start, Lambda, max_steps, count_to, cache):
    table, tag, eps_face, wpos, launch, n_working = cache
    nb = dom.n_bulk
    two_d = 2 * dom.dimension
    if isinstance(start, str):
        sites = launch[gen.integers(0, len(launch), size=n)]
    else:
        sites = np.full(n, _resolve_site(dom, start), dtype=np.int64)
    counts = np.zeros(n_working, dtype=np.int64)
    source = 0
    total_refl = 0
    nrefl = np.zeros(n, dtype=np.int64) if count_to is not None else None
    refl_counts = np.zeros(count_to + 2, dtype=np.int64) if count_to is not None else None
    for _ in range(max_steps):
        m = sites.shape[0]
        if m == 0:
            break
        k = gen.integers(0, two_d, size=m)
        u = gen.random(m)
        code = table[sites, k]
        facehit = code >= nb
        fa = np.where(facehit, code - nb, 0)
        is_src = facehit & (tag[fa] == BoundaryTag.SOURCE)
        is_wrk = facehit & ~is_src
        absorbed = is_wrk & (u >= eps_face[fa])
        reflected = is_wrk & ~absorbed
        source += int(is_src.sum())
        counts += np.bincount(wpos[fa[absorbed]], minlength=n_working)
        total_refl += int(reflected.sum())
        bulkmove = (code >= 0) & ~facehit
        sites = np.where(bulkmove, code, sites)
        keep = ~(absorbed | is_src)
        if count_to is not None:
            refl_counts += np.bincount(
                np.minimum(nrefl[absorbed], count_to + 1), minlength=count_to + 2
            )
            nrefl = (nrefl + reflected)[keep]
        sites = sites[keep]
    censored = sites.shape[0]
    return counts, source, censored, total_refl, refl_counts


def _scalar_chunk_runner(dom, start, params, rng, offset, n, edges, kind):
    """Fallback for domains without a vectorized path: one walker at a time."""
    nb = len(edges) - 1
    counts = np.zeros(nb, dtype=np.int64)
    source = 0
    censored = 0
    total_refl = 0
    for i in range(n):
        rec = run_jump_walker(dom, start, params, rng.substream(offset + 2 * i))
        total_refl += rec.n_reflections
        if rec.fate is Fate.SOURCE:
            source += 1
        elif rec.fate is Fate.CENSORED:
            censored += 1
        else:
            if kind is DomainKind.ANNULUS:
                c = math.atan2(rec.point[1], rec.point[0]) % _TWO_PI
            else:
                c = rec.point[2]  # ball: cosine of the polar angle
            j = min(int((c - edges[0]) / (edges[-1] - edges[0]) * nb), nb - 1)
            counts[max(j, 0)] += 1
    return counts, source, censored, total_refl, None


def estimate_spread_measure(
    dom,
    start,
    params: JumpParams,
    n_walkers: int,
    rng: RngStream,
    *,
    bins: int = 64,
    window: float | None = None,
    chunk_size: int = 100_000,
    censored_ceiling: float = 0.01,
    count_reflections_to: int | None = None,
    threads: int | None = None,
) -> MeasureHistogram:
    """Ensemble estimate of the spread harmonic measure.

    dom is a canonical DomainSpec or a LatticeDomain. start is an interior
    point for canonical domains; for lattices it is a bulk site or the
    string "source", which launches walkers uniformly over the bulk
    neighbours of source faces, the same law hitting_distribution uses.
    Binning: signed lateral coordinate over [-window, window] plus an
    overflow bin for the half-plane (radius |s| for d > 2), uniform angle
    bins for disks and the annulus, cos(polar angle) for balls, one bin per
    working face for lattices. Chunks of chunk_size walkers each run on
    their own counter block; PRBM_THREADS (or threads=) fans the chunks out
    without changing any count. Raises ExcessiveCensoring when the censored
    fraction exceeds censored_ceiling.
    """
    if n_walkers < 1:
        raise InvalidParam("n_walkers must be at least 1")
    if not isinstance(rng, RngStream):
        raise InvalidParam("ensembles need an RngStream to split")
    if threads is None:
        threads = int(os.environ.get("PRBM_THREADS", "1"))

    is_lattice = isinstance(dom, LatticeDomain)
    if is_lattice:
        if abs(params.a - dom.mesh) > 1e-12 * max(params.a, dom.mesh):
            raise InvalidParam("params.a must equal the lattice mesh")
        working = np.flatnonzero(dom.working_mask())
        wpos = np.full(dom.n_faces, -1, dtype=np.int64)
        wpos[working] = np.arange(len(working))
        eps_face = (
            np.zeros(dom.n_faces)
            if params.Lambda == 0
            else params.Lambda / (params.Lambda + dom.mesh * dom.face_weight)
        )
        launch = dom.inward_indices()[np.flatnonzero(dom.source_mask())]
        if isinstance(start, str):
            if start != "source":
                raise InvalidParam(f"unknown start mode {start!r}")
            if launch.size == 0:
                raise InvalidParam("start='source' needs source faces")
        cache = (dom.neighbor_table(), dom.face_tag, eps_face, wpos, launch, len(working))
        edges = None

        def run_chunk(ci: int, cn: int):
            return _lattice_chunk(
                rng.generator(block=ci), cn, dom, start, params.Lambda,
                params.max_steps, count_reflections_to, cache,
            )

    else:
        if not isinstance(dom, DomainSpec):
            raise InvalidParam("dom must be a DomainSpec or LatticeDomain")
        kind = dom.kind
        if kind is DomainKind.HALF_SPACE:
            if window is None:
                window = 10.0 * max(params.Lambda, params.a)
            lo = -window if dom.dimension == 2 else 0.0
            edges = np.linspace(lo, window, bins + 1)

            def run_chunk(ci: int, cn: int):
                return _halfspace_chunk(
                    rng.generator(block=ci), cn, dom, start, params, edges,
                    count_reflections_to,
                )

        elif kind in (DomainKind.DISK_INTERIOR, DomainKind.DISK_EXTERIOR):
            edges = np.linspace(0.0, _TWO_PI, bins + 1)

            def run_chunk(ci: int, cn: int):
                return _disk_chunk(
                    rng.generator(block=ci), cn, dom, start, params, edges,
                    count_reflections_to,
                )

        elif kind in (DomainKind.BALL_INTERIOR, DomainKind.BALL_EXTERIOR, DomainKind.ANNULUS):
            if count_reflections_to is not None:
                raise InvalidParam("reflection counting is not wired into the scalar path")
            edges = (
                np.linspace(0.0, _TWO_PI, bins + 1)
                if kind is DomainKind.ANNULUS
                else np.linspace(-1.0, 1.0, bins + 1)
            )
            # substream pairs per walker; chunks claim disjoint offset ranges
            def run_chunk(ci: int, cn: int):
                return _scalar_chunk_runner(
                    dom, start, params, rng, 2 + 2 * ci * chunk_size, cn, edges, kind
                )

        else:
            raise InvalidParam(f"unsupported domain kind {kind}")

    n_chunks = (n_walkers + chunk_size - 1) // chunk_size
    sizes = [min(chunk_size, n_walkers - ci * chunk_size) for ci in range(n_chunks)]
    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_chunk, range(n_chunks), sizes))
    else:
        results = [run_chunk(ci, cn) for ci, cn in zip(range(n_chunks), sizes)]

    counts = sum(r[0] for r in results)
    source = sum(r[1] for r in results)
    censored = sum(r[2] for r in results)
    total_refl = sum(r[3] for r in results)
    refl_counts = None
    if count_reflections_to is not None:
        refl_counts = sum(r[4] for r in results)
    hist = MeasureHistogram(
        bin_edges=edges,
        counts=counts,
        total=n_walkers,
        censored=censored,
        source_absorbed=source,
        total_reflections=total_refl,
        reflection_counts=refl_counts,
    )
    if censored > censored_ceiling * n_walkers:
        raise ExcessiveCensoring(
            f"{censored} of {n_walkers} walkers censored "
            f"(ceiling {censored_ceiling:.1%})"
        )
    return hist


# -- stopping-time sampler -----------------------------------------------------


@lru_cache(maxsize=4)
def _return_time_cdf(table_size: int) -> tuple[np.ndarray, float]:
    """CDF of the first return to the origin of the reflected walk.

    Return times are odd: P(tau = 2k-1) = C(2k-1, k) 2^{1-2k}/(2k-1), the
    ballot-problem law of the first passage from 1 to 0. Beyond the table
    the law continues as the matched sqrt tail.
    """
    k = np.arange(1, table_size + 1, dtype=np.float64)
    logp = (
        special.gammaln(2 * k)
        - special.gammaln(k + 1.0)
        - special.gammaln(k)
        - np.log(2.0 * k - 1.0)
        - (2.0 * k - 1.0) * math.log(2.0)
    )
    cdf = np.cumsum(np.exp(logp))
    return cdf, float(cdf[-1])


def estimate_stopping_time(
    Lambda: float,
    a: float,
    n_samples: int,
    rng: RngStream,
    *,
    chunk_size: int = 4000,
    table_size: int = 1 << 21,
) -> np.ndarray:
    """Sample the boundary stopping time of the reflected 1D walk, exactly.

    The walk from the origin decomposes into excursions: one forced step off
    the boundary plus a first-return time tau. The exponential threshold
    fixes the number of touches m = ceil(chi/a) (each touch adds a of local
    time), so t = a^2 ((m - 1) + sum of m-1 return times), in the units
    where one lattice step lasts a^2. tau is drawn from its exact law up to
    2*table_size - 1 steps and from the matched Pareto-1/2 tail beyond, so
    no step cap or censoring is needed. Returns the sorted sample.
    """
    if not Lambda > 0:
        raise InvalidParam("Lambda must be positive")
    if not a > 0:
        raise InvalidParam("mesh a must be positive")
    if n_samples < 1:
        raise InvalidParam("n_samples must be at least 1")
    cdf, covered = _return_time_cdf(table_size)
    tail_mass = 1.0 - covered
    t0 = 2.0 * table_size
    out = np.empty(n_samples)
    done = 0
    ci = 0
    while done < n_samples:
        nc = min(chunk_size, n_samples - done)
        gen = rng.generator(block=ci)
        chi = gen.exponential(Lambda, size=nc)
        n_exc = np.ceil(chi / a).astype(np.int64) - 1
        total = int(n_exc.sum())
        u = gen.random(total)
        idx = np.searchsorted(cdf, u, side="right")
        tau = 2.0 * (idx + 1) - 1.0
        in_tail = idx >= table_size
        if in_tail.any():
            v = np.maximum((1.0 - u[in_tail]) / tail_mass, 1e-300)
            x = np.minimum(t0 / (v * v), 1e300)
            tau[in_tail] = 2.0 * np.floor(x / 2.0) + 1.0
        sums = np.bincount(np.repeat(np.arange(nc), n_exc), weights=tau, minlength=nc)
        out[done : done + nc] = a * a * (n_exc + sums)
        done += nc
        ci += 1
    out.sort()
    return out
