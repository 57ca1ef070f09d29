"""Domains: canonical shapes and rasterized lattice geometry.

Canonical domains (half-space, disk, ball, annulus) are described by a small
frozen spec consumed by the analytic and Monte Carlo modules. Irregular
two-dimensional interfaces are rasterized onto a square lattice of mesh a:
bulk sites are the lattice points inside the enclosed region, and the
boundary is represented by *faces*, the lattice edges separating a bulk site
from an exterior site. Each face therefore has exactly one inward neighbour
(the bulk site of its edge), which is what makes the self-transport matrix
built on faces exactly symmetric even on staircase boundaries; an exterior
site shared by two bulk neighbours simply appears in two faces.

Faces carry a surface weight w in (0, 1], the alignment |n_face . n_curve|
between the lattice face normal and the underlying smooth interface normal.
The physical measure of a face is mesh^(d-1) * w. On lattice-aligned
interfaces (boxes, axis-aligned prefractals) w == 1 identically and the
measure reduces to the plain mesh^(d-1) per boundary element; on rasterized
curved interfaces the weights make discrete surface integrals converge to
true arclength instead of the inflated staircase length.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometry, InvalidParam, MeshTooCoarse

__all__ = [
    "rasterize_loop",
    "DomainKind",
    "DomainSpec",
    "BoundaryTag",
    "BoundaryPoint",
    "LatticeDomain",
    "make_canonical",
    "rasterize",
    "boundary_measure",
    "boundary_points",
    "circle_polyline",
    "lattice_box",
    "lattice_channel",
    "load_polyline",
    "MISSING_NEIGHBOR",
]

#: Neighbor-table sentinel for a reflecting (absent) neighbor; see
#: LatticeDomain.neighbor_table.
MISSING_NEIGHBOR = -1

_MIN_WEIGHT = 0.05


class DomainKind(enum.Enum):
    HALF_SPACE = "half_space"
    DISK_INTERIOR = "disk_interior"
    DISK_EXTERIOR = "disk_exterior"
    BALL_INTERIOR = "ball_interior"
    BALL_EXTERIOR = "ball_exterior"
    ANNULUS = "annulus"
    LATTICE = "lattice"


@dataclass(frozen=True)
class DomainSpec:
    """A canonical domain with unit length scale.

    Disks and balls have unit radius; the half-space boundary is the
    hyperplane x_d = 0; the annulus has working circle r = 1 and source
    circle r = outer_radius.
    """

    kind: DomainKind
    dimension: int
    outer_radius: float | None = None
    diffusivity: float = 1.0


def make_canonical(
    kind: DomainKind | str,
    dimension: int | None = None,
    outer_radius: float | None = None,
    diffusivity: float = 1.0,
) -> DomainSpec:
    """Validated constructor for canonical domain specs.

    dimension defaults to the natural one for the kind (2 for disks and the
    annulus, 3 for balls). Raises InvalidParam on inconsistent requests.
    """
    if isinstance(kind, str):
        try:
            kind = DomainKind(kind)
        except ValueError as exc:
            raise InvalidParam(f"unknown domain kind {kind!r}") from exc
    natural = {
        DomainKind.DISK_INTERIOR: 2,
        DomainKind.DISK_EXTERIOR: 2,
        DomainKind.ANNULUS: 2,
        DomainKind.BALL_INTERIOR: 3,
        DomainKind.BALL_EXTERIOR: 3,
    }
    if dimension is None:
        dimension = natural.get(kind, 2)
    if dimension < 2:
        raise InvalidParam("dimension must be at least 2")
    if kind in natural and dimension != natural[kind]:
        raise InvalidParam(f"{kind.value} requires dimension {natural[kind]}")
    if kind is DomainKind.ANNULUS:
        if outer_radius is None or not outer_radius > 1.0:
            raise InvalidParam("annulus requires outer_radius > 1")
    elif outer_radius is not None:
        raise InvalidParam("outer_radius only applies to the annulus")
    if not diffusivity > 0:
        raise InvalidParam("diffusivity must be positive")
    return DomainSpec(kind, dimension, outer_radius, diffusivity)


class BoundaryTag(enum.IntEnum):
    WORKING = 0
    SOURCE = 1


@dataclass(frozen=True)
class BoundaryPoint:
    """A point on an interface with its arclength coordinate and inward normal."""

    position: tuple[float, ...]
    arclength_coord: float
    inward_normal: tuple[float, ...]

    def __post_init__(self) -> None:
        norm = math.sqrt(sum(c * c for c in self.inward_normal))
        if abs(norm - 1.0) > 1e-12:
            raise InvalidParam("inward_normal must be a unit vector (|n| = 1 within 1e-12)")
        if len(self.position) != len(self.inward_normal):
            raise InvalidParam("position and inward_normal must share a dimension")


@dataclass
class LatticeDomain:
    """Rasterized domain: bulk sites plus tagged boundary faces.

    Sites are integer lattice coordinates; physical position is site * mesh.
    face_exterior[i] is the boundary site (outside the bulk), face_inward[i]
    its unique bulk neighbour, i.e. the reflection target s + a n(s).
    """

    mesh: float
    dimension: int
    bulk_sites: np.ndarray      # (nb, d) int64
    face_exterior: np.ndarray   # (nf, d) int64
    face_inward: np.ndarray     # (nf, d) int64
    face_tag: np.ndarray        # (nf,) uint8, BoundaryTag values
    face_weight: np.ndarray     # (nf,) float64 in (0, 1]
    face_arclength: np.ndarray | None = None  # (nf,) coordinate along the source polyline
    _bulk_index: dict[tuple[int, ...], int] | None = field(default=None, repr=False)
    _neighbors: np.ndarray | None = field(default=None, repr=False)

    # -- basic views ---------------------------------------------------------

    @property
    def n_bulk(self) -> int:
        return int(self.bulk_sites.shape[0])

    @property
    def n_faces(self) -> int:
        return int(self.face_exterior.shape[0])

    def working_mask(self) -> np.ndarray:
        return self.face_tag == BoundaryTag.WORKING

    def source_mask(self) -> np.ndarray:
        return self.face_tag == BoundaryTag.SOURCE

    def face_midpoints(self) -> np.ndarray:
        """Physical midpoints of the boundary faces.

        Site centers sit at (i + 0.5) * mesh, so a face center is the mean
        of the two adjacent cell centers.
        """
        return 0.5 * self.mesh * (self.face_exterior + self.face_inward + 1.0)

    def face_inward_normals(self) -> np.ndarray:
        """Unit normals pointing from each face into the bulk."""
        return (self.face_inward - self.face_exterior).astype(float)

    def measures(self) -> np.ndarray:
        """Physical surface measure of each face: mesh^(d-1) * weight."""
        return self.mesh ** (self.dimension - 1) * self.face_weight

    def bulk_index(self) -> dict[tuple[int, ...], int]:
        if self._bulk_index is None:
            self._bulk_index = {
                tuple(int(c) for c in site): i for i, site in enumerate(self.bulk_sites)
            }
        return self._bulk_index

    def inward_indices(self) -> np.ndarray:
        """Bulk index of each face's inward neighbour."""
        index = self.bulk_index()
        return np.array(
            [index[tuple(int(c) for c in s)] for s in self.face_inward], dtype=np.int64
        )

    def neighbor_table(self) -> np.ndarray:
        """(n_bulk, 2d) table of neighbour codes for walks and solves.

        Entry values: 0 <= v < n_bulk is a bulk neighbour; n_bulk <= v is the
        boundary face v - n_bulk; MISSING_NEIGHBOR marks a reflecting wall
        (possible only in hand-built domains; rasterize seals the region).
        """
        if self._neighbors is not None:
            return self._neighbors
        d = self.dimension
        nb = self.n_bulk
        index = self.bulk_index()
        face_lookup: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
        for f in range(self.n_faces):
            key = (
                tuple(int(c) for c in self.face_inward[f]),
                tuple(int(c) for c in self.face_exterior[f]),
            )
            face_lookup[key] = f
        table = np.full((nb, 2 * d), MISSING_NEIGHBOR, dtype=np.int64)
        offsets = _axis_offsets(d)
        for i, site in enumerate(self.bulk_sites):
            s = tuple(int(c) for c in site)
            for k, off in enumerate(offsets):
                t = tuple(s[j] + off[j] for j in range(d))
                j = index.get(t)
                if j is not None:
                    table[i, k] = j
                else:
                    f = face_lookup.get((s, t))
                    if f is not None:
                        table[i, k] = nb + f
        self._neighbors = table
        return table

    # -- consistency ---------------------------------------------------------

    def validate(self, *, check_connected: bool = True) -> None:
        """Check the structural invariants; raises on violation."""
        if not self.mesh > 0:
            raise InvalidParam("mesh must be positive")
        if self.dimension < 2:
            raise InvalidParam("dimension must be at least 2")
        if self.n_bulk == 0:
            raise DegenerateGeometry("no bulk sites")
        index = self.bulk_index()
        if len(index) != self.n_bulk:
            raise DegenerateGeometry("duplicate bulk sites")
        tags = set(int(t) for t in np.unique(self.face_tag))
        if not tags <= {int(BoundaryTag.WORKING), int(BoundaryTag.SOURCE)}:
            raise InvalidParam("face tags must be Working or Source")
        diff = np.abs(self.face_exterior - self.face_inward).sum(axis=1)
        if self.n_faces and not np.all(diff == 1):
            raise DegenerateGeometry("each face must join an adjacent site pair")
        for s in self.face_inward:
            if tuple(int(c) for c in s) not in index:
                raise DegenerateGeometry("face inward neighbour is not a bulk site")
        for s in self.face_exterior:
            if tuple(int(c) for c in s) in index:
                raise DegenerateGeometry("face exterior site lies in the bulk")
        if self.n_faces and not (
            np.all(self.face_weight > 0) and np.all(self.face_weight <= 1.0 + 1e-12)
        ):
            raise InvalidParam("face weights must lie in (0, 1]")
        if check_connected and not self._connected():
            raise MeshTooCoarse("bulk sites do not form a connected set")

    def _connected(self) -> bool:
        table = self.neighbor_table()
        nb = self.n_bulk
        seen = np.zeros(nb, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for v in table[i]:
                if 0 <= v < nb and not seen[v]:
                    seen[v] = True
                    stack.append(int(v))
        return bool(seen.all())

    # -- serialization -------------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "mesh": self.mesh,
            "dimension": self.dimension,
            "bulk_sites": self.bulk_sites.tolist(),
            "face_exterior": self.face_exterior.tolist(),
            "face_inward": self.face_inward.tolist(),
            "face_tag": self.face_tag.tolist(),
            "face_weight": self.face_weight.tolist(),
        }
        if self.face_arclength is not None:
            payload["face_arclength"] = self.face_arclength.tolist()
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "LatticeDomain":
        raw = json.loads(text)
        arc = raw.get("face_arclength")
        dom = cls(
            mesh=float(raw["mesh"]),
            dimension=int(raw["dimension"]),
            bulk_sites=np.asarray(raw["bulk_sites"], dtype=np.int64),
            face_exterior=np.asarray(raw["face_exterior"], dtype=np.int64),
            face_inward=np.asarray(raw["face_inward"], dtype=np.int64),
            face_tag=np.asarray(raw["face_tag"], dtype=np.uint8),
            face_weight=np.asarray(raw["face_weight"], dtype=np.float64),
            face_arclength=None if arc is None else np.asarray(arc, dtype=np.float64),
        )
        dom.validate(check_connected=False)
        return dom


def _axis_offsets(d: int) -> list[tuple[int, ...]]:
    offsets = []
    for axis in range(d):
        for sign in (1, -1):
            off = [0] * d
            off[axis] = sign
            offsets.append(tuple(off))
    return offsets


def boundary_measure(domain: LatticeDomain) -> np.ndarray:
    """Per-face surface measure used to turn site sums into surface integrals."""
    return domain.measures()


def boundary_points(domain: LatticeDomain) -> list[BoundaryPoint]:
    """Faces as BoundaryPoint records (midpoint, arclength, inward normal)."""
    mids = domain.face_midpoints()
    normals = domain.face_inward_normals()
    if domain.face_arclength is None:
        arc = np.arange(domain.n_faces, dtype=float) * domain.mesh
    else:
        arc = domain.face_arclength
    return [
        BoundaryPoint(tuple(map(float, mids[i])), float(arc[i]), tuple(map(float, normals[i])))
        for i in range(domain.n_faces)
    ]


# -- polylines ---------------------------------------------------------------


def load_polyline(source: str | Path | list) -> np.ndarray:
    """Polyline from a JSON file/text ([[x, y], ...]) or a point list."""
    if isinstance(source, (str, Path)):
        p = Path(source)
        text = p.read_text() if p.exists() else str(source)
        data = json.loads(text)
    else:
        data = source
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise DegenerateGeometry("polyline must be an (n >= 2, 2) point list")
    if not np.all(np.isfinite(arr)):
        raise DegenerateGeometry("polyline has non-finite coordinates")
    return arr


def circle_polyline(radius: float, n: int = 2048, center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Closed regular polygon approximating a circle, last point == first."""
    if not radius > 0:
        raise InvalidParam("radius must be positive")
    th = np.linspace(0.0, 2.0 * np.pi, n + 1)
    return np.column_stack((center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)))


def _is_closed(poly: np.ndarray) -> bool:
    return bool(np.allclose(poly[0], poly[-1]))


def _segments(poly: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return poly[:-1], poly[1:]


def _self_intersects(poly: np.ndarray) -> bool:
    """O(n^2) proper-crossing test; skipped for very fine polylines."""
    a, b = _segments(poly)
    n = len(a)
    if n > 3000:
        return False
    d = b - a
    for i in range(n):
        js = np.arange(i + 2, n)
        if _is_closed(poly) and i == 0 and len(js):
            js = js[:-1]
        if not len(js):
            continue
        denom = d[i, 0] * d[js, 1] - d[i, 1] * d[js, 0]
        ok = np.abs(denom) > 1e-30
        r = a[js] - a[i]
        t = np.where(ok, (r[:, 0] * d[js, 1] - r[:, 1] * d[js, 0]) / np.where(ok, denom, 1.0), -1.0)
        u = np.where(ok, (r[:, 0] * d[i, 1] - r[:, 1] * d[i, 0]) / np.where(ok, denom, 1.0), -1.0)
        eps = 1e-12
        if np.any((t > eps) & (t < 1 - eps) & (u > eps) & (u < 1 - eps)):
            return True
    return False


def _inside_even_odd(points: np.ndarray, loops: list[np.ndarray]) -> np.ndarray:
    """Even-odd point-in-region test against one or more closed loops."""
    inside = np.zeros(len(points), dtype=bool)
    px, py = points[:, 0], points[:, 1]
    for loop in loops:
        a, b = _segments(loop)
        chunk = max(1, int(4e6 // max(len(a), 1)))
        for lo in range(0, len(points), chunk):
            hi = min(lo + chunk, len(points))
            X, Y = px[lo:hi, None], py[lo:hi, None]
            y0, y1 = a[None, :, 1], b[None, :, 1]
            x0, x1 = a[None, :, 0], b[None, :, 0]
            straddle = (y0 <= Y) != (y1 <= Y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = x0 + (Y - y0) * (x1 - x0) / (y1 - y0)
            hits = straddle & (X < xc)
            inside[lo:hi] ^= (hits.sum(axis=1) % 2).astype(bool)
    return inside


def _nearest_on_polyline(points: np.ndarray, poly: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distance, arclength coordinate, and segment normal at the nearest point."""
    a, b = _segments(poly)
    d = b - a
    seg_len = np.hypot(d[:, 0], d[:, 1])
    keep = seg_len > 0
    a, b, d, seg_len = a[keep], b[keep], d[keep], seg_len[keep]
    cum = np.concatenate(([0.0], np.cumsum(seg_len)))
    best_d2 = np.full(len(points), np.inf)
    best_arc = np.zeros(len(points))
    best_seg = np.zeros(len(points), dtype=np.int64)
    chunk = max(1, int(4e6 // max(len(a), 1)))
    for lo in range(0, len(points), chunk):
        hi = min(lo + chunk, len(points))
        r = points[lo:hi, None, :] - a[None, :, :]
        t = np.clip((r * d[None]).sum(axis=2) / (seg_len**2)[None, :], 0.0, 1.0)
        closest = a[None] + t[:, :, None] * d[None]
        d2 = ((points[lo:hi, None, :] - closest) ** 2).sum(axis=2)
        j = np.argmin(d2, axis=1)
        rows = np.arange(hi - lo)
        best_d2[lo:hi] = d2[rows, j]
        best_arc[lo:hi] = cum[j] + t[rows, j] * seg_len[j]
        best_seg[lo:hi] = j
    tang = d / seg_len[:, None]
    normals = np.column_stack((-tang[:, 1], tang[:, 0]))
    return np.sqrt(best_d2), best_arc, normals[best_seg]


# -- rasterization -----------------------------------------------------------


def rasterize(
    polyline_working: np.ndarray | list | str | Path,
    polyline_source: np.ndarray | list | str | Path,
    mesh: float,
) -> LatticeDomain:
    """Rasterize the region jointly enclosed by two tagged polylines.

    Site centers sit at half-integer multiples of the mesh so that polyline
    segments running along grid lines coincide exactly with lattice faces.
    Two closed loops describe a ring-shaped region (one loop inside the
    other); two open polylines are joined end-to-end into a single loop.
    Faces are tagged Working/Source by the nearer polyline and weighted by
    the alignment between the face normal and the local polyline normal.
    """
    if not mesh > 0:
        raise InvalidParam("mesh must be positive")
    work = load_polyline(polyline_working)
    src = load_polyline(polyline_source)
    for poly, label in ((work, "working"), (src, "source")):
        if _self_intersects(poly):
            raise DegenerateGeometry(f"{label} polyline self-intersects")

    if _is_closed(work) and _is_closed(src):
        loops = [work, src]
    elif not _is_closed(work) and not _is_closed(src):
        ring = _join_open(work, src)
        if _self_intersects(ring):
            raise DegenerateGeometry("joined working+source loop self-intersects")
        loops = [ring]
    else:
        raise DegenerateGeometry("polylines must be both closed or both open")

    allpts = np.vstack([work, src])
    lo = np.floor(allpts.min(axis=0) / mesh).astype(int) - 2
    hi = np.ceil(allpts.max(axis=0) / mesh).astype(int) + 2
    extent = (allpts.max(axis=0) - allpts.min(axis=0)).min()
    if mesh > extent / 4:
        raise MeshTooCoarse(f"mesh {mesh} exceeds a quarter of the region extent {extent}")

    ii, jj = np.meshgrid(np.arange(lo[0], hi[0]), np.arange(lo[1], hi[1]), indexing="ij")
    sites = np.column_stack((ii.ravel(), jj.ravel())).astype(np.int64)
    centers = (sites + 0.5) * mesh
    inside = _inside_even_odd(centers, loops)
    bulk = sites[inside]
    if len(bulk) == 0:
        raise DegenerateGeometry("polylines enclose no lattice sites at this mesh")

    inset = {tuple(map(int, s)) for s in bulk}
    f_ext, f_in = [], []
    for s in bulk:
        st = (int(s[0]), int(s[1]))
        for off in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            t = (st[0] + off[0], st[1] + off[1])
            if t not in inset:
                f_in.append(st)
                f_ext.append(t)
    face_inward = np.asarray(f_in, dtype=np.int64)
    face_exterior = np.asarray(f_ext, dtype=np.int64)
    mids = 0.5 * mesh * (face_inward + face_exterior + 1.0)

    dist_w, arc_w, norm_w = _nearest_on_polyline(mids, work)
    dist_s, arc_s, norm_s = _nearest_on_polyline(mids, src)
    tag = np.where(dist_w <= dist_s, BoundaryTag.WORKING, BoundaryTag.SOURCE).astype(np.uint8)
    arc = np.where(tag == BoundaryTag.WORKING, arc_w, arc_s)
    seg_normal = np.where((tag == BoundaryTag.WORKING)[:, None], norm_w, norm_s)
    face_normal = (face_exterior - face_inward).astype(float)
    weight = np.abs((face_normal * seg_normal).sum(axis=1))
    weight = np.clip(weight, _MIN_WEIGHT, 1.0)

    order = np.lexsort((arc, tag))
    dom = LatticeDomain(
        mesh=float(mesh),
        dimension=2,
        bulk_sites=bulk,
        face_exterior=face_exterior[order],
        face_inward=face_inward[order],
        face_tag=tag[order],
        face_weight=weight[order],
        face_arclength=arc[order],
    )
    if not dom.working_mask().any() or not dom.source_mask().any():
        raise MeshTooCoarse("rasterization left no working or no source faces")
    dom.validate()
    return dom


def _join_open(work: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Join two open polylines into one closed loop (orienting source to fit)."""
    d_tail = np.linalg.norm(work[-1] - src[0]) + np.linalg.norm(src[-1] - work[0])
    d_flip = np.linalg.norm(work[-1] - src[-1]) + np.linalg.norm(src[0] - work[0])
    s = src if d_tail <= d_flip else src[::-1]
    ring = np.vstack([work, s, work[:1]])
    # drop exact duplicates at the seams
    keep = np.ones(len(ring), dtype=bool)
    keep[1:] = np.any(ring[1:] != ring[:-1], axis=1)
    ring = ring[keep]
    if len(ring) < 4:
        raise DegenerateGeometry("joined loop is degenerate")
    return ring


# -- hand-built lattices -----------------------------------------------------


def lattice_box(
    nx: int,
    ny: int,
    mesh: float,
    source_side: str | None = "top",
) -> LatticeDomain:
    """nx-by-ny block of bulk sites, faces on all four sides.

    One side is tagged Source; pass source_side=None for an all-working box.
    """
    if nx < 1 or ny < 1:
        raise InvalidParam("box must have at least one site per side")
    sides = {"left", "right", "bottom", "top"}
    if source_side is not None and source_side not in sides:
        raise InvalidParam(f"source_side must be one of {sorted(sides)}")
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    bulk = np.column_stack((ii.ravel(), jj.ravel())).astype(np.int64)
    f_in, f_ext, tags = [], [], []
    def side_of(t):
        if t[1] < 0:
            return "bottom"
        if t[1] >= ny:
            return "top"
        return "left" if t[0] < 0 else "right"
    inset = {tuple(map(int, s)) for s in bulk}
    for s in bulk:
        st = (int(s[0]), int(s[1]))
        for off in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            t = (st[0] + off[0], st[1] + off[1])
            if t not in inset:
                f_in.append(st)
                f_ext.append(t)
                tags.append(BoundaryTag.SOURCE if side_of(t) == source_side else BoundaryTag.WORKING)
    nf = len(f_in)
    dom = LatticeDomain(
        mesh=float(mesh),
        dimension=2,
        bulk_sites=bulk,
        face_exterior=np.asarray(f_ext, dtype=np.int64),
        face_inward=np.asarray(f_in, dtype=np.int64),
        face_tag=np.asarray(tags, dtype=np.uint8),
        face_weight=np.ones(nf),
    )
    dom.validate()
    return dom


def rasterize_loop(polyline, mesh: float, tag: BoundaryTag = BoundaryTag.WORKING) -> LatticeDomain:
    """Rasterize a single closed curve; every face gets the same tag.

    This is the sourceless variant of rasterize, used for spectra of closed
    interfaces. InvalidParam if the polyline is not closed.
    """
    if not mesh > 0:
        raise InvalidParam("mesh must be positive")
    poly = load_polyline(polyline)
    if not _is_closed(poly):
        raise InvalidParam("rasterize_loop needs a closed polyline")
    if _self_intersects(poly):
        raise DegenerateGeometry("polyline self-intersects")
    lo = np.floor(poly.min(axis=0) / mesh).astype(int) - 2
    hi = np.ceil(poly.max(axis=0) / mesh).astype(int) + 2
    extent = (poly.max(axis=0) - poly.min(axis=0)).min()
    if mesh > extent / 4:
        raise MeshTooCoarse(f"mesh {mesh} exceeds a quarter of the region extent {extent}")
    ii, jj = np.meshgrid(np.arange(lo[0], hi[0]), np.arange(lo[1], hi[1]), indexing="ij")
    sites = np.column_stack((ii.ravel(), jj.ravel())).astype(np.int64)
    centers = (sites + 0.5) * mesh
    bulk = sites[_inside_even_odd(centers, [poly])]
    if len(bulk) == 0:
        raise DegenerateGeometry("polyline encloses no lattice sites at this mesh")
    inset = {tuple(map(int, s)) for s in bulk}
    f_ext, f_in = [], []
    for s in bulk:
        st = (int(s[0]), int(s[1]))
        for off in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            t = (st[0] + off[0], st[1] + off[1])
            if t not in inset:
                f_in.append(st)
                f_ext.append(t)
    face_inward = np.asarray(f_in, dtype=np.int64)
    face_exterior = np.asarray(f_ext, dtype=np.int64)
    mids = 0.5 * mesh * (face_inward + face_exterior + 1.0)
    _, arc, seg_normal = _nearest_on_polyline(mids, poly)
    face_normal = (face_exterior - face_inward).astype(float)
    weight = np.clip(np.abs((face_normal * seg_normal).sum(axis=1)), _MIN_WEIGHT, 1.0)
    order = np.argsort(arc)
    dom = LatticeDomain(
        mesh=float(mesh),
        dimension=2,
        bulk_sites=bulk,
        face_exterior=face_exterior[order],
        face_inward=face_inward[order],
        face_tag=np.full(len(f_in), int(tag), dtype=np.uint8),
        face_weight=weight[order],
        face_arclength=arc[order],
    )
    dom.validate()
    return dom


def lattice_channel(
    n_rows: int,
    mesh: float,
    width: int = 1,
    source_top: bool = True,
) -> LatticeDomain:
    """Vertical channel with reflecting side walls (quasi-1D test geometry).

    Bulk is a width-by-n_rows column; bottom faces are Working, top faces are
    Source (or Working when source_top is False). Side neighbours are simply
    absent, which walk and solve code treats as reflecting.
    """
    if n_rows < 2 or width < 1:
        raise InvalidParam("channel needs n_rows >= 2 and width >= 1")
    ii, jj = np.meshgrid(np.arange(width), np.arange(n_rows), indexing="ij")
    bulk = np.column_stack((ii.ravel(), jj.ravel())).astype(np.int64)
    f_in, f_ext, tags = [], [], []
    for x in range(width):
        f_in.append((x, 0))
        f_ext.append((x, -1))
        tags.append(BoundaryTag.WORKING)
        f_in.append((x, n_rows - 1))
        f_ext.append((x, n_rows))
        tags.append(BoundaryTag.SOURCE if source_top else BoundaryTag.WORKING)
    dom = LatticeDomain(
        mesh=float(mesh),
        dimension=2,
        bulk_sites=bulk,
        face_exterior=np.asarray(f_ext, dtype=np.int64),
        face_inward=np.asarray(f_in, dtype=np.int64),
        face_tag=np.asarray(tags, dtype=np.uint8),
        face_weight=np.ones(len(f_in)),
    )
    dom.validate()
    return dom
