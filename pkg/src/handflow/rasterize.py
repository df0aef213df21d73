"""Software triangle rasterizer with exact, testable coverage semantics.

Coverage contract (normative, shared with the brute-force oracle in tests):

  - Pixel centers sit at (i + 0.5, j + 0.5), x right, y down.
  - Vertices project through the pinhole model u = fx * (x / z) + cx,
    v = fy * (y / z) + cy.
  - Faces with any vertex depth z <= NEAR_PLANE are discarded whole
    (no clipping); zero-area screen triangles draw nothing.
  - Each triangle is wound so its signed area orient2d(v0, v1, v2) > 0
    (v1/v2 swapped when negative).
  - A pixel center p is covered when for every directed edge (a, b) in
    {(v1,v2), (v2,v0), (v0,v1)}: orient2d(a, b, p) > 0, or == 0 and the
    edge is a top edge (a.y == b.y and b.x > a.x) or a left edge
    (b.y < a.y).
  - Depth at a covered pixel is interpolated inverse z from the screen
    barycentric weights; the face with the greatest inverse depth wins,
    ties keep the lowest face index.

All arithmetic is float64 with a fixed operation order, so a per-pixel
reimplementation of these rules reproduces the coverage maps bit-exactly.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibration import CameraModel
from .errors import EmptyMesh, ParseError
from .hand import NUM_VERTICES, Keypoint

NEAR_PLANE = 1e-4


class HandPart(enum.IntEnum):
    PALM = 0
    THUMB = 1
    INDEX = 2
    MIDDLE = 3
    RING = 4
    PINKY = 5


PART_NAMES = {p.name.lower(): p for p in HandPart}

# keypoint index -> hand part, for the nearest-keypoint labeling fallback
_KEYPOINT_PART = {
    Keypoint.WRIST: HandPart.PALM,
    Keypoint.THUMB_CMC: HandPart.THUMB,
    Keypoint.THUMB_MCP: HandPart.THUMB,
    Keypoint.THUMB_IP: HandPart.THUMB,
    Keypoint.THUMB_TIP: HandPart.THUMB,
    Keypoint.INDEX_MCP: HandPart.INDEX,
    Keypoint.INDEX_PIP: HandPart.INDEX,
    Keypoint.INDEX_DIP: HandPart.INDEX,
    Keypoint.INDEX_TIP: HandPart.INDEX,
    Keypoint.MIDDLE_MCP: HandPart.MIDDLE,
    Keypoint.MIDDLE_PIP: HandPart.MIDDLE,
    Keypoint.MIDDLE_DIP: HandPart.MIDDLE,
    Keypoint.MIDDLE_TIP: HandPart.MIDDLE,
    Keypoint.RING_MCP: HandPart.RING,
    Keypoint.RING_PIP: HandPart.RING,
    Keypoint.RING_DIP: HandPart.RING,
    Keypoint.RING_TIP: HandPart.RING,
    Keypoint.PINKY_MCP: HandPart.PINKY,
    Keypoint.PINKY_PIP: HandPart.PINKY,
    Keypoint.PINKY_DIP: HandPart.PINKY,
    Keypoint.PINKY_TIP: HandPart.PINKY,
}


@dataclass(frozen=True)
class MeshTopology:
    """Face list plus per-vertex part labels; immutable after load."""

    faces: np.ndarray  # (F, 3) int32
    vertex_parts: np.ndarray  # (V,) int8, HandPart codes

    def __post_init__(self):
        faces = np.asarray(self.faces, dtype=np.int32)
        parts = np.asarray(self.vertex_parts, dtype=np.int8)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "vertex_parts", parts)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError("faces must be (F, 3)")
        if faces.size and (faces.min() < 0 or faces.max() >= len(parts)):
            raise ValueError("face index out of range of the vertex labels")
        if faces.size and np.any(
            (faces[:, 0] == faces[:, 1])
            | (faces[:, 1] == faces[:, 2])
            | (faces[:, 0] == faces[:, 2])
        ):
            raise ValueError("every face must have three distinct vertex indices")
        faces.setflags(write=False)
        parts.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_parts)

    def face_in_subset(self, subset: set[HandPart] | None) -> np.ndarray:
        """Boolean face mask: all three vertices labeled within the subset."""
        if subset is None:
            return np.ones(len(self.faces), dtype=bool)
        codes = np.array(sorted(int(p) for p in subset), dtype=np.int8)
        vert_ok = np.isin(self.vertex_parts, codes)
        return vert_ok[self.faces].all(axis=1)


def load_topology(path: str | Path, expected_vertices: int | None = NUM_VERTICES) -> MeshTopology:
    """Load a topology file: {"faces": [[i,j,k],...], "vertex_parts": [names]}."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    try:
        faces = np.asarray(data["faces"], dtype=np.int32)
        raw_parts = data["vertex_parts"]
        parts = np.array([int(PART_NAMES[p]) if isinstance(p, str) else int(p) for p in raw_parts], dtype=np.int8)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: bad topology: {e}") from e
    if expected_vertices is not None and len(parts) != expected_vertices:
        raise ParseError(
            f"{path}: topology labels {len(parts)} vertices, expected {expected_vertices}"
        )
    return MeshTopology(faces=faces, vertex_parts=parts)


def save_topology(topo: MeshTopology, path: str | Path) -> None:
    data = {
        "faces": [[int(i) for i in f] for f in topo.faces],
        "vertex_parts": [HandPart(int(p)).name.lower() for p in topo.vertex_parts],
    }
    Path(path).write_text(json.dumps(data) + "\n", encoding="utf-8")


def label_vertices_by_nearest_keypoint(vertices: np.ndarray, keypoints: np.ndarray) -> np.ndarray:
    """Fallback part labeling when no curated label file exists: each vertex
    takes the part of its nearest keypoint. Approximate by construction."""
    d = np.linalg.norm(vertices[:, None, :] - keypoints[None, :, :], axis=2)
    nearest = np.argmin(d, axis=1)
    lut = np.array([int(_KEYPOINT_PART[Keypoint(i)]) for i in range(len(keypoints))], dtype=np.int8)
    return lut[nearest]


@dataclass
class Coverage:
    """Per-pixel nearest covering face (-1 for none) and its inverse depth."""

    face_index: np.ndarray  # (H, W) int32
    inv_depth: np.ndarray  # (H, W) float64, 0 where uncovered

    @property
    def mask(self) -> np.ndarray:
        return self.face_index >= 0

    @property
    def pixel_count(self) -> int:
        return int(np.count_nonzero(self.face_index >= 0))


def rasterize_mesh(
    cam: CameraModel,
    vertices: np.ndarray,
    topo: MeshTopology,
    subset: set[HandPart] | None = None,
) -> Coverage:
    """Depth-tested coverage of the mesh under the documented fill rule.

    Raises EmptyMesh when no face survives the subset filter and the
    near-plane discard.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise ValueError("vertices must be (V, 3)")
    if vertices.shape[0] != topo.num_vertices:
        raise ValueError(
            f"vertex count {vertices.shape[0]} does not match topology ({topo.num_vertices})"
        )
    if not np.all(np.isfinite(vertices)):
        raise ValueError("non-finite vertices")

    keep = topo.face_in_subset(subset)
    z = vertices[:, 2]
    keep &= (z[topo.faces] > NEAR_PLANE).all(axis=1)
    face_ids = np.nonzero(keep)[0]
    if face_ids.size == 0:
        raise EmptyMesh("no renderable faces (subset empty or mesh behind camera)")

    u = cam.fx * (vertices[:, 0] / z) + cam.cx
    v = cam.fy * (vertices[:, 1] / z) + cam.cy
    inv_z = 1.0 / z

    H, W = cam.height, cam.width
    face_index = np.full((H, W), -1, dtype=np.int32)
    inv_depth = np.zeros((H, W), dtype=np.float64)

    for fi in face_ids:
        ia, ib, ic = topo.faces[fi]
        ax, ay, az = u[ia], v[ia], inv_z[ia]
        bx, by, bz = u[ib], v[ib], inv_z[ib]
        cx_, cy_, cz = u[ic], v[ic], inv_z[ic]
        area = (bx - ax) * (cy_ - ay) - (by - ay) * (cx_ - ax)
        if area == 0.0:
            continue
        if area < 0.0:
            bx, by, bz, cx_, cy_, cz = cx_, cy_, cz, bx, by, bz
            area = -area

        x_lo = max(0, int(np.ceil(min(ax, bx, cx_) - 0.5)))
        x_hi = min(W - 1, int(np.floor(max(ax, bx, cx_) - 0.5)))
        y_lo = max(0, int(np.ceil(min(ay, by, cy_) - 0.5)))
        y_hi = min(H - 1, int(np.floor(max(ay, by, cy_) - 0.5)))
        if x_lo > x_hi or y_lo > y_hi:
            continue

        px = np.arange(x_lo, x_hi + 1, dtype=np.float64) + 0.5
        py = (np.arange(y_lo, y_hi + 1, dtype=np.float64) + 0.5)[:, None]
        # edge functions, one per edge opposite each vertex
        w0 = (cx_ - bx) * (py - by) - (cy_ - by) * (px - bx)  # edge (b, c)
        w1 = (ax - cx_) * (py - cy_) - (ay - cy_) * (px - cx_)  # edge (c, a)
        w2 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)  # edge (a, b)

        cov = (
            (w0 > 0.0) | ((w0 == 0.0) & _top_left(bx, by, cx_, cy_))
        ) & (
            (w1 > 0.0) | ((w1 == 0.0) & _top_left(cx_, cy_, ax, ay))
        ) & (
            (w2 > 0.0) | ((w2 == 0.0) & _top_left(ax, ay, bx, by))
        )
        if not cov.any():
            continue

        s = w0 + w1 + w2
        inv = (w0 / s) * az + (w1 / s) * bz + (w2 / s) * cz
        tile_f = face_index[y_lo : y_hi + 1, x_lo : x_hi + 1]
        tile_d = inv_depth[y_lo : y_hi + 1, x_lo : x_hi + 1]
        win = cov & (inv > tile_d)
        tile_f[win] = fi
        tile_d[win] = inv[win]

    return Coverage(face_index=face_index, inv_depth=inv_depth)


def _top_left(ax: float, ay: float, bx: float, by: float) -> bool:
    """Tie-break rule for pixel centers exactly on an edge of a positively
    wound triangle: top edges run +x, left edges run -y."""
    return (ay == by and bx > ax) or (by < ay)
