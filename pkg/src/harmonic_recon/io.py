"""Readers and writers for OFF/OBJ meshes, voxel volumes, and CSV tables."""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MeshParseError, NonManifoldError, ReconError
from .mesh import Mesh, SampleSet, ScalarField, VolumeGrid

logger = logging.getLogger(__name__)


def _fmt(x: float) -> str:
    # 17 significant digits round-trips every IEEE double
    return format(float(x), ".17g")


def _content_lines(path):
    """Yield (line_number, stripped_text) for non-blank, non-comment lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield lineno, text


def load_mesh(path, format: str | None = None) -> Mesh:
    """Load an OFF or OBJ surface.

    ``format`` defaults to the file suffix. Edges are derived from the faces and
    vertex order follows the file.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt == "off":
        n, positions, faces = _parse_off(path)
    elif fmt == "obj":
        n, positions, faces = _parse_obj(path)
    else:
        raise MeshParseError(f"unknown mesh format {fmt!r} (expected off or obj)", path=path)
    try:
        return Mesh(n, faces=faces, positions=positions)
    except NonManifoldError:
        raise
    except ValueError as exc:
        raise MeshParseError(str(exc), path=path) from exc


def _parse_off(path):
    lines = _content_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise MeshParseError("empty file", path=path) from None
    tokens = header.split()
    if tokens[0] != "OFF":
        raise MeshParseError(f"expected 'OFF' header, got {tokens[0]!r}", line=lineno, path=path)
    tokens = tokens[1:]
    if not tokens:
        try:
            lineno, counts = next(lines)
        except StopIteration:
            raise MeshParseError("missing counts line", path=path) from None
        tokens = counts.split()
    if len(tokens) < 2:
        raise MeshParseError("counts line must be 'V F E'", line=lineno, path=path)
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise MeshParseError(f"bad counts line {' '.join(tokens)!r}", line=lineno, path=path) from None
    if nv < 0 or nf < 0:
        raise MeshParseError("negative element count", line=lineno, path=path)

    positions = np.empty((nv, 3))
    for i in range(nv):
        try:
            lineno, text = next(lines)
        except StopIteration:
            raise MeshParseError(f"expected {nv} vertices, file ended after {i}", path=path) from None
        parts = text.split()
        if len(parts) < 3:
            raise MeshParseError("vertex line needs 3 coordinates", line=lineno, path=path)
        try:
            positions[i] = [float(p) for p in parts[:3]]
        except ValueError:
            raise MeshParseError(f"bad vertex line {text!r}", line=lineno, path=path) from None

    faces = []
    for fi in range(nf):
        try:
            lineno, text = next(lines)
        except StopIteration:
            raise MeshParseError(f"expected {nf} faces, file ended after {fi}", path=path) from None
        parts = text.split()
        try:
            k = int(parts[0])
            idx = [int(p) for p in parts[1 : 1 + k]]
        except ValueError:
            raise MeshParseError(f"bad face line {text!r}", line=lineno, path=path) from None
        if len(idx) != k or k < 3:
            raise MeshParseError(f"face {fi} declares {k} vertices but lists {len(idx)}", line=lineno, path=path)
        for v in idx:
            if not 0 <= v < nv:
                raise MeshParseError(
                    f"face {fi} references vertex {v} but only {nv} vertices exist",
                    line=lineno,
                    path=path,
                )
        faces.append(idx)
    return nv, positions, faces


def _parse_obj(path):
    verts = []
    faces = []
    ignored: set[str] = set()
    for lineno, text in _content_lines(path):
        parts = text.split()
        tag = parts[0]
        if tag == "v":
            try:
                verts.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise MeshParseError(f"bad vertex line {text!r}", line=lineno, path=path) from None
            if len(verts[-1]) != 3:
                raise MeshParseError("vertex line needs 3 coordinates", line=lineno, path=path)
        elif tag == "f":
            try:
                # "f 1/2/3 ..." keeps only the position index
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            except ValueError:
                raise MeshParseError(f"bad face line {text!r}", line=lineno, path=path) from None
            if len(idx) < 3:
                raise MeshParseError("face needs at least 3 vertices", line=lineno, path=path)
            faces.append((idx, lineno))
        elif tag not in ignored:
            ignored.add(tag)
            logger.warning("%s:%d: ignoring OBJ directive %r", path, lineno, tag)
    nv = len(verts)
    for fi, (idx, lineno) in enumerate(faces):
        for v in idx:
            if not 0 <= v < nv:
                raise MeshParseError(
                    f"face {fi} references vertex {v + 1} but only {nv} vertices exist",
                    line=lineno,
                    path=path,
                )
    positions = np.array(verts, dtype=float).reshape(nv, 3)
    return nv, positions, [idx for idx, _ in faces]


def save_mesh(mesh: Mesh, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    pos = mesh.positions if mesh.positions is not None else np.zeros((mesh.n_vertices, 3))
    faces = mesh.faces or ()
    with _open_for_write(path) as fh:
        if fmt == "off":
            fh.write("OFF\n")
            fh.write(f"{mesh.n_vertices} {len(faces)} {len(mesh.edges)}\n")
            for p in pos:
                fh.write(" ".join(_fmt(c) for c in p) + "\n")
            for f in faces:
                fh.write(f"{len(f)} " + " ".join(str(v) for v in f) + "\n")
        elif fmt == "obj":
            for p in pos:
                fh.write("v " + " ".join(_fmt(c) for c in p) + "\n")
            for f in faces:
                fh.write("f " + " ".join(str(v + 1) for v in f) + "\n")
        else:
            raise ReconError(f"unknown mesh format {fmt!r}")


def load_volume(path, adjacency_mode="six") -> VolumeGrid:
    """Read ``VOX nx ny nz`` followed by nx*ny*nz 0/1 tokens, x fastest."""
    tokens: list[str] = []
    header = None
    header_line = None
    for lineno, text in _content_lines(path):
        if header is None:
            header, header_line = text.split(), lineno
            if header[0] != "VOX" or len(header) != 4:
                raise MeshParseError("expected header 'VOX nx ny nz'", line=lineno, path=path)
            continue
        tokens.extend(text.split())
    if header is None:
        raise MeshParseError("empty file", path=path)
    try:
        nx, ny, nz = (int(t) for t in header[1:])
    except ValueError:
        raise MeshParseError("non-integer dimensions", line=header_line, path=path) from None
    if min(nx, ny, nz) < 1:
        raise MeshParseError("dimensions must be positive", line=header_line, path=path)
    if len(tokens) != nx * ny * nz:
        raise MeshParseError(
            f"dimension/payload mismatch: header says {nx}x{ny}x{nz}={nx * ny * nz} cells, "
            f"found {len(tokens)} tokens",
            path=path,
        )
    bad = [t for t in tokens if t not in ("0", "1")]
    if bad:
        raise MeshParseError(f"occupancy tokens must be 0 or 1, got {bad[0]!r}", path=path)
    occ = np.array([t == "1" for t in tokens], dtype=bool).reshape((nx, ny, nz), order="F")
    if not occ.any():
        raise MeshParseError("volume has zero occupied cells", path=path)
    return VolumeGrid(occ, adjacency_mode)


def save_volume(grid: VolumeGrid, path) -> None:
    nx, ny, nz = grid.dims
    flat = grid.occupancy.ravel(order="F")
    with _open_for_write(path) as fh:
        fh.write(f"VOX {nx} {ny} {nz}\n")
        for row in range(0, flat.size, nx):
            fh.write(" ".join("1" if b else "0" for b in flat[row : row + nx]) + "\n")


def _read_index_value_csv(path, what):
    out: dict[int, float] = {}
    for lineno, text in _content_lines(path):
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise MeshParseError(f"{what} line must be 'index,value'", line=lineno, path=path)
        try:
            idx = int(parts[0])
        except ValueError:
            if not out and not parts[0].lstrip("-").isdigit():
                continue  # header row
            raise MeshParseError(f"bad index {parts[0]!r}", line=lineno, path=path) from None
        try:
            val = float(parts[1])
        except ValueError:
            raise MeshParseError(f"bad value {parts[1]!r}", line=lineno, path=path) from None
        if idx in out:
            raise MeshParseError(f"duplicate index {idx}", line=lineno, path=path)
        out[idx] = val
    return out


def load_samples(path, mesh: Mesh | None = None) -> SampleSet:
    entries = _read_index_value_csv(path, "sample")
    try:
        return SampleSet(entries, None if mesh is None else mesh.n_vertices)
    except ValueError as exc:
        raise MeshParseError(str(exc), path=path) from exc


def save_samples(samples: SampleSet, path) -> None:
    with _open_for_write(path) as fh:
        fh.write("# vertex_index,value\n")
        for v, val in samples.entries.items():
            fh.write(f"{v},{_fmt(val)}\n")


def load_field(path, domain: str = "surface") -> ScalarField:
    try:
        return ScalarField(_read_index_value_csv(path, "field"), domain)
    except ValueError as exc:
        raise MeshParseError(str(exc), path=path) from exc


def export_field(domain, field: ScalarField | Mapping[int, float], format: str, path) -> None:
    """Write a field as ``index,value`` CSV or as an ASCII PLY with a quality property.

    ``domain`` is the Mesh or VolumeGrid the field lives on; every vertex (or
    occupied cell) must have a value.
    """
    values = field.values if isinstance(field, ScalarField) else dict(field)
    if isinstance(domain, Mesh):
        keys = list(range(domain.n_vertices))
    elif isinstance(domain, VolumeGrid):
        keys = sorted(domain.boundary_cells + domain.interior_cells)
    else:
        raise TypeError("domain must be a Mesh or VolumeGrid")
    missing = [k for k in keys if k not in values]
    if missing:
        raise ReconError(f"field does not cover the domain; missing {missing[:10]}")
    fmt = format.lower()
    if fmt == "csv":
        write_field_csv(values, path, keys)
    elif fmt == "ply":
        _write_ply(domain, values, keys, path)
    else:
        raise ReconError(f"unknown export format {format!r}")


def write_field_csv(values: Mapping[int, float], path, keys: Iterable[int] | None = None) -> None:
    keys = sorted(values) if keys is None else keys
    with _open_for_write(path) as fh:
        for k in keys:
            fh.write(f"{k},{_fmt(values[k])}\n")


def _write_ply(domain, values, keys, path):
    if isinstance(domain, Mesh):
        pos = domain.positions if domain.positions is not None else np.zeros((domain.n_vertices, 3))
        faces = domain.faces or ()
    else:
        pos = np.array([domain.coords(k) for k in keys], dtype=float)
        faces = ()
    with _open_for_write(path) as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(keys)}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write("property float quality\n")
        if faces:
            fh.write(f"element face {len(faces)}\n")
            fh.write("property list uchar int vertex_indices\n")
        fh.write("end_header\n")
        for i, k in enumerate(keys):
            p = pos[i] if not isinstance(domain, Mesh) else pos[k]
            fh.write(" ".join(_fmt(c) for c in p) + f" {_fmt(values[k])}\n")
        for f in faces:
            fh.write(f"{len(f)} " + " ".join(str(v) for v in f) + "\n")


def write_network_csv(segments: Sequence[Sequence[int]], path) -> None:
    """One line per segment: ``segment_id,v0 v1 ... vk``."""
    with _open_for_write(path) as fh:
        fh.write("# segment,vertices\n")
        for i, seg in enumerate(segments):
            fh.write(f"{i}," + " ".join(str(v) for v in seg) + "\n")


def read_network_csv(path) -> list[list[int]]:
    segments = []
    for lineno, text in _content_lines(path):
        sid, _, verts = text.partition(",")
        try:
            segments.append([int(v) for v in verts.split()])
        except ValueError:
            raise MeshParseError(f"bad segment line {text!r}", line=lineno, path=path) from None
    return segments


def write_components_csv(labels: Mapping[int, int], path) -> None:
    """``vertex,component`` with component -1 for curve-network vertices."""
    with _open_for_write(path) as fh:
        fh.write("# vertex,component\n")
        for v in sorted(labels):
            fh.write(f"{v},{labels[v]}\n")


class _open_for_write:
    """Text writer that surfaces I/O failures with the offending path."""

    def __init__(self, path):
        self.path = os.fspath(path)

    def __enter__(self):
        try:
            self.fh = open(self.path, "w", encoding="utf-8", newline="\n")
        except OSError as exc:
            raise ReconError(f"cannot write {self.path}: {exc.strerror}") from exc
        return self.fh

    def __exit__(self, *exc):
        self.fh.close()
        return False
