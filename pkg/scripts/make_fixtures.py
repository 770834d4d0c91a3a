"""Regenerate the files under fixtures/ from the procedural shapes."""

import argparse
from pathlib import Path

import numpy as np

from harmonic_recon import io
from harmonic_recon.mesh import SampleSet, VolumeGrid
from harmonic_recon.shapes import bumpy_sphere, l_shape_occupancy, octahedron, octasphere, torus


def height_samples(mesh, vertices):
    # smooth field f = z + 0.5 x, cast to a few decimals to keep files short
    p = mesh.positions
    return SampleSet({v: round(float(p[v, 2] + 0.5 * p[v, 0]), 6) for v in vertices})


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "fixtures", type=Path)
    out = ap.parse_args().out
    out.mkdir(exist_ok=True)

    io.save_mesh(octahedron(), out / "octahedron.off")
    sphere = octasphere(2)
    io.save_mesh(sphere, out / "sphere66.off")
    io.save_samples(height_samples(sphere, [0, 2, 4, 20, 40]), out / "sphere66_samples5.csv")

    bumpy = bumpy_sphere(2, seed=3)
    io.save_mesh(bumpy, out / "bumpy162.off")
    rng = np.random.default_rng(12)
    picks = sorted(int(v) for v in rng.choice(bumpy.n_vertices, 12, replace=False))
    io.save_samples(height_samples(bumpy, picks), out / "bumpy162_samples12.csv")

    io.save_mesh(torus(), out / "torus.off")

    io.save_volume(VolumeGrid(np.ones((4, 4, 4), dtype=bool)), out / "cube4.vox")
    io.save_volume(VolumeGrid(l_shape_occupancy(8)), out / "lshape8.vox")


if __name__ == "__main__":
    main()
