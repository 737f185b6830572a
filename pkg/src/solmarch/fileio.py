"""Byte-deterministic writers: PPM (P6), PNG, CSV, and OBJ."""

from __future__ import annotations

import numpy as np


def write_ppm(path, img: np.ndarray) -> None:
    """Binary 8-bit P6; identical inputs produce identical bytes."""
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError("expected an (h, w, 3) uint8 image")
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P6":
            raise ValueError(f"not a P6 file: {path}")
        dims = fh.readline().split()
        maxval = fh.readline().strip()
        w, h = int(dims[0]), int(dims[1])
        if maxval != b"255":
            raise ValueError("only 8-bit PPM supported")
        data = fh.read(w * h * 3)
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w, 3)


def write_png(path, img: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(img, mode="RGB").save(path, format="PNG")


def write_csv(path, header, rows) -> None:
    """Plain comma-separated text; floats use shortest round-trip repr."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_obj(path, vertices: np.ndarray, faces: np.ndarray) -> None:
    """Triangle mesh in OBJ text (1-based face indices), fixed 9-digit floats."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for v in vertices:
            fh.write(f"v {v[0]:.9f} {v[1]:.9f} {v[2]:.9f}\n")
        for f in faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
