"""Field writers (CSV, legacy ASCII VTK) and the matching CSV reader.

Numbers are written with 17 significant digits so doubles survive a
write/read round trip exactly.
"""

from __future__ import annotations

import os
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from hlbm.lattice import MacroFields

CSV_COLUMNS = ("x", "y", "rho", "ux", "uy", "p")


def fmt(value: float) -> str:
    return f"{float(value):.17g}"


def field_path(out_dir: str, run: str, step: int, ext: str) -> str:
    return os.path.join(out_dir, f"{run}_{step}.{ext}")


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def csv_text(fields: MacroFields, header: Sequence[str] = ()) -> str:
    """Rows ordered with x varying fastest; ``header`` lines become ``#`` comments."""
    out = [f"# {line}" for line in header]
    out.append(f"# step {fields.step}")
    out.append(",".join(CSV_COLUMNS))
    nx, ny = fields.rho.shape
    for j in range(ny):
        for i in range(nx):
            out.append(
                f"{i},{j},{fmt(fields.rho[i, j])},{fmt(fields.ux[i, j])},"
                f"{fmt(fields.uy[i, j])},{fmt(fields.p[i, j])}"
            )
    return "\n".join(out) + "\n"


def write_csv(fields: MacroFields, path: str, header: Sequence[str] = ()) -> None:
    _write(path, csv_text(fields, header))


def read_csv(path: str) -> tuple[MacroFields, list[str]]:
    """Inverse of :func:`write_csv`; returns the fields and the comment lines."""
    header = []
    step = 0
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith("#"):
            break
        text = line[2:] if line.startswith("# ") else line[1:]
        if text.startswith("step "):
            step = int(text.split()[1])
        else:
            header.append(text)
    if lines[body_start].split(",") != list(CSV_COLUMNS):
        raise ValueError(f"{path}: unexpected column header {lines[body_start]!r}")
    data = np.array([[float(v) for v in row.split(",")] for row in lines[body_start + 1 :] if row])
    ix = data[:, 0].astype(int)
    iy = data[:, 1].astype(int)
    shape = (ix.max() + 1, iy.max() + 1)
    arrays = []
    for col in range(2, 6):
        arr = np.empty(shape)
        arr[ix, iy] = data[:, col]
        arrays.append(arr)
    rho, ux, uy, p = arrays
    return MacroFields(rho=rho, ux=ux, uy=uy, p=p, step=step), header


def vtk_text(
    title: str,
    shape: tuple[int, int],
    scalars: Mapping[str, np.ndarray] = (),
    vectors: Mapping[str, tuple[np.ndarray, np.ndarray]] = (),
) -> str:
    """Legacy ASCII structured-points dataset with point data, x varying fastest."""
    nx, ny = shape
    title = " ".join(title.split())[:255]
    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} 1",
        "ORIGIN 0 0 0",
        "SPACING 1 1 1",
        f"POINT_DATA {nx * ny}",
    ]
    for name, arr in dict(scalars).items():
        out.append(f"SCALARS {name} double 1")
        out.append("LOOKUP_TABLE default")
        out.extend(fmt(arr[i, j]) for j in range(ny) for i in range(nx))
    for name, (vx, vy) in dict(vectors).items():
        out.append(f"VECTORS {name} double")
        out.extend(f"{fmt(vx[i, j])} {fmt(vy[i, j])} 0" for j in range(ny) for i in range(nx))
    return "\n".join(out) + "\n"


def write_vtk(fields: MacroFields, path: str, title: str = "hlbm fields") -> None:
    text = vtk_text(
        f"{title} step {fields.step}",
        fields.rho.shape,
        scalars={"rho": fields.rho, "p": fields.p},
        vectors={"velocity": (fields.ux, fields.uy)},
    )
    _write(path, text)


def write_fields(fields: MacroFields, fmt_name: str, path: str, header: Sequence[str] = (), title: str = "hlbm fields") -> None:
    """Write one snapshot as ``csv`` (full header) or ``vtk`` (single title line)."""
    if fmt_name == "csv":
        write_csv(fields, path, header)
    elif fmt_name == "vtk":
        write_vtk(fields, path, title)
    else:
        raise ValueError(f"unknown output format {fmt_name!r}")
