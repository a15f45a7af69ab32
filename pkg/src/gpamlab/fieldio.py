"""Text serialization for fields, enhanced pairs, and solver trajectories.

Formats:

* field file: header line ``GPAM-FIELD v1 n=<n>``, then one line
  ``k1 k2 re im`` per nonzero mode.  Modes omitted are zero.  Writers emit
  modes in lexicographic order; readers accept any order.
* enhanced pair: a directory holding two field files plus a manifest whose
  first line is ``GPAM-ENH v1 alpha=<alpha>``.
* trajectory: a directory holding a JSON manifest (times, config,
  provenance, explosion status) plus one field file per stored snapshot.

All floats are written with ``repr`` so reading recovers them bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .enhancement import EnhancedPair
from .fields import Grid, SpectralField
from .pde import SolveConfig, Trajectory

FIELD_MAGIC = "GPAM-FIELD v1"
PAIR_MAGIC = "GPAM-ENH v1"
TRAJ_MAGIC = "GPAM-TRAJ v1"

_PAIR_FILES = ("first.field", "second.field")
_TRAJ_MANIFEST = "manifest.json"
_PAIR_MANIFEST = "manifest.txt"


def field_to_text(u: SpectralField) -> str:
    n = u.grid.n
    half = n // 2
    lines = [f"{FIELD_MAGIC} n={n}"]
    rows, cols = np.nonzero(u.coeffs)
    k1 = np.where(rows >= half, rows - n, rows).astype(int)
    k2 = np.where(cols >= half, cols - n, cols).astype(int)
    order = np.lexsort((k2, k1))
    for i in order:
        z = complex(u.coeffs[rows[i], cols[i]])
        lines.append(f"{k1[i]} {k2[i]} {z.real!r} {z.imag!r}")
    return "\n".join(lines) + "\n"


def field_from_text(text: str) -> SpectralField:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty field file")
    header = lines[0].split()
    if header[:2] != FIELD_MAGIC.split() or len(header) != 3:
        raise ValueError(f"bad field header: {lines[0]!r}")
    key, _, val = header[2].partition("=")
    if key != "n":
        raise ValueError(f"bad field header: {lines[0]!r}")
    grid = Grid(int(val))
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    seen = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"bad mode line: {ln!r}")
        idx = grid.mode_index(int(parts[0]), int(parts[1]))
        if idx in seen:
            raise ValueError(f"duplicate mode {parts[0]} {parts[1]}")
        seen.add(idx)
        z = complex(float(parts[2]), float(parts[3]))
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise ValueError(f"non-finite coefficient: {ln!r}")
        coeffs[idx] = z
    return SpectralField(grid, coeffs)


def write_field(path: str | Path, u: SpectralField) -> None:
    Path(path).write_text(field_to_text(u), encoding="ascii")


def read_field(path: str | Path) -> SpectralField:
    return field_from_text(Path(path).read_text(encoding="ascii"))


def write_enhanced_pair(dirpath: str | Path, pair: EnhancedPair,
                        alpha: float) -> None:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    write_field(d / _PAIR_FILES[0], pair.first)
    write_field(d / _PAIR_FILES[1], pair.second)
    manifest = [f"{PAIR_MAGIC} alpha={float(alpha)!r}"]
    manifest += [f"{label} {name}" for label, name
                 in zip(("first", "second"), _PAIR_FILES)]
    (d / _PAIR_MANIFEST).write_text("\n".join(manifest) + "\n", encoding="ascii")


def read_enhanced_pair(dirpath: str | Path) -> tuple[EnhancedPair, float]:
    d = Path(dirpath)
    lines = (d / _PAIR_MANIFEST).read_text(encoding="ascii").splitlines()
    header = lines[0].split()
    if header[:2] != PAIR_MAGIC.split() or len(header) != 3:
        raise ValueError(f"bad pair manifest: {lines[0]!r}")
    key, _, val = header[2].partition("=")
    if key != "alpha":
        raise ValueError(f"bad pair manifest: {lines[0]!r}")
    names = dict(ln.split() for ln in lines[1:] if ln.strip())
    pair = EnhancedPair(read_field(d / names["first"]),
                        read_field(d / names["second"]))
    return pair, float(val)


def _snapshot_name(i: int) -> str:
    return f"state_{i:06d}.field"


def write_trajectory(dirpath: str | Path, traj: Trajectory) -> None:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    names = [_snapshot_name(i) for i in range(len(traj.states))]
    for name, state in zip(names, traj.states):
        write_field(d / name, state)
    manifest = {
        "format": TRAJ_MAGIC,
        "n": traj.grid.n,
        "times": list(traj.times),
        "snapshots": names,
        "config": dataclasses.asdict(traj.config),
        "provenance": traj.provenance,
        "exploded": traj.exploded,
        "explosion_time": traj.explosion_time,
    }
    (d / _TRAJ_MANIFEST).write_text(
        json.dumps(manifest, indent=1) + "\n", encoding="ascii")


def read_trajectory(dirpath: str | Path) -> Trajectory:
    d = Path(dirpath)
    manifest = json.loads((d / _TRAJ_MANIFEST).read_text(encoding="ascii"))
    if manifest.get("format") != TRAJ_MAGIC:
        raise ValueError(f"bad trajectory manifest in {d}")
    states = [read_field(d / name) for name in manifest["snapshots"]]
    return Trajectory(
        times=[float(t) for t in manifest["times"]],
        states=states,
        config=SolveConfig(**manifest["config"]),
        provenance=manifest["provenance"],
        exploded=bool(manifest["exploded"]),
        explosion_time=manifest["explosion_time"],
    )
