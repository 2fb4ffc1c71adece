"""Deterministic CSV/JSON artifact writers.

Floats are formatted with 17 significant digits so artifacts are
byte-identical across runs and platforms given the same inputs; summation
order inside the library is deterministic (numpy pairwise reductions).
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path, header, columns) -> Path:
    """Write columns (equal-length 1-d arrays) under a comma-joined header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) for c in columns]
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise ValueError("csv columns differ in length")
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for i in range(n):
            f.write(",".join(fmt(c[i]) for c in cols) + "\n")
    return path


def read_csv(path):
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    return header, data


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")
    return path


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def artifact_entry(path, root) -> dict:
    path = Path(path)
    return {
        "path": str(path.relative_to(root)),
        "sha256": sha256_of(path),
        "bytes": path.stat().st_size,
    }


def write_trajectory(path, traj) -> Path:
    return write_csv(path, ["t", "value"], [traj.t_grid, traj.values])


def write_field_grid(path, fg) -> Path:
    header = ["z"] + [f"m_h{h:.6f}" for h in fg.h_values]
    cols = [fg.z_grid] + [fg.samples[:, i] for i in range(fg.h_values.size)]
    return write_csv(path, header, cols)


def write_medium(path, real) -> Path:
    return write_csv(path, ["z", "nu_eps"], [real.z_mid, real.nu_eps])


def write_spectrum(path, tspec) -> Path:
    return write_csv(path, ["omega", "T_re", "T_im", "R_re", "R_im"],
                     [tspec.grid.omegas, tspec.T.real, tspec.T.imag,
                      tspec.R.real, tspec.R.imag])


def write_pulse(path, trace) -> Path:
    return write_csv(path, ["s", "value"], [trace.s_grid, trace.values])


def field_grid_manifest(fg) -> dict:
    return {
        "seed": fg.meta.get("seed"),
        "psi": fg.psi_tag,
        "h_values": [float(h) for h in fg.h_values],
        "grid": {"x_max": fg.grid_spec.x_max, "dx": fg.grid_spec.dx,
                 "refine_octaves": fg.grid_spec.refine_octaves,
                 "refine_per_octave": fg.grid_spec.refine_per_octave},
        "column_variance": [float(v) for v in fg.column_variance],
    }


def medium_manifest(spec, n_profile=256) -> dict:
    """JSON-able description of a medium spec, profiles tabulated."""
    u = np.linspace(0.0, 1.0, n_profile)
    entry = {
        "epsilon": spec.epsilon,
        "tau": spec.tau,
        "depth": spec.depth,
        "kind": spec.kind,
        "seed": list(spec.seed) if isinstance(spec.seed, tuple) else spec.seed,
        "n_slabs": spec.resolved_slabs() if spec.kind == "long_range" else spec.n_slabs,
        "truncation": {"name": spec.truncation.name,
                       **dict(spec.truncation.params)},
    }
    if spec.kind == "long_range":
        entry["hermite_rank"] = spec.rank
        entry["profiles"] = {
            "u": [float(x) for x in u],
            "gamma": [float(x) for x in spec.gamma(u)],
            "h": [float(x) for x in spec.h(u)],
            "field_index": [float(x) for x in spec.field_index(u)],
        }
    return entry
