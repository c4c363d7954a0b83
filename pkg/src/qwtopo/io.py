"""Deterministic CSV/JSON writers and state files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cavity import CavityState
from .lattice import WalkerState
from .phasespace import PhaseSpaceGrid


def fmt(x) -> str:
    """17 significant digits, locale-free."""
    return format(float(x), ".17g")


def write_csv(path, columns, rows, comments: dict | None = None) -> Path:
    """Write ``rows`` under a ``columns`` header; ``comments`` become ``# key: value`` lines."""
    path = Path(path)
    lines = [f"# {k}: {v}" for k, v in (comments or {}).items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    comments, header, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            comments[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    return comments, header, np.array(rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def grid_rows(grid: PhaseSpaceGrid):
    """Row-major ``(re, im, value[, sigma])`` rows."""
    al = grid.alphas.ravel()
    vals = grid.values.ravel()
    if grid.sigma is None:
        return [(a.real, a.imag, v) for a, v in zip(al, vals)]
    return [(a.real, a.imag, v, s) for a, v, s in zip(al, vals, grid.sigma.ravel())]


def write_grid(path, grid: PhaseSpaceGrid, extra: dict | None = None) -> Path:
    spec = grid.spec
    comments = {
        "kind": grid.kind,
        "re_range": f"{fmt(spec.re_min)} {fmt(spec.re_max)} {spec.n_re}",
        "im_range": f"{fmt(spec.im_min)} {fmt(spec.im_max)} {spec.n_im}",
        "shots": grid.shots if grid.shots is not None else "none",
        "seed": grid.seed if grid.seed is not None else "none",
        **(extra or {}),
    }
    cols = ["re_alpha", "im_alpha", grid.kind]
    if grid.sigma is not None:
        cols.append("sigma")
    return write_csv(path, cols, grid_rows(grid), comments)


# -- state files ----------------------------------------------------------------


def state_to_dict(state) -> dict:
    if isinstance(state, CavityState):
        amps = state.amplitudes
        return {
            "type": "cavity",
            "beta_ref": [state.beta_ref.real, state.beta_ref.imag],
            "re": amps.real.tolist(),
            "im": amps.imag.tolist(),
        }
    if isinstance(state, WalkerState):
        amps = state.amplitudes
        return {"type": "walker", "re": amps.real.tolist(), "im": amps.imag.tolist()}
    raise TypeError(f"cannot serialize {type(state).__name__}")


def state_from_dict(data: dict):
    try:
        amps = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        kind = data["type"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed state file: {exc}") from exc
    if kind == "cavity":
        re, im = data.get("beta_ref", [0.0, 0.0])
        return CavityState(amps, complex(re, im))
    if kind == "walker":
        return WalkerState(amps)
    raise ValueError(f"unknown state type {kind!r}")


def save_state(path, state) -> Path:
    return write_json(path, state_to_dict(state))


def load_state(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read state file {path}: {exc}") from exc
    return state_from_dict(data)
