"""Parsing of eta-grid and lattice specifications used by the CLI and configs."""

import re

import numpy as np

from .errors import InputError

_LOGSPACE = re.compile(r"^\s*logspace\(\s*([^,()]+)\s*,\s*([^,()]+)\s*,\s*([^,()]+)\s*\)\s*$")


def parse_eta_grid(text):
    """``"1,2,5"`` or ``"logspace(min,max,points)"`` -> ascending list of floats.

    ``logspace`` takes the endpoint values themselves (not exponents) and
    spaces ``points`` values evenly in log.
    """
    m = _LOGSPACE.match(text)
    if m:
        try:
            lo, hi, n = float(m.group(1)), float(m.group(2)), int(m.group(3))
        except ValueError:
            raise InputError(f"bad logspace arguments in {text!r}") from None
        if not (lo >= 1 and hi > lo and n >= 2):
            raise InputError(f"logspace needs 1 <= min < max and points >= 2, got {text!r}")
        grid = np.exp(np.linspace(np.log(lo), np.log(hi), n))
        grid[0], grid[-1] = lo, hi
        return grid.tolist()
    try:
        grid = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse eta grid {text!r}") from None
    if not grid:
        raise InputError("empty eta grid")
    if any(not np.isfinite(e) or e < 1 for e in grid):
        raise InputError("eta values must be finite and >= 1")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputError("eta grid must be strictly ascending")
    return grid


def parse_value_list(text):
    """Comma list of floats, or a ``logspace(...)`` expression."""
    if _LOGSPACE.match(text):
        return parse_eta_grid(text)
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse value list {text!r}") from None
    if not vals:
        raise InputError("empty value list")
    return vals


def parse_lattice(text):
    """``"eta=...;kappa=...;delta=..."`` -> dict of three value lists."""
    out = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise InputError(f"lattice component {part!r} must be name=values")
        name, vals = (s.strip() for s in part.split("=", 1))
        if name not in ("eta", "kappa", "delta"):
            raise InputError(f"unknown lattice axis {name!r}")
        out[name] = parse_value_list(vals)
    missing = {"eta", "kappa", "delta"} - set(out)
    if missing:
        raise InputError(f"lattice is missing axes: {', '.join(sorted(missing))}")
    return out
