"""Experiment configs: TOML tables of key-value pairs, fully deterministic."""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:                       # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import domain, kernels
from .errors import ConfigError


def _req(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"[{where}] missing required key {key!r}")
    return table[key]


# -- named density / profile expressions ------------------------------------

def make_density(name: str, params: dict):
    if name in ("one", "constant"):
        value = float(params.get("value", 1.0))
        return lambda pts: np.full(np.asarray(pts).shape[:-1], value)
    if name == "gaussian":
        center = np.asarray(params.get("center", [0.0, 0.0]), dtype=float)
        width = float(params.get("width", 0.25))
        amplitude = float(params.get("amplitude", 1.0))

        def dens(pts):
            pts = np.asarray(pts, dtype=float)
            r2 = np.sum((pts - center) ** 2, axis=-1)
            return amplitude * np.exp(-r2 / (2.0 * width**2))

        return dens
    raise ConfigError(f"unknown density expression {name!r}")


def make_profile(name: str, lam: float, Lam: float):
    if name in ("one", "constant"):
        mid = 0.5 * (lam + Lam)
        return lambda r: np.full(np.shape(r), mid)
    if name == "oscillating":
        def prof(r):
            r = np.asarray(r, dtype=float)
            return lam + 0.5 * (Lam - lam) * (1.0 + np.sin(np.log(np.maximum(r, 1e-300))))
        return prof
    raise ConfigError(f"unknown radial profile {name!r}")


# -- section parsers ---------------------------------------------------------

def parse_kernel(table: dict) -> kernels.KernelSpec:
    family = _req(table, "family", "kernel")
    n = int(_req(table, "n", "kernel"))
    try:
        if family == "fractional-laplacian":
            return kernels.fractional_laplacian_kernel(n, float(_req(table, "s", "kernel")))
        if family == "comparable-radial":
            lam = float(_req(table, "lambda", "kernel"))
            Lam = float(_req(table, "Lambda", "kernel"))
            prof = make_profile(table.get("profile", "one"), lam, Lam)
            return kernels.comparable_radial_kernel(
                n, float(_req(table, "s", "kernel")), prof, lam, Lam)
        if family == "alpha-stable":
            alpha = float(table["alpha"]) if "alpha" in table else 2.0 * float(
                _req(table, "s", "kernel"))
            aniso = table.get("anisotropy", [1.0])
            return kernels.alpha_stable_kernel(n, alpha, aniso)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[kernel] invalid parameters: {exc}") from exc
    raise ConfigError(f"[kernel] unknown family {family!r}")


def parse_shape(table: dict) -> domain.DomainShape:
    kind = _req(table, "shape", "domain")
    try:
        if kind == "ball":
            return domain.Ball(center=table.get("center", [0.0, 0.0]),
                               radius=float(_req(table, "radius", "domain")))
        if kind == "box":
            return domain.Box(lo=_req(table, "lo", "domain"),
                              hi=_req(table, "hi", "domain"))
        if kind == "annulus":
            return domain.Annulus(center=table.get("center", [0.0, 0.0]),
                                  r_in=float(_req(table, "r_in", "domain")),
                                  r_out=float(_req(table, "r_out", "domain")))
        if kind == "l-shape":
            return domain.LShape(lo=_req(table, "lo", "domain"),
                                 hi=_req(table, "hi", "domain"))
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[domain] invalid parameters: {exc}") from exc
    raise ConfigError(f"[domain] unknown shape {kind!r}")


def parse_measure(table: dict):
    from .measures import RadonMeasure

    atoms = []
    for row in table.get("atoms", []):
        row = list(row)
        if len(row) < 2:
            raise ConfigError("[measure] atom rows are [x..., mass]")
        atoms.append((np.asarray(row[:-1], dtype=float), float(row[-1])))
    density = None
    if "density" in table:
        density = make_density(table["density"], table.get("density_params", {}))
    return RadonMeasure(atoms=tuple(atoms), density=density)


@dataclass
class ExperimentConfig:
    """Resolved experiment configuration (one TOML file)."""

    raw: dict
    path: Optional[str] = None
    seed: int = 0
    out_dir: str = "out"
    kernel: Optional[kernels.KernelSpec] = None
    shape: Optional[domain.DomainShape] = None
    grid_n_across: int = 64
    grid_pad: float = 0.5
    solver_tol: float = 1e-10
    solver_max_iter: int = 10_000
    sections: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    def measure(self):
        return parse_measure(self.raw.get("measure", {}))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    cfg = ExperimentConfig(raw=raw, path=str(path))
    cfg.seed = int(raw.get("seed", 0))
    cfg.out_dir = str(raw.get("out", "out"))
    if "kernel" in raw:
        cfg.kernel = parse_kernel(raw["kernel"])
    if "domain" in raw:
        cfg.shape = parse_shape(raw["domain"])
    g = raw.get("grid", {})
    cfg.grid_n_across = int(g.get("n_across", 64))
    cfg.grid_pad = float(g.get("pad", 0.5))
    s = raw.get("solver", {})
    cfg.solver_tol = float(s.get("tol", 1e-10))
    cfg.solver_max_iter = int(s.get("max_iter", 10_000))
    return cfg
