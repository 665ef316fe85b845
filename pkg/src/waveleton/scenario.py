"""Scenario files: schema validation, defaults, and construction of run inputs."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .diagnostics import ClassifyConfig, field_from_coefficients
from .errors import AliasingError, CFLError, ShapeError, WaveletonError
from .moyal import DynamicsConfig, Potential, check_cfl
from .wavelets import daubechies_filter
from .wigner import PhaseSpaceField, cat_state, gaussian_state, packet_state, wigner_of_state


class ScenarioError(WaveletonError, ValueError):
    """Invalid scenario; ``path`` is the dotted location of the offending entry."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


def load_schema() -> dict:
    text = resources.files("waveleton").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("waveleton").joinpath("scenarios")
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def resolve_path(name_or_path) -> Path:
    """A filesystem path, or the name of a bundled scenario (with or without .json)."""
    p = Path(name_or_path)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    bundled = bundled_scenarios()
    if p.parent == Path(".") and stem in bundled:
        return bundled[stem]
    raise FileNotFoundError(str(name_or_path))


def _fill_defaults(node: dict, schema: dict) -> dict:
    out = dict(node)
    props = schema.get("properties", {})
    if "oneOf" in schema and "kind" in out:
        for branch in schema["oneOf"]:
            if branch["properties"]["kind"].get("const") == out["kind"]:
                props = branch["properties"]
    for key, sub in props.items():
        if key not in out and "default" in sub:
            out[key] = copy.deepcopy(sub["default"])
        if isinstance(out.get(key), dict) and (sub.get("properties") or sub.get("oneOf")):
            out[key] = _fill_defaults(out[key], sub)
    return out


def _path(err: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in err.absolute_path)


def validate(raw: dict) -> dict:
    """Schema check, then defaults, then cross-field rules; returns the resolved config."""
    schema = load_schema()
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(list(e.absolute_path)), str(e.message)))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ScenarioError(err.message, _path(err) or "<root>")
    cfg = _fill_defaults(raw, schema)
    g = cfg["grid"]
    for key in ("nq", "np"):
        n = g[key]
        if n & (n - 1):
            raise ScenarioError(f"grid size {n} is not a power of two", f"grid.{key}")
    for key in ("q_extent", "p_extent"):
        if not g[key][1] > g[key][0]:
            raise ScenarioError("extent must be increasing", f"grid.{key}")
    st = cfg["state"]
    if st["kind"] == "packets" and len(st["atoms"]) != len(st["weights"]):
        raise ScenarioError("one weight per atom is required", "state.weights")
    return cfg


def load(path) -> dict:
    p = resolve_path(path)
    with open(p) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON ({exc.msg} at line {exc.lineno})", "<root>") from exc
    return validate(raw)


@dataclass(frozen=True, eq=False)
class Scenario:
    config: dict

    @classmethod
    def from_file(cls, path) -> "Scenario":
        return cls(load(path))

    @classmethod
    def from_dict(cls, raw: dict) -> "Scenario":
        return cls(validate(raw))

    @property
    def name(self) -> str:
        return self.config["name"]

    def potential(self) -> Potential:
        return Potential(tuple(self.config["potential"]["coefficients"]))

    def dynamics(self, stride: int | None = None, backend: str | None = None) -> DynamicsConfig:
        d = self.config["dynamics"]
        return DynamicsConfig(
            mass=d["mass"], hbar=d["hbar"], truncation=d["truncation"], dt=d["dt"], t_final=d["t_final"],
            scheme=d["scheme"], stride=stride or self.config["output"]["stride"],
            backend=backend or d["backend"], wavelet_order=d["wavelet_order"], cfl=d["cfl"])

    def classify_config(self) -> ClassifyConfig:
        d = self.config["diagnostics"]
        return ClassifyConfig(d["entropy_max"], d["participation_max"], d["chaos_margin"], d["negativity_min"],
                              d["filter_order"], d["analysis_levels"], d["energy_fraction"])

    def initial_field(self) -> PhaseSpaceField:
        g, st, w = self.config["grid"], self.config["state"], self.config["wigner"]
        d = self.config["dynamics"]
        qx, px = tuple(g["q_extent"]), tuple(g["p_extent"])
        hbar, mass = d["hbar"], d["mass"]
        kind = st["kind"]
        if kind == "random_coefficients":
            rng = np.random.default_rng(st["seed"])
            shape = (g["nq"], g["np"])
            c = rng.uniform(-1, 1, shape) if st["distribution"] == "uniform" else rng.standard_normal(shape)
            template = PhaseSpaceField(np.zeros(shape), qx, px, hbar, mass)
            return field_from_coefficients(c, template, daubechies_filter(st["filter"]), st["levels"])
        if kind == "gaussian":
            psi = gaussian_state(g["nq"], qx, st["sigma"], st["q0"], st["p0"], hbar)
        elif kind == "cat":
            psi = cat_state(g["nq"], qx, st["a"], st["sigma"], hbar)
        else:
            try:
                psi = packet_state(st["atoms"], st["weights"], daubechies_filter(st["filter"]), g["nq"], qx,
                                   st["top_level"])
            except (ShapeError, ValueError) as exc:
                raise ScenarioError(str(exc), "state.atoms") from exc
        try:
            return wigner_of_state(psi, g["np"], px, hbar=hbar, mass=mass, y_window=w["y_window"],
                                   edge_tol=w["edge_tol"])
        except AliasingError as exc:
            raise ScenarioError(str(exc), "grid.p_extent") from exc

    def check(self, field: PhaseSpaceField, dynamics: DynamicsConfig) -> None:
        """Cross-field numerical rules that need the grid (CFL)."""
        if not self.config["dynamics"]["enabled"]:
            return
        try:
            check_cfl(field, self.potential(), dynamics)
        except CFLError as exc:
            raise ScenarioError(str(exc), exc.field) from exc
