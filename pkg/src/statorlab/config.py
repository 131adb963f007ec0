"""Run configuration: defaults, JSON loading, dotted-path overrides and
validated builders for the domain objects.

A run is fully described by one nested dict (sections per module).  The
CLI merges, in order: built-in defaults, the optional JSON config file,
then any ``--set section.key=value`` overrides.  Validation is complete
before any computation starts, so a bad config never leaves partial
output.
"""

from __future__ import annotations

import copy
import json
import math

from .errors import ConfigError
from .geometry import Material, StatorGeometry
from .modal import Discretization

DEFAULT_CONFIG = {
    "geometry": {
        "inner_radius": 3.75e-3,
        "outer_radius": 15.0e-3,
        "tooth_band_inner_radius": 10.0e-3,
        "fixture_radius": 6.0e-3,
        "total_height": 5.02e-3,
        "notch_count": 22,
        "notch_width": 1.59e-3,
        "notch_depth": 1.0e-3,
        "base_thickness": None,
    },
    "material": {
        "youngs_modulus": 3.2e9,
        "poisson_ratio": 0.36,
        "density": 1270.0,
        "modal_damping_ratio": 0.02,
        "damping_overrides": {},
    },
    "modal": {
        "n_min": 1,
        "n_max": 7,
        "modes_per_n": 1,
        "radial_nodes": 64,
        "quadrature_order": 6,
        "calibrate": True,
        "calibration_target_n": 1,
        "calibration_target_hz": 3680.0,
    },
    "drive": {
        "drive_frequency": "resonance",
        "peak_to_peak_voltage": 100.0,
        "force_per_volt": "auto",
        "electrode_harmonic": 4,
        "phase_layout": "quadrature",
        "duration": 8.0e-3,
        "dt": "auto",
        "damping": "settling-target",
        "target_edge_amplitude": 100e-9,
    },
    "optics": {
        "wavelength": 532e-9,
        "sensitivity_factor": "auto",
        "strobe_duty": 0.05,
        "amplitude_clip": 2e-6,
        "noise_sigma": 0.0,
    },
    "analysis": {
        "probe_radii": [10.2e-3, 12.5e-3, 15.0e-3],
        "probe_theta": 0.0,
        "circle_radius": 15.0e-3,
        "circle_count": 360,
        "strobe_offset_deg": 60.0,
        "strobe_phases_deg": [0.0, 30.0, 60.0, 90.0, 120.0, 150.0],
        "settling_band": 0.05,
        "settling_time_target": 3.4e-3,
    },
    "image": {
        "pixels": 256,
        "margin": 1.05,
    },
    "output": {
        "directory": "statorlab-out",
    },
    "seed": 20230425,
}


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def load_config(path) -> dict:
    """Parse a JSON config file into a plain dict.

    Parse failures surface as ConfigError with the file, line and column.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object at top level")
    return data


def deep_merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; override wins, sections merge key-wise."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def apply_overrides(cfg: dict, assignments) -> dict:
    """Apply ``section.key=value`` strings; values parse as JSON literals.

    Unparseable values pass through as strings, so
    ``--set drive.phase_layout=single`` works without extra quoting.
    """
    out = copy.deepcopy(cfg)
    for item in assignments or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                node[part] = nxt
            node = nxt
        node[parts[-1]] = value
    return out


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} missing or not an object")
    return sec


def _check_keys(name: str, sec: dict, allowed):
    unknown = sorted(set(sec) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in section {name!r}: {', '.join(unknown)}")


def _num(name: str, sec: dict, key: str, positive=True, minimum=None,
         maximum=None, allow=()):
    value = sec.get(key)
    if isinstance(value, str) and value in allow:
        return value
    if value is None and None in allow:
        return None
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{name}.{key}: expected a number, got {value!r}")
    value = float(value)
    if positive and value <= 0.0:
        raise ConfigError(f"{name}.{key}: must be positive, got {value}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{name}.{key}: must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{name}.{key}: must be <= {maximum}, got {value}")
    return value


def _int(name: str, sec: dict, key: str, minimum=0):
    value = sec.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{name}.{key}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name}.{key}: must be >= {minimum}, got {value}")
    return value


GEOMETRY_KEYS = ("inner_radius", "outer_radius", "tooth_band_inner_radius",
                 "fixture_radius", "total_height", "notch_count",
                 "notch_width", "notch_depth", "base_thickness")


def build_geometry(cfg: dict) -> StatorGeometry:
    sec = _section(cfg, "geometry")
    _check_keys("geometry", sec, GEOMETRY_KEYS)
    kwargs = {}
    for key in GEOMETRY_KEYS:
        if key == "notch_count":
            kwargs[key] = _int("geometry", sec, key, minimum=0)
        elif key == "base_thickness":
            kwargs[key] = _num("geometry", sec, key, allow=(None,))
        else:
            kwargs[key] = _num("geometry", sec, key)
    return StatorGeometry(**kwargs)


MATERIAL_KEYS = ("youngs_modulus", "poisson_ratio", "density",
                 "modal_damping_ratio", "damping_overrides")


def build_material(cfg: dict) -> Material:
    sec = _section(cfg, "material")
    _check_keys("material", sec, MATERIAL_KEYS)
    overrides_raw = sec.get("damping_overrides") or {}
    if not isinstance(overrides_raw, dict):
        raise ConfigError("material.damping_overrides: expected an object "
                          "mapping harmonic -> damping ratio")
    overrides = {}
    for key, value in overrides_raw.items():
        try:
            harmonic = int(key)
        except (TypeError, ValueError):
            raise ConfigError(
                f"material.damping_overrides: harmonic key {key!r} is not "
                "an integer") from None
        if not isinstance(value, (int, float)) or not 0.0 < float(value) < 1.0:
            raise ConfigError(
                f"material.damping_overrides[{key}]: damping ratio must be "
                f"in (0, 1), got {value!r}")
        overrides[harmonic] = float(value)
    return Material(
        youngs_modulus=_num("material", sec, "youngs_modulus"),
        poisson_ratio=_num("material", sec, "poisson_ratio", positive=False,
                           minimum=0.0, maximum=0.5),
        density=_num("material", sec, "density"),
        modal_damping_ratio=_num("material", sec, "modal_damping_ratio",
                                 positive=False, minimum=0.0, maximum=0.999),
        damping_overrides=overrides or None,
    )


MODAL_KEYS = ("n_min", "n_max", "modes_per_n", "radial_nodes",
              "quadrature_order", "calibrate", "calibration_target_n",
              "calibration_target_hz")


def build_modal_plan(cfg: dict) -> dict:
    sec = _section(cfg, "modal")
    _check_keys("modal", sec, MODAL_KEYS)
    plan = {
        "n_min": _int("modal", sec, "n_min", minimum=0),
        "n_max": _int("modal", sec, "n_max", minimum=0),
        "modes_per_n": _int("modal", sec, "modes_per_n", minimum=1),
        "discretization": Discretization(
            radial_nodes=_int("modal", sec, "radial_nodes", minimum=8),
            quadrature_order=_int("modal", sec, "quadrature_order", minimum=4)),
        "calibrate": sec.get("calibrate"),
        "calibration_target_n": _int("modal", sec, "calibration_target_n",
                                     minimum=0),
        "calibration_target_hz": _num("modal", sec, "calibration_target_hz"),
    }
    if not isinstance(plan["calibrate"], bool):
        raise ConfigError(
            f"modal.calibrate: expected true/false, got {plan['calibrate']!r}")
    if plan["n_max"] < plan["n_min"]:
        raise ConfigError(
            f"modal.n_max ({plan['n_max']}) must be >= modal.n_min "
            f"({plan['n_min']})")
    return plan


DRIVE_KEYS = ("drive_frequency", "peak_to_peak_voltage", "force_per_volt",
              "electrode_harmonic", "phase_layout", "duration", "dt",
              "damping", "target_edge_amplitude")


def build_drive_plan(cfg: dict) -> dict:
    sec = _section(cfg, "drive")
    _check_keys("drive", sec, DRIVE_KEYS)
    layout = sec.get("phase_layout")
    if layout not in ("quadrature", "single"):
        raise ConfigError(
            f"drive.phase_layout: expected 'quadrature' or 'single', got "
            f"{layout!r}")
    damping = sec.get("damping")
    if damping not in ("settling-target", "material"):
        if not isinstance(damping, (int, float)) or isinstance(damping, bool) \
                or not 0.0 < float(damping) < 1.0:
            raise ConfigError(
                "drive.damping: expected 'settling-target', 'material' or a "
                f"ratio in (0, 1), got {damping!r}")
        damping = float(damping)
    return {
        "drive_frequency": _num("drive", sec, "drive_frequency",
                                allow=("resonance",)),
        "peak_to_peak_voltage": _num("drive", sec, "peak_to_peak_voltage"),
        "force_per_volt": _num("drive", sec, "force_per_volt",
                               positive=False, minimum=0.0, allow=("auto",)),
        "electrode_harmonic": _int("drive", sec, "electrode_harmonic",
                                   minimum=1),
        "phase_layout": layout,
        "duration": _num("drive", sec, "duration"),
        "dt": _num("drive", sec, "dt", allow=("auto",)),
        "damping": damping,
        "target_edge_amplitude": _num("drive", sec, "target_edge_amplitude"),
    }


OPTICS_KEYS = ("wavelength", "sensitivity_factor", "strobe_duty",
               "amplitude_clip", "noise_sigma")


def build_optics_plan(cfg: dict) -> dict:
    sec = _section(cfg, "optics")
    _check_keys("optics", sec, OPTICS_KEYS)
    sens = _num("optics", sec, "sensitivity_factor", allow=("auto",))
    return {
        "wavelength": _num("optics", sec, "wavelength"),
        "sensitivity_factor": None if sens == "auto" else sens,
        "strobe_duty": _num("optics", sec, "strobe_duty", maximum=0.2),
        "amplitude_clip": _num("optics", sec, "amplitude_clip"),
        "noise_sigma": _num("optics", sec, "noise_sigma", positive=False,
                            minimum=0.0),
    }


ANALYSIS_KEYS = ("probe_radii", "probe_theta", "circle_radius",
                 "circle_count", "strobe_offset_deg", "strobe_phases_deg",
                 "settling_band", "settling_time_target")


def build_analysis_plan(cfg: dict) -> dict:
    sec = _section(cfg, "analysis")
    _check_keys("analysis", sec, ANALYSIS_KEYS)
    radii = sec.get("probe_radii")
    if (not isinstance(radii, (list, tuple)) or not radii
            or not all(isinstance(r, (int, float)) and r > 0 for r in radii)):
        raise ConfigError(
            "analysis.probe_radii: expected a non-empty list of positive "
            f"radii, got {radii!r}")
    phases = sec.get("strobe_phases_deg")
    if (not isinstance(phases, (list, tuple)) or len(phases) < 1
            or not all(isinstance(p, (int, float)) for p in phases)):
        raise ConfigError(
            "analysis.strobe_phases_deg: expected a list of strobe phases "
            f"in degrees, got {phases!r}")
    theta = sec.get("probe_theta")
    if not isinstance(theta, (int, float)) or isinstance(theta, bool):
        raise ConfigError(
            f"analysis.probe_theta: expected a number, got {theta!r}")
    return {
        "probe_radii": [float(r) for r in radii],
        "probe_theta": float(theta),
        "circle_radius": _num("analysis", sec, "circle_radius"),
        "circle_count": _int("analysis", sec, "circle_count", minimum=8),
        "strobe_offset_deg": _num("analysis", sec, "strobe_offset_deg"),
        "strobe_phases_deg": [float(p) for p in phases],
        "settling_band": _num("analysis", sec, "settling_band", maximum=0.5),
        "settling_time_target": _num("analysis", sec, "settling_time_target"),
    }


IMAGE_KEYS = ("pixels", "margin")


def build_image_plan(cfg: dict) -> dict:
    sec = _section(cfg, "image")
    _check_keys("image", sec, IMAGE_KEYS)
    return {
        "pixels": _int("image", sec, "pixels", minimum=16),
        "margin": _num("image", sec, "margin", minimum=1.0),
    }


def build_seed(cfg: dict) -> int:
    seed = cfg.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed: expected a non-negative integer, got {seed!r}")
    return seed


def build_output_dir(cfg: dict) -> str:
    sec = _section(cfg, "output")
    _check_keys("output", sec, ("directory",))
    directory = sec.get("directory")
    if not isinstance(directory, str) or not directory:
        raise ConfigError(
            f"output.directory: expected a non-empty path, got {directory!r}")
    return directory


def validate_config(cfg: dict) -> dict:
    """Build every typed object/plan up front; raises ConfigError on any
    problem so commands never start computing from a bad config."""
    known = {"geometry", "material", "modal", "drive", "optics", "analysis",
             "image", "output", "seed"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
    geometry = build_geometry(cfg)
    material = build_material(cfg)
    plan = {
        "geometry": geometry,
        "material": material,
        "modal": build_modal_plan(cfg),
        "drive": build_drive_plan(cfg),
        "optics": build_optics_plan(cfg),
        "analysis": build_analysis_plan(cfg),
        "image": build_image_plan(cfg),
        "output_dir": build_output_dir(cfg),
        "seed": build_seed(cfg),
    }
    rim = geometry.outer_radius
    for r in plan["analysis"]["probe_radii"]:
        if r > rim * (1 + 1e-12):
            raise ConfigError(
                f"analysis.probe_radii: {r} lies outside the stator "
                f"(outer radius {rim})")
    if not math.isfinite(plan["analysis"]["circle_radius"]) \
            or plan["analysis"]["circle_radius"] > rim * (1 + 1e-12):
        raise ConfigError(
            f"analysis.circle_radius: {plan['analysis']['circle_radius']} "
            f"lies outside the stator (outer radius {rim})")
    return plan
