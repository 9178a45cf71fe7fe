"""Scenario configuration: schema, defaults and validation.

Configs are YAML key-value trees with a version tag.  Validation is strict:
unknown keys, missing required keys and out-of-range values raise
:class:`ConfigError` carrying the offending key path.  All wavelength/MHz
quantities are converted to internal rad/fs units here.
"""

from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .shaper import SlmModel
from .spectral_field import (
    CrystalSpec,
    PumpSpec,
    SellmeierIndex,
    SellmeierMismatch,
    SpectralGrid,
    TaylorMismatch,
    taylor_curvature_for_bandwidth,
)

CONFIG_VERSION = 1

# Phase-matching curvature [rad/mm per (rad/fs)^2] of the default crystal
# pair.  Chosen so that the blurred joint amplitude of the default scenario
# carries about 2.6 ebits (Schmidt number about 4.9); equivalent to a
# sinc^2 singles bandwidth of roughly 61 nm around 1064 nm.
DEFAULT_TAYLOR_A2 = 23.2

EXPERIMENT_IDS = (
    "flux_check",
    "fig2_amplitude",
    "fig3_schmidt",
    "freq_bin_fringes",
    "time_bin_sweep",
    "schmidt_fringes",
    "bell_i2_sweep",
    "procrustean",
)

_EXPERIMENT_PARAMS = {
    "flux_check": {"bandwidth_nm": 105.0, "power_uw": 1.0},
    "fig2_amplitude": {"export_stride": 16},
    "fig3_schmidt": {"n_modes": 6, "n_eigenvalues": 21},
    "freq_bin_fringes": {"d": 2, "bin_width": 0.024, "bin_spacing": 0.036,
                         "phi_points": 36, "use_psf": True, "counts": False,
                         "pixelate": False},
    "time_bin_sweep": {"t1_values_fs": [0.0, 10.0, 25.0, 35.0, 50.0, 70.0, 100.0],
                       "phi_points": 48},
    "schmidt_fringes": {"d": 2, "phi_points": 36, "use_psf": True},
    "bell_i2_sweep": {"grid_points": 11},
    "procrustean": {"d": 3, "bin_widths": [0.04, 0.024, 0.015], "bin_spacing": 0.05,
                    "phi_points": 36, "use_psf": True},
}


@dataclass(frozen=True)
class CountingParams:
    peak_rate: float = 50.0        # Hz at the fringe maximum
    background_rate: float = 11.0  # Hz
    duration: float = 300.0        # s per phase point


@dataclass
class ExperimentRequest:
    id: str
    name: str
    params: dict


@dataclass
class Scenario:
    """Validated, unit-converted scenario ready to run."""

    seed: int
    output_dir: str
    grid: SpectralGrid
    pump: PumpSpec
    spdc: CrystalSpec
    sfg: CrystalSpec
    psf_delta_omega: float
    slm: SlmModel
    counting: CountingParams
    include_phase: bool = False
    experiments: list = field(default_factory=list)


def default_config() -> dict:
    """The shipped default configuration tree (all experiments)."""
    return {
        "version": CONFIG_VERSION,
        "seed": 20240901,
        "output_dir": "results",
        "grid": {"n_points": 1025, "omega_max": 0.35, "center_wavelength_nm": 1064.0},
        "pump": {"wavelength_nm": 532.0, "linewidth_mhz": 5.0},
        "crystals": {
            "spdc": {"length_mm": 11.5, "poling_period_um": 9.0},
            "sfg": {"length_mm": 11.5, "poling_period_um": 9.0},
        },
        "dispersion": {"model": "taylor", "a1": 0.0, "a2": DEFAULT_TAYLOR_A2, "a3": 0.0},
        "psf": {"delta_omega": 9.6e-3},
        "slm": {"n_pixels": 640, "pixel_width_um": 100.0, "gap_um": 3.0},
        "counting": {"peak_rate_hz": 50.0, "background_rate_hz": 11.0, "duration_s": 300.0},
        "experiments": [{"id": name} for name in EXPERIMENT_IDS],
    }


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            tree = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("<document>", f"not valid YAML: {exc}") from exc
    if not isinstance(tree, dict):
        raise ConfigError("<document>", "top level must be a mapping")
    return tree


# --- validation helpers ----------------------------------------------------


def _expect_mapping(tree, path):
    if not isinstance(tree, dict):
        raise ConfigError(path, "must be a mapping")
    return tree


def _reject_unknown(tree, known, path):
    for key in tree:
        if key not in known:
            raise ConfigError(f"{path}.{key}" if path else str(key), "unknown key")


def _get(tree, key, path, kind, default=None, required=False, minimum=None,
         exclusive_minimum=None):
    if key not in tree:
        if required:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
        return default
    value = tree[key]
    full = f"{path}.{key}" if path else key
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(full, f"expected an integer, got {value!r}")
    if not isinstance(value, kind):
        raise ConfigError(full, f"expected {kind.__name__}, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(full, f"must be >= {minimum}, got {value!r}")
    if exclusive_minimum is not None and value <= exclusive_minimum:
        raise ConfigError(full, f"must be > {exclusive_minimum}, got {value!r}")
    return value


def _float_list(tree, key, path, default):
    if key not in tree:
        return list(default)
    value = tree[key]
    full = f"{path}.{key}"
    if not isinstance(value, list) or not value:
        raise ConfigError(full, "expected a non-empty list of numbers")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{full}[{i}]", f"expected a number, got {item!r}")
        out.append(float(item))
    return out


def _parse_sellmeier_index(tree, path) -> SellmeierIndex:
    _expect_mapping(tree, path)
    _reject_unknown(tree, {"a", "terms", "d", "validity_um"}, path)
    a = _get(tree, "a", path, float, required=True)
    d = _get(tree, "d", path, float, default=0.0)
    terms = tree.get("terms", [])
    if not isinstance(terms, list):
        raise ConfigError(f"{path}.terms", "expected a list of [b, c] pairs")
    parsed = []
    for i, pair in enumerate(terms):
        if (not isinstance(pair, list)) or len(pair) != 2:
            raise ConfigError(f"{path}.terms[{i}]", "expected a [b, c] pair")
        parsed.append((float(pair[0]), float(pair[1])))
    validity = tree.get("validity_um")
    if validity is not None:
        if not isinstance(validity, list) or len(validity) != 2:
            raise ConfigError(f"{path}.validity_um", "expected [min_um, max_um]")
        validity = (float(validity[0]), float(validity[1]))
    return SellmeierIndex(a=a, terms=tuple(parsed), d=d, validity_um=validity)


def _dispersion_factory(tree, grid: SpectralGrid, path):
    """Validate the dispersion block; return a (length_mm, poling_um) -> model factory."""
    _expect_mapping(tree, path)
    model = _get(tree, "model", path, str, default="taylor")
    if model == "sellmeier":
        _reject_unknown(tree, {"model", "pump", "idler", "signal", "include_phase"}, path)
        for side in ("pump", "idler", "signal"):
            if side not in tree:
                raise ConfigError(f"{path}.{side}", "missing required key")
        shared = SellmeierMismatch(
            index_i=_parse_sellmeier_index(tree["idler"], f"{path}.idler"),
            index_s=_parse_sellmeier_index(tree["signal"], f"{path}.signal"),
            index_p=_parse_sellmeier_index(tree["pump"], f"{path}.pump"),
        )
        return lambda length_mm, poling_um: shared
    if model != "taylor":
        raise ConfigError(f"{path}.model", f"unknown dispersion model {model!r}")

    _reject_unknown(tree, {"model", "a1", "a2", "a3", "target_bandwidth_nm",
                           "include_phase"}, path)
    if "target_bandwidth_nm" in tree and "a2" in tree:
        raise ConfigError(f"{path}.a2", "give either a2 or target_bandwidth_nm, not both")
    a1 = _get(tree, "a1", path, float, default=0.0)
    a3 = _get(tree, "a3", path, float, default=0.0)
    target = _get(tree, "target_bandwidth_nm", path, float, default=None,
                  exclusive_minimum=0.0)
    a2_fixed = _get(tree, "a2", path, float, default=DEFAULT_TAYLOR_A2)

    def taylor_for(length_mm, poling_um):
        a2 = (taylor_curvature_for_bandwidth(target, grid.center_wavelength, length_mm)
              if target is not None else a2_fixed)
        return TaylorMismatch.quasi_phase_matched(poling_um, a1=a1, a2=a2, a3=a3)

    return taylor_for


def _parse_experiment(entry, index, seen_names):
    path = f"experiments[{index}]"
    _expect_mapping(entry, path)
    exp_id = _get(entry, "id", path, str, required=True)
    if exp_id not in EXPERIMENT_IDS:
        raise ConfigError(f"{path}.id", f"unknown experiment {exp_id!r}; "
                                        f"expected one of {', '.join(EXPERIMENT_IDS)}")
    defaults = _EXPERIMENT_PARAMS[exp_id]
    _reject_unknown(entry, {"id", *defaults}, path)
    params = {}
    for key, default in defaults.items():
        if isinstance(default, bool):
            value = entry.get(key, default)
            if not isinstance(value, bool):
                raise ConfigError(f"{path}.{key}", f"expected true/false, got {value!r}")
            params[key] = value
        elif isinstance(default, int):
            params[key] = _get(entry, key, path, int, default=default, minimum=1)
        elif isinstance(default, float):
            params[key] = _get(entry, key, path, float, default=default,
                               exclusive_minimum=0.0)
        elif isinstance(default, list):
            params[key] = _float_list(entry, key, path, default)
        else:  # pragma: no cover - defensive
            raise ConfigError(f"{path}.{key}", "unsupported parameter type")
    if "d" in params and params["d"] not in (2, 3, 4):
        raise ConfigError(f"{path}.d", f"dimension must be 2, 3 or 4, got {params['d']}")
    if exp_id == "procrustean" and len(params["bin_widths"]) != params["d"]:
        raise ConfigError(f"{path}.bin_widths",
                          f"need exactly d = {params['d']} widths, "
                          f"got {len(params['bin_widths'])}")

    name = exp_id if "d" not in params else f"{exp_id}_d{params['d']}"
    base, n = name, 2
    while name in seen_names:
        name = f"{base}_{n}"
        n += 1
    seen_names.add(name)
    return ExperimentRequest(id=exp_id, name=name, params=params)


def validate_config(tree: dict) -> Scenario:
    """Validate a configuration tree and build the typed scenario."""
    _expect_mapping(tree, "<document>")
    _reject_unknown(tree, {"version", "seed", "output_dir", "grid", "pump", "crystals",
                           "dispersion", "psf", "slm", "counting", "experiments"}, "")

    version = _get(tree, "version", "", int, required=True)
    if version != CONFIG_VERSION:
        raise ConfigError("version", f"unsupported config version {version}; "
                                     f"expected {CONFIG_VERSION}")
    seed = _get(tree, "seed", "", int, default=20240901, minimum=0)
    output_dir = _get(tree, "output_dir", "", str, default="results")

    g = _expect_mapping(tree.get("grid", {}), "grid")
    _reject_unknown(g, {"n_points", "omega_max", "center_wavelength_nm"}, "grid")
    n_points = _get(g, "n_points", "grid", int, default=1025, minimum=3)
    if n_points % 2 == 0:
        raise ConfigError("grid.n_points", f"must be odd, got {n_points}")
    omega_max = _get(g, "omega_max", "grid", float, default=0.35, exclusive_minimum=0.0)
    center_nm = _get(g, "center_wavelength_nm", "grid", float, default=1064.0,
                     exclusive_minimum=0.0)
    grid = SpectralGrid(n_points=n_points, omega_max=omega_max, center_wavelength=center_nm)

    p = _expect_mapping(tree.get("pump", {}), "pump")
    _reject_unknown(p, {"wavelength_nm", "linewidth_mhz"}, "pump")
    pump = PumpSpec.from_linewidth_mhz(
        _get(p, "linewidth_mhz", "pump", float, default=5.0, exclusive_minimum=0.0),
        wavelength=_get(p, "wavelength_nm", "pump", float, default=532.0,
                        exclusive_minimum=0.0),
    )

    c = _expect_mapping(tree.get("crystals", {}), "crystals")
    _reject_unknown(c, {"spdc", "sfg"}, "crystals")
    crystal_geo = {}
    for role_key in ("spdc", "sfg"):
        sub = _expect_mapping(c.get(role_key, {}), f"crystals.{role_key}")
        _reject_unknown(sub, {"length_mm", "poling_period_um"}, f"crystals.{role_key}")
        crystal_geo[role_key] = (
            _get(sub, "length_mm", f"crystals.{role_key}", float, default=11.5,
                 exclusive_minimum=0.0),
            _get(sub, "poling_period_um", f"crystals.{role_key}", float, default=9.0,
                 exclusive_minimum=0.0),
        )

    disp_tree = tree.get("dispersion", {"model": "taylor"})
    dispersion_for = _dispersion_factory(disp_tree, grid, "dispersion")
    include_phase = disp_tree.get("include_phase", False)
    if not isinstance(include_phase, bool):
        raise ConfigError("dispersion.include_phase",
                          f"expected true/false, got {include_phase!r}")

    def crystal(role_key, role):
        length, poling = crystal_geo[role_key]
        return CrystalSpec(length=length, poling_period=poling,
                           dispersion=dispersion_for(length, poling), role=role)

    psf_tree = _expect_mapping(tree.get("psf", {}), "psf")
    _reject_unknown(psf_tree, {"delta_omega"}, "psf")
    psf_width = _get(psf_tree, "delta_omega", "psf", float, default=9.6e-3, minimum=0.0)

    slm_tree = _expect_mapping(tree.get("slm", {}), "slm")
    _reject_unknown(slm_tree, {"n_pixels", "pixel_width_um", "gap_um"}, "slm")
    slm = SlmModel(
        n_pixels=_get(slm_tree, "n_pixels", "slm", int, default=640, minimum=1),
        pixel_width=_get(slm_tree, "pixel_width_um", "slm", float, default=100.0,
                         exclusive_minimum=0.0),
        gap=_get(slm_tree, "gap_um", "slm", float, default=3.0, minimum=0.0),
    )

    count_tree = _expect_mapping(tree.get("counting", {}), "counting")
    _reject_unknown(count_tree, {"peak_rate_hz", "background_rate_hz", "duration_s"},
                    "counting")
    counting = CountingParams(
        peak_rate=_get(count_tree, "peak_rate_hz", "counting", float, default=50.0,
                       minimum=0.0),
        background_rate=_get(count_tree, "background_rate_hz", "counting", float,
                             default=11.0, minimum=0.0),
        duration=_get(count_tree, "duration_s", "counting", float, default=300.0,
                      minimum=0.0),
    )

    if "experiments" not in tree:
        raise ConfigError("experiments", "missing required key")
    entries = tree["experiments"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("experiments", "expected a non-empty list")
    seen = set()
    experiments = [_parse_experiment(entry, i, seen) for i, entry in enumerate(entries)]

    return Scenario(
        seed=seed,
        output_dir=output_dir,
        grid=grid,
        pump=pump,
        spdc=crystal("spdc", "SPDC"),
        sfg=crystal("sfg", "SFG"),
        psf_delta_omega=psf_width,
        slm=slm,
        counting=counting,
        include_phase=include_phase,
        experiments=experiments,
    )
