r"""
Run configurations: a versioned YAML document describing one or more labeled scenarios plus the options of the command that consumes them.

Validation errors raise :class:`ConfigError` with the dotted path of the offending field and, when the document came from YAML text, its line number.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np
import yaml

from .analytic import CancellationPolicy
from .constants import unit_ball
from .fading import Composite, LogNormal, Nakagami, NoFading, Rayleigh, Rice, Weibull
from .filtering import CosPower, Isotropic, Sector, Tabulated
from .pointfield import RadialPiecewise, RadialPowerLaw, UniformDensity
from .propagation import LinkParams, r_of_inr
from .simulator import Scenario
from .utils import db_grid

logger = logging.getLogger(__name__)

VERSION = 1
FORMATS = ("csv", "records")


class ConfigError(ValueError):
    r"""
    Invalid configuration.

    Args:
        message (str): what is wrong
        path (str): dotted path of the field, e.g. ``scenarios[1].density.rho0``
        line (int): 1-based line in the YAML source, if known
    """

    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self):
        text = self.message if not self.path else "{:}: {:}".format(self.path, self.message)
        if self.line is not None:
            text += " (line {:})".format(self.line)
        return text


@dataclass(frozen=True)
class GridSpec:
    r"""
    Inclusive dB grid ``start:stop:step``.
    """

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid step must be positive, got {:}".format(self.step))
        if not self.start < self.stop:
            raise ValueError(
                "grid start ({:}) must be smaller than stop ({:})".format(self.start, self.stop)
            )

    @classmethod
    def from_string(cls, text):
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("grid must read START:STOP:STEP, got {:}".format(text))
        return cls(*(float(p) for p in parts))

    @property
    def values(self):
        return db_grid(self.start, self.stop, self.step)

    def to_dict(self):
        return {"start": self.start, "stop": self.stop, "step": self.step}


@dataclass
class RunConfig:
    r"""
    Everything a command needs: the scenarios and the command options.
    """

    scenarios: List[Scenario]
    grid: GridSpec = field(default_factory=lambda: GridSpec(0.0, 60.0, 2.0))
    x_grid: Optional[GridSpec] = None
    epsilon: List[float] = field(default_factory=lambda: [0.1, 0.01, 0.001])
    gamma_db: List[float] = field(default_factory=lambda: [20.0, 40.0, 60.0, 80.0])
    d_db: float = 0.0
    q_factor: Optional[List[float]] = None
    dominance: bool = False
    retain: int = 0
    workers: int = 1
    output_path: Optional[str] = None
    output_format: str = "csv"

    @property
    def dominance_grid(self):
        return self.x_grid if self.x_grid is not None else self.grid


# YAML 1.1 reads "1e-10" as a string; it is accepted as a number here
def _is_number(value):
    return isinstance(value, (int, float, np.floating, np.integer)) and not isinstance(
        value, bool
    )


class _Parser:
    def __init__(self, lines=None, base_dir="."):
        self.lines = lines or {}
        self.base_dir = base_dir

    def error(self, path, message):
        line = None
        key = path
        while key:
            if key in self.lines:
                line = self.lines[key]
                break
            key = key.rsplit(".", 1)[0] if "." in key else ""
        return ConfigError(message, path, line)

    def number(self, value, path):
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                raise self.error(path, "expected a number, got {!r}".format(value))
        if not _is_number(value):
            raise self.error(path, "expected a number, got {!r}".format(value))
        return float(value)

    def integer(self, value, path):
        number = self.number(value, path)
        if number != int(number):
            raise self.error(path, "expected an integer, got {!r}".format(value))
        return int(number)

    def numbers(self, value, path):
        if not isinstance(value, list):
            value = [value]
        return [self.number(v, "{:}[{:}]".format(path, i)) for i, v in enumerate(value)]

    def mapping(self, doc, path, allowed):
        if not isinstance(doc, dict):
            raise self.error(path, "expected a mapping, got {!r}".format(doc))
        unknown = set(doc) - set(allowed)
        if unknown:
            key = sorted(map(str, unknown))[0]
            raise self.error(_join(path, key), "unknown field")
        return doc

    def build(self, path, constructor, *args, **kwargs):
        try:
            return constructor(*args, **kwargs)
        except ValueError as e:
            raise self.error(path, str(e))

    def grid(self, value, path):
        if isinstance(value, str):
            try:
                return GridSpec.from_string(value)
            except ValueError as e:
                raise self.error(path, str(e))
        doc = self.mapping(value, path, ("start", "stop", "step"))
        for key in ("start", "stop", "step"):
            if key not in doc:
                raise self.error(_join(path, key), "missing field")
        return self.build(
            path,
            GridSpec,
            *(self.number(doc[k], _join(path, k)) for k in ("start", "stop", "step"))
        )

    def link(self, doc, path):
        doc = self.mapping(doc, path, ("nu", "a_nu", "p_t", "p_0", "g_t", "g_r"))
        if "nu" not in doc:
            raise self.error(_join(path, "nu"), "missing field")
        values = {k: self.number(v, _join(path, k)) for k, v in doc.items()}
        return self.build(path, LinkParams, **values)

    def density(self, doc, path, m, params):
        doc = self.mapping(
            doc, path, ("kind", "rho0", "n_max", "beta", "r_ref", "breakpoints", "levels")
        )
        kind = doc.get("kind", "uniform")
        if kind == "uniform":
            if ("rho0" in doc) == ("n_max" in doc):
                raise self.error(path, "give exactly one of rho0 and n_max")
            if "n_max" in doc:
                n_max = self.number(doc["n_max"], _join(path, "n_max"))
                return self.build(path, _uniform_n_max, n_max, params, m)
            return self.build(path, UniformDensity, self.number(doc["rho0"], _join(path, "rho0")))
        if kind == "power_law":
            return self.build(
                path,
                RadialPowerLaw,
                self.number(doc.get("rho0"), _join(path, "rho0")),
                self.number(doc.get("beta"), _join(path, "beta")),
                self.number(doc.get("r_ref", 1.0), _join(path, "r_ref")),
            )
        if kind == "piecewise":
            return self.build(
                path,
                RadialPiecewise,
                self.numbers(doc.get("breakpoints", []), _join(path, "breakpoints")),
                self.numbers(doc.get("levels", []), _join(path, "levels")),
            )
        raise self.error(_join(path, "kind"), "unknown density kind {!r}".format(kind))

    def policy(self, doc, path):
        doc = self.mapping(doc, path, ("kind", "k", "alpha"))
        kind = doc.get("kind", "none")
        if kind not in CancellationPolicy.kinds:
            raise self.error(_join(path, "kind"), "unknown policy kind {!r}".format(kind))
        k = self.integer(doc.get("k", 1), _join(path, "k"))
        alpha = self.number(doc.get("alpha", 1.0), _join(path, "alpha"))
        policy = self.build(path, CancellationPolicy, kind, k, alpha)
        try:
            policy._check_alpha()
        except ValueError as e:
            raise self.error(_join(path, "alpha"), str(e))
        return policy

    def fading(self, doc, path):
        doc = self.mapping(doc, path, ("kind", "sigma", "sigma_db", "m", "shape", "k_factor"))
        kind = doc.get("kind", "none")

        def value(key):
            if key not in doc:
                raise self.error(_join(path, key), "missing field for {:} fading".format(kind))
            return self.number(doc[key], _join(path, key))

        if kind == "none":
            return NoFading()
        if kind == "rayleigh":
            return Rayleigh()
        if kind in ("lognormal", "composite"):
            cls = LogNormal if kind == "lognormal" else Composite
            if "sigma_db" in doc:
                return self.build(path, cls.from_db, value("sigma_db"))
            return self.build(path, cls, value("sigma"))
        if kind == "nakagami":
            return self.build(path, Nakagami, value("m"))
        if kind == "weibull":
            return self.build(path, Weibull, value("shape"))
        if kind == "rice":
            return self.build(path, Rice, value("k_factor"))
        raise self.error(_join(path, "kind"), "unknown fading kind {!r}".format(kind))

    def filter(self, doc, path):
        doc = self.mapping(
            doc, path, ("kind", "p", "backlobe", "n", "path", "z", "gain", "weights")
        )
        kind = doc.get("kind", "isotropic")
        if kind == "isotropic":
            return Isotropic()
        if kind == "sector":
            return self.build(
                path,
                Sector,
                self.number(doc.get("p"), _join(path, "p")),
                self.number(doc.get("backlobe", 0.0), _join(path, "backlobe")),
            )
        if kind == "cos_power":
            return self.build(path, CosPower, self.number(doc.get("n"), _join(path, "n")))
        if kind == "tabulated":
            if "path" in doc:
                table = os.path.join(self.base_dir, str(doc["path"]))
                if not os.path.isfile(table):
                    raise self.error(_join(path, "path"), "no such file {:}".format(table))
                return self.build(path, Tabulated.from_file, table)
            weights = doc.get("weights")
            if weights is not None:
                weights = self.numbers(weights, _join(path, "weights"))
            return self.build(
                path,
                Tabulated,
                self.numbers(doc.get("z", []), _join(path, "z")),
                self.numbers(doc.get("gain", []), _join(path, "gain")),
                weights,
            )
        raise self.error(_join(path, "kind"), "unknown filter kind {!r}".format(kind))

    def scenario(self, doc, path, label):
        doc = self.mapping(
            doc,
            path,
            (
                "label",
                "dimension",
                "link",
                "density",
                "policy",
                "fading",
                "filter",
                "region_multiplier",
                "fixed_count",
                "trials",
                "master_seed",
            ),
        )
        m = self.integer(doc.get("dimension", 2), _join(path, "dimension"))
        if m not in unit_ball:
            raise self.error(_join(path, "dimension"), "dimension must be 1, 2 or 3")
        if "link" not in doc:
            raise self.error(_join(path, "link"), "missing field")
        if "density" not in doc:
            raise self.error(_join(path, "density"), "missing field")
        params = self.link(doc["link"], _join(path, "link"))

        kwargs = dict(
            m=m,
            params=params,
            density=self.density(doc["density"], _join(path, "density"), m, params),
            policy=self.policy(doc.get("policy", {}), _join(path, "policy")),
            fading=self.fading(doc.get("fading", {}), _join(path, "fading")),
            filter=self.filter(doc.get("filter", {}), _join(path, "filter")),
            region_multiplier=self.number(
                doc.get("region_multiplier", 1.0), _join(path, "region_multiplier")
            ),
            trials=self.integer(doc.get("trials", 1000000), _join(path, "trials")),
            master_seed=self.integer(doc.get("master_seed", 0), _join(path, "master_seed")),
            label=str(doc.get("label", label)),
        )
        if doc.get("fixed_count") is not None:
            kwargs["fixed_count"] = self.integer(doc["fixed_count"], _join(path, "fixed_count"))
        return self.build(path, Scenario, **kwargs)

    def run_config(self, doc):
        doc = self.mapping(
            doc,
            "",
            (
                "version",
                "scenario",
                "scenarios",
                "grid",
                "x_grid",
                "epsilon",
                "gamma_db",
                "d_db",
                "q_factor",
                "dominance",
                "retain",
                "workers",
                "output",
            ),
        )
        if doc.get("version") != VERSION:
            raise self.error("version", "expected version {:}, got {!r}".format(VERSION, doc.get("version")))

        if ("scenario" in doc) == ("scenarios" in doc):
            raise self.error("scenarios", "give exactly one of scenario and scenarios")
        if "scenario" in doc:
            scenarios = [self.scenario(doc["scenario"], "scenario", "default")]
        else:
            items = doc["scenarios"]
            if not isinstance(items, list) or not items:
                raise self.error("scenarios", "expected a nonempty list")
            scenarios = [
                self.scenario(s, "scenarios[{:}]".format(i), "scenario{:}".format(i))
                for i, s in enumerate(items)
            ]
        labels = [s.label for s in scenarios]
        if len(set(labels)) != len(labels):
            raise self.error("scenarios", "scenario labels must be unique")

        config = RunConfig(scenarios=scenarios)
        if "grid" in doc:
            config.grid = self.grid(doc["grid"], "grid")
        if doc.get("x_grid") is not None:
            config.x_grid = self.grid(doc["x_grid"], "x_grid")
        if "epsilon" in doc:
            config.epsilon = self.numbers(doc["epsilon"], "epsilon")
            for i, eps in enumerate(config.epsilon):
                if not 0 < eps < 1:
                    raise self.error("epsilon[{:}]".format(i), "epsilon must lie in (0, 1)")
        if "gamma_db" in doc:
            config.gamma_db = self.numbers(doc["gamma_db"], "gamma_db")
        if "d_db" in doc:
            config.d_db = self.number(doc["d_db"], "d_db")
        if doc.get("q_factor") is not None:
            config.q_factor = self.numbers(doc["q_factor"], "q_factor")
            if any(q < 1 for q in config.q_factor):
                raise self.error("q_factor", "Q must be at least 1")
        if "dominance" in doc:
            if not isinstance(doc["dominance"], bool):
                raise self.error("dominance", "expected true or false")
            config.dominance = doc["dominance"]
        if "retain" in doc:
            config.retain = self.integer(doc["retain"], "retain")
            if config.retain < 0:
                raise self.error("retain", "must be nonnegative")
        if "workers" in doc:
            config.workers = self.integer(doc["workers"], "workers")
            if config.workers < 1:
                raise self.error("workers", "must be at least 1")
        if "output" in doc:
            output = self.mapping(doc["output"], "output", ("path", "format"))
            if output.get("path") is not None:
                config.output_path = str(output["path"])
            if "format" in output:
                if output["format"] not in FORMATS:
                    raise self.error("output.format", "format must be one of {:}".format(FORMATS))
                config.output_format = output["format"]
        return config


def _join(path, key):
    return "{:}.{:}".format(path, key) if path else str(key)


def _line_index(node, path, index):
    index[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            _line_index(value, _join(path, key.value), index)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _line_index(item, "{:}[{:}]".format(path, i), index)


def from_dict(doc, base_dir="."):
    r"""
    Build a :class:`RunConfig` from an already-parsed document.
    """
    return _Parser(base_dir=base_dir).run_config(doc)


def parse(text, base_dir="."):
    r"""
    Parse YAML text into a :class:`RunConfig`.

    Args:
        text (str): YAML document
        base_dir (str): directory that relative table paths are resolved against

    Raises:
        ConfigError: on YAML syntax errors and schema violations
    """
    try:
        doc = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError("invalid YAML: {:}".format(getattr(e, "problem", e)), line=line)
    lines = {}
    if root is not None:
        _line_index(root, "", lines)
    return _Parser(lines, base_dir).run_config(doc)


def load(path):
    r"""
    Read a YAML run configuration from a file.
    """
    if not os.path.isfile(path):
        raise ConfigError("no such config file {:}".format(path))
    with open(path) as f:
        text = f.read()
    config = parse(text, base_dir=os.path.dirname(os.path.abspath(path)))
    logger.info("loaded %d scenario(s) from %s", len(config.scenarios), path)
    return config


def density_to_dict(density):
    if isinstance(density, UniformDensity):
        return {"kind": "uniform", "rho0": density.rho0}
    if isinstance(density, RadialPowerLaw):
        return {
            "kind": "power_law",
            "rho0": density.rho0,
            "beta": density.beta,
            "r_ref": density.r_ref,
        }
    return {
        "kind": "piecewise",
        "breakpoints": density.breakpoints.tolist(),
        "levels": density.levels.tolist(),
    }


def policy_to_dict(policy):
    doc = {"kind": policy.kind, "k": policy.k}
    if policy.is_partial:
        doc["alpha"] = policy.alpha
    return doc


def scenario_to_dict(scenario):
    r"""
    Fully resolved document of a scenario, as echoed in result metadata and emitted by presets.
    """
    p = scenario.params
    doc = {
        "label": scenario.label,
        "dimension": scenario.m,
        "link": {"nu": p.nu, "a_nu": p.a_nu, "p_t": p.p_t, "p_0": p.p_0, "g_t": p.g_t, "g_r": p.g_r},
        "density": density_to_dict(scenario.density),
        "policy": policy_to_dict(scenario.policy),
        "fading": scenario.fading.to_dict(),
        "filter": scenario.filter.to_dict(),
        "region_multiplier": scenario.region_multiplier,
        "trials": scenario.trials,
        "master_seed": scenario.master_seed,
    }
    if scenario.fixed_count is not None:
        doc["fixed_count"] = scenario.fixed_count
    return doc


def to_dict(config):
    doc = {
        "version": VERSION,
        "scenarios": [scenario_to_dict(s) for s in config.scenarios],
        "grid": config.grid.to_dict(),
        "x_grid": None if config.x_grid is None else config.x_grid.to_dict(),
        "epsilon": list(config.epsilon),
        "gamma_db": list(config.gamma_db),
        "d_db": config.d_db,
        "q_factor": None if config.q_factor is None else list(config.q_factor),
        "dominance": config.dominance,
        "retain": config.retain,
        "workers": config.workers,
        "output": {"path": config.output_path, "format": config.output_format},
    }
    return doc


def dump(config):
    r"""
    YAML text of a configuration; :func:`parse` reads it back unchanged.
    """
    return yaml.safe_dump(to_dict(config), sort_keys=False, default_flow_style=None)


def with_overrides(
    config, trials=None, seed=None, workers=None, grid=None, out=None, format=None
):
    r"""
    Apply command-line overrides to a configuration (``None`` keeps the configured value).

    Args:
        trials (int): trials of every scenario
        seed (int): master seed of every scenario
        workers (int): simulator worker processes
        grid (str): ``START:STOP:STEP`` in dB
        out (str): output path
        format (str): ``csv`` or ``records``
    """
    parser = _Parser()
    scenarios = []
    for i, s in enumerate(config.scenarios):
        path = "scenarios[{:}]".format(i)
        if trials is not None:
            s = parser.build(_join(path, "trials"), replace, s, trials=trials)
        if seed is not None:
            s = parser.build(_join(path, "master_seed"), replace, s, master_seed=seed)
        scenarios.append(s)
    config = replace(config, scenarios=scenarios)
    if workers is not None:
        if workers < 1:
            raise ConfigError("must be at least 1", "workers")
        config.workers = workers
    if grid is not None:
        config.grid = parser.grid(grid, "grid")
    if out is not None:
        config.output_path = out
    if format is not None:
        if format not in FORMATS:
            raise ConfigError("format must be one of {:}".format(FORMATS), "output.format")
        config.output_format = format
    return config


def _uniform_n_max(n_max, params, m=2):
    r_max = float(r_of_inr(params, 1.0))
    return UniformDensity(n_max / (unit_ball[m] * r_max ** m))


PRESET_SEED = 20080901
PRESET_TRIALS = 1000000


def _fig3():
    density = UniformDensity(1e-5)
    scenarios = [
        Scenario(
            m=2,
            params=LinkParams(nu=nu, p_t=1.0, p_0=1e-10),
            density=density,
            trials=PRESET_TRIALS,
            master_seed=PRESET_SEED,
            label="nu{:}".format(nu),
        )
        for nu in (2, 4)
    ]
    return RunConfig(scenarios=scenarios, grid=GridSpec(0.0, 90.0, 2.0))


def _fig4():
    params = LinkParams(nu=4, p_t=1.0, p_0=1e-12)
    density = _uniform_n_max(100.0, params)
    policies = [
        ("k1", CancellationPolicy.none()),
        ("k2", CancellationPolicy.complete(2)),
        ("partial", CancellationPolicy.partial(2, 0.1)),
    ]
    scenarios = [
        Scenario(
            m=2,
            params=params,
            density=density,
            policy=policy,
            trials=PRESET_TRIALS,
            master_seed=PRESET_SEED,
            label=label,
        )
        for label, policy in policies
    ]
    return RunConfig(scenarios=scenarios, grid=GridSpec(20.0, 80.0, 2.0))


def _fig5():
    params = LinkParams(nu=4, p_t=1.0, p_0=1e-12)
    density = _uniform_n_max(50.0, params)
    scenarios = [
        Scenario(
            m=2,
            params=params,
            density=density,
            policy=policy,
            fading=Rayleigh(),
            trials=PRESET_TRIALS,
            master_seed=PRESET_SEED,
            label=label,
        )
        for label, policy in (("k1", CancellationPolicy.none()), ("k2", CancellationPolicy.complete(2)))
    ]
    return RunConfig(scenarios=scenarios, grid=GridSpec(20.0, 80.0, 2.0))


PRESETS = {"fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def preset(name):
    r"""
    Built-in configuration reproducing a reference outage figure.

    * ``fig3``: :math:`m = 2`, :math:`P_0 = 10^{-10}`, :math:`P_t = 1`, :math:`\rho = 10^{-5}`, :math:`\nu \in \{2, 4\}`, no cancellation
    * ``fig4``: :math:`\nu = 4`, :math:`R_\mathrm{max} = 10^3`, :math:`\bar{N}_\mathrm{max} = 100`, no cancellation, :math:`k = 2` and partial cancellation with :math:`\alpha = 0.1`
    * ``fig5``: as ``fig4`` with :math:`\bar{N}_\mathrm{max} = 50` and Rayleigh fading, :math:`k \in \{1, 2\}`

    Raises:
        ConfigError: for an unknown name
    """
    if name not in PRESETS:
        raise ConfigError(
            "unknown preset {!r}, choose from {:}".format(name, sorted(PRESETS)), "preset"
        )
    return PRESETS[name]()
