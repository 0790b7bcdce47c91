"""Flat ``key = value`` experiment configuration.

Lines starting with '#' are comments. Unknown keys are rejected. Lists are
comma separated, and ranges are written ``a:b``.
"""

from dataclasses import dataclass

from .errors import ConfigError

EXPERIMENTS = ("kr_echo", "kr_classical", "osc_classical", "osc_semiclassical",
               "osc_allegiance", "glauber_roundtrip")

COMMON = {
    "experiment": ("str", None),
    "seed": ("int", 0),
    "output_dir": ("str", ""),
    "threads": ("int", 0),
    "plot": ("bool", True),
}

_KR = {
    "N": ("int", 8192),
    "K": ("float", 10.0),
    "sigma": ("float", 1.1),
    "n_packets": ("int", 100),
    "layout": ("str", "random"),
    "grid_shape": ("intlist", [10, 10]),
    "region_theta": ("range", (0.2, 0.3)),
    "region_p": ("range", (0.3, 0.4)),
    "packet_width": ("float", 0.0),
    "kick_order": ("str", "drift_then_kick"),
    "split": ("str", "asymmetric"),
    "fit_window": ("range", (1.0, 7.0)),
}

_OSC = {
    "omega0": ("float", 1.0),
    "hbar": ("float", 1e-4),
    "kick": ("float", 1.0),
    "modes": ("str", ""),
    "dt": ("float", 1e-3),
    "density": ("str", "gaussian_ring"),
    "width_over_hbar": ("float", 100.0),
    "center_re": ("float", 2.0),
    "center_im": ("float", 0.0),
    "n_samples": ("int", 100_000),
    "T": ("int", 40),
}

SCHEMAS = {
    "kr_echo": {
        **_KR,
        "T": ("int", 40),
        "want_cross": ("bool", False),
        "compare_N": ("intlist", []),
        "plateau_from": ("int", 20),
        "self_checks": ("bool", True),
    },
    "kr_classical": {
        **_KR,
        "T": ("int", 20),
        "gamma": ("float", 2.0),
        "n_points": ("int", 1_000_000),
        "angle": ("str", "unwrapped"),
        "lyapunov": ("bool", True),
        "lyapunov_iter": ("int", 100_000),
        "compare_quantum": ("bool", True),
    },
    "osc_classical": dict(_OSC),
    "osc_allegiance": {
        **_OSC,
        "sigmas_fgr": ("floatlist", [0.05, 0.1]),
        "sigmas_strong": ("floatlist", [1.0, 2.0]),
    },
    "osc_semiclassical": {
        **{k: v for k, v in _OSC.items() if k not in ("density", "width_over_hbar", "n_samples")},
        "hbar": ("float", 1e-5),
        "T": ("float", 4.0),
        "sigma": ("float", 2.0),
        "n_mc": ("int", 100_000),
        "samples_per_period": ("int", 8),
    },
    "glauber_roundtrip": {
        "hbar": ("float", 1e-3),
        "width_over_hbar": ("float", 5.0),
        "n_max": ("int", 200),
        "temperature": ("float", 0.5),
        "omega0": ("float", 1.0),
        "thermal_hbar": ("float", 0.1),
        "thermal_n_max": ("int", 120),
    },
}


def _parse(kind, raw, key):
    try:
        if kind == "str":
            return raw
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "intlist":
            return [int(x) for x in raw.split(",") if x.strip()]
        if kind == "floatlist":
            return [float(x) for x in raw.split(",") if x.strip()]
        if kind == "range":
            a, b = raw.split(":")
            return (float(a), float(b))
    except ValueError:
        raise ConfigError(f"cannot parse {key} = {raw!r} as {kind}") from None
    raise ConfigError(f"unknown value kind {kind}")


def _format(kind, value):
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("intlist", "floatlist"):
        return ",".join(repr(v) for v in value)
    if kind == "range":
        return f"{value[0]!r}:{value[1]!r}"
    if kind == "float":
        return repr(float(value))
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def schema(self):
        return {**COMMON, **SCHEMAS[self.experiment]}

    def to_text(self):
        """Resolved configuration in the same flat format (round-trips through parse_text)."""
        schema = self.schema()
        lines = []
        for key in sorted(schema):
            lines.append(f"{key} = {_format(schema[key][0], self.values[key])}")
        return "\n".join(lines) + "\n"


def parse_pairs(pairs):
    """Turn ``key = value`` lines into a dict of raw strings."""
    raw = {}
    for lineno, line in enumerate(pairs, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def build_config(raw, overrides=()):
    raw = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        k, v = (s.strip() for s in item.split("=", 1))
        raw[k] = v
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}; got {exp!r}")
    schema = {**COMMON, **SCHEMAS[exp]}
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys for {exp}: {', '.join(unknown)}")
    values = {}
    for key, (kind, default) in schema.items():
        values[key] = _parse(kind, raw[key], key) if key in raw else default
    if not values["output_dir"]:
        values["output_dir"] = f"echo_lab_runs/{exp}"
    return ExperimentConfig(exp, values)


def parse_text(text, overrides=()):
    return build_config(parse_pairs(text.splitlines()), overrides)


def load_config(path, overrides=()):
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), overrides)
