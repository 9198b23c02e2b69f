"""Flag and parameter registry with defaults and command-line short names."""

from __future__ import annotations

from dataclasses import dataclass, field

FLAG_DEFAULTS = {
    "print_models": True,
    "print_models_portable": False,
    "prolog_style_variables": False,
    "verbose": False,
    "lnh": True,
    "negprop": True,
    "neg_assign": True,
    "neg_assign_near": True,
    "neg_elim": True,
    "neg_elim_near": True,
    "trace": False,
}

PARAM_DEFAULTS = {
    "domain_size": 2,
    "iterate_up_to": 0,
    "max_models": 1,
    "max_seconds": -1,
    "max_megs": 192,
    "selection_order": 2,
    "selection_measure": 4,
}

PARAM_RANGES = {
    "domain_size": (1, None),
    "iterate_up_to": (0, None),
    "max_models": (-1, None),
    "max_seconds": (-1, None),
    "max_megs": (-1, None),
    "selection_order": (0, 2),
    "selection_measure": (0, 4),
}

# short option -> (kind, name); kind is "param" or "flag"
SHORT_OPTIONS = {
    "-n": ("param", "domain_size"),
    "-N": ("param", "iterate_up_to"),
    "-m": ("param", "max_models"),
    "-t": ("param", "max_seconds"),
    "-b": ("param", "max_megs"),
    "-O": ("param", "selection_order"),
    "-M": ("param", "selection_measure"),
    "-P": ("flag", "print_models_portable"),
    "-v": ("flag", "verbose"),
    "-T": ("flag", "trace"),
}

# The old spelling used in some documentation for the negprop flag.
FLAG_ALIASES = {"neg_prop": "negprop"}


def canonical_flag(name: str) -> str:
    return FLAG_ALIASES.get(name, name)


def is_flag(name: str) -> bool:
    return canonical_flag(name) in FLAG_DEFAULTS


def is_param(name: str) -> bool:
    return name in PARAM_DEFAULTS


@dataclass
class Options:
    flags: dict = field(default_factory=lambda: dict(FLAG_DEFAULTS))
    params: dict = field(default_factory=lambda: dict(PARAM_DEFAULTS))

    def set_flag(self, name: str, value: bool = True) -> None:
        name = canonical_flag(name)
        if name not in FLAG_DEFAULTS:
            raise KeyError(f"unknown flag: {name}")
        self.flags[name] = value

    def assign(self, name: str, value: int) -> None:
        if name not in PARAM_DEFAULTS:
            raise KeyError(f"unknown parameter: {name}")
        lo, hi = PARAM_RANGES[name]
        if value < lo or (hi is not None and value > hi):
            raise ValueError(f"value {value} out of range for parameter {name}")
        self.params[name] = value

    def __getattr__(self, name):
        # only reached for names that are not real attributes
        flags = self.__dict__.get("flags", {})
        params = self.__dict__.get("params", {})
        if name in flags:
            return flags[name]
        if name in params:
            return params[name]
        raise AttributeError(name)

    def copy(self) -> "Options":
        return Options(dict(self.flags), dict(self.params))

    def as_commands(self) -> list[str]:
        """Render every option as an input-file command."""
        lines = []
        for name, on in self.flags.items():
            lines.append(f"{'set' if on else 'clear'}({name}).")
        for name, value in self.params.items():
            lines.append(f"assign({name}, {value}).")
        return lines
