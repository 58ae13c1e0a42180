"""Fixed generation parameters for a reservoir."""

from __future__ import annotations

import math
import numbers
from dataclasses import asdict, dataclass, field

from .errors import ConfigError

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class NeuronParams:
    """Discrete-time leaky integrate-and-fire parameters.

    The reset potential is always 0. ``leak`` is the fraction of the
    membrane potential retained from one step to the next, so ``leak=1``
    is a pure integrator.
    """

    threshold: float = 1.0
    leak: float = 0.9
    refractory_steps: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.threshold) and self.threshold > 0):
            raise ConfigError("threshold", f"must be finite and > 0, got {self.threshold}")
        if not (0 < self.leak <= 1):
            raise ConfigError("leak", f"must lie in (0, 1], got {self.leak}")
        if isinstance(self.refractory_steps, bool) or int(self.refractory_steps) != self.refractory_steps \
                or self.refractory_steps < 0:
            raise ConfigError("refractory_steps", f"must be a non-negative integer, got {self.refractory_steps}")
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "leak", float(self.leak))
        object.__setattr__(self, "refractory_steps", int(self.refractory_steps))


@dataclass(frozen=True)
class ReservoirConfig:
    n_neurons: int
    n_inputs: int
    n_outputs: int
    fan_in: int
    input_fan_in: int
    inhibitory_fraction: float = 0.2
    synaptic_scale: float = 0.1
    input_scale: float = 1.0
    neuron: NeuronParams = field(default_factory=NeuronParams)
    seed: int = 0

    def __post_init__(self):
        for name in ("n_neurons", "n_inputs", "n_outputs", "fan_in", "input_fan_in", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Integral):
                raise ConfigError(name, f"must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("n_neurons", "n_inputs", "n_outputs"):
            if getattr(self, name) <= 0:
                raise ConfigError(name, f"must be > 0, got {getattr(self, name)}")
        if not (0 < self.fan_in < self.n_neurons):
            raise ConfigError(
                "fan_in",
                f"must satisfy 0 < fan_in < n_neurons ({self.n_neurons}) "
                f"since self-connections are excluded, got {self.fan_in}",
            )
        if not (0 <= self.input_fan_in <= self.n_inputs):
            raise ConfigError(
                "input_fan_in", f"must satisfy 0 <= input_fan_in <= n_inputs ({self.n_inputs}), got {self.input_fan_in}"
            )
        if not (0.0 <= self.inhibitory_fraction <= 1.0):
            raise ConfigError("inhibitory_fraction", f"must lie in [0, 1], got {self.inhibitory_fraction}")
        for name in ("synaptic_scale", "input_scale"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(name, f"must be finite and > 0, got {value}")
            object.__setattr__(self, name, float(value))
        object.__setattr__(self, "inhibitory_fraction", float(self.inhibitory_fraction))
        if not (0 <= self.seed <= _U64_MAX):
            raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {self.seed}")
        if isinstance(self.neuron, dict):
            object.__setattr__(self, "neuron", NeuronParams(**self.neuron))
        elif not isinstance(self.neuron, NeuronParams):
            raise ConfigError("neuron", f"expected NeuronParams, got {type(self.neuron).__name__}")

    @property
    def n_inhibitory(self) -> int:
        # Round half up, independent of Python's banker's rounding.
        return int(math.floor(self.inhibitory_fraction * self.n_neurons + 0.5))

    def replace(self, **changes) -> ReservoirConfig:
        data = asdict(self)
        data.update(changes)
        return ReservoirConfig.from_dict(data)

    def to_dict(self) -> dict:
        """Plain-dict form with a fixed key order (used by the file formats)."""
        return {
            "n_neurons": self.n_neurons,
            "n_inputs": self.n_inputs,
            "n_outputs": self.n_outputs,
            "fan_in": self.fan_in,
            "input_fan_in": self.input_fan_in,
            "inhibitory_fraction": float(self.inhibitory_fraction),
            "synaptic_scale": float(self.synaptic_scale),
            "input_scale": float(self.input_scale),
            "neuron": {
                "threshold": self.neuron.threshold,
                "leak": self.neuron.leak,
                "refractory_steps": self.neuron.refractory_steps,
            },
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ReservoirConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        data = dict(data)
        neuron = data.get("neuron", {})
        if isinstance(neuron, dict):
            unknown = set(neuron) - set(NeuronParams.__dataclass_fields__)
            if unknown:
                raise ConfigError(f"neuron.{sorted(unknown)[0]}", "unknown neuron field")
            data["neuron"] = NeuronParams(**neuron)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError("config", str(exc)) from None


def default_config(seed: int = 0) -> ReservoirConfig:
    """Operating point used by the benchmark harness (one input, one output).

    Fast leak with strong signed recurrence: the current input is coded by
    threshold crossings, older inputs survive as recurrent spike activity.
    """
    return ReservoirConfig(
        n_neurons=200,
        n_inputs=1,
        n_outputs=1,
        fan_in=10,
        input_fan_in=1,
        inhibitory_fraction=0.5,
        synaptic_scale=0.5,
        input_scale=5.0,
        neuron=NeuronParams(threshold=1.0, leak=0.1, refractory_steps=0),
        seed=seed,
    )
