"""Experiment configuration files.

Plain INI syntax (read with :mod:`configparser`) with three sections::

    [scheme]
    kind = cp-mlc-id
    d = 3
    code = ebch-128-106
    flipping_set = t0+t1+t2(40,29)
    iterations = 3
    damping = 0.3, 1.0, 1.0
    interleaver_size = 8
    bypass_includes_channel_llr = false

    [channel]
    kind = awgn
    seed = 1

    [experiment]
    snr = 4.0:5.0:0.25
    target_ber = 2.2e-4
    bracket = 3.5, 6.0
    min_errors = 100

Every key is optional except ``scheme.kind``. ``interleavers`` may list one
spec per lane instead of ``interleaver_size``, e.g.
``identity, digit_swap(8), identity``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import ChannelConfig
from .codes import code_by_name
from .osd import FlippingSetSpec
from .schemes import (
    DEFAULT_DAMPING,
    InterleaverSpec,
    SchemeConfig,
    default_interleavers,
)
from .sim import StoppingRule

DEFAULT_CODE = {
    "concatenated": "ebch-128-113",
    "cp-mlc": "ebch-128-99",
    "cp-mlc-id": "ebch-128-106",
}
DEFAULT_FLIPS = "t0+t1+t2(40,29)"
DEFAULT_D = {"concatenated": 3, "cp-mlc": 2, "cp-mlc-id": 3, "uncoded": 8}

_SCHEME_KEYS = {
    "kind", "d", "code", "flipping_set", "iterations", "damping",
    "interleaver_size", "interleavers", "bypass_includes_channel_llr", "name",
}
_CHANNEL_KEYS = {"kind", "seed", "p"}
_EXPERIMENT_KEYS = {
    "snr", "target_ber", "bracket", "tol", "min_errors", "min_frames",
    "max_frames", "block_frames", "workers", "sizes", "iteration_counts",
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    snr_grid: tuple[float, ...] = ()
    target_ber: float = 2.2e-4
    bracket: tuple[float, float] = (0.0, 10.0)
    tol: float = 0.01
    rule: StoppingRule = StoppingRule()
    workers: int = 1
    sizes: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128)
    iteration_counts: tuple[int, ...] = (3, 6)


@dataclass
class RunConfig:
    scheme: SchemeConfig
    channel: ChannelConfig
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    source: str = ""

    def echo(self) -> dict:
        """Plain-data copy of the configuration for metadata files."""
        from .sim import scheme_summary

        e = self.experiment
        return {
            "source": self.source,
            "scheme": scheme_summary(self.scheme),
            "channel": {"kind": self.channel.kind, "p": self.channel.p, "seed": self.channel.master_seed},
            "experiment": {
                "snr": list(e.snr_grid),
                "target_ber": e.target_ber,
                "bracket": list(e.bracket),
                "tol": e.tol,
                "min_errors": e.rule.min_bit_errors,
                "min_frames": e.rule.min_frames,
                "max_frames": e.rule.max_frames,
                "block_frames": e.rule.block_frames,
                "workers": e.workers,
                "sizes": list(e.sizes),
                "iteration_counts": list(e.iteration_counts),
            },
        }


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())


def parse_grid(text: str) -> tuple[float, ...]:
    """``"4.0, 4.5, 5"`` or an inclusive range ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise ConfigError(f"bad range {text!r}; expected start:stop:step") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range {text!r}")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    return _floats(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _check_keys(section, allowed, name):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")


def scheme_from_mapping(sec) -> SchemeConfig:
    _check_keys(sec, _SCHEME_KEYS, "scheme")
    if "kind" not in sec:
        raise ConfigError("[scheme] needs a 'kind'")
    kind = sec["kind"].strip().lower()
    if kind not in DEFAULT_D:
        raise ConfigError(f"unknown scheme kind {kind!r}")
    d = int(sec.get("d", DEFAULT_D[kind]))
    name = sec.get("name", "").strip()
    if kind == "uncoded":
        return SchemeConfig("uncoded", d, None, name=name)
    code = code_by_name(sec.get("code", DEFAULT_CODE[kind]))
    flips = sec.get("flipping_set", DEFAULT_FLIPS)
    spec = FlippingSetSpec.parse(flips)
    bypass = _bool(sec.get("bypass_includes_channel_llr", "false"))
    if kind != "cp-mlc-id":
        return SchemeConfig(kind, d, code, spec, bypass_includes_channel_llr=bypass, name=name)

    iterations = int(sec.get("iterations", 3))
    if "damping" in sec:
        damping = _floats(sec["damping"])
    elif iterations in DEFAULT_DAMPING:
        damping = DEFAULT_DAMPING[iterations]
    else:
        raise ConfigError(f"no default damping for {iterations} iterations; give 'damping'")
    if "interleavers" in sec and "interleaver_size" in sec:
        raise ConfigError("give either 'interleavers' or 'interleaver_size', not both")
    if "interleavers" in sec:
        ilv = tuple(InterleaverSpec.parse(t) for t in _split_specs(sec["interleavers"]))
    else:
        ilv = default_interleavers(d, int(sec.get("interleaver_size", code.n)))
    return SchemeConfig(kind, d, code, spec, iterations, damping, ilv, bypass, name)


def _split_specs(text: str) -> list[str]:
    # commas inside parentheses belong to the spec
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def channel_from_mapping(sec) -> ChannelConfig:
    _check_keys(sec, _CHANNEL_KEYS, "channel")
    kind = sec.get("kind", "awgn").strip().lower()
    seed = int(sec.get("seed", 0))
    if kind == "bsc":
        return ChannelConfig("bsc", p=float(sec.get("p", 0.01)), master_seed=seed)
    return ChannelConfig(kind, master_seed=seed)


def experiment_from_mapping(sec) -> ExperimentConfig:
    _check_keys(sec, _EXPERIMENT_KEYS, "experiment")
    e = ExperimentConfig()
    if "snr" in sec:
        e.snr_grid = parse_grid(sec["snr"])
    if "target_ber" in sec:
        e.target_ber = float(sec["target_ber"])
    if "bracket" in sec:
        b = _floats(sec["bracket"])
        if len(b) != 2:
            raise ConfigError("bracket needs two values")
        e.bracket = (b[0], b[1])
    if "tol" in sec:
        e.tol = float(sec["tol"])
    r = e.rule
    e.rule = StoppingRule(
        min_bit_errors=int(sec.get("min_errors", r.min_bit_errors)),
        min_frames=int(sec.get("min_frames", r.min_frames)),
        max_frames=int(sec.get("max_frames", r.max_frames)),
        block_frames=int(sec.get("block_frames", r.block_frames)),
    )
    if "workers" in sec:
        e.workers = int(sec["workers"])
    if "sizes" in sec:
        e.sizes = _ints(sec["sizes"])
    if "iteration_counts" in sec:
        e.iteration_counts = _ints(sec["iteration_counts"])
    return e


def loads(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    extra = set(cp.sections()) - {"scheme", "channel", "experiment"}
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    if not cp.has_section("scheme"):
        raise ConfigError("missing [scheme] section")
    try:
        scheme = scheme_from_mapping(cp["scheme"])
        channel = channel_from_mapping(cp["channel"] if cp.has_section("channel") else {})
        exp = experiment_from_mapping(cp["experiment"] if cp.has_section("experiment") else {})
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return RunConfig(scheme, channel, exp, source)


def load(path) -> RunConfig:
    path = Path(path)
    return loads(path.read_text(), source=str(path))


def with_overrides(run: RunConfig, *, seed=None, workers=None, min_errors=None, max_frames=None, rule=None) -> RunConfig:
    """Apply command-line overrides on top of a loaded file."""
    e = replace(run.experiment)
    if rule is not None:
        e.rule = rule
    if min_errors is not None or max_frames is not None:
        r = e.rule
        mf = max_frames if max_frames is not None else r.max_frames
        e.rule = StoppingRule(
            min_bit_errors=min_errors if min_errors is not None else r.min_bit_errors,
            min_frames=min(r.min_frames, mf),
            max_frames=mf,
            block_frames=r.block_frames,
        )
    if workers is not None:
        e.workers = workers
    ch = run.channel if seed is None else replace(run.channel, master_seed=seed)
    return RunConfig(run.scheme, ch, e, run.source)


def snr_channels(run: RunConfig, grid=None) -> list[ChannelConfig]:
    """One channel per grid point; a BSC has no SNR axis and yields a single point."""
    if run.channel.kind == "bsc":
        return [run.channel]
    grid = run.experiment.snr_grid if grid is None else grid
    return [replace(run.channel, snr_db=float(s)) for s in np.asarray(grid, dtype=float)]
