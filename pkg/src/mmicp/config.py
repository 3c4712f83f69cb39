"""Flat, typed run configuration shared by the CLI commands.

A config file holds one ``key:type = value`` entry per line, ``#`` starts
a comment. Types are ``int``, ``float``, ``str``, ``bool`` and the list
forms ``ints``, ``floats``, ``strs`` (comma separated). Keys unknown to
the command, or declared with the wrong type, are rejected. Every field
is also a command-line flag (``--n-cal 500``) which overrides the file.

The resolved config is rendered back in the same format; its sha256 is
stamped on every output file so results can be traced to their inputs.
"""

from __future__ import annotations

import argparse
import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .scores import ScoreKind, ScoreSpec

_SCALAR = {"int": int, "float": float, "str": str}


class ConfigError(ValueError):
    pass


def _opt(default, kind: str, help: str = ""):
    return field(default=default, metadata={"type": kind, "help": help})


def parse_value(kind: str, text: str):
    text = text.strip()
    try:
        if kind in _SCALAR:
            return _SCALAR[kind](text)
        if kind == "bool":
            low = text.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind in ("ints", "floats", "strs"):
            conv = _SCALAR[kind[:-1]]
            return tuple(conv(v.strip()) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot read {text!r} as {kind}") from None
    raise ConfigError(f"unknown type {kind!r}")


def format_value(kind: str, value) -> str:
    if kind in ("ints", "floats", "strs"):
        return ",".join(format_value(kind[:-1], v) for v in value)
    if kind == "float":
        return repr(float(value))
    if kind == "bool":
        return "true" if value else "false"
    return str(value)


@dataclass(frozen=True)
class BaseConfig:
    seed: int = _opt(0, "int", "root random seed")
    out: str = _opt("", "str", "output file or directory (stdout when empty, where allowed)")

    COMMAND = ""

    @classmethod
    def field_types(cls) -> dict:
        return {f.name: f.metadata["type"] for f in fields(cls)}

    def render(self) -> str:
        """Resolved config in file format, minus ``out``.

        The destination does not change what is computed, so it stays
        out of the rendered text and hence out of the hash.
        """
        kinds = self.field_types()
        lines = [f"{k}:{kinds[k]} = {format_value(kinds[k], getattr(self, k))}" for k in sorted(kinds) if k != "out"]
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(f"command={self.COMMAND}\n{self.render()}".encode()).hexdigest()

    def header(self) -> str:
        return f"# mmicp {self.COMMAND} config-sha256={self.digest()}\n"

    def validate(self) -> None:
        pass


class _ScoreFields:
    def score_spec(self) -> ScoreSpec:
        try:
            kind = ScoreKind(self.score.upper())
        except ValueError:
            raise ConfigError(f"unknown score {self.score!r}") from None
        if kind.is_regression:
            raise ConfigError(f"{kind.value} is a regression score; the CLI works on classifiers")
        return ScoreSpec(kind, self.raps_lambda, self.raps_kreg, self.aps_randomized)


@dataclass(frozen=True)
class CalibrateConfig(BaseConfig, _ScoreFields):
    COMMAND = "calibrate"
    proba: str = _opt("", "str", "probability matrix CSV (n rows, K columns, no header)")
    labels: str = _opt("", "str", "labels file, one integer per line")
    score: str = _opt("APS", "str", "nonconformity score: LAC, APS, RAPS, MARGIN")
    raps_lambda: float = _opt(0.0, "float", "RAPS penalty weight")
    raps_kreg: int = _opt(1, "int", "RAPS rank allowance")
    aps_randomized: bool = _opt(False, "bool", "randomised APS/RAPS tie-breaking")
    jitter_eps: float = _opt(1e-9, "float", "calibration jitter scale")

    def validate(self):
        self.score_spec()


@dataclass(frozen=True)
class MmiConfig(CalibrateConfig):
    COMMAND = "mmi"
    calibration: str = _opt("", "str", "calibration JSON from the calibrate command")
    alphas: tuple = _opt((0.01, 0.05, 0.1, 0.2, 0.3), "floats", "set-size levels to report")
    format: str = _opt("csv", "str", "csv or json")

    def validate(self):
        super().validate()
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        _check_alphas(self.alphas)


@dataclass(frozen=True)
class PredictSetConfig(CalibrateConfig):
    COMMAND = "predict-set"
    calibration: str = _opt("", "str", "calibration JSON from the calibrate command")
    alphas: tuple = _opt((0.1,), "floats", "miscoverage levels")
    consonant: bool = _opt(False, "bool", "stretch the largest p-value to 1 first")

    def validate(self):
        super().validate()
        _check_alphas(self.alphas)


@dataclass(frozen=True)
class CoverageConfig(CalibrateConfig):
    COMMAND = "coverage"
    trials: int = _opt(10000, "int", "Monte Carlo trials per calibration size")
    n_cals: tuple = _opt((20, 100), "ints", "calibration sizes")
    alphas: tuple = _opt(tuple(round(0.05 * i, 2) for i in range(1, 11)), "floats", "miscoverage grid")
    blob_k: int = _opt(10, "int", "synthetic classes")
    blob_d: int = _opt(2, "int", "synthetic feature dimension")
    blob_spread: float = _opt(2.0, "float", "scale of the class centres")
    blob_noise: float = _opt(1.0, "float", "within-class standard deviation")

    def validate(self):
        super().validate()
        _check_alphas(self.alphas)
        if self.trials < 1 or not self.n_cals or min(self.n_cals) < 1:
            raise ConfigError("trials and every n_cal must be positive")
        if self.blob_k < 2 or self.blob_d < 1 or self.blob_spread <= 0 or self.blob_noise <= 0:
            raise ConfigError("invalid synthetic generator spec")
        if bool(self.proba) != bool(self.labels):
            raise ConfigError("proba and labels go together")


@dataclass(frozen=True)
class OracleCheckConfig(BaseConfig):
    COMMAND = "oracle-check"
    k_max: int = _opt(10, "int", "largest label-space size to enumerate (<= 12)")
    profiles: int = _opt(200, "int", "random profiles per suite")
    n_cal: int = _opt(20, "int", "calibration size used to draw lattice p-values")
    inject_fault: bool = _opt(False, "bool", "perturb one closed form (harness self-test)")

    def validate(self):
        from .oracle import MAX_K

        if not 2 <= self.k_max <= MAX_K:
            raise ConfigError(f"k_max must lie in [2, {MAX_K}], got {self.k_max}")
        if self.profiles < 1 or self.n_cal < 1:
            raise ConfigError("profiles and n_cal must be positive")


class _DataFields:
    def learner_spec(self):
        from .models import LearnerKind, LearnerSpec

        try:
            kind = LearnerKind(self.learner.upper())
        except ValueError:
            raise ConfigError(f"unknown learner {self.learner!r}") from None
        return LearnerSpec(kind, self.knn_k, self.learning_rate, self.epochs, self.l2)


@dataclass(frozen=True)
class ActiveConfigFile(CalibrateConfig, _DataFields):
    COMMAND = "active"
    data: str = _opt("", "str", "dataset CSV (f0..f{d-1},label); synthetic blobs when empty")
    seeds: tuple = _opt(tuple(range(10)), "ints", "experiment seeds")
    strategies: tuple = _opt(("mmi_tv", "mmi_pi", "size@0.01", "size@0.05", "size@0.1", "size@0.2", "size@0.3"),
                             "strs", "acquisition strategies")
    n_initial: int = _opt(100, "int", "initial labelled set")
    n_pool: int = _opt(2000, "int", "unlabelled pool (0 = all remaining rows)")
    n_test: int = _opt(1000, "int", "fixed held-out test set")
    rounds: int = _opt(300, "int", "acquisition rounds")
    train_fraction: float = _opt(0.7, "float", "fit share of the labelled set each round")
    learner: str = _opt("SOFTMAX_LINEAR", "str", "KNN or SOFTMAX_LINEAR")
    knn_k: int = _opt(10, "int", "neighbours for KNN")
    learning_rate: float = _opt(0.5, "float", "softmax step size")
    epochs: int = _opt(200, "int", "softmax gradient steps")
    l2: float = _opt(1e-3, "float", "softmax weight decay")
    blob_n: int = _opt(4000, "int", "synthetic rows")
    blob_k: int = _opt(10, "int", "synthetic classes")
    blob_d: int = _opt(5, "int", "synthetic feature dimension")
    blob_spread: float = _opt(3.0, "float", "scale of the class centres")

    def validate(self):
        _check_common_experiment(self)


@dataclass(frozen=True)
class ArcConfig(CalibrateConfig, _DataFields):
    COMMAND = "arc"
    seeds: tuple = _opt(tuple(range(10)), "ints", "experiment seeds")
    strategies: tuple = _opt(("mmi_tv", "mmi_pi", "size@0.01", "size@0.05", "size@0.1", "size@0.2", "size@0.3"),
                             "strs", "ranking strategies")
    n_cal: int = _opt(1000, "int", "calibration rows")
    n_test: int = _opt(1000, "int", "test rows")
    grid_points: int = _opt(100, "int", "rejection-rate grid size")
    max_rejection: float = _opt(0.99, "float", "largest rejection rate")
    n_train: int = _opt(500, "int", "synthetic mode: rows used to fit the learner")
    learner: str = _opt("SOFTMAX_LINEAR", "str", "KNN or SOFTMAX_LINEAR (synthetic mode)")
    knn_k: int = _opt(10, "int", "neighbours for KNN")
    learning_rate: float = _opt(0.5, "float", "softmax step size")
    epochs: int = _opt(200, "int", "softmax gradient steps")
    l2: float = _opt(1e-3, "float", "softmax weight decay")
    blob_k: int = _opt(10, "int", "synthetic classes")
    blob_d: int = _opt(5, "int", "synthetic feature dimension")
    blob_spread: float = _opt(3.0, "float", "scale of the class centres")

    def validate(self):
        _check_common_experiment(self)
        if bool(self.proba) != bool(self.labels):
            raise ConfigError("proba and labels go together")


@dataclass(frozen=True)
class AblateScoresConfig(ArcConfig):
    COMMAND = "ablate-scores"
    scores: tuple = _opt(("LAC", "APS", "RAPS", "MARGIN"), "strs", "scores to compare")

    def validate(self):
        super().validate()
        for s in self.scores:
            replace(self, score=s).score_spec()


@dataclass(frozen=True)
class AblateNcalConfig(ArcConfig):
    COMMAND = "ablate-ncal"
    n_cals: tuple = _opt((100, 250, 500, 1000), "ints", "calibration sizes")

    def validate(self):
        super().validate()
        if not self.n_cals or min(self.n_cals) < 1:
            raise ConfigError("every n_cal must be positive")


def _check_alphas(alphas):
    if not alphas:
        raise ConfigError("need at least one alpha")
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {a}")


def _check_common_experiment(cfg):
    from .strategy import parse_strategies

    cfg.score_spec()
    cfg.learner_spec()
    if not cfg.seeds:
        raise ConfigError("need at least one seed")
    if len(set(cfg.seeds)) != len(cfg.seeds):
        raise ConfigError("seeds must be distinct")
    try:
        names = [s.name for s in parse_strategies(cfg.strategies)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if len(set(names)) != len(names):
        raise ConfigError("strategies must be distinct")


COMMANDS = {
    c.COMMAND: c
    for c in (CalibrateConfig, MmiConfig, PredictSetConfig, CoverageConfig, OracleCheckConfig,
              ActiveConfigFile, ArcConfig, AblateScoresConfig, AblateNcalConfig)
}


def parse_config_text(cls, text: str, source: str = "<config>") -> dict:
    kinds = cls.field_types()
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, eq, rhs = line.partition("=")
        key, colon, kind = lhs.strip().partition(":")
        key, kind = key.strip(), kind.strip()
        if not eq or not colon:
            raise ConfigError(f"{source}:{lineno}: expected 'key:type = value'")
        if key not in kinds:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} for {cls.COMMAND}")
        if kind != kinds[key]:
            raise ConfigError(f"{source}:{lineno}: {key} is {kinds[key]}, not {kind}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = parse_value(kind, rhs)
    return out


def load_config(cls, path) -> dict:
    path = Path(path)
    return parse_config_text(cls, path.read_text(), str(path))


def add_arguments(parser: argparse.ArgumentParser, cls) -> None:
    parser.add_argument("--config", help="flat key:type = value config file")
    for f in fields(cls):
        kind = f.metadata["type"]
        parser.add_argument(
            "--" + f.name.replace("_", "-"),
            dest=f.name,
            default=None,
            metavar=kind.upper(),
            help=f"{f.metadata['help']} [{kind}, default {format_value(kind, f.default)}]",
        )


def resolve(cls, args: argparse.Namespace):
    """Defaults, then the config file, then explicit flags."""
    values = load_config(cls, args.config) if getattr(args, "config", None) else {}
    for name, kind in cls.field_types().items():
        raw = getattr(args, name, None)
        if raw is not None:
            values[name] = parse_value(kind, raw)
    cfg = cls(**values)
    cfg.validate()
    return cfg
