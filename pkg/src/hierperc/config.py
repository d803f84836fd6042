"""Line-oriented `key = value` experiment configuration.

No nesting; `#` starts a comment; unknown keys are rejected.  Every numeric
field is validated against the module preconditions before any work starts.
"""

from dataclasses import dataclass, fields

from .errors import ConfigError, InvalidInputError
from .model import AnalysisParams, ConnectivityProfile, ScheduleProfile
from .sampler import SampleConfig
from .space import DEFAULT_VERTEX_BUDGET
from .streams import STREAM_REPLICA, substream


def _parse_bool(s):
    s = s.strip().lower()
    if s in ("true", "1", "yes", "on"):
        return True
    if s in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_list(cast):
    def parse(s):
        items = [t.strip() for t in s.split(",") if t.strip()]
        return tuple(cast(t) for t in items)

    return parse


@dataclass
class ExperimentConfig:
    # lattice and coupling law
    N: int = 2
    depth: int = 6
    delta: float = 1.0
    C0: float = 0.0
    C1: float = 0.0
    C2: float = 4.0
    alpha: float = 1.0
    # annulus schedule
    schedule_K: float = 1.0
    schedule_C: float = 0.0
    schedule_a: float = 1.0
    schedule_b: float = 1.0
    # run control
    seed: int = 1
    replicas: int = 3
    threads: int = 1
    out: str = "out"
    vertex_budget: int = DEFAULT_VERTEX_BUDGET
    charts: bool = False
    # cluster analysis
    levels: tuple = ()          # empty means all levels < depth
    j_list: tuple = (2, 3, 4, 5)
    j_min: int = 2
    cutset_mode: str = "graph"  # or "law" (graph-free exact count law)
    law_replicas: int = 200
    # density recursion
    renorm_levels: int = 12
    renorm_pop: int = 20000
    eps: float = 0.05
    beta: float = 0.5
    gamma: float = 0.9
    s: float = 0.775
    certificate_a: float = 0.1
    # walks
    walk_replicas: int = 1000
    walk_max_steps: int = 10000
    walk_shell: int = 0         # 0 means depth - 1
    # resistance
    shells: tuple = ()          # empty means 1..depth
    resist_tol: float = 1e-8
    resist_method: str = "iterative"
    # alpha sweep
    alphas: tuple = (0.5, 2.0, 8.0)
    # classifier
    classify_window: int = 4
    classify_ratio_threshold: float = 0.9
    classify_floor_frac: float = 0.05
    series: str = ""            # input CSV for the classify subcommand

    def profile(self) -> ConnectivityProfile:
        return ConnectivityProfile(N=self.N, delta=self.delta, C0=self.C0,
                                   C1=self.C1, C2=self.C2, alpha=self.alpha)

    def schedule(self) -> ScheduleProfile:
        return ScheduleProfile(K=self.schedule_K, C=self.schedule_C,
                               a=self.schedule_a, b=self.schedule_b)

    def analysis(self) -> AnalysisParams:
        return AnalysisParams(eps=self.eps, beta=self.beta, gamma=self.gamma,
                              s=self.s)

    def replica_seed(self, r: int) -> int:
        return substream(self.seed, STREAM_REPLICA, r)

    def sample_config(self, seed=None) -> SampleConfig:
        return SampleConfig(N=self.N, depth=self.depth, profile=self.profile(),
                            seed=self.seed if seed is None else seed,
                            vertex_budget=self.vertex_budget)

    def effective_shells(self):
        return tuple(self.shells) if self.shells else tuple(range(1, self.depth + 1))

    def effective_levels(self):
        return tuple(self.levels) if self.levels else tuple(range(0, self.depth))

    def effective_walk_shell(self) -> int:
        return self.walk_shell if self.walk_shell > 0 else self.depth - 1

    def validate(self):
        try:
            self.profile()
            self.schedule()
            self.analysis().validate_for(self.delta)
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from None
        if self.depth < 1:
            raise ConfigError("depth must be >= 1")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 0 <= self.seed <= 0xFFFFFFFFFFFFFFFF:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.cutset_mode not in ("graph", "law"):
            raise ConfigError("cutset_mode must be 'graph' or 'law'")
        if self.resist_method not in ("iterative", "dense"):
            raise ConfigError("resist_method must be 'iterative' or 'dense'")
        if self.renorm_levels < 1 or self.renorm_pop < 2:
            raise ConfigError("renorm_levels >= 1 and renorm_pop >= 2 required")
        if not 0.0 < self.certificate_a < 1.0:
            raise ConfigError("certificate_a must be in (0, 1)")
        if self.walk_replicas < 1 or self.walk_max_steps < 1:
            raise ConfigError("walk_replicas and walk_max_steps must be >= 1")
        if any(a <= 0 for a in self.alphas):
            raise ConfigError("alphas must be positive")
        if self.classify_window < 1:
            raise ConfigError("classify_window must be >= 1")
        bad = [k for k in self.effective_shells() if not 1 <= k <= self.depth]
        if bad:
            raise ConfigError(f"shells out of range: {bad}")
        bad = [l for l in self.effective_levels() if not 0 <= l < self.depth]
        if bad:
            raise ConfigError(f"levels out of range: {bad}")
        return self


_TUPLE_CASTS = {
    "levels": int,
    "j_list": int,
    "shells": int,
    "alphas": float,
}


def config_fields():
    return {f.name: f.type for f in fields(ExperimentConfig)}


def parse_value(name: str, raw: str):
    kinds = {f.name: f for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    ftype = kinds[name].type
    try:
        if ftype in ("tuple", tuple):
            return _parse_list(_TUPLE_CASTS[name])(raw)
        if ftype in ("int", int):
            return int(raw)
        if ftype in ("float", float):
            return float(raw)
        if ftype in ("bool", bool):
            return _parse_bool(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from None


def load_config(path=None, overrides=None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is not None:
        try:
            with open(path, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, _, raw = body.partition("=")
            key = key.strip()
            setattr(cfg, key, parse_value(key, raw.strip()))
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


# execution placement, not experiment identity: kept out of the manifest so
# the manifest hash is a pure function of the experiment parameters
_NON_IDENTITY_KEYS = {"out", "threads"}


def config_lines(cfg: ExperimentConfig):
    """Config as sorted `key = value` lines (manifest echo)."""
    out = []
    for f in sorted(fields(ExperimentConfig), key=lambda f: f.name):
        if f.name in _NON_IDENTITY_KEYS:
            continue
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        out.append(f"{f.name} = {v}")
    return out
