"""Monte Carlo coverage studies for the interval methods.

A study draws ``reps`` samples from a generator, builds every requested
interval for every quantile level, and reports coverage of the true quantile
together with the mean and standard deviation of interval lengths.  Trial
``i`` uses random streams keyed by ``(seed, i)`` only, so trials can run in
any order or in parallel and the report stays the same.
"""
from __future__ import annotations

import csv
import json
import math
import re
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ._rng import make_rng
from .baselines import bootstrap_percentile_ci
from .bootstrap import ResampleCache
from .calibration import calibrate
from .censoring import GeneratorParams, Lifetime, Scheme, generate, preset
from .intervals import welrci
from .npmle import fit_npmle

PRESET_DEFAULTS = {
    "table1": {"alpha": 0.10, "q": (0.25, 0.5, 0.75)},
    "table2": {"alpha": 0.10, "q": (0.25, 0.5, 0.75)},
    "table3": {"alpha": 0.10, "q": (0.25, 0.5, 0.75)},
    "table4": {"alpha": 0.10, "q": (0.25, 0.5, 0.75)},
    # the reference current-status runs used EM with the 0.001 stop, not PAVA
    "table5": {"alpha": 0.05, "q": (0.25, 0.5, 0.75), "engine": "em"},
}

_METHOD = re.compile(r"^(?:(\d|auto)-)?(WELRCI0?|SQBPCI|QBPCI)$", re.IGNORECASE)


@dataclass(frozen=True)
class Method:
    """``k-WELRCI`` (smoothed), ``k-WELRCI0`` (unsmoothed) or a percentile baseline."""

    family: str
    k: int | None = None
    smoothed: bool = True

    @classmethod
    def parse(cls, text: str) -> "Method":
        m = _METHOD.match(text.strip())
        if not m:
            raise ValueError(f"unknown method {text!r}")
        order, family = m.group(1), m.group(2).upper()
        if family == "QBPCI":
            return cls("QBPCI", None, False)
        if family == "SQBPCI":
            return cls("SQBPCI", None, True)
        smoothed = family == "WELRCI"
        if order is None:
            # higher orders buy nothing without smoothing
            k = None if smoothed else 1
        else:
            k = None if order.lower() == "auto" else int(order)
        return cls("WELRCI", k, smoothed)

    @property
    def name(self) -> str:
        if self.family != "WELRCI":
            return self.family
        prefix = "auto" if self.k is None else str(self.k)
        return f"{prefix}-WELRCI{'' if self.smoothed else '0'}"


@dataclass(frozen=True)
class StudyConfig:
    generator: GeneratorParams
    n: int
    q: tuple = (0.5,)
    alpha: float = 0.10
    methods: tuple = ("auto-WELRCI",)
    reps: int = 100
    B: int = 400
    d: int | None = None
    seed: int = 0
    tol: float = 1e-3
    max_iter: int = 10000
    engine: str = "auto"
    workers: int = 1
    label: str = "custom"

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        q = tuple(float(v) for v in (self.q if np.iterable(self.q) else (self.q,)))
        if not all(0 < v < 1 for v in q):
            raise ValueError("q values must lie in (0, 1)")
        object.__setattr__(self, "q", q)
        methods = tuple(Method.parse(m).name if isinstance(m, str) else m.name
                        for m in self.methods)
        object.__setattr__(self, "methods", methods)

    @classmethod
    def from_preset(cls, name: str, n: int, **overrides) -> "StudyConfig":
        defaults = dict(PRESET_DEFAULTS[name.lower()])
        defaults.update(overrides)
        return cls(generator=preset(name), n=n, label=name.lower(), **defaults)

    def theta0(self, q: float) -> float:
        return self.generator.lifetime.ppf(q)

    @property
    def grid_step(self) -> int:
        return self.d if self.d is not None else max(1, self.n // 10)


@dataclass
class Outcome:
    x_l: float = math.nan
    x_u: float = math.nan
    hit: bool | None = None
    error: str | None = None
    seconds: float = 0.0

    @property
    def length(self) -> float:
        return self.x_u - self.x_l


@dataclass
class TrialRecord:
    index: int
    outcomes: dict = field(default_factory=dict)   # (q, method name) -> Outcome


def run_trial(config: StudyConfig, trial_index: int) -> TrialRecord:
    """One simulated sample, every method at every level."""
    record = TrialRecord(trial_index)
    sample = generate(config.generator, config.n, None,
                      rng=make_rng(config.seed, trial_index, 0))
    methods = [Method.parse(m) for m in config.methods]
    try:
        dist = fit_npmle(sample, config.tol, config.max_iter, config.engine)[0]
    except Exception as exc:  # noqa: BLE001 - trial failures are data
        for q in config.q:
            for m in methods:
                record.outcomes[(q, m.name)] = Outcome(error=f"npmle: {exc}")
        return record
    cache = ResampleCache(sample, config.B, config.seed, config.tol, config.max_iter,
                          stream=(trial_index, 1), engine=config.engine)
    for q in config.q:
        theta0 = config.theta0(q)
        for m in methods:
            start = time.perf_counter()
            out = Outcome()
            try:
                if m.family == "WELRCI":
                    cal = calibrate(sample, q, config.alpha, m.k, config.B, config.grid_step,
                                    smoothed=m.smoothed, dist=dist, cache=cache,
                                    tol=config.tol, max_iter=config.max_iter)
                    ci = welrci(dist, q, cal.c_n, m.smoothed, config.alpha, cal.k)
                    out.x_l, out.x_u = ci.x_l, ci.x_u
                else:
                    pci = bootstrap_percentile_ci(sample, q, config.alpha, config.B,
                                                  smoothed=m.smoothed, cache=cache)
                    out.x_l, out.x_u = pci.lo, pci.hi
                out.hit = bool(out.x_l <= theta0 <= out.x_u)
            except Exception as exc:  # noqa: BLE001
                out.error = f"{type(exc).__name__}: {exc}"
            out.seconds = time.perf_counter() - start
            record.outcomes[(q, m.name)] = out
    return record


@dataclass
class StudyReport:
    config: StudyConfig
    rows: list
    wall_time: float

    @property
    def flagged(self) -> bool:
        return any(r["flagged"] for r in self.rows)

    def row(self, q: float, method: str) -> dict:
        method = Method.parse(method).name
        for r in self.rows:
            if math.isclose(r["q"], q) and r["method"] == method:
                return r
        raise KeyError((q, method))

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["generator"]["scheme"] = self.config.generator.scheme.value
        return {"config": cfg, "wall_time": self.wall_time, "rows": self.rows}

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, default=_jsonable))

    def write_csv(self, path) -> None:
        fields = ["q", "theta0", "method", "coverage", "avg_length", "sd_length",
                  "valid", "degenerate", "flagged", "seconds"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(self.rows)

    def format(self) -> str:
        lines = [f"{'q':>6} {'theta0':>7} {'method':>12} {'cover%':>7} {'length':>7} "
                 f"{'(s.d.)':>8} {'valid':>6} {'degen':>6}"]
        for r in self.rows:
            lines.append(f"{r['q']:6.3f} {r['theta0']:7.3f} {r['method']:>12} "
                         f"{r['coverage']:7.1f} {r['avg_length']:7.3f} ({r['sd_length']:.3f}) "
                         f"{r['valid']:6d} {r['degenerate']:6d}")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _aggregate(config: StudyConfig, records: list, wall: float) -> StudyReport:
    records = sorted(records, key=lambda r: r.index)
    rows = []
    for q in config.q:
        for name in config.methods:
            outs = [r.outcomes[(q, name)] for r in records]
            valid = [o for o in outs if o.error is None]
            lengths = np.array([o.length for o in valid])
            hits = sum(o.hit for o in valid)
            degenerate = len(outs) - len(valid)
            rows.append({
                "q": q,
                "theta0": config.theta0(q),
                "method": name,
                "coverage": 100.0 * hits / len(valid) if valid else math.nan,
                "avg_length": float(lengths.mean()) if valid else math.nan,
                "sd_length": float(lengths.std()) if valid else math.nan,
                "valid": len(valid),
                "degenerate": degenerate,
                "flagged": degenerate > 0.1 * len(outs),
                "seconds": float(sum(o.seconds for o in outs)),
                "errors": sorted({o.error for o in outs if o.error})[:5],
            })
    return StudyReport(config, rows, wall)


def _run_chunk(args):
    config, indices = args
    return [run_trial(config, i) for i in indices]


def run_study(config: StudyConfig, progress=None) -> StudyReport:
    """Run ``config.reps`` trials (optionally across processes) and aggregate."""
    start = time.perf_counter()
    indices = list(range(config.reps))
    if config.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunks = [indices[i::config.workers] for i in range(config.workers)]
        with ProcessPoolExecutor(config.workers) as pool:
            records = [r for part in pool.map(_run_chunk, [(config, c) for c in chunks])
                       for r in part]
    else:
        records = []
        for i in indices:
            records.append(run_trial(config, i))
            if progress is not None:
                progress(i + 1, config.reps)
    return _aggregate(config, records, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# flat key = value config files

def _split(value: str) -> list:
    return [v.strip() for v in re.split(r"[,;\s]+", value.strip()) if v.strip()]


def load_config(path, **overrides) -> StudyConfig:
    """Read a ``key = value`` study file; keyword overrides win over the file.

    Recognized keys: ``preset`` or ``scheme`` with ``lifetime``, ``censor``,
    ``slope``, ``intercept``, ``gap_mean``, ``exact_fraction``, ``grid``;
    and ``n``, ``q``, ``alpha``, ``methods``, ``reps``, ``B``, ``d``,
    ``seed``, ``tol``, ``max_iter``, ``engine``, ``workers``.
    """
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    return config_from_mapping(raw, **overrides)


def config_from_mapping(raw: dict, **overrides) -> StudyConfig:
    raw = {k: v for k, v in raw.items()}
    gen_keys = {}
    label = "custom"
    if "preset" in raw:
        label = raw.pop("preset").lower()
        generator = preset(label)
        base = dict(PRESET_DEFAULTS[label])
    else:
        scheme = Scheme.parse(raw.pop("scheme", "right"))
        for key in ("lifetime", "censor"):
            if key in raw:
                gen_keys[key] = Lifetime.parse(raw.pop(key))
        for key in ("slope", "intercept", "gap_mean", "exact_fraction"):
            if key in raw:
                gen_keys[key] = float(raw.pop(key))
        if "grid" in raw:
            gen_keys["grid"] = tuple(float(v) for v in _split(raw.pop("grid")))
        generator = GeneratorParams(scheme, **gen_keys)
        base = {}
    conv = {"n": int, "reps": int, "B": int, "d": int, "seed": int, "max_iter": int,
            "workers": int, "alpha": float, "tol": float, "engine": str}
    for key, value in raw.items():
        if key == "q":
            base["q"] = tuple(float(v) for v in _split(value))
        elif key == "methods":
            base["methods"] = tuple(_split(value))
        elif key in conv:
            base[key] = conv[key](value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    base.update({k: v for k, v in overrides.items() if v is not None})
    if "n" not in base:
        raise ValueError("config needs n")
    return StudyConfig(generator=generator, label=label, **base)


def with_overrides(config: StudyConfig, **overrides) -> StudyConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
