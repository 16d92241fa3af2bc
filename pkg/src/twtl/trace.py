"""Uniformly sampled output words, predicate margins, and normalization.

Trace CSV format: header ``time,<sig1>,...``, decimal-point reals, rows
sorted by time with a uniform step. Predicate config is a JSON object::

    {"atoms": {"A": {"signal": "x", "op": ">=", "sigma": 4.0,
                     "min": 0.0, "max": 8.0}}}

``min``/``max`` are the per-signal normalization range [L, U]; they are
optional but required for AGM robustness.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

log = logging.getLogger("twtl")

_GRID_RTOL = 1e-9


@dataclass(frozen=True)
class NormalizationBounds:
    """Per-signal range [lo, hi] used to map margins into [-1, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"normalization bounds require lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class PredicateSpec:
    """Half-space atom ``signal >= sigma`` or ``signal <= sigma``.

    The margin is the signed distance h(o) - sigma (flipped for <=); it is
    positive exactly when the atom holds.
    """

    name: str
    signal: str
    op: str  # ">=" | "<="
    sigma: float
    bounds: NormalizationBounds | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be non-empty")
        if self.op not in (">=", "<="):
            raise ValueError(f"unsupported predicate op {self.op!r}")
        if self.bounds is not None and not (self.bounds.lo <= self.sigma <= self.bounds.hi):
            raise ValueError(
                f"atom {self.name}: sigma={self.sigma} outside bounds "
                f"[{self.bounds.lo}, {self.bounds.hi}]")

    def margin_of(self, value: float) -> float:
        return value - self.sigma if self.op == ">=" else self.sigma - value

    def eta_margin_of(self, value: float) -> float:
        """Normalized margin in [eta_min, eta_max]; values are clamped to [L, U]."""
        b = self._require_bounds()
        if value < b.lo or value > b.hi:
            log.warning("atom %s: sample %g outside bounds [%g, %g], clamping",
                        self.name, value, b.lo, b.hi)
            value = min(max(value, b.lo), b.hi)
        return self.margin_of(value) / (b.hi - b.lo)

    def eta_extremes(self) -> tuple[float, float]:
        """(eta_min, eta_max): the attainable range of eta_margin_of."""
        b = self._require_bounds()
        span = b.hi - b.lo
        if self.op == ">=":
            return (b.lo - self.sigma) / span, (b.hi - self.sigma) / span
        return (self.sigma - b.hi) / span, (self.sigma - b.lo) / span

    def _require_bounds(self) -> NormalizationBounds:
        if self.bounds is None:
            raise ValueError(f"atom {self.name}: normalization bounds required for AGM robustness")
        return self.bounds


class PredicateTable:
    """Name-keyed map of predicate atoms."""

    def __init__(self, specs: Iterable[PredicateSpec] = ()):
        self._specs: dict[str, PredicateSpec] = {}
        for spec in specs:
            self.add(spec)

    def add(self, spec: PredicateSpec) -> None:
        if spec.name in self._specs:
            raise ValueError(f"duplicate atom {spec.name}")
        self._specs[spec.name] = spec

    def __contains__(self, name: str) -> bool:
        return name in self._specs

    def __getitem__(self, name: str) -> PredicateSpec:
        try:
            return self._specs[name]
        except KeyError:
            raise KeyError(f"unresolved atom {name}") from None

    def __iter__(self):
        return iter(self._specs.values())

    def __len__(self) -> int:
        return len(self._specs)

    @property
    def names(self) -> list[str]:
        return list(self._specs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PredicateTable":
        atoms = data.get("atoms")
        if not isinstance(atoms, Mapping):
            raise ValueError('predicate config must contain an "atoms" object')
        table = cls()
        for name, entry in atoms.items():
            bounds = None
            if "min" in entry or "max" in entry:
                bounds = NormalizationBounds(float(entry["min"]), float(entry["max"]))
            table.add(PredicateSpec(
                name=name,
                signal=str(entry["signal"]),
                op=str(entry["op"]),
                sigma=float(entry["sigma"]),
                bounds=bounds,
            ))
        return table

    @classmethod
    def from_json(cls, path) -> "PredicateTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        atoms = {}
        for spec in self:
            entry = {"signal": spec.signal, "op": spec.op, "sigma": spec.sigma}
            if spec.bounds is not None:
                entry["min"] = spec.bounds.lo
                entry["max"] = spec.bounds.hi
            atoms[spec.name] = entry
        return {"atoms": atoms}


@dataclass(frozen=True)
class Word:
    """Finite, uniformly sampled multi-signal trace. Sample k is at t0 + k*dt."""

    dt: float
    signals: Mapping[str, tuple[float, ...]]
    t0: float = 0.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if not self.signals:
            raise ValueError("word needs at least one signal")
        object.__setattr__(self, "signals",
                           {name: tuple(vals) for name, vals in self.signals.items()})
        lengths = {len(vals) for vals in self.signals.values()}
        if len(lengths) != 1:
            raise ValueError(f"signals have mismatched lengths: {sorted(lengths)}")
        for name, vals in self.signals.items():
            for v in vals:
                if not math.isfinite(v):
                    raise ValueError(f"signal {name}: non-finite sample {v}")

    @property
    def n(self) -> int:
        return len(next(iter(self.signals.values())))

    def time_at(self, k: int) -> float:
        return self.t0 + k * self.dt

    def index_of(self, t: float) -> int:
        """Sample index of grid time t; rejects off-grid times."""
        k = (t - self.t0) / self.dt
        r = round(k)
        if abs(k - r) > _GRID_RTOL:
            raise ValueError(f"time {t} is off the sampling grid (t0={self.t0}, dt={self.dt})")
        return int(r)

    def value(self, signal: str, k: int) -> float:
        vals = self.signals.get(signal)
        if vals is None:
            raise KeyError(f"unknown signal {signal}")
        if not 0 <= k < len(vals):
            raise IndexError(f"sample index {k} out of range [0, {len(vals)})")
        return vals[k]

    def slice(self, t1: float, t2: float) -> "Word":
        """Subword over grid times [t1, t2]; empty when t2 < t1."""
        i = self.index_of(t1)
        j = self.index_of(t2)
        if i < 0 or j > self.n - 1:
            raise ValueError(f"slice [{t1}, {t2}] outside word span")
        stop = max(j + 1, i)
        return Word(self.dt, {name: vals[i:stop] for name, vals in self.signals.items()},
                    t0=t1)

    def prefix(self, length: int) -> "Word":
        """First `length` samples."""
        return Word(self.dt, {name: vals[:length] for name, vals in self.signals.items()},
                    t0=self.t0)


def margin(word: Word, atom: PredicateSpec, k: int) -> float:
    """Signed satisfaction distance of `atom` at sample k; positive iff it holds."""
    return atom.margin_of(word.value(atom.signal, k))


def eta_margin(word: Word, atom: PredicateSpec, k: int) -> float:
    """Normalized margin at sample k, in [eta_min, eta_max] suggested by atom bounds."""
    return atom.eta_margin_of(word.value(atom.signal, k))


def load_trace(path, dt_expected: float | None = None) -> Word:
    """Load a trace CSV and verify uniform sampling."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: no samples") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "time" or len(header) < 2:
            raise ValueError(f"{path}: header must be 'time,<sig1>,...', got {header}")
        names = header[1:]
        times: list[float] = []
        columns: list[list[float]] = [[] for _ in names]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: unparsable number in {row}") from None
            times.append(values[0])
            for col, v in zip(columns, values[1:]):
                col.append(v)
    if not times:
        raise ValueError(f"{path}: no samples")
    if len(times) == 1:
        dt = dt_expected if dt_expected is not None else 1.0
    else:
        dt = (times[-1] - times[0]) / (len(times) - 1)
        if dt <= 0:
            raise ValueError(f"{path}: timestamps must be strictly increasing")
        tol = _GRID_RTOL * max(1.0, abs(dt)) * len(times)
        for k, t in enumerate(times):
            if abs(t - (times[0] + k * dt)) > tol:
                raise ValueError(f"{path}: non-uniform timestamps (row {k + 2}: {t})")
    if dt_expected is not None and abs(dt - dt_expected) > _GRID_RTOL * max(1.0, dt_expected):
        raise ValueError(f"{path}: step {dt:g} does not match expected dt={dt_expected:g}")
    return Word(dt, dict(zip(names, map(tuple, columns))), t0=times[0])
