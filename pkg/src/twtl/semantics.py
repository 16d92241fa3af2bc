"""Offline TWTL evaluation over complete words.

Three semantics share one recursion over index windows [i, j] of the word:

* Boolean satisfaction (hold requires a strictly positive margin at each of
  the d+1 window samples; concatenation is the all-splits disjunction),
* robustness `rho` (min/max over the same windows, bottom value when a
  window is too short),
* AGM robustness `eta` (arithmetic-geometric means, always in [-1, 1]).

The recursion is memoized per evaluation on (node, i, j); the oracle module
carries the unmemoized literal transcription used to cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .formula import And, Concat, Formula, HoldAtom, Not, Or, Within, steps
from .trace import PredicateTable, Word


@dataclass(frozen=True)
class EvalConfig:
    """Evaluation parameters; rho_bot/rho_top must dominate attainable margins."""

    rho_bot: float = -10.0
    rho_top: float = 10.0
    dt: float = 1.0

    def __post_init__(self):
        if not (self.rho_bot < 0 < self.rho_top):
            raise ValueError("require rho_bot < 0 < rho_top")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")


DEFAULT_CONFIG = EvalConfig()

_EPS = 1e-12


def _check_agm_args(values: Sequence[float], what: str) -> list[float]:
    vals = list(values)
    if not vals:
        raise ValueError(f"{what} of an empty sequence")
    for v in vals:
        if not -1.0 - _EPS <= v <= 1.0 + _EPS:
            raise ValueError(f"{what}: value {v} outside [-1, 1]")
    return vals


def _clamp_unit(v: float) -> float:
    return -1.0 if v < -1.0 else 1.0 if v > 1.0 else v


def agm_or(values: Sequence[float]) -> float:
    """AGM disjunction: geometric blend when all negative, mean of positive parts otherwise."""
    vals = _check_agm_args(values, "agm_or")
    n = len(vals)
    if all(v < 0.0 for v in vals):
        return _clamp_unit(1.0 - math.prod(1.0 - v for v in vals) ** (1.0 / n))
    return _clamp_unit(sum(v for v in vals if v > 0.0) / n)


def agm_and(values: Sequence[float]) -> float:
    """AGM conjunction: geometric blend when all positive, mean of negative parts otherwise."""
    vals = _check_agm_args(values, "agm_and")
    n = len(vals)
    if all(v > 0.0 for v in vals):
        return _clamp_unit(math.prod(1.0 + v for v in vals) ** (1.0 / n) - 1.0)
    return _clamp_unit(sum(v for v in vals if v < 0.0) / n)


class Evaluator:
    """Shared recursion for one (word, formula-set) evaluation; memoized."""

    def __init__(self, word: Word, table: PredicateTable, cfg: EvalConfig = DEFAULT_CONFIG):
        if word.n < 1:
            raise ValueError("cannot evaluate an empty word")
        self.word = word
        self.table = table
        self.cfg = cfg
        self._margins: dict[str, list[float]] = {}
        self._eta_margins: dict[str, list[float]] = {}
        self._memo_bool: dict[tuple, bool] = {}
        self._memo_rho: dict[tuple, float] = {}
        self._memo_eta: dict[tuple, float] = {}

    # -- per-sample margins, cached per atom ------------------------------

    def _raw_margins(self, atom: str) -> list[float]:
        got = self._margins.get(atom)
        if got is None:
            spec = self.table[atom]
            vals = self.word.signals[spec.signal]
            got = [spec.margin_of(v) for v in vals]
            self._margins[atom] = got
        return got

    def _raw_eta_margins(self, atom: str) -> list[float]:
        got = self._eta_margins.get(atom)
        if got is None:
            spec = self.table[atom]
            vals = self.word.signals[spec.signal]
            got = [spec.eta_margin_of(v) for v in vals]
            self._eta_margins[atom] = got
        return got

    def margin(self, f: HoldAtom, k: int) -> float:
        m = self._raw_margins(f.atom)[k]
        return -m if f.negated else m

    def eta_margin(self, f: HoldAtom, k: int) -> float:
        m = self._raw_eta_margins(f.atom)[k]
        return -m if f.negated else m

    def _steps(self, duration: float) -> int:
        return steps(duration, self.cfg.dt)

    # -- Boolean satisfaction ---------------------------------------------

    def bool_sat(self, f: Formula, i: int, j: int) -> bool:
        key = (id(f), i, j)
        got = self._memo_bool.get(key)
        if got is None:
            got = self._bool(f, i, j)
            self._memo_bool[key] = got
        return got

    def _bool(self, f: Formula, i: int, j: int) -> bool:
        if isinstance(f, HoldAtom):
            if j - i < f.d:
                return False
            return all(self.margin(f, k) > 0.0 for k in range(i, i + f.d + 1))
        if isinstance(f, And):
            return self.bool_sat(f.lhs, i, j) and self.bool_sat(f.rhs, i, j)
        if isinstance(f, Or):
            return self.bool_sat(f.lhs, i, j) or self.bool_sat(f.rhs, i, j)
        if isinstance(f, Not):
            return not self.bool_sat(f.sub, i, j)
        if isinstance(f, Concat):
            return any(self.bool_sat(f.lhs, i, t) and self.bool_sat(f.rhs, t + 1, j)
                       for t in range(i, j))
        if isinstance(f, Within):
            bs = self._steps(f.b)
            if j - i < bs:
                return False
            as_ = self._steps(f.a)
            return any(self.bool_sat(f.sub, t, i + bs) for t in range(i + as_, i + bs + 1))
        raise TypeError(f"not a Formula: {f!r}")

    # -- robustness rho -----------------------------------------------------

    def rho(self, f: Formula, i: int, j: int) -> float:
        key = (id(f), i, j)
        got = self._memo_rho.get(key)
        if got is None:
            got = self._rho(f, i, j)
            self._memo_rho[key] = got
        return got

    def _rho(self, f: Formula, i: int, j: int) -> float:
        if isinstance(f, HoldAtom):
            if j - i < f.d:
                return self.cfg.rho_bot
            return min(self.margin(f, k) for k in range(i, i + f.d + 1))
        if isinstance(f, And):
            return min(self.rho(f.lhs, i, j), self.rho(f.rhs, i, j))
        if isinstance(f, Or):
            return max(self.rho(f.lhs, i, j), self.rho(f.rhs, i, j))
        if isinstance(f, Not):
            return -self.rho(f.sub, i, j)
        if isinstance(f, Concat):
            best = self.cfg.rho_bot
            for t in range(i, j):
                split = min(self.rho(f.lhs, i, t), self.rho(f.rhs, t + 1, j))
                if split > best:
                    best = split
            return best
        if isinstance(f, Within):
            bs = self._steps(f.b)
            if j - i < bs:
                return self.cfg.rho_bot
            as_ = self._steps(f.a)
            return max(self.rho(f.sub, t, i + bs) for t in range(i + as_, i + bs + 1))
        raise TypeError(f"not a Formula: {f!r}")

    # -- AGM robustness eta -------------------------------------------------

    def eta(self, f: Formula, i: int, j: int) -> float:
        key = (id(f), i, j)
        got = self._memo_eta.get(key)
        if got is None:
            got = self._eta(f, i, j)
            self._memo_eta[key] = got
        return got

    def _eta(self, f: Formula, i: int, j: int) -> float:
        if isinstance(f, HoldAtom):
            if j - i < f.d:
                return -1.0
            return agm_and([self.eta_margin(f, k) for k in range(i, i + f.d + 1)])
        if isinstance(f, And):
            return agm_and([self.eta(f.lhs, i, j), self.eta(f.rhs, i, j)])
        if isinstance(f, Or):
            return agm_or([self.eta(f.lhs, i, j), self.eta(f.rhs, i, j)])
        if isinstance(f, Not):
            return -self.eta(f.sub, i, j)
        if isinstance(f, Concat):
            if i == j:
                return -1.0
            return agm_or([agm_and([self.eta(f.lhs, i, t), self.eta(f.rhs, t + 1, j)])
                           for t in range(i, j)])
        if isinstance(f, Within):
            bs = self._steps(f.b)
            if j - i < bs:
                return -1.0
            as_ = self._steps(f.a)
            return agm_or([self.eta(f.sub, t, i + bs) for t in range(i + as_, i + bs + 1)])
        raise TypeError(f"not a Formula: {f!r}")


def bool_sat(word: Word, f: Formula, table: PredicateTable,
             cfg: EvalConfig = DEFAULT_CONFIG) -> bool:
    """Boolean satisfaction of `f` by the whole word."""
    return Evaluator(word, table, cfg).bool_sat(f, 0, word.n - 1)


def rho(word: Word, f: Formula, table: PredicateTable,
        cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Robustness degree; positive implies satisfaction, negative implies violation."""
    return Evaluator(word, table, cfg).rho(f, 0, word.n - 1)


def eta(word: Word, f: Formula, table: PredicateTable,
        cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """AGM robustness in [-1, 1]; sign-equivalent to rho. Needs atom bounds."""
    return Evaluator(word, table, cfg).eta(f, 0, word.n - 1)
