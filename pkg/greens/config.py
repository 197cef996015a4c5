"""Run configuration, divisor input and expected-expression files."""
from __future__ import annotations

import json
import logging
import math
import os
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from sympy import isprime


from greens.cocycle import AlgebraicExpr, Factor
from greens.errors import ConfigError, ExpressionParseError, FormError
from greens.padic import QuadField
from greens.quadforms import QuadForm, RMDivisor

logger = logging.getLogger("greens.config")

# Defaults
DEFAULT_P = 3
DEFAULT_K = 4
DEFAULT_PRECISION = 30
DEFAULT_BRANCH = 0
DEFAULT_LOSS_BUDGET = 2
DEFAULT_PIN = 1
BRANCH_SAMPLES = (0, 1, None)  # None stands for L = p

STOP_MARGIN = 2
SERIES_MARGIN = 5
GUARD_BASE = 10

PREFACTOR_PATTERN = re.compile(r"^(?P<r>[-+]?\d+(?:/\d+)?)(?:/sqrt:(?P<q>-?\d+))?$")
FACTOR_PATTERN = re.compile(r"^m=(?P<m>-?\d+)\s+x=(?P<x>[-+]?\d+(?:/\d+)?)\s+exp=(?P<e>[-+]?\d+)$")


@dataclass(frozen=True)
class Config:
    p: int = DEFAULT_P
    k: int = DEFAULT_K
    N: int = DEFAULT_PRECISION
    M: int | None = None
    L_cut: int | None = None
    L_branch: Fraction = Fraction(DEFAULT_BRANCH)
    divisor: RMDivisor = dc_field(default_factory=RMDivisor)
    target: QuadForm | None = None
    expected: AlgebraicExpr | None = None
    guard_digits: int | None = None
    branch_pin: int = DEFAULT_PIN
    loss_budget: int = DEFAULT_LOSS_BUDGET
    checkpoint_dir: str | None = None

    @property
    def n(self):
        return self.k - 2

    @property
    def series_order(self):
        return self.M if self.M is not None else self.N + self.n + SERIES_MARGIN

    @property
    def level_cutoff(self):
        if self.L_cut is not None:
            return self.L_cut
        return math.ceil(2 * (self.N + STOP_MARGIN) / (self.n + 2)) + 2

    @property
    def guard(self):
        if self.guard_digits is not None:
            return self.guard_digits
        return self.n * self.level_cutoff // 2 + GUARD_BASE

    @property
    def working_precision(self):
        return self.N + self.guard

    @property
    def defect_tolerance(self):
        return self.N - self.loss_budget

    @property
    def stop_valuation(self):
        return self.N + STOP_MARGIN

    @property
    def field(self):
        return QuadField(self.p, self.working_precision, self.branch_pin)

    def branch_samples(self):
        return [Fraction(self.p if L is None else L) for L in BRANCH_SAMPLES]

    def validate(self):
        problems = []
        if self.p < 3 or not isprime(self.p):
            problems.append(f"p must be an odd prime, got {self.p}")
        if self.k < 4 or self.k % 2:
            problems.append(f"k must be even and at least 4, got {self.k}")
        if self.N < 1:
            problems.append(f"precision must be positive, got {self.N}")
        if self.M is not None and self.M <= self.n:
            problems.append(f"series order {self.M} must exceed n = {self.n}")
        if self.L_cut is not None and self.L_cut < 1:
            problems.append(f"level cutoff must be at least 1, got {self.L_cut}")
        if self.branch_pin not in (1, -1):
            problems.append(f"branch pin must be +1 or -1, got {self.branch_pin}")
        if self.guard_digits is not None and self.guard_digits < 0:
            problems.append(f"guard digits must be non-negative, got {self.guard_digits}")
        if not problems:
            for comp in self.divisor.components:
                form = comp.form
                if form.level(self.p) != 0 or not form.is_inert(self.p):
                    problems.append(f"divisor class {form.as_list()} (disc {form.disc}) is not inert at p={self.p}")
                if comp.parity not in (0, 1):
                    problems.append(f"parity of {form.as_list()} must be 0 or 1")
            if self.target is not None and (self.target.level(self.p) != 0 or not self.target.is_inert(self.p)):
                problems.append(f"target {self.target.as_list()} (disc {self.target.disc}) is not inert at p={self.p}")
        if problems:
            raise ConfigError(problems)
        return self


def _read_source(text_or_path):
    if os.path.exists(text_or_path):
        with open(text_or_path) as handle:
            return handle.read()
    return text_or_path


def _parse_entry(entry):
    if isinstance(entry, dict):
        return entry["multiplicity"], entry["form"], entry.get("parity", 0)
    if len(entry) == 2:
        return entry[0], entry[1], 0
    if len(entry) == 3:
        return entry[0], entry[1], entry[2]
    raise ValueError(f"divisor entry {entry!r} must have 2 or 3 items")


def parse_divisor(text, symmetrize=False):
    """Divisor from a JSON list of [m, [a, b, c]] / [m, [a, b, c], parity] / object entries."""
    try:
        raw = json.loads(text)
        entries = [_parse_entry(entry) for entry in raw]
        divisor = RMDivisor.from_entries(entries)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"cannot read divisor: {exc}") from exc
    except FormError as exc:
        raise ConfigError(f"bad divisor form: {exc}") from exc
    return divisor.symmetrized() if symmetrize else divisor


def load_divisor(text_or_path, symmetrize=False):
    return parse_divisor(_read_source(text_or_path), symmetrize)


def parse_form(text):
    try:
        values = json.loads(text)
        return QuadForm.from_list(values)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot read form {text!r}: {exc}") from exc
    except FormError as exc:
        raise ConfigError(f"bad target form: {exc}") from exc


def parse_expression(text):
    """Expected value from `prefactor:` and `factor:` lines; `#` starts a comment."""
    prefactor = None
    factors = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ExpressionParseError(f"expected 'key: value', got {line!r}", number)
        key, value = key.strip().lower(), value.strip()
        if key == "prefactor":
            if prefactor is not None:
                raise ExpressionParseError("prefactor given twice", number)
            match = PREFACTOR_PATTERN.match(value.replace(" ", ""))
            if not match:
                raise ExpressionParseError(f"bad prefactor {value!r}", number)
            q = match.group("q")
            prefactor = (Fraction(match.group("r")), int(q) if q else None)
        elif key == "factor":
            match = FACTOR_PATTERN.match(" ".join(value.split()))
            if not match:
                raise ExpressionParseError(f"bad factor {value!r}", number)
            m = int(match.group("m"))
            if m >= 0 and math.isqrt(m) ** 2 == m:
                raise ExpressionParseError(f"m={m} is a perfect square", number)
            factors.append(Factor(m, Fraction(match.group("x")), int(match.group("e"))))
        else:
            raise ExpressionParseError(f"unknown key {key!r}", number)
    if prefactor is None:
        raise ExpressionParseError("missing prefactor line")
    return AlgebraicExpr(prefactor[0], prefactor[1], tuple(factors))


def load_expression(path):
    try:
        with open(path) as handle:
            return parse_expression(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read expression file {path}: {exc}") from exc
