"""Hidden-variable state space for the two-party, two-setting, two-outcome scenario.

A hidden variable is one of the 16 deterministic strategies ``(a1, a2, b1, b2)``.
A model is a reference distribution ``P(lambda | A1, B1)`` plus a deviation
vector ``xi`` holding ``P(lambda | X, Y) - P(lambda | A1, B1)`` for the three
other setting pairs.

Every numeric container accepts either floats or :class:`fractions.Fraction`.
All-rational inputs are checked exactly; anything else is checked against
:data:`NORMALIZATION_TOL`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence, Union

Number = Union[float, Fraction, int]

NORMALIZATION_TOL = 1e-12
RESIDUAL_TOL = 1e-9
N_STRATEGIES = 16


class ModelError(ValueError):
    """A distribution or model violates normalization or positivity."""


class InvalidModelError(ModelError):
    """Raised when a model is used but one of its induced distributions is invalid."""

    def __init__(self, message: str, pair: "SettingPair | None" = None, index: int | None = None):
        super().__init__(message)
        self.pair = pair
        self.index = index


class ModelFormatError(ValueError):
    """Raised for malformed model documents (wrong shape, non-finite numbers)."""


class Party(enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"


class Setting(enum.Enum):
    A1 = (Party.ALICE, 1)
    A2 = (Party.ALICE, 2)
    B1 = (Party.BOB, 1)
    B2 = (Party.BOB, 2)

    @property
    def party(self) -> Party:
        return self.value[0]

    @property
    def index(self) -> int:
        return self.value[1]

    @classmethod
    def of(cls, party: Party, index: int) -> "Setting":
        for s in cls:
            if s.value == (party, index):
                return s
        raise ValueError(f"no setting {party.value}{index}")


class SettingPair(enum.Enum):
    A1B1 = (Setting.A1, Setting.B1)
    A1B2 = (Setting.A1, Setting.B2)
    A2B1 = (Setting.A2, Setting.B1)
    A2B2 = (Setting.A2, Setting.B2)

    @property
    def alice(self) -> Setting:
        return self.value[0]

    @property
    def bob(self) -> Setting:
        return self.value[1]

    @property
    def i(self) -> int:
        return self.alice.index

    @property
    def j(self) -> int:
        return self.bob.index

    @classmethod
    def of(cls, i: int, j: int) -> "SettingPair":
        return cls[f"A{i}B{j}"]

    @classmethod
    def parse(cls, text: str) -> "SettingPair":
        key = text.strip().upper().replace(",", "").replace(" ", "")
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown setting pair {text!r}; expected one of A1B1, A1B2, A2B1, A2B2") from None


REFERENCE_PAIR = SettingPair.A1B1
# Block order of the 48-vector and of the JSON "xi" object.
NON_REFERENCE_PAIRS: tuple[SettingPair, ...] = (SettingPair.A1B2, SettingPair.A2B1, SettingPair.A2B2)
ALL_PAIRS: tuple[SettingPair, ...] = tuple(SettingPair)


def _u(sign: int) -> int:
    return 0 if sign == 1 else 1


@dataclass(frozen=True)
class Strategy:
    """Deterministic outcome assignment to all four settings."""

    a1: int
    a2: int
    b1: int
    b2: int

    def __post_init__(self):
        for v in (self.a1, self.a2, self.b1, self.b2):
            if v not in (1, -1):
                raise ValueError(f"strategy outcomes must be +1 or -1, got {v!r}")

    @property
    def index(self) -> int:
        return 8 * _u(self.a1) + 4 * _u(self.a2) + 2 * _u(self.b1) + _u(self.b2)

    @classmethod
    def from_index(cls, index: int) -> "Strategy":
        if not 0 <= index < N_STRATEGIES:
            raise ValueError(f"strategy index must be in 0..15, got {index}")
        bits = [(index >> k) & 1 for k in (3, 2, 1, 0)]
        return cls(*(1 - 2 * b for b in bits))

    def signs(self) -> tuple[int, int, int, int]:
        return (self.a1, self.a2, self.b1, self.b2)


STRATEGIES: tuple[Strategy, ...] = tuple(Strategy.from_index(k) for k in range(N_STRATEGIES))


def outcome(strategy: Strategy, setting: Setting) -> int:
    """Outcome (+1/-1) that ``strategy`` assigns to ``setting``."""
    if setting is Setting.A1:
        return strategy.a1
    if setting is Setting.A2:
        return strategy.a2
    if setting is Setting.B1:
        return strategy.b1
    return strategy.b2


# Outcome tables indexed [setting][lambda]; hot loops read these instead of calling outcome().
OUTCOMES: dict[Setting, tuple[int, ...]] = {
    s: tuple(outcome(lam, s) for lam in STRATEGIES) for s in Setting
}


def is_exact(values: Iterable) -> bool:
    """True when every value is an int or Fraction (bools excluded)."""
    return all(isinstance(v, Rational) and not isinstance(v, bool) for v in values)


def _check_number(v, where: str):
    if isinstance(v, bool) or not isinstance(v, (int, float, Fraction)):
        raise ModelFormatError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, float) and not math.isfinite(v):
        raise ModelFormatError(f"{where}: non-finite value {v!r}")


def _sum(values: Sequence[Number]) -> Number:
    if is_exact(values):
        return sum(values, Fraction(0))
    return math.fsum(float(v) for v in values)


def _is_zero(value: Number, exact: bool, tol: float = NORMALIZATION_TOL) -> bool:
    return value == 0 if exact else abs(value) <= tol


@dataclass(frozen=True)
class Distribution:
    """Probability vector over the 16 strategies, in index order."""

    p: tuple

    def __post_init__(self):
        p = tuple(self.p)
        object.__setattr__(self, "p", p)
        if len(p) != N_STRATEGIES:
            raise ModelError(f"distribution needs {N_STRATEGIES} entries, got {len(p)}")
        for k, v in enumerate(p):
            _check_number(v, f"p[{k}]")
        exact = is_exact(p)
        for k, v in enumerate(p):
            if v < 0 and (exact or v < -NORMALIZATION_TOL):
                raise ModelError(f"negative probability p[{k}] = {v}")
        total = _sum(p)
        if not _is_zero(total - 1, exact):
            raise ModelError(f"distribution sums to {total}, not 1")

    def __getitem__(self, k: int) -> Number:
        return self.p[k]

    def __iter__(self):
        return iter(self.p)

    def __len__(self) -> int:
        return N_STRATEGIES

    @property
    def exact(self) -> bool:
        return is_exact(self.p)

    @classmethod
    def uniform(cls, exact: bool = True) -> "Distribution":
        v = Fraction(1, 16) if exact else 1 / 16
        return cls((v,) * N_STRATEGIES)

    @classmethod
    def point(cls, index: int) -> "Distribution":
        return cls(tuple(Fraction(int(k == index)) for k in range(N_STRATEGIES)))


@dataclass(frozen=True)
class XiVector:
    """Deviations of the three non-reference distributions from the reference.

    ``blocks`` follows :data:`NON_REFERENCE_PAIRS`. Block sums are not enforced
    here; :func:`validate` reports them.
    """

    blocks: tuple

    def __post_init__(self):
        if isinstance(self.blocks, Mapping):
            blocks = _blocks_from_mapping(self.blocks)
        else:
            blocks = tuple(tuple(b) for b in self.blocks)
        if len(blocks) != len(NON_REFERENCE_PAIRS):
            raise ModelFormatError(f"xi needs 3 blocks, got {len(blocks)}")
        for pair, b in zip(NON_REFERENCE_PAIRS, blocks):
            if len(b) != N_STRATEGIES:
                raise ModelFormatError(f"xi block {pair.name} needs 16 entries, got {len(b)}")
            for k, v in enumerate(b):
                _check_number(v, f"xi[{pair.name}][{k}]")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def zero(cls, exact: bool = True) -> "XiVector":
        z = Fraction(0) if exact else 0.0
        return cls(((z,) * N_STRATEGIES,) * 3)

    @classmethod
    def from_flat(cls, values: Sequence[Number]) -> "XiVector":
        values = tuple(values)
        if len(values) != 3 * N_STRATEGIES:
            raise ModelFormatError(f"flat xi needs 48 entries, got {len(values)}")
        return cls(tuple(values[16 * b:16 * (b + 1)] for b in range(3)))

    def block(self, pair: SettingPair) -> tuple:
        if pair is REFERENCE_PAIR:
            return (0,) * N_STRATEGIES
        return self.blocks[NON_REFERENCE_PAIRS.index(pair)]

    def flat(self) -> tuple:
        return self.blocks[0] + self.blocks[1] + self.blocks[2]

    def as_dict(self) -> dict[SettingPair, tuple]:
        return dict(zip(NON_REFERENCE_PAIRS, self.blocks))

    def scale(self, factor: Number) -> "XiVector":
        return XiVector(tuple(tuple(factor * v for v in b) for b in self.blocks))

    def __add__(self, other: "XiVector") -> "XiVector":
        return XiVector.from_flat([x + y for x, y in zip(self.flat(), other.flat())])

    def __sub__(self, other: "XiVector") -> "XiVector":
        return XiVector.from_flat([x - y for x, y in zip(self.flat(), other.flat())])

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.flat())


def _blocks_from_mapping(blocks: Mapping) -> tuple:
    out = []
    for pair in NON_REFERENCE_PAIRS:
        if pair in blocks:
            out.append(tuple(blocks[pair]))
        elif pair.name in blocks:
            out.append(tuple(blocks[pair.name]))
        else:
            raise ModelFormatError(f"xi is missing block {pair.name}")
    extra = set(blocks) - set(NON_REFERENCE_PAIRS) - {p.name for p in NON_REFERENCE_PAIRS}
    if extra:
        raise ModelFormatError(f"unexpected xi blocks: {sorted(map(str, extra))}")
    return tuple(out)


@dataclass(frozen=True)
class HVModel:
    """Reference distribution ``P(lambda|A1,B1)`` and deviation vector ``xi``."""

    reference: Distribution
    xi: XiVector

    @property
    def exact(self) -> bool:
        return self.reference.exact and is_exact(self.xi.flat())

    def raw_distribution(self, pair: SettingPair) -> tuple:
        """Reference plus the pair's block, without validity checks."""
        if pair is REFERENCE_PAIR:
            return self.reference.p
        return tuple(r + x for r, x in zip(self.reference.p, self.xi.block(pair)))

    def with_reference_only(self) -> "HVModel":
        return HVModel(self.reference, XiVector.zero(exact=is_exact(self.reference.p)))


@dataclass(frozen=True)
class Violation:
    kind: str  # "block-sum" or "negative-probability"
    pair: SettingPair
    index: int | None
    value: Number

    def __str__(self) -> str:
        if self.kind == "block-sum":
            return f"xi block {self.pair.name} sums to {self.value}, not 0"
        return f"P(lambda={self.index}|{self.pair.name}) = {self.value} < 0"


def validate(model: HVModel) -> list[Violation]:
    """Every violated normalization or positivity constraint; empty iff valid."""
    report = []
    exact = model.exact
    for pair in NON_REFERENCE_PAIRS:
        s = _sum(model.xi.block(pair))
        if not _is_zero(s, exact):
            report.append(Violation("block-sum", pair, None, s))
        for k, v in enumerate(model.raw_distribution(pair)):
            if v < 0 and (exact or v < -NORMALIZATION_TOL):
                report.append(Violation("negative-probability", pair, k, v))
    return report


def is_valid(model: HVModel) -> bool:
    return not validate(model)


def require_valid(model: HVModel) -> None:
    report = validate(model)
    if report:
        first = report[0]
        raise InvalidModelError(
            "invalid model: " + "; ".join(str(v) for v in report), first.pair, first.index
        )


def distribution_for(model: HVModel, pair: SettingPair) -> Distribution:
    """``P(lambda | X, Y)`` for the given setting pair."""
    if pair is REFERENCE_PAIR:
        return model.reference
    p = model.raw_distribution(pair)
    exact = model.exact
    for k, v in enumerate(p):
        if v < 0 and (exact or v < -NORMALIZATION_TOL):
            raise InvalidModelError(f"P(lambda={k}|{pair.name}) = {v} is negative", pair, k)
    try:
        return Distribution(p)
    except ModelError as exc:
        raise InvalidModelError(f"{pair.name}: {exc}", pair, None) from exc


def xi_from_distributions(d11: Distribution, d12: Distribution, d21: Distribution, d22: Distribution) -> HVModel:
    """Model whose four induced distributions are the given ones."""
    ds = [d if isinstance(d, Distribution) else Distribution(d) for d in (d11, d12, d21, d22)]
    ref = ds[0]
    blocks = tuple(tuple(x - r for x, r in zip(d.p, ref.p)) for d in ds[1:])
    return HVModel(ref, XiVector(blocks))


def model_from_distributions(dists: Mapping[SettingPair, Distribution]) -> HVModel:
    return xi_from_distributions(*(dists[p] for p in ALL_PAIRS))


# -- JSON model document ---------------------------------------------------


def _encode(v: Number, exact: bool):
    if isinstance(v, Fraction):
        if exact:
            return str(v) if v.denominator != 1 else int(v)
        return float(v)
    if isinstance(v, int):
        return v
    return float(v)


def model_to_dict(model: HVModel, exact: bool = False) -> dict:
    """JSON-ready document. ``exact=True`` writes Fractions as ``"p/q"`` strings."""
    return {
        "reference": [_encode(v, exact) for v in model.reference.p],
        "xi": {p.name: [_encode(v, exact) for v in b] for p, b in model.xi.as_dict().items()},
    }


def _decode_number(v, where: str) -> Number:
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise ModelFormatError(f"{where}: cannot parse {v!r} as a rational") from None
    _check_number(v, where)
    return v


def _decode_array(arr, where: str) -> tuple:
    if not isinstance(arr, list):
        raise ModelFormatError(f"{where}: expected an array of 16 numbers")
    if len(arr) != N_STRATEGIES:
        raise ModelFormatError(f"{where}: expected 16 entries, got {len(arr)}")
    return tuple(_decode_number(v, f"{where}[{k}]") for k, v in enumerate(arr))


def model_from_dict(doc) -> HVModel:
    """Parse a model document.

    Shape errors raise :class:`ModelFormatError`; a reference that is not a
    probability distribution raises :class:`ModelError`.
    """
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    missing = {"reference", "xi"} - set(doc)
    if missing:
        raise ModelFormatError(f"model document missing keys: {sorted(missing)}")
    ref = _decode_array(doc["reference"], "reference")
    xi_doc = doc["xi"]
    if not isinstance(xi_doc, dict):
        raise ModelFormatError("xi must be an object keyed by A1B2, A2B1, A2B2")
    blocks = {}
    for key, arr in xi_doc.items():
        blocks[key] = _decode_array(arr, f"xi.{key}")
    xi = XiVector(blocks)
    return HVModel(Distribution(ref), xi)


def _reject_constant(name: str):
    raise ModelFormatError(f"non-finite number {name} in model document")


def loads_model(text: str) -> HVModel:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"malformed JSON: {exc}") from exc
    return model_from_dict(doc)


def dumps_model(model: HVModel, exact: bool = False, indent: int | None = None) -> str:
    return json.dumps(model_to_dict(model, exact=exact), indent=indent)


def load_model(path) -> HVModel:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def save_model(model: HVModel, path, exact: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model, exact=exact, indent=2))
        fh.write("\n")
