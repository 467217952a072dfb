"""Attribute schemas, binary-encoded product designs, and candidate design sets.

A product is a combination of discrete attribute levels.  Designs are one-hot
encoded per attribute block ("full" layout, dimension ``D_full``).  Because a
pairwise-choice likelihood only identifies utility *differences*, estimation
works in a constrained layout of dimension ``D = D_full - n_attributes`` in
which the last level of every attribute is pinned to zero part-worth and its
coordinate is dropped.  Utility gaps between designs are identical in the two
layouts.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np


class DesignSpaceError(ValueError):
    """Raised for malformed schemas, designs, or design-space files."""


@dataclass(frozen=True)
class Attribute:
    name: str
    unit: str
    levels: tuple[str, ...]

    def __post_init__(self):
        if len(self.levels) < 2:
            raise DesignSpaceError(f"attribute {self.name!r} needs >= 2 levels")


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attributes plus the price attribute and its per-level prices."""

    attributes: tuple[Attribute, ...]
    price_attribute: int
    price_values: tuple[float, ...]

    def __post_init__(self):
        if not self.attributes:
            raise DesignSpaceError("schema needs at least one attribute")
        if not 0 <= self.price_attribute < len(self.attributes):
            raise DesignSpaceError(
                f"price_attribute {self.price_attribute} out of range")
        n_price_levels = len(self.attributes[self.price_attribute].levels)
        if len(self.price_values) != n_price_levels:
            raise DesignSpaceError(
                f"price_values has {len(self.price_values)} entries, "
                f"price attribute has {n_price_levels} levels")

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @property
    def level_counts(self) -> tuple[int, ...]:
        return tuple(len(a.levels) for a in self.attributes)

    @property
    def full_dim(self) -> int:
        """Length of the one-hot encoding (sum of level counts)."""
        return sum(self.level_counts)

    @property
    def dim(self) -> int:
        """Dimension of the identifiability-constrained layout."""
        return sum(n - 1 for n in self.level_counts)

    def full_blocks(self) -> list[slice]:
        """Per-attribute slices into the full one-hot layout."""
        out, start = [], 0
        for n in self.level_counts:
            out.append(slice(start, start + n))
            start += n
        return out

    def constrained_blocks(self) -> list[slice]:
        """Per-attribute slices into the constrained layout."""
        out, start = [], 0
        for n in self.level_counts:
            out.append(slice(start, start + n - 1))
            start += n - 1
        return out

    def validate_levels(self, level_index) -> tuple[int, ...]:
        idx = tuple(int(i) for i in level_index)
        if len(idx) != self.n_attributes:
            raise DesignSpaceError(
                f"expected {self.n_attributes} level indices, got {len(idx)}")
        for a, (i, n) in enumerate(zip(idx, self.level_counts)):
            if not 0 <= i < n:
                raise DesignSpaceError(
                    f"level index {i} out of range for attribute "
                    f"{self.attributes[a].name!r} ({n} levels)")
        return idx

    def encode(self, level_index) -> np.ndarray:
        """One-hot encode a tuple of level indices (full layout)."""
        idx = self.validate_levels(level_index)
        vec = np.zeros(self.full_dim)
        for block, i in zip(self.full_blocks(), idx):
            vec[block.start + i] = 1.0
        return vec

    def decode(self, vector) -> tuple[int, ...]:
        """Invert :meth:`encode`.  The vector must be one-hot per block."""
        vec = np.asarray(vector, dtype=float)
        if vec.shape != (self.full_dim,):
            raise DesignSpaceError(
                f"expected vector of length {self.full_dim}, got {vec.shape}")
        idx = []
        for block in self.full_blocks():
            chunk = vec[block]
            ones = np.flatnonzero(chunk == 1.0)
            if len(ones) != 1 or chunk.sum() != 1.0:
                raise DesignSpaceError("vector is not one-hot per attribute block")
            idx.append(int(ones[0]))
        return tuple(idx)

    def constrain_design(self, full_vector) -> np.ndarray:
        """Drop the last-level coordinate of each attribute block.

        For one-hot design vectors this loses no information relevant to
        utilities, because the constrained part-worth of every last level
        is zero by construction.
        """
        vec = np.asarray(full_vector, dtype=float)
        if vec.shape != (self.full_dim,):
            raise DesignSpaceError(
                f"expected vector of length {self.full_dim}, got {vec.shape}")
        return np.concatenate([vec[b][:-1] for b in self.full_blocks()])

    def constrain_partworths(self, full_values) -> np.ndarray:
        """Shift each block so its last level is zero, then drop it.

        The shift changes every design's utility by the same per-attribute
        constant, so all pairwise utility gaps are preserved.
        """
        vec = np.asarray(full_values, dtype=float)
        if vec.shape != (self.full_dim,):
            raise DesignSpaceError(
                f"expected vector of length {self.full_dim}, got {vec.shape}")
        parts = []
        for b in self.full_blocks():
            block = vec[b] - vec[b][-1]
            parts.append(block[:-1])
        return np.concatenate(parts)

    def expand_partworths(self, constrained) -> np.ndarray:
        """Inverse of :meth:`constrain_partworths` with last levels at zero."""
        vec = np.asarray(constrained, dtype=float)
        if vec.shape != (self.dim,):
            raise DesignSpaceError(
                f"expected vector of length {self.dim}, got {vec.shape}")
        parts = []
        for cb in self.constrained_blocks():
            parts.append(np.concatenate([vec[cb], [0.0]]))
        return np.concatenate(parts)

    def level_labels(self, level_index) -> list[tuple[str, str, str]]:
        """(attribute name, unit, level label) rows for display."""
        idx = self.validate_levels(level_index)
        return [(a.name, a.unit, a.levels[i])
                for a, i in zip(self.attributes, idx)]


@dataclass(frozen=True)
class Design:
    """A concrete product: level indices, one-hot encoding, price and cost."""

    level_index: tuple[int, ...]
    encoding: np.ndarray
    price: float
    cost: float

    def __post_init__(self):
        if self.cost < 0:
            raise DesignSpaceError(f"negative cost {self.cost} for {self.level_index}")

    @property
    def margin(self) -> float:
        return self.price - self.cost


def make_design(schema: AttributeSchema, level_index, cost: float) -> Design:
    idx = schema.validate_levels(level_index)
    price = float(schema.price_values[idx[schema.price_attribute]])
    return Design(idx, schema.encode(idx), price, float(cost))


class CostModel:
    """Either explicit per-design costs or an additive per-level table."""

    def __init__(self, kind: str, table):
        if kind not in ("explicit", "additive"):
            raise DesignSpaceError(f"unknown cost model kind {kind!r}")
        self.kind = kind
        self.table = table

    @classmethod
    def from_dict(cls, payload, schema: AttributeSchema) -> "CostModel":
        if not isinstance(payload, dict) or len(payload) != 1:
            raise DesignSpaceError("cost_model must be {'explicit': [...]} or "
                                   "{'additive': [[...], ...]}")
        kind, table = next(iter(payload.items()))
        model = cls(kind, table)
        if kind == "additive":
            if len(table) != schema.n_attributes:
                raise DesignSpaceError("additive cost table needs one row per attribute")
            for row, n in zip(table, schema.level_counts):
                if len(row) != n:
                    raise DesignSpaceError("additive cost row length must match level count")
        return model

    def cost_of(self, level_index, position: int | None = None) -> float:
        if self.kind == "additive":
            return float(sum(row[i] for row, i in zip(self.table, level_index)))
        if position is None:
            raise DesignSpaceError("explicit cost model needs the design position")
        return float(self.table[position])

    def to_dict(self):
        return {self.kind: self.table}


class DesignSpace:
    """The candidate set, its schema, the cost model and the competitor.

    Immutable after construction; safe to share across sessions and workers.
    """

    def __init__(self, schema: AttributeSchema, designs, competitor: Design | None,
                 cost_model: CostModel):
        designs = tuple(designs)
        if len(designs) < 2:
            raise DesignSpaceError(f"need at least 2 candidate designs, got {len(designs)}")
        seen = set()
        for d in designs:
            if d.level_index in seen:
                raise DesignSpaceError(f"duplicate design {d.level_index}")
            seen.add(d.level_index)
        self.schema = schema
        self.designs = designs
        self.competitor = competitor
        self.cost_model = cost_model
        self._index = {d.level_index: k for k, d in enumerate(designs)}

    @property
    def size(self) -> int:
        return len(self.designs)

    def find(self, level_index) -> int:
        """Position of a design in the candidate set, or raise."""
        idx = self.schema.validate_levels(level_index)
        try:
            return self._index[idx]
        except KeyError:
            raise DesignSpaceError(f"design {idx} not in the candidate set") from None

    def with_competitor(self, competitor) -> "DesignSpace":
        """Copy of the space with the competitor replaced.

        ``competitor`` may be a Design, a candidate position, or a level-index
        tuple (need not be a member of the candidate set).
        """
        if isinstance(competitor, Design):
            comp = competitor
        elif isinstance(competitor, (int, np.integer)):
            comp = self.designs[int(competitor)]
        else:
            idx = self.schema.validate_levels(competitor)
            comp = make_design(self.schema, idx, self.cost_model.cost_of(
                idx, self._index.get(idx)))
        return DesignSpace(self.schema, self.designs, comp, self.cost_model)

    def market(self):
        """Plain-array view used by the numerical layer."""
        from .choice import Market

        if self.competitor is None:
            raise DesignSpaceError("design space has no competitor set")
        vectors = np.stack([self.schema.constrain_design(d.encoding)
                            for d in self.designs])
        prices = np.array([d.price for d in self.designs])
        costs = np.array([d.cost for d in self.designs])
        comp = self.schema.constrain_design(self.competitor.encoding)
        return Market(vectors, prices, costs, comp)


def full_factorial(schema: AttributeSchema, cost_model: CostModel,
                   competitor: Design | None = None) -> DesignSpace:
    """Every combination of attribute levels as the candidate set."""
    designs = []
    for pos, idx in enumerate(itertools.product(*map(range, schema.level_counts))):
        designs.append(make_design(schema, idx, cost_model.cost_of(idx, pos)))
    return DesignSpace(schema, designs, competitor, cost_model)


def _schema_from_dict(payload) -> AttributeSchema:
    try:
        attrs = tuple(Attribute(a["name"], a.get("unit", ""), tuple(a["levels"]))
                      for a in payload["attributes"])
        return AttributeSchema(attrs, int(payload["price_attribute"]),
                               tuple(float(p) for p in payload["price_values"]))
    except (KeyError, TypeError) as exc:
        raise DesignSpaceError(f"malformed schema section: {exc}") from exc


def design_space_from_dict(payload, rng: np.random.Generator | None = None) -> DesignSpace:
    """Build a DesignSpace from the documented JSON structure.

    ``designs`` is either the string ``"full_factorial"`` or a list of
    level-index tuples.  ``competitor`` is a level-index tuple or ``"random"``
    (uniform over the candidate set; requires ``rng``, otherwise the
    competitor is left unset for the caller to pin per run).
    """
    try:
        schema = _schema_from_dict(payload["schema"])
        cost_model = CostModel.from_dict(payload["cost_model"], schema)
        designs_field = payload["designs"]
    except KeyError as exc:
        raise DesignSpaceError(f"missing design-space section: {exc}") from exc

    if designs_field == "full_factorial":
        if cost_model.kind == "explicit":
            n_total = int(np.prod(schema.level_counts))
            if len(cost_model.table) != n_total:
                raise DesignSpaceError(
                    "explicit cost list must cover the full factorial")
        space = full_factorial(schema, cost_model)
    elif isinstance(designs_field, list):
        if cost_model.kind == "explicit" and len(cost_model.table) != len(designs_field):
            raise DesignSpaceError("explicit cost list must match the design list")
        designs = [make_design(schema, idx, cost_model.cost_of(
            schema.validate_levels(idx), pos))
            for pos, idx in enumerate(designs_field)]
        space = DesignSpace(schema, designs, None, cost_model)
    else:
        raise DesignSpaceError("designs must be 'full_factorial' or a list of level tuples")

    comp_field = payload.get("competitor", "random")
    if comp_field == "random":
        if rng is not None:
            space = space.with_competitor(int(rng.integers(space.size)))
    else:
        space = space.with_competitor(tuple(comp_field))
    return space


def load_design_space(path, rng: np.random.Generator | None = None) -> DesignSpace:
    """Load and validate a design-space JSON file."""
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DesignSpaceError(f"cannot read design-space file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DesignSpaceError(f"design-space file {path} is not valid JSON: {exc}") from exc
    return design_space_from_dict(payload, rng=rng)


def load_partworths(path, schema: AttributeSchema) -> np.ndarray:
    """Read an (attribute, level, value) CSV into a full-layout vector.

    Rows are keyed by attribute name and level label; every (attribute,
    level) pair of the schema must appear exactly once.
    """
    values = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or \
                {"attribute", "level", "value"} - set(reader.fieldnames):
            raise DesignSpaceError(
                "part-worth CSV needs columns: attribute, level, value")
        for row in reader:
            key = (row["attribute"], row["level"])
            if key in values:
                raise DesignSpaceError(f"duplicate part-worth row {key}")
            values[key] = float(row["value"])
    vec = np.zeros(schema.full_dim)
    for attr, block in zip(schema.attributes, schema.full_blocks()):
        for i, label in enumerate(attr.levels):
            key = (attr.name, label)
            if key not in values:
                raise DesignSpaceError(f"missing part-worth for {key}")
            vec[block.start + i] = values.pop(key)
    if values:
        raise DesignSpaceError(f"part-worth rows not in schema: {sorted(values)}")
    return vec


def space_to_dict(space: DesignSpace) -> dict:
    """Serialize a DesignSpace back to the JSON structure."""
    return {
        "schema": {
            "attributes": [{"name": a.name, "unit": a.unit, "levels": list(a.levels)}
                           for a in space.schema.attributes],
            "price_attribute": space.schema.price_attribute,
            "price_values": list(space.schema.price_values),
        },
        "cost_model": space.cost_model.to_dict(),
        "designs": [list(d.level_index) for d in space.designs],
        "competitor": (list(space.competitor.level_index)
                       if space.competitor is not None else "random"),
    }
