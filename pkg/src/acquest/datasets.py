"""Bundled data: the dial-readout scale case study and small fixtures."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .designs import (Attribute, AttributeSchema, CostModel, DesignSpace,
                      full_factorial, load_design_space, load_partworths)
from .gisa import DiscreteGroupInstance, load_discrete_instance


def _data_path(name: str):
    return resources.files("acquest").joinpath("data", name)


def dial_scale_space(rng: np.random.Generator | None = None) -> DesignSpace:
    """The six-attribute scale design space (full factorial, K = 15625)."""
    with resources.as_file(_data_path("dial_scale_space.json")) as path:
        return load_design_space(path, rng=rng)


def dial_scale_partworths(space: DesignSpace | None = None) -> np.ndarray:
    """Constrained true part-worths of the scale case study."""
    schema = (space or dial_scale_space()).schema
    with resources.as_file(_data_path("dial_scale_partworths.csv")) as path:
        full = load_partworths(path, schema)
    return schema.constrain_partworths(full)


def heroes_instance() -> DiscreteGroupInstance:
    """The four-object, two-group worked example with three binary queries."""
    with resources.as_file(_data_path("heroes.json")) as path:
        return load_discrete_instance(path)


def desk_scale_space() -> DesignSpace:
    """Default 3-attribute x 3-level space (K = 27) for fast experiments."""
    schema = AttributeSchema(
        attributes=(
            Attribute("Capacity", "kg", ("low", "mid", "high")),
            Attribute("Finish", "-", ("basic", "standard", "premium")),
            Attribute("Price", "$", ("10", "15", "20")),
        ),
        price_attribute=2,
        price_values=(10.0, 15.0, 20.0),
    )
    cost_model = CostModel("additive", [[2.0, 4.0, 7.0],
                                        [1.0, 2.0, 4.0],
                                        [0.0, 0.0, 0.0]])
    return full_factorial(schema, cost_model)


def desk_scale_partworths() -> np.ndarray:
    """A true part-worth vector for the desk-scale space (constrained)."""
    space = desk_scale_space()
    full = np.array([
        -0.9, 0.25, 0.65,   # capacity
        -0.5, 0.15, 0.45,   # finish
        0.9, 0.1, -1.0,     # price
    ])
    return space.schema.constrain_partworths(full)
