"""JSON schemas for the command configurations (unknown keys are rejected)."""

from __future__ import annotations

NUMBER = {"type": "number"}
POS_INT = {"type": "integer", "minimum": 1}
# exact rationals may be given as strings such as "1/3"
RATIONAL = {"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}

FLUX = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["power_abs", "power_signed", "sine", "cosine", "piecewise_polynomial"]},
        "ell": NUMBER,
        "coefficients": {"type": "array", "items": {"type": "array", "items": NUMBER, "minItems": 1},
                         "minItems": 1},
        "breakpoints": {"type": "array", "items": NUMBER},
    },
}

INTERVAL = {"type": "array", "items": NUMBER, "minItems": 2, "maxItems": 2}
DYADIC_LIST = {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 4}

TERM = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type"],
    "properties": {
        "type": {"enum": ["polynomial", "trig", "box", "riemann"]},
        "coef": NUMBER,
        "t_power": {"type": "integer", "minimum": 0},
        "x_power": {"type": "integer", "minimum": 0},
        "fn": {"enum": ["sin", "cos"]},
        "omega_t": NUMBER,
        "omega_x": NUMBER,
        "phase": NUMBER,
        "t": INTERVAL,
        "x": INTERVAL,
        "left": NUMBER,
        "right": NUMBER,
        "x0": NUMBER,
    },
}

GRID = {
    "type": "object",
    "additionalProperties": False,
    "required": ["x_lo", "x_hi", "n_cells", "t_end"],
    "properties": {
        "x_lo": NUMBER,
        "x_hi": NUMBER,
        "n_cells": {"type": "integer", "minimum": 8},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "cfl": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "boundary": {"enum": ["periodic", "outflow"]},
    },
}

SOURCE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["zero", "constant", "table", "expression"]},
        "value": NUMBER,
        "times": {"type": "array", "items": NUMBER, "minItems": 1},
        "values": {"type": "array", "items": {"type": "array", "items": NUMBER}},
        "terms": {"type": "array", "items": TERM},
    },
}

INITIAL = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "table": {"type": "array", "items": NUMBER},
        "terms": {"type": "array", "items": TERM},
    },
    "minProperties": 1,
    "maxProperties": 1,
}

VGRID = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_v"],
    "properties": {
        "n_v": {"type": "integer", "minimum": 32},
        "v_lo": NUMBER,
        "v_hi": NUMBER,
        "margin": {"type": "number", "minimum": 0.1},
    },
}


def _obj(required, **props):
    return {"type": "object", "additionalProperties": False, "required": required, "properties": props}


RUN = dict(flux=FLUX, grid=GRID, u0=INITIAL, source=SOURCE)

SCHEMAS = {
    "analyze-flux": _obj(
        ["flux", "interval"],
        flux=FLUX, interval=INTERVAL, delta_grid=DYADIC_LIST, lambda_grid=DYADIC_LIST,
        sphere_points={"type": "integer", "minimum": 64},
        v_points={"type": "integer", "minimum": 100},
        directions={"enum": ["sweep", "grid"]},
    ),
    "exponents": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "alpha": RATIONAL, "beta": RATIONAL, "kappa": RATIONAL, "tau": RATIONAL,
            # output of analyze-flux, passed through unchanged
            "profile": {"type": "object", "required": ["alpha", "beta", "kappa", "tau"]},
            "flux": FLUX,
            "general": _obj([], gamma=RATIONAL, sigma=RATIONAL, p=RATIONAL, q=RATIONAL, pbar=RATIONAL),
        },
        "oneOf": [{"required": ["alpha", "beta", "kappa", "tau"], "not": {"required": ["profile"]}},
                  {"required": ["profile"], "not": {"anyOf": [{"required": [k]} for k in
                                                              ("alpha", "beta", "kappa", "tau")]}}],
    },
    "solve": _obj(["flux", "grid", "u0"], **RUN, store_every=POS_INT),
    "defect": _obj(
        ["flux", "grid", "u0", "vgrid"], **RUN, vgrid=VGRID,
        moments={"type": "array", "items": _obj(["v0", "alpha"], v0=NUMBER,
                                                alpha={"type": "number", "exclusiveMinimum": 0,
                                                       "maximum": 1})},
        stencil={"enum": ["upwind", "centered"]},
        write_density={"type": "boolean"},
    ),
    "regularity": _obj(
        ["flux", "grid", "u0"], **RUN,
        p={"anyOf": [{"type": "number", "minimum": 1},
                     {"type": "array", "items": {"type": "number", "minimum": 1}, "minItems": 1}]},
        direction={"enum": ["space", "time", "both"]},
        shifts={"type": "array", "items": POS_INT, "minItems": 4},
    ),
    "contraction": {
        "type": "object",
        "additionalProperties": False,
        "required": ["flux"],
        "properties": {
            "flux": FLUX, "grid": GRID, "u0_1": INITIAL, "u0_2": INITIAL,
            "source_1": SOURCE, "source_2": SOURCE,
            "random": _obj(["n_pairs"], n_pairs=POS_INT),
            "tol": {"type": "number", "minimum": 0},
        },
        "oneOf": [{"required": ["random"]}, {"required": ["grid", "u0_1", "u0_2"]}],
    },
    "verify": _obj([], tier={"enum": ["fast", "full"]},
                   only={"type": "array", "items": {"type": "string"}, "minItems": 1}),
}
