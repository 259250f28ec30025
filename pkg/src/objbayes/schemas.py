"""JSON Schemas (draft 2020-12) for the reports written by the command line tool.

Non-finite numbers are written as the strings ``"inf"``, ``"-inf"`` and
``"nan"``, so every numeric field also admits those.
"""

SCHEMA_VERSION = "1.0"

_NUMBER = {"anyOf": [{"type": "number"}, {"enum": ["inf", "-inf", "nan"]}]}
_OPT_NUMBER = {"anyOf": [_NUMBER, {"type": "null"}]}
_VERSION = {"const": SCHEMA_VERSION}


def _report(subcommand, properties, required):
    props = {"schema_version": _VERSION, "subcommand": {"const": subcommand}, **properties}
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": props,
        "required": ["schema_version", "subcommand", *required],
    }


_FAMILY = {
    "type": "object",
    "properties": {"name": {"type": "string"}, "fixed": {"type": "object"}},
    "required": ["name", "fixed"],
}

_DATA = {
    "type": "object",
    "properties": {
        "source": {"enum": ["file", "inline"]},
        "n": {"type": "integer", "minimum": 1},
        "mean": _NUMBER,
    },
    "required": ["source", "n", "mean"],
}

PRIOR = _report(
    "prior",
    {
        "family": _FAMILY,
        "label": {"type": "string"},
        "grid": {"type": "array", "items": {"type": "array", "items": _NUMBER}, "minItems": 1},
        "log_density": {"type": "array", "items": _NUMBER},
        "fisher": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "array", "items": _NUMBER}},
        },
    },
    ["family", "label", "grid", "log_density", "fisher"],
)

TEST_INTRINSIC = _report(
    "test-intrinsic",
    {
        "family": _FAMILY,
        "data": _DATA,
        "null": _NUMBER,
        "prior": {"type": "string"},
        "d": _NUMBER,
        "z": _OPT_NUMBER,
        "threshold": _NUMBER,
        "decision": {"enum": ["reject", "accept"]},
        "method": {"enum": ["closed_form", "quadrature"]},
        "quadrature_error": _OPT_NUMBER,
    },
    ["family", "data", "null", "prior", "d", "z", "threshold", "decision", "method", "quadrature_error"],
)

TEST_MIXED = _report(
    "test-mixed",
    {
        "family": _FAMILY,
        "data": _DATA,
        "null": _NUMBER,
        "bayes_factor_01": _NUMBER,
        "log_bayes_factor_01": _NUMBER,
        "prior_null_mass": _NUMBER,
        "posterior_null_prob": _NUMBER,
        "spread_prior": {
            "type": "object",
            "properties": {"label": {"type": "string"}},
            "required": ["label"],
        },
    },
    ["family", "data", "null", "bayes_factor_01", "log_bayes_factor_01", "prior_null_mass",
     "posterior_null_prob", "spread_prior"],
)

_SWEEP_ROW = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "bayes_factor_01": _NUMBER,
        "posterior_null_prob": _NUMBER,
        "intrinsic_d": _NUMBER,
        "z_fixed": _NUMBER,
    },
    "required": ["n", "bayes_factor_01", "posterior_null_prob", "intrinsic_d", "z_fixed"],
}

LINDLEY = _report(
    "lindley",
    {
        "family": _FAMILY,
        "null": _NUMBER,
        "prior_null_mass": _NUMBER,
        "spread_prior": {"type": "object"},
        "rows": {"type": "array", "items": _SWEEP_ROW},
    },
    ["family", "rows"],
)

COVERAGE = _report(
    "coverage",
    {
        "family": _FAMILY,
        "prior": {"type": "string"},
        "coverage": {"type": "number", "minimum": 0, "maximum": 1},
        "mc_standard_error": _NUMBER,
        "hits": {"type": "integer", "minimum": 0},
        "reps": {"type": "integer", "minimum": 1},
        "mass": _NUMBER,
        "n": {"type": "integer", "minimum": 1},
        "true_value": _NUMBER,
        "seed": {"type": "integer", "minimum": 0},
        "prng": {"type": "string"},
        "seed_rule": {"type": "string"},
    },
    ["family", "prior", "coverage", "mc_standard_error", "hits", "reps", "mass", "n", "true_value",
     "seed", "prng", "seed_rule"],
)

ERROR = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": _VERSION,
        "error": {
            "type": "object",
            "properties": {
                "type": {"type": "string"},
                "message": {"type": "string"},
                "exit_code": {"enum": [2, 3]},
                "diagnostic": {},
            },
            "required": ["type", "message", "exit_code"],
        },
    },
    "required": ["schema_version", "error"],
}

SCHEMAS = {
    "prior": PRIOR,
    "test-intrinsic": TEST_INTRINSIC,
    "test-mixed": TEST_MIXED,
    "lindley": LINDLEY,
    "coverage": COVERAGE,
    "error": ERROR,
}
