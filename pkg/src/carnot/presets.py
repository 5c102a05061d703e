"""Group presets and the JSON group-spec exchange format.

Preset names: "heisenberg", "engel", "abelian:n", and
"example6:t3,t4,t5,t6" (tokens are rationals like 3/2 or the literal
sqrt2; bare "example6" uses 2,2,2,2 — the Jacobi identity forces the
four parameters to agree). Coefficients in JSON specs are strings so
exactness survives the round trip.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .algebra import StratifiedAlgebra
from .scalars import QSqrt2


def parse_scalar(token):
    """Parse an exact scalar: 'p/q', decimals, 'sqrt2', 'p/q+r/s*sqrt2'."""
    if isinstance(token, (int, Fraction, QSqrt2)):
        return token if not isinstance(token, int) else Fraction(token)
    if isinstance(token, float):
        return Fraction(str(token))
    s = str(token).strip().replace(" ", "")
    if "sqrt2" not in s:
        return Fraction(s)
    if s == "sqrt2":
        return QSqrt2(0, 1)
    if s == "-sqrt2":
        return QSqrt2(0, -1)
    head, _, tail = s.partition("+")
    if "sqrt2" in head and not tail:
        coef = head.replace("*sqrt2", "").replace("sqrt2", "")
        return QSqrt2(0, Fraction(coef if coef not in ("", "-") else coef + "1"))
    if tail:
        rat = Fraction(head)
        coef = tail.replace("*sqrt2", "").replace("sqrt2", "")
        return QSqrt2(rat, Fraction(coef if coef not in ("", "-") else coef + "1"))
    raise ValueError(f"cannot parse exact scalar {token!r}")


def format_scalar(x):
    if isinstance(x, QSqrt2):
        if x.b == 0:
            return str(x.a)
        return f"{x.a}+{x.b}*sqrt2"
    return str(x)


def heisenberg():
    """Step-2 group on (x, y, z) with [X, Y] = Z."""
    return StratifiedAlgebra(
        layer_dims=(2, 1),
        brackets={(0, 1): {2: 1}},
        name="heisenberg",
    )


def engel():
    """Step-3 group with [X1, X2] = X3, [X1, X3] = X4."""
    return StratifiedAlgebra(
        layer_dims=(2, 1, 1),
        brackets={(0, 1): {2: 1}, (0, 2): {3: 1}},
        name="engel",
    )


def abelian(n):
    """The abelian group R^n as a step-1 Carnot group."""
    n = int(n)
    if n < 1:
        raise ValueError("abelian rank must be >= 1")
    return StratifiedAlgebra(layer_dims=(n,), brackets={}, name=f"abelian:{n}")


def algebra_preset(name):
    """Look up a preset by name; raises with the list of known names."""
    from .discreteness import build_example_algebra, ExampleParams

    name = str(name).strip()
    if name == "heisenberg":
        return heisenberg()
    if name == "engel":
        return engel()
    if name.startswith("abelian:"):
        return abelian(name.split(":", 1)[1])
    if name == "example6" or name.startswith("example6:"):
        if ":" in name:
            tokens = name.split(":", 1)[1].split(",")
            if len(tokens) != 4:
                raise ValueError("example6 takes four parameters t3,t4,t5,t6")
            t3, t4, t5, t6 = (parse_scalar(t) for t in tokens)
        else:
            t3, t4, t5, t6 = (Fraction(2),) * 4
        return build_example_algebra(ExampleParams(t3=t3, t4=t4, t5=t5, t6=t6))
    raise ValueError(
        f"unknown group preset {name!r}; available: heisenberg, engel, "
        "abelian:n, example6[:t3,t4,t5,t6]"
    )


def algebra_to_spec(algebra):
    """JSON-ready dict: {step, layer_dims, brackets, field}."""
    brackets = []
    for (a, b), vec in sorted(algebra._table.items()):
        coeffs = [format_scalar(vec.get(c, Fraction(0))) for c in range(algebra.dim)]
        brackets.append([a, b, coeffs])
    return {
        "step": algebra.step,
        "layer_dims": list(algebra.layer_dims),
        "brackets": brackets,
        "field": algebra.scalar_field,
        "name": algebra.name,
    }


def algebra_from_spec(spec):
    layer_dims = spec["layer_dims"]
    if spec.get("step") is not None and int(spec["step"]) != len(layer_dims):
        raise ValueError("step does not match layer_dims length")
    brackets = {}
    for a, b, coeffs in spec.get("brackets", []):
        vec = {}
        for c, tok in enumerate(coeffs):
            x = parse_scalar(tok)
            if x != 0:
                vec[c] = x
        brackets[(int(a), int(b))] = vec
    return StratifiedAlgebra(
        layer_dims=layer_dims,
        brackets=brackets,
        scalar_field=spec.get("field", "rational"),
        name=spec.get("name", ""),
    )


def load_group(source):
    """A preset name, or a path to a JSON group-spec file."""
    s = str(source)
    if s.endswith(".json"):
        with open(s, "r", encoding="utf-8") as fh:
            return algebra_from_spec(json.load(fh))
    return algebra_preset(s)
