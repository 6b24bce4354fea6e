"""The expression mini-language that config files use for coefficients.

Expressions are parsed once into an immutable tree and evaluated either
on scalars (while assembling grid tables) or on numpy arrays (inside the
Monte Carlo path loop), with domain errors surfaced instead of silent
NaN.
"""

import numpy as np

from nisio import evaluate, parse, to_source
from nisio.errors import EvalError, ExprSyntaxError

expr = parse("cos(2*pi*x1) + 0.05*v1^2 + min(x1, v1)")
print("source    :", "cos(2*pi*x1) + 0.05*v1^2 + min(x1, v1)")
print("reprinted :", to_source(expr))
print("variables :", sorted(expr.variables()))
print("at x1=0.5, v1=-1:", evaluate(expr, {"x1": 0.5, "v1": -1.0}))

xs = np.linspace(0.0, 1.0, 5)
print("vectorized over x1:", evaluate(expr, {"x1": xs, "v1": 1.0}))

print("\nprecedence: ^ binds tightest and associates right, unary minus")
print("sits between ^ and *:")
for s in ("2^3^2", "-2^2", "2^-3", "2*-3"):
    print(f"  {s:8s} = {evaluate(parse(s), {})}")

print("\nerrors carry positions and never crash:")
try:
    parse("2*+x1")
except ExprSyntaxError as err:
    print("  parse '2*+x1'  ->", err)
try:
    evaluate(parse("log(x1)"), {"x1": 0.0})
except EvalError as err:
    print("  log(0)         ->", err)
