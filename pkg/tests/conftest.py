import random

import pytest

from heatgauge import expr


def random_expression(rng: random.Random, variables: list[str], depth: int = 3) -> expr.Expression:
    """Random expression tree over the given variables.

    Kept away from the worst singularity generators: divisions get an
    offset denominator, powers use small integer exponents, and log/sqrt
    wrap a positive-definite argument.
    """
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return expr.Var(rng.choice(variables))
        return expr.Const(round(rng.uniform(-3, 3), 3))
    choice = rng.random()
    if choice < 0.18:
        return expr.BinOp("+", random_expression(rng, variables, depth - 1),
                          random_expression(rng, variables, depth - 1))
    if choice < 0.36:
        return expr.BinOp("-", random_expression(rng, variables, depth - 1),
                          random_expression(rng, variables, depth - 1))
    if choice < 0.58:
        return expr.BinOp("*", random_expression(rng, variables, depth - 1),
                          random_expression(rng, variables, depth - 1))
    if choice < 0.68:
        denom = expr.BinOp("+", expr.Const(2.5),
                           expr.Call("sin", random_expression(rng, variables, depth - 1)))
        return expr.BinOp("/", random_expression(rng, variables, depth - 1), denom)
    if choice < 0.76:
        return expr.BinOp("^", random_expression(rng, variables, depth - 1),
                          expr.Const(float(rng.choice([2, 3]))))
    func = rng.choice(["sin", "cos", "exp", "log", "sqrt"])
    arg = random_expression(rng, variables, depth - 1)
    if func in ("log", "sqrt"):
        arg = expr.BinOp("+", expr.Const(3.0), expr.Call("sin", arg))
    if func == "exp":
        arg = expr.Call("sin", arg)
    return expr.Call(func, arg)


def random_point(rng: random.Random, variables: list[str], lo: float = -1.5,
                 hi: float = 1.5) -> dict[str, float]:
    return {v: rng.uniform(lo, hi) for v in variables}


@pytest.fixture
def rng():
    return random.Random(20240817)
