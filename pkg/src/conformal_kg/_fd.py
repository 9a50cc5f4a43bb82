"""Central finite-difference stencils for scalar callables."""

from __future__ import annotations

from typing import Callable

Scalar = Callable[[float], float]


def first_derivative(f: Scalar, x: float, h: float, order: int = 4) -> float:
    if order == 2:
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 4:
        return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h)
    raise ValueError(f"unsupported stencil order {order}")


def second_derivative(f: Scalar, x: float, h: float, order: int = 4) -> float:
    if order == 2:
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    if order == 4:
        return (
            -f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)
        ) / (12.0 * h * h)
    raise ValueError(f"unsupported stencil order {order}")


def reach(order: int) -> int:
    """Number of steps the stencil extends on each side."""
    return 1 if order == 2 else 2
