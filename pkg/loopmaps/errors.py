from collections.abc import Sequence


class LoopmapsError(Exception):
    """Base class of every contract violation raised by the package."""

    code = 'error'

    def to_dict(self) -> dict:
        return {'error': self.code, 'message': str(self)}


class DomainError(LoopmapsError, ValueError):
    code = 'domain'


class ConvergenceError(LoopmapsError, ArithmeticError):
    code = 'no-convergence'

    def __init__(self, what: str, residual: float, iterations: int):
        super().__init__(f'{what} did not converge after {iterations} iterations (residual {residual!r})')
        self.residual = residual
        self.iterations = iterations

    def to_dict(self) -> dict:
        return {**super().to_dict(), 'residual': self.residual, 'iterations': self.iterations}


class DerivativeOrderError(LoopmapsError, ValueError):
    code = 'order-overflow'

    def __init__(self, order: int, max_order: int):
        super().__init__(f'Derivative order {order!r} exceeds maximum {max_order!r}')
        self.order = order
        self.max_order = max_order


class PoleProximityError(LoopmapsError, ArithmeticError):
    code = 'pole-proximity'

    def __init__(self, point: complex, pole: complex):
        super().__init__(f'Evaluation point {point!r} is too close to the pole {pole!r}')
        self.point = point
        self.pole = pole

    def to_dict(self) -> dict:
        return {**super().to_dict(), 'pole': [self.pole.real, self.pole.imag]}


class OrderingError(LoopmapsError, ValueError):
    code = 'ordering'

    def __init__(self, values: Sequence[float]):
        super().__init__(f'Branch points must satisfy gm < gp < sgp < sgm, got {tuple(values)!r}')
        self.values = tuple(values)


class DegenerateFrameError(LoopmapsError, ValueError):
    code = 'degenerate-frame'

    def __init__(self, values: Sequence[float]):
        super().__init__(
            f'Branch points {tuple(values)!r} coincide; use the critical-limit functions instead of a frame'
        )
        self.values = tuple(values)


class CriticalityError(LoopmapsError, ArithmeticError):
    code = 'criticality'

    def __init__(self, eps: float, y1: complex):
        super().__init__(f'Delta G has more than a double zero at eps={eps!r} (y1={y1!r})')
        self.eps = eps
        self.y1 = y1


class LaurentDepthError(LoopmapsError, ArithmeticError):
    code = 'laurent-depth'


class TopologyError(LoopmapsError, ValueError):
    code = 'topology'

    def __init__(self, g: int, k: int, reason: str = 'requires 2g - 2 + k > 0'):
        super().__init__(f'Invalid topology (g={g!r}, k={k!r}): {reason}')
        self.g = g
        self.k = k


class NestingGraphError(LoopmapsError, ValueError):
    code = 'nesting-graph'

    def __init__(self, violations: Sequence[str]):
        super().__init__('Invalid nesting graph: ' + '; '.join(violations))
        self.violations = tuple(violations)

    def to_dict(self) -> dict:
        return {**super().to_dict(), 'violations': list(self.violations)}


class CapExceededError(LoopmapsError, ValueError):
    code = 'cap-exceeded'
