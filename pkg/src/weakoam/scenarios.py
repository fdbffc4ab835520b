"""The spin-1/2 polarization example used by the CLI and the acceptance tests."""
import math

from .algebra import make_observable, make_state

EXAMPLE_MATRIX = ((9 / 5, 2j / 5), (-2j / 5, 6 / 5))


def example_observable():
    """Eigenvalues 1 and 2 with elliptic eigenvectors (|H> + 2i|V>)/sqrt5, (2i|H> + |V>)/sqrt5."""
    return make_observable(EXAMPLE_MATRIX)


def horizontal():
    return make_state([1.0, 0.0])


def near_orthogonal(epsilon: float):
    """``sin(eps)|H> + cos(eps)|V>``, whose overlap with |H> is ``sin(eps)``."""
    return make_state([math.sin(epsilon), math.cos(epsilon)])

