import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakoam import scenarios
from weakoam.algebra import (
    check_commuting,
    eigendecompose,
    identity,
    joint_weak_value,
    load_observable,
    load_state,
    make_observable,
    make_state,
    simultaneous_eigenbasis,
    to_json_parts,
    weak_moment,
    weak_value,
)
from weakoam.errors import (
    BadShape,
    DegeneracyUnresolved,
    NonCommuting,
    NotHermitian,
    NotNormalized,
    OrthogonalPostselection,
)

SQ5 = math.sqrt(5)
PAULI_X = [[0, 1], [1, 0]]
PAULI_Z = [[1, 0], [0, -1]]


# independent plain-Python complex arithmetic for oracles

def _matvec(m, v):
    return [sum(m[r][c] * v[c] for c in range(len(v))) for r in range(len(m))]


def _bra_ket(f, v):
    return sum(a.conjugate() * b for a, b in zip(f, v))


def brute_ratio(matrices, i, f):
    v = list(i)
    for m in reversed(matrices):
        v = _matvec(m, v)
    return _bra_ket(f, v) / _bra_ket(f, list(i))


def _as_lists(obs):
    return [[complex(x) for x in row] for row in obs.entries]


# --- make_observable / make_state ---------------------------------------

def test_example_matrix_accepted(A_example):
    assert A_example.dim == 2
    assert A_example.entries[0, 1] == 0.4j


def test_identity_accepted():
    assert identity().dim == 2


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        make_observable([[0, 1], [0, 0]])


@pytest.mark.parametrize("bad", [[[1, 2, 3]], [[1.0]], np.eye(65)])
def test_bad_shapes(bad):
    with pytest.raises(BadShape):
        make_observable(bad)


def test_observable_is_immutable(A_example):
    with pytest.raises(ValueError):
        A_example.entries[0, 0] = 3


def test_state_normalization():
    with pytest.raises(NotNormalized):
        make_state([1, 1])
    s = make_state([1, 1], normalize=True)
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1, abs=1e-15)


# --- eigendecompose -------------------------------------------------------

def test_example_eigensystem(A_example):
    eig = eigendecompose(A_example)
    np.testing.assert_allclose(eig.eigenvalues, [1, 2], atol=1e-12)
    a = np.array([1, 2j]) / SQ5
    b = np.array([2j, 1]) / SQ5
    for v, expected in zip(eig.eigenvectors, (a, b)):
        assert abs(np.vdot(expected, v.amplitudes)) == pytest.approx(1, abs=1e-10)


def test_example_eigenvalues_closed_form_2x2(A_example):
    # oracle: roots of the characteristic polynomial
    (p, q), (_, s) = A_example.entries
    tr, disc = (p + s).real, math.sqrt(((p - s).real) ** 2 + 4 * abs(q) ** 2)
    expected = sorted([(tr - disc) / 2, (tr + disc) / 2])
    np.testing.assert_allclose(eigendecompose(A_example).eigenvalues, expected, atol=1e-12)


def test_identity_eigensystem():
    eig = eigendecompose(identity())
    np.testing.assert_allclose(eig.eigenvalues, [1, 1])
    V = eig.matrix()
    np.testing.assert_allclose(V.conj().T @ V, np.eye(2), atol=1e-12)


def test_diagonal_sorted_ascending():
    eig = eigendecompose(make_observable(np.diag([3.0, -1.0])))
    np.testing.assert_allclose(eig.eigenvalues, [-1, 3])
    np.testing.assert_allclose(eig.eigenvectors[0].amplitudes, [0, 1], atol=1e-15)
    np.testing.assert_allclose(eig.eigenvectors[1].amplitudes, [1, 0], atol=1e-15)


def test_phase_convention(A_example):
    for v in eigendecompose(A_example).eigenvectors:
        first = v.amplitudes[np.flatnonzero(np.abs(v.amplitudes) > 1e-10)[0]]
        assert first.imag == pytest.approx(0, abs=1e-15)
        assert first.real > 0


# --- weak values ----------------------------------------------------------

def test_example_weak_value(A_example, H, f_example):
    wv = weak_value(A_example, H, f_example)
    assert wv.order == 1
    assert wv.value == pytest.approx(9 / 5 - 0.4j / math.tan(0.1), rel=1e-12)


def test_identity_weak_value(H, f_example):
    assert weak_value(identity(), H, f_example).value == pytest.approx(1, abs=1e-15)


def test_unselected_weak_value_is_expectation(A_example, H):
    wv = weak_value(A_example, H, H).value
    assert wv == pytest.approx(9 / 5, abs=1e-15)
    assert wv.imag == 0


def test_orthogonal_postselection(A_example, H):
    with pytest.raises(OrthogonalPostselection):
        weak_value(A_example, H, make_state([0, 1]))
    tiny = make_state([1e-11, math.sqrt(1 - 1e-22)])
    with pytest.raises(OrthogonalPostselection):
        weak_value(A_example, H, tiny)
    assert weak_value(A_example, H, tiny, overlap_floor=1e-12).value.imag < -1e10


def test_example_second_moment(A_example, H, f_example):
    wm = weak_moment(A_example, 2, H, f_example)
    assert wm.order == 2
    assert wm.value == pytest.approx(17 / 5 - 1.2j / math.tan(0.1), rel=1e-12)


def test_first_moment_matches_weak_value(A_example, H, f_example):
    assert weak_moment(A_example, 1, H, f_example).value == weak_value(A_example, H, f_example).value


@pytest.mark.parametrize("eps", [0.05, 0.2, 0.5])
def test_second_moment_brute_force(A_example, H, eps):
    f = scenarios.near_orthogonal(eps)
    m = _as_lists(A_example)
    expected = brute_ratio([m, m], [1 + 0j, 0j], [complex(x) for x in f.amplitudes])
    assert weak_moment(A_example, 2, H, f).value == pytest.approx(expected, rel=1e-13)


def test_weak_moment_rejects_zero_order(A_example, H, f_example):
    with pytest.raises(ValueError):
        weak_moment(A_example, 0, H, f_example)


def test_joint_weak_value_with_identity(A_example, H, f_example):
    assert joint_weak_value(A_example, identity(), H, f_example).value == pytest.approx(
        weak_value(A_example, H, f_example).value, rel=1e-14)


def test_joint_weak_value_square(A_example, H, f_example):
    assert joint_weak_value(A_example, A_example, H, f_example).value == \
        weak_moment(A_example, 2, H, f_example).value


def test_joint_weak_value_brute_force():
    A = make_observable(np.diag([1.0, 2.0]))
    B = make_observable(np.diag([3.0, -1.0]))
    i = make_state(np.array([1, 1]) / math.sqrt(2))
    f = make_state(np.array([1, -1j]) / math.sqrt(2))
    expected = brute_ratio([_as_lists(A), _as_lists(B)], [complex(x) for x in i.amplitudes],
                           [complex(x) for x in f.amplitudes])
    assert joint_weak_value(A, B, i, f).value == pytest.approx(expected, rel=1e-14)


def test_joint_weak_value_non_commuting(H, f_example):
    with pytest.raises(NonCommuting):
        joint_weak_value(make_observable(PAULI_X), make_observable(PAULI_Z), H, f_example)


# --- commutation and joint basis --------------------------------------------

def test_check_commuting():
    assert check_commuting(make_observable(np.diag([1, 2])), make_observable(np.diag([5, -3])))
    assert not check_commuting(make_observable(PAULI_X), make_observable(PAULI_Z))
    A = scenarios.example_observable()
    assert check_commuting(A, A)
    with pytest.raises(BadShape):
        check_commuting(A, identity(3))


def test_simultaneous_basis_diagonal():
    joint = simultaneous_eigenbasis(make_observable(np.diag([1.0, 2.0])),
                                    make_observable(np.diag([3.0, -1.0])))
    np.testing.assert_allclose(joint.alphas, [1, 2])
    np.testing.assert_allclose(joint.betas, [3, -1])
    np.testing.assert_allclose(np.abs(joint.matrix()), np.eye(2), atol=1e-12)


def test_simultaneous_basis_with_identity(A_example):
    joint = simultaneous_eigenbasis(A_example, identity())
    eig = eigendecompose(A_example)
    np.testing.assert_allclose(joint.alphas, eig.eigenvalues, atol=1e-12)
    np.testing.assert_allclose(joint.betas, [1, 1], atol=1e-12)
    for u, v in zip(joint.eigenvectors, eig.eigenvectors):
        assert abs(np.vdot(u.amplitudes, v.amplitudes)) == pytest.approx(1, abs=1e-10)


def test_simultaneous_basis_square(A_example):
    B = make_observable(A_example.entries @ A_example.entries)
    joint = simultaneous_eigenbasis(A_example, B)
    # oracle: eigendecompose(A), then apply B to each eigenvector
    eig = eigendecompose(A_example)
    expected = [(lam, np.vdot(v.amplitudes, B.entries @ v.amplitudes).real)
                for lam, v in zip(eig.eigenvalues, eig.eigenvectors)]
    np.testing.assert_allclose(list(zip(joint.alphas, joint.betas)), expected, atol=1e-9)
    np.testing.assert_allclose(expected, [(1, 1), (2, 4)], atol=1e-12)


def test_simultaneous_basis_splits_degeneracy():
    A = make_observable(np.diag([1.0, 1.0, 2.0]))
    R = np.array([[1, 1, 0], [1, -1, 0], [0, 0, math.sqrt(2)]]) / math.sqrt(2)
    B = make_observable(R @ np.diag([3.0, -1.0, 3.0]) @ R.T)
    A_rot = make_observable(R @ A.entries @ R.T)
    joint = simultaneous_eigenbasis(A_rot, B)
    V = joint.matrix()
    np.testing.assert_allclose(A_rot.entries @ V, V * joint.alphas, atol=1e-9)
    np.testing.assert_allclose(B.entries @ V, V * joint.betas, atol=1e-9)
    assert sorted(zip(joint.alphas.round(9), joint.betas.round(9))) == [(1, -1), (1, 3), (2, 3)]


def test_simultaneous_basis_errors():
    with pytest.raises(NonCommuting):
        simultaneous_eigenbasis(make_observable(PAULI_X), make_observable(PAULI_Z))
    with pytest.raises(DegeneracyUnresolved):
        simultaneous_eigenbasis(identity(), identity(), attempts=0)


# --- JSON interchange -------------------------------------------------------

def test_json_round_trip(tmp_path, A_example):
    path = tmp_path / "a.json"
    path.write_text(json.dumps(to_json_parts(A_example.entries)))
    np.testing.assert_array_equal(load_observable(path).entries, A_example.entries)
    state = load_state({"re": [0.6, 0.0], "im": [0.0, 0.8]})
    np.testing.assert_allclose(state.amplitudes, [0.6, 0.8j])
    assert load_observable({"re": [[1, 0], [0, 2]]}).entries[1, 1] == 2


def test_json_shape_mismatch():
    with pytest.raises(BadShape):
        load_observable({"re": [[1, 0], [0, 2]], "im": [[0, 0]]})


# --- properties -------------------------------------------------------------

finite = st.floats(-3, 3, allow_nan=False)


@st.composite
def hermitian(draw, dim=None):
    d = dim or draw(st.integers(2, 4))
    re = np.array(draw(st.lists(finite, min_size=d * d, max_size=d * d))).reshape(d, d)
    im = np.array(draw(st.lists(finite, min_size=d * d, max_size=d * d))).reshape(d, d)
    m = re + 1j * im
    return make_observable((m + m.conj().T) / 2)


@st.composite
def state(draw, dim):
    parts = draw(st.lists(finite, min_size=2 * dim, max_size=2 * dim))
    v = np.array(parts[:dim]) + 1j * np.array(parts[dim:])
    if np.linalg.norm(v) < 0.1:
        v = v + 1.0
    return make_state(v, normalize=True)


@st.composite
def selected_system(draw):
    A = draw(hermitian())
    i = draw(state(A.dim))
    f = draw(state(A.dim))
    if abs(np.vdot(f.amplitudes, i.amplitudes)) < 1e-3:
        f = i
    return A, i, f


@settings(max_examples=60, deadline=None)
@given(hermitian(), st.data())
def test_unselected_weak_value_real(A, data):
    i = data.draw(state(A.dim))
    assert abs(weak_value(A, i, i).value.imag) <= 1e-12 * max(1.0, np.max(np.abs(A.entries)))


@settings(max_examples=60, deadline=None)
@given(selected_system(), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_global_phase_invariance(system, theta, chi):
    A, i, f = system
    base = weak_value(A, i, f).value
    moved = weak_value(A, make_state(cmath.exp(1j * theta) * i.amplitudes),
                       make_state(cmath.exp(1j * chi) * f.amplitudes)).value
    assert abs(moved - base) < 1e-12 * max(1.0, abs(base))


@settings(max_examples=60, deadline=None)
@given(selected_system(), st.data(), finite, finite)
def test_linearity(system, data, alpha, beta):
    A, i, f = system
    B = data.draw(hermitian(A.dim))
    combo = make_observable(alpha * A.entries + beta * B.entries)
    lhs = weak_value(combo, i, f).value
    rhs = alpha * weak_value(A, i, f).value + beta * weak_value(B, i, f).value
    scale = max(1.0, abs(alpha * weak_value(A, i, f).value), abs(beta * weak_value(B, i, f).value))
    assert abs(lhs - rhs) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(selected_system())
def test_square_equals_joint(system):
    A, i, f = system
    assert weak_moment(A, 2, i, f).value == joint_weak_value(A, A, i, f).value


@settings(max_examples=60, deadline=None)
@given(hermitian())
def test_reconstruction(A):
    eig = eigendecompose(A)
    rebuilt = sum(lam * np.outer(v.amplitudes, v.amplitudes.conj())
                  for lam, v in zip(eig.eigenvalues, eig.eigenvectors))
    np.testing.assert_allclose(rebuilt, A.entries, atol=1e-10)
    V = eig.matrix()
    np.testing.assert_allclose(A.entries @ V, V * eig.eigenvalues, atol=1e-10)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(A.dim), atol=1e-10)
