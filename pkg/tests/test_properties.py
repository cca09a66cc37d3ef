"""Standalone property suite: pytest tests/test_properties.py"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracpar import fem, spectral
from fracpar import sincprop as sp
from fracpar.mesh import build_interval_mesh, build_square_mesh

meshes = st.one_of(
    st.integers(1, 80).map(build_interval_mesh),
    st.integers(2, 14).map(build_square_mesh),
)


@settings(max_examples=30, deadline=None)
@given(meshes)
def test_assembly_symmetric_positive_definite(mesh):
    P = fem.assemble(mesh)
    assert abs(P.A - P.A.T).max() == 0
    assert abs(P.M - P.M.T).max() == 0
    assert np.linalg.eigvalsh(P.A.toarray())[0] > 0
    assert np.linalg.eigvalsh(P.M.toarray())[0] > 0


@settings(max_examples=20, deadline=None)
@given(meshes)
def test_eigenbasis_m_orthonormal(mesh):
    P = fem.assemble(mesh)
    basis = spectral.eigendecompose(P)
    G = basis.Psi.T @ (P.M @ basis.Psi)
    assert np.max(np.abs(G - np.eye(basis.n))) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 200))
def test_closed_form_1d_eigenvalues(m):
    basis = spectral.eigendecompose(fem.assemble(build_interval_mesh(m)))
    np.testing.assert_allclose(basis.lambdas, spectral.dst_eigenvalues(m), rtol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.floats(0, 2), st.floats(0, 2), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_semigroup(n, t1, t2, beta, seed):
    P = fem.assemble(build_square_mesh(n))
    basis = spectral.eigendecompose(P)
    v = np.random.default_rng(seed).standard_normal(basis.n)
    a = spectral.propagate_spectral(basis, spectral.propagate_spectral(basis, v, t1, beta), t2, beta)
    b = spectral.propagate_spectral(basis, v, t1 + t2, beta)
    assert np.max(np.abs(a - b)) <= 1e-9 * max(1.0, np.max(np.abs(v)))


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 10), st.floats(0.01, 2), st.floats(0.1, 0.9), st.integers(0, 2**31))
def test_stability(n, t, beta, seed):
    mesh = build_square_mesh(n)
    P = fem.assemble(mesh)
    v = np.random.default_rng(seed).standard_normal(P.n)
    nv = fem.l2_norm(mesh, P, v)
    basis = spectral.eigendecompose(P)
    assert fem.l2_norm(mesh, P, spectral.propagate_spectral(basis, v, t, beta)) <= nv * (1 + 1e-12)
    spec = sp.default_contour(2 * math.pi**2)
    q = sp.apply_propagator(P, v, t, beta, sp.make_rule(100, beta, "balanced", spec, t), spec)
    assert fem.l2_norm(mesh, P, q) <= nv * (1 + 1e-6)


@pytest.mark.parametrize("workers", [1, 2, 3, 8])
def test_determinism_under_thread_counts(workers):
    mesh = build_square_mesh(12)
    P = fem.assemble(mesh)
    v = fem.l2_project(mesh, spectral.checkerboard, P)
    spec = sp.default_contour(2 * math.pi**2)
    rule = sp.make_rule(40, 0.5)
    ref = sp.apply_propagator(P, v, 0.5, 0.5, rule, spec, workers=1)
    got = sp.apply_propagator(P, v, 0.5, 0.5, rule, spec, workers=workers)
    assert ref.tobytes() == got.tobytes()
