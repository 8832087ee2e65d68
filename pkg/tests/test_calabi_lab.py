"""Tests for the spherical-harmonic immersion lab."""

import math

import numpy as np
import pytest

from pinchcert import calabi_lab as cl
def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


SAMPLE_POINT = unit([0.31, -0.52, 0.80])


# ---------------------------------------------------------------------------
# immersion construction
# ---------------------------------------------------------------------------


def test_build_rejects_out_of_range_degree():
    for bad in (0, 7, -2):
        with pytest.raises(ValueError):
            cl.build_calabi_immersion(bad)


def test_image_lies_on_unit_sphere():
    pts = cl.fibonacci_sphere_points(200, seed=1)
    for s in range(1, 7):
        imm = cl.build_calabi_immersion(s)
        norms = np.linalg.norm(imm.evaluate(pts), axis=-1)
        assert np.max(np.abs(norms - 1.0)) < 1e-12
        assert imm.n_components == 2 * s + 1
        assert imm.sphere_dim == 2 * s


def test_degree_one_is_a_rigid_rotation_of_the_identity():
    imm = cl.build_calabi_immersion(1)
    pts = cl.fibonacci_sphere_points(30, seed=2)
    vals = imm.evaluate(pts)
    gram_domain = pts @ pts.T
    gram_image = vals @ vals.T
    assert np.max(np.abs(gram_domain - gram_image)) < 1e-12


def test_veronese_maps_into_the_four_sphere():
    imm = cl.build_calabi_immersion(2)
    assert imm.n_components == 5
    assert imm.sphere_dim == 4
    _, h, _ = cl.fundamental_forms(imm, SAMPLE_POINT)
    assert abs(np.sum(h**2) - 4.0 / 3.0) < 1e-8


# ---------------------------------------------------------------------------
# fundamental forms
# ---------------------------------------------------------------------------


def test_degree_one_is_totally_geodesic():
    imm = cl.build_calabi_immersion(1)
    _, h, framed = cl.fundamental_forms(imm, SAMPLE_POINT)
    assert h.shape == (0, 2, 2)
    assert framed.normal_frame.shape == (0, 3)


def test_first_form_is_scaled_round_metric_at_degree_three():
    imm = cl.build_calabi_immersion(3)
    first, _, framed = cl.fundamental_forms(imm, SAMPLE_POINT)
    theta = framed.chart_uv[0]
    expected = 6.0 * np.diag([1.0, math.sin(theta) ** 2])
    assert np.max(np.abs(first - expected)) < 1e-8
    # seven components into the 6-sphere with induced curvature 1/6
    assert imm.n_components == 7 and imm.sphere_dim == 6
    k = cl._brioschi_curvature(imm, framed.chart, *framed.chart_uv, 1e-3)
    assert abs(k - 1.0 / 6.0) < 1e-7


def test_gram_matrix_is_symmetric_positive_semidefinite():
    imm = cl.build_calabi_immersion(4)
    scan = cl.geometry_scan(imm, 25, seed=23)
    for a_mat in scan.A_matrix:
        assert np.max(np.abs(a_mat - a_mat.T)) < 1e-12
        assert np.min(np.linalg.eigvalsh(a_mat)) > -1e-12


def test_frames_are_orthonormal():
    imm = cl.build_calabi_immersion(4)
    for seed in (3, 4):
        for pt in cl.fibonacci_sphere_points(10, seed=seed):
            _, _, fr = cl.fundamental_forms(imm, pt)
            vectors = np.vstack([fr.position[None, :], fr.tangent_frame, fr.normal_frame])
            gram = vectors @ vectors.T
            assert np.max(np.abs(gram - np.eye(len(vectors)))) < 1e-10


def test_second_form_symmetric_and_trace_free():
    imm = cl.build_calabi_immersion(3)
    _, h, _ = cl.fundamental_forms(imm, SAMPLE_POINT)
    assert np.max(np.abs(h[:, 0, 1] - h[:, 1, 0])) < 1e-9
    assert np.max(np.abs(h[:, 0, 0] + h[:, 1, 1])) < 1e-7


# ---------------------------------------------------------------------------
# scans and identities
# ---------------------------------------------------------------------------


def test_scan_veronese_normal_curvature():
    imm = cl.build_calabi_immersion(2)
    scan = cl.geometry_scan(imm, 60, seed=5)
    assert np.max(np.abs(scan.rho_perp - 16.0 / 9.0)) < 1e-6
    assert np.max(np.abs(scan.S - 4.0 / 3.0)) < 1e-6


def test_scan_degree_three_fundamental_matrix_norm():
    imm = cl.build_calabi_immersion(3)
    scan = cl.geometry_scan(imm, 60, seed=6)
    assert np.max(np.abs(scan.A_norm_sq - 25.0 / 18.0)) < 1e-6


def test_scan_degree_one_flat_quantities():
    imm = cl.build_calabi_immersion(1)
    scan = cl.geometry_scan(imm, 40, seed=7)
    for arr in (scan.S, scan.rho_perp, scan.H_norm_sq, scan.A_norm_sq):
        assert np.max(np.abs(arr)) < 1e-12
    assert np.max(np.abs(scan.K_induced - 1.0)) < 1e-7


def test_scan_homogeneity_of_S():
    for s in (2, 3, 4):
        imm = cl.build_calabi_immersion(s)
        scan = cl.geometry_scan(imm, 80, seed=8)
        assert np.std(scan.S) < 1e-7


def test_cross_oracle_trace_of_gram_matrix():
    imm = cl.build_calabi_immersion(4)
    scan = cl.geometry_scan(imm, 40, seed=9)
    traces = np.trace(scan.A_matrix, axis1=1, axis2=2)
    assert np.max(np.abs(traces - scan.S)) < 1e-9


def test_intrinsic_and_gauss_equation_curvatures_agree():
    imm = cl.build_calabi_immersion(3)
    scan = cl.geometry_scan(imm, 40, seed=10)
    assert np.max(np.abs(scan.K_induced - scan.K_gauss)) < 1e-7


def test_verify_identities_degree_four():
    imm = cl.build_calabi_immersion(4)
    scan = cl.geometry_scan(imm, 120, seed=11)
    report = cl.verify_identities(scan)
    assert report.passed
    assert np.max(np.abs(scan.S - 9.0 / 5.0)) < 1e-6
    assert np.max(np.abs(scan.K_induced - 0.1)) < 1e-6


def test_verify_identities_marks_missing_derivatives_absent():
    imm = cl.build_calabi_immersion(2)
    scan = cl.geometry_scan(imm, 20, seed=12)
    report = cl.verify_identities(scan)
    row = {r.name: r for r in report.residuals}["grad_h_norm"]
    assert row.absent and report.passed


def test_verify_identities_second_form_vectors_degree_three():
    imm = cl.build_calabi_immersion(3)
    scan = cl.geometry_scan(imm, 60, seed=13)
    row = {r.name: r for r in cl.verify_identities(scan).residuals}["second_form_vectors"]
    assert row.max_residual <= 1e-6


def test_verify_identities_flags_genuine_failures():
    imm = cl.build_calabi_immersion(3)
    scan = cl.geometry_scan(imm, 10, seed=14)
    scan.S[0] += 1e-3  # corrupt one sample
    report = cl.verify_identities(scan)
    assert not report.passed


# ---------------------------------------------------------------------------
# covariant derivative
# ---------------------------------------------------------------------------


def test_covariant_derivative_step_domain():
    imm = cl.build_calabi_immersion(2)
    with pytest.raises(ValueError):
        cl.covariant_derivative_h(imm, SAMPLE_POINT, step=1e-5)
    with pytest.raises(ValueError):
        cl.covariant_derivative_h(imm, SAMPLE_POINT, step=0.1)


def test_covariant_derivative_vanishes_for_veronese():
    imm = cl.build_calabi_immersion(2)
    _, b1 = cl.covariant_derivative_h(imm, SAMPLE_POINT, step=1e-3)
    assert abs(b1) < 1e-4


def test_covariant_derivative_degree_three_value():
    # constant-S surfaces satisfy B1 = S(3S-4)/2; at S = 5/3 that is 5/6
    imm = cl.build_calabi_immersion(3)
    _, b1 = cl.covariant_derivative_h(imm, SAMPLE_POINT, step=1e-3)
    assert abs(b1 - 5.0 / 6.0) < 1e-3


def test_covariant_derivative_degree_one_zero():
    imm = cl.build_calabi_immersion(1)
    hijk, b1 = cl.covariant_derivative_h(imm, SAMPLE_POINT, step=1e-3)
    assert hijk.shape == (0, 2, 2, 2)
    assert b1 == 0.0


def test_covariant_components_symmetric_in_ij():
    imm = cl.build_calabi_immersion(4)
    hijk, _ = cl.covariant_derivative_h(imm, SAMPLE_POINT, step=1e-3)
    assert np.max(np.abs(hijk[:, 0, 1, :] - hijk[:, 1, 0, :])) < 1e-6


# ---------------------------------------------------------------------------
# invariance and convergence properties
# ---------------------------------------------------------------------------


def test_rotation_invariance_of_scan_scalars():
    imm = cl.build_calabi_immersion(3)
    rot = cl.random_rotation(7, seed=99)
    scan_a = cl.geometry_scan(imm, 40, seed=15)
    scan_b = cl.geometry_scan(imm.rotated(rot), 40, seed=15)
    for name in ("S", "rho_perp", "H_norm_sq", "K_induced", "A_norm_sq",
                 "a_dot_b", "a_norm_sq", "b_norm_sq"):
        diff = np.max(np.abs(getattr(scan_a, name) - getattr(scan_b, name)))
        assert diff < 1e-9, f"{name} moved by {diff}"


def test_random_rotation_is_orthogonal():
    rot = cl.random_rotation(9, seed=4)
    assert np.max(np.abs(rot @ rot.T - np.eye(9))) < 1e-12
    assert abs(np.linalg.det(rot) - 1.0) < 1e-12


def test_step_halving_improves_S_residual_by_factor_three():
    imm = cl.build_calabi_immersion(4)
    residuals = []
    for h in (0.08, 0.04, 0.02):
        _, hh, _ = cl.fundamental_forms(imm, SAMPLE_POINT, step=h)
        residuals.append(abs(float(np.sum(hh**2)) - 1.8))
    floor = 1e-10
    for coarse, fine in zip(residuals, residuals[1:]):
        assert fine < floor or coarse / fine >= 3.0


def test_dual_number_first_derivatives_match_stencils():
    imm = cl.build_calabi_immersion(4)
    ch = cl.chart_for_point(SAMPLE_POINT)
    th, ph = cl.chart_coords(ch, SAMPLE_POINT)
    jet = cl._local_jet(imm, ch, th, ph, 1e-3)
    du, dv = cl._first_derivatives_complex_step(
        imm, ch, np.array([[th]]), np.array([[ph]])
    )
    assert np.max(np.abs(jet.du - du[0, 0])) < 1e-8
    assert np.max(np.abs(jet.dv - dv[0, 0])) < 1e-8


# ---------------------------------------------------------------------------
# charts, sampling, serialization
# ---------------------------------------------------------------------------


def test_chart_selection_avoids_poles():
    for pt in ([0, 0, 1], [0, 0, -1], [0.1, 0.0, 0.99]):
        assert cl.chart_for_point(unit(pt)) == 1
    assert cl.chart_for_point(unit([1, 0, 0])) == 0
    assert cl.chart_for_point(unit([0.5, 0.5, 0.3])) == 0


def test_chart_roundtrip():
    for chart in (0, 1):
        for pt in cl.fibonacci_sphere_points(20, seed=16):
            theta, phi = cl.chart_coords(chart, pt)
            back = cl.chart_point(chart, theta, phi)
            assert np.max(np.abs(back - pt)) < 1e-12


def test_fibonacci_points_are_deterministic_and_unit():
    a = cl.fibonacci_sphere_points(64, seed=17)
    b = cl.fibonacci_sphere_points(64, seed=17)
    c = cl.fibonacci_sphere_points(64, seed=18)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.max(np.abs(np.linalg.norm(a, axis=1) - 1.0)) < 1e-12


def test_scan_csv_and_summary():
    imm = cl.build_calabi_immersion(2)
    scan = cl.geometry_scan(imm, 8, seed=19, with_derivatives=True)
    csv_text = scan.to_csv()
    lines = csv_text.strip().splitlines()
    assert len(lines) == 9
    assert lines[0].startswith("index,x,y,z,chart,S,")
    assert lines[0].endswith("B1")
    summary = scan.summary()
    assert summary["s"] == 2 and summary["n_samples"] == 8
    assert scan.to_json_str() == scan.to_json_str()


def test_threaded_scan_matches_serial(monkeypatch):
    imm = cl.build_calabi_immersion(3)
    serial = cl.geometry_scan(imm, 24, seed=20, workers=1)
    threaded = cl.geometry_scan(imm, 24, seed=20, workers=4)
    assert np.array_equal(serial.S, threaded.S)
    assert np.array_equal(serial.K_induced, threaded.K_induced)
    monkeypatch.setenv("PINCHCERT_THREADS", "3")
    enved = cl.geometry_scan(imm, 24, seed=20)
    assert np.array_equal(serial.S, enved.S)


def test_scan_requires_samples():
    with pytest.raises(ValueError):
        cl.geometry_scan(cl.build_calabi_immersion(2), 0, seed=0)
