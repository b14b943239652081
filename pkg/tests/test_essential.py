"""Slice-family, union, refinement, and finite-section check tests."""

import numpy as np
import pytest

import bergspec.essential as essential
from bergspec import (
    BergspecError,
    EmptyRegionError,
    GridSpec,
    ProbeLocationError,
    RegionApprox,
    SliceParams,
    ThetaGrid,
    essential_spectrum_2d,
    hausdorff_distance,
    parse,
    slice_spectra_family,
    verify_against_2d_sections,
)
from bergspec.selftest import reference_disc_mesh


def test_theta_grid():
    tg = ThetaGrid(8)
    assert tg.nodes.shape == (8,)
    assert tg.nodes[2] == pytest.approx(np.pi / 2)
    with pytest.raises(BergspecError):
        ThetaGrid(3)


def test_theta_grid_nodes_nest_exactly():
    # doubling the grid must reproduce the coarse nodes bit for bit, so
    # memoized slice results are reused across the refinement round
    coarse = ThetaGrid(16).nodes
    fine = ThetaGrid(32).nodes
    assert np.array_equal(coarse, fine[::2])


def test_hausdorff_distance_known_sets():
    a = RegionApprox(points=np.array([0.0 + 0.0j, 1.0 + 0.0j]), h=0.1)
    b = RegionApprox(points=np.array([0.0 + 0.0j, 1.0 + 0.5j]), h=0.1)
    assert hausdorff_distance(a, b) == pytest.approx(0.5)
    assert hausdorff_distance(a, a) == 0.0


def test_hausdorff_empty_raises():
    a = RegionApprox(points=np.array([0.0 + 0.0j]), h=0.1)
    empty = RegionApprox(points=np.array([], dtype=complex), h=0.1,
                         meta={"empty": True})
    with pytest.raises(EmptyRegionError):
        hausdorff_distance(a, empty)


def test_empty_region_must_be_declared():
    with pytest.raises(BergspecError):
        RegionApprox(points=np.array([], dtype=complex), h=0.1)


def test_slice_family_one_variable_symbol():
    grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 41, 41)
    params = SliceParams(n=16, eps=1e-3, m_theta=32, grid=grid)
    tg = ThetaGrid(4)
    fam1 = slice_spectra_family(parse("z"), "theta1", tg, params)
    fam2 = slice_spectra_family(parse("z"), "theta2", tg, params)
    assert len(fam1) == 4 and len(fam2) == 4
    # freezing z leaves constants e^(i theta)
    for theta, reg in fam1:
        target = np.exp(1j * theta)
        assert np.abs(reg.points - target).min() <= 1e-12
    # freezing w leaves the symbol itself; regions are memoized identical
    assert all(reg is fam2[0][1] for _, reg in fam2[1:])


def test_slice_family_memoization_across_commutation():
    grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 21, 21)
    params = SliceParams(n=8, eps=1e-3, m_theta=32, grid=grid)
    tg = ThetaGrid(4)
    fam1 = slice_spectra_family(parse("z*w"), "theta1", tg, params)
    fam2 = slice_spectra_family(parse("z*w"), "theta2", tg, params)
    # theta1 freezes z in z*w, theta2 freezes w: the slice symbols agree
    # after commutative reordering, so the cached regions are shared
    for (t1, r1), (t2, r2) in zip(fam1, fam2):
        assert r1 is r2


def test_essential_2d_shift_union_is_disc():
    res = essential_spectrum_2d(parse("z"), n=24, eps=1e-3, m=8, m_theta=128,
                                resolution=61, refine=False)
    dist = hausdorff_distance(res.union_region, reference_disc_mesh(1.0, 0.05))
    assert dist <= 0.25
    assert res.params["m_effective"] == 8
    assert res.params["refinement"] == {"checked": False}
    # shared grid derives from the sampled boundary box padded by 0.5
    assert res.params["grid"]["re_min"] == pytest.approx(-1.5)
    assert res.params["grid"]["re_max"] == pytest.approx(1.5)


def test_essential_2d_refinement_not_adopted_when_stable():
    res = essential_spectrum_2d(parse("z"), n=24, eps=1e-3, m=8, m_theta=128,
                                resolution=61, refine=True)
    ref = res.params["refinement"]
    assert ref["checked"] is True
    assert ref["adopted"] is False
    assert ref["hausdorff"] <= res.union_region.h
    assert res.params["m_effective"] == 8


def test_essential_2d_refinement_adopts_on_coarse_grid():
    # 4 slice discs leave genuine gaps; doubling to 8 must be adopted
    res = essential_spectrum_2d(parse("z+w"), n=16, eps=1e-3, m=4, m_theta=32,
                                resolution=41, refine=True)
    ref = res.params["refinement"]
    assert ref["checked"] is True
    assert ref["adopted"] is True
    assert res.params["m_effective"] == 8
    assert len(res.slices_theta1) == 8


def test_union_contains_every_slice_point_within_tolerance():
    res = essential_spectrum_2d(parse("z+w"), n=16, eps=1e-3, m=4, m_theta=32,
                                resolution=41, refine=False)
    union = res.union_region
    for fam in (res.slices_theta1, res.slices_theta2):
        for _, reg in fam:
            d = np.abs(reg.points[:, None] - union.points[None, :]).min(axis=1)
            # snapping moves points by at most h*sqrt(2)/4
            assert d.max() <= union.h * np.sqrt(2.0) / 4.0 + 1e-12


def test_union_snap_is_exact_superset_under_doubling():
    res64 = essential_spectrum_2d(parse("z*w"), n=12, eps=1e-3, m=8,
                                  m_theta=32, resolution=41, refine=False)
    res128 = essential_spectrum_2d(parse("z*w"), n=12, eps=1e-3, m=16,
                                   m_theta=32, resolution=41, refine=False)
    # nested theta nodes on one shared lattice: the doubled union contains
    # every coarse union point exactly
    assert np.isin(res64.union_region.points, res128.union_region.points).all()


def test_degenerate_consistency_of_one_variable_embedding():
    from bergspec import spectrum_1d_estimate

    res = essential_spectrum_2d(parse("z^2"), n=24, eps=1e-3, m=8, m_theta=128,
                                resolution=61, refine=False)
    g = res.params["grid"]
    grid = GridSpec(g["re_min"], g["re_max"], g["im_min"], g["im_max"],
                    g["n_re"], g["n_im"])
    standalone = spectrum_1d_estimate(parse("z^2"), n=24, grid=grid, eps=1e-3,
                                      m_theta=128)
    assert hausdorff_distance(res.union_region, standalone) <= res.union_region.h


def test_verify_classifications():
    res = essential_spectrum_2d(parse("z"), n=24, eps=1e-3, m=8, m_theta=128,
                                resolution=61, refine=False)
    report = verify_against_2d_sections(parse("z"), res, probes=[2.0, 0.25],
                                        n2=12, eps=1e-3)
    assert report["all_consistent"] is True
    by_loc = {r["location"]: r for r in report["probes"]}
    assert by_loc["outside"]["probe"] == 2.0
    assert by_loc["outside"]["sigma_full"] >= 1.0
    assert by_loc["inside"]["sigma_full"] <= 1e-3
    assert report["n_half"] == 6


def test_verify_probe_near_boundary_refused():
    res = essential_spectrum_2d(parse("z"), n=24, eps=1e-3, m=8, m_theta=128,
                                resolution=61, refine=False)
    with pytest.raises(ProbeLocationError):
        verify_against_2d_sections(parse("z"), res, probes=[1.02 + 0.0j],
                                   n2=8, eps=1e-3)


def test_verify_inconclusive_is_reported_not_raised():
    res = essential_spectrum_2d(parse("z"), n=24, eps=1e-3, m=8, m_theta=128,
                                resolution=61, refine=False)
    # an absurd eps makes the inside check fail without erroring out
    report = verify_against_2d_sections(parse("z"), res, probes=[0.25],
                                        n2=12, eps=1e-9)
    assert report["all_consistent"] is False
    assert report["probes"][0]["verdict"] == "inconclusive"


def test_shared_grid_fixed_sampling_independent_of_m():
    a = essential_spectrum_2d(parse("z+w"), n=8, eps=1e-3, m=4, m_theta=32,
                              resolution=21, refine=False)
    b = essential_spectrum_2d(parse("z+w"), n=8, eps=1e-3, m=8, m_theta=32,
                              resolution=21, refine=False)
    assert a.params["grid"] == b.params["grid"]


def test_slice_cache_reuse_across_calls():
    grid = GridSpec(-1.5, 1.5, -1.5, 1.5, 21, 21)
    params = SliceParams(n=8, eps=1e-3, m_theta=32, grid=grid)
    tg = ThetaGrid(4)
    fam_a = slice_spectra_family(parse("z*w"), "theta1", tg, params)
    fam_b = slice_spectra_family(parse("z*w"), "theta1", tg, params)
    for (_, ra), (_, rb) in zip(fam_a, fam_b):
        assert ra is rb
