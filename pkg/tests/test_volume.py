from itertools import permutations, product

import numpy as np
import pytest

from src.exceptions import InvalidInputError
from src.volume import (
    LabelMap,
    Volume3D,
    bounding_box,
    canonicalize_orientation,
    centroid,
    crop_around,
    dilate,
    erode,
    load_label_map,
    load_volume,
    mask_volume_mm3,
    morphology,
    reorient,
    resample_isotropic_1mm,
    resample_labels_isotropic,
    save_label_map,
    save_volume,
    tile_sliding_windows,
)

AXIS_LETTERS = (("L", "R"), ("P", "A"), ("S", "I"))


def all_orientation_codes():
    codes = []
    for order in permutations(range(3)):
        for choice in product((0, 1), repeat=3):
            codes.append("".join(AXIS_LETTERS[axis][pick] for axis, pick in zip(order, choice)))
    return codes


def test_there_are_48_orientation_codes():
    assert len(set(all_orientation_codes())) == 48


def test_canonical_volume_is_unchanged():
    vol = Volume3D(np.arange(24, dtype=np.float64).reshape(2, 3, 4), spacing=(1.0, 2.0, 3.0))
    canonical = canonicalize_orientation(vol)
    np.testing.assert_array_equal(canonical.voxels, vol.voxels)
    assert canonical.spacing == vol.spacing


@pytest.mark.parametrize("code", all_orientation_codes())
def test_orientation_round_trip_is_bit_exact(code):
    rng = np.random.default_rng(len(code) + sum(map(ord, code)))
    vol = Volume3D(rng.normal(size=(4, 4, 4)), spacing=(0.7, 1.3, 2.9), origin=(5.0, -3.0, 12.0), orientation=code)
    canonical = canonicalize_orientation(vol)
    assert canonical.orientation == "LPS"

    back = reorient(canonical, code)
    np.testing.assert_array_equal(back.voxels, vol.voxels)
    np.testing.assert_allclose(back.spacing, vol.spacing)
    np.testing.assert_allclose(back.origin, vol.origin, atol=1e-9)


def test_reorient_permutes_axes_like_a_hand_oracle():
    voxels = np.arange(2 * 3 * 4, dtype=np.float64).reshape(2, 3, 4)
    vol = Volume3D(voxels, spacing=(1.0, 2.0, 3.0), orientation="SLP")
    canonical = canonicalize_orientation(vol)

    assert canonical.dims == (3, 4, 2)
    assert canonical.spacing == (2.0, 3.0, 1.0)
    for a, b, c in np.ndindex(voxels.shape):
        assert canonical.voxels[b, c, a] == voxels[a, b, c]


def test_reorient_flip_keeps_world_positions():
    voxels = np.random.default_rng(3).normal(size=(5, 3, 2))
    vol = Volume3D(voxels, spacing=(2.0, 1.0, 1.5), origin=(10.0, 20.0, 30.0), orientation="RPS")
    canonical = canonicalize_orientation(vol)

    np.testing.assert_array_equal(canonical.voxels, voxels[::-1, :, :])
    # voxel (0, 0, 0) of the input is voxel (4, 0, 0) after the flip
    before = vol.affine @ np.array([0, 0, 0, 1.0])
    after = canonical.affine @ np.array([4, 0, 0, 1.0])
    np.testing.assert_allclose(after, before)


@pytest.mark.parametrize("code", ["LLS", "XYZ", "LP", "LPSI", "ASP2"])
def test_invalid_orientation_codes_are_rejected(code):
    with pytest.raises(InvalidInputError):
        Volume3D(np.zeros((2, 2, 2)), orientation=code)


def test_volume_rejects_bad_geometry():
    with pytest.raises(InvalidInputError):
        Volume3D(np.zeros((2, 2)))
    with pytest.raises(InvalidInputError):
        Volume3D(np.zeros((2, 2, 2)), spacing=(1.0, 0.0, 1.0))
    with pytest.raises(InvalidInputError):
        Volume3D(np.full((2, 2, 2), np.nan))


def test_label_map_requires_integer_classes():
    with pytest.raises(InvalidInputError):
        LabelMap(np.zeros((2, 2, 2)))
    with pytest.raises(InvalidInputError):
        LabelMap(np.full((2, 2, 2), 26, dtype=np.uint8))


def test_resample_at_target_spacing_is_identity():
    voxels = np.random.default_rng(0).normal(size=(6, 7, 8))
    out = resample_isotropic_1mm(Volume3D(voxels))
    assert out.dims == (6, 7, 8)
    np.testing.assert_allclose(out.voxels, voxels, atol=1e-12)


def test_resample_reproduces_affine_fields():
    i, j, k = np.indices((10, 8, 6), dtype=np.float64)
    # Field in mm coordinates at 2 mm spacing
    x, y, z = 2 * i, 2 * j, 2 * k
    vol = Volume3D(2 * x + 3 * y - z + 5, spacing=(2.0, 2.0, 2.0))

    out = resample_isotropic_1mm(vol)
    assert out.dims == (19, 15, 11)
    assert out.spacing == (1.0, 1.0, 1.0)
    a, b, c = np.indices(out.dims, dtype=np.float64)
    np.testing.assert_allclose(out.voxels, 2 * a + 3 * b - c + 5, atol=1e-6)


def test_resample_stays_within_input_range():
    voxels = np.random.default_rng(1).uniform(-500, 900, size=(7, 5, 9))
    out = resample_isotropic_1mm(Volume3D(voxels, spacing=(0.8, 2.5, 1.7)))
    assert out.voxels.min() >= voxels.min()
    assert out.voxels.max() <= voxels.max()

    constant = resample_isotropic_1mm(Volume3D(np.full((4, 4, 4), 42.0), spacing=(3.0, 0.5, 1.2)))
    np.testing.assert_array_equal(constant.voxels, 42.0)


def test_label_resampling_never_invents_classes():
    labels = np.random.default_rng(2).choice(np.array([0, 2, 16], dtype=np.uint8), size=(6, 6, 6))
    out = resample_labels_isotropic(LabelMap(labels, spacing=(1.5, 1.5, 2.0)))
    assert out.voxels.dtype == np.uint8
    assert set(np.unique(out.voxels)) <= {0, 2, 16}


def test_mask_volume_uses_spacing():
    mask = np.zeros((5, 5, 5), dtype=bool)
    mask.flat[:10] = True
    assert mask_volume_mm3(mask, (1.0, 1.0, 1.0)) == 10.0

    cube = np.zeros((4, 4, 4), dtype=bool)
    cube[:2, :2, :2] = True
    assert mask_volume_mm3(cube, (2.0, 2.0, 2.0)) == 64.0


def test_bounding_box_and_centroid():
    mask = np.zeros((10, 10, 10), dtype=bool)
    mask[2:5, 3:4, 6:10] = True
    assert bounding_box(mask) == (slice(2, 5), slice(3, 4), slice(6, 10))
    assert centroid(mask) == (3.0, 3.0, 7.5)
    assert bounding_box(np.zeros((3, 3, 3), dtype=bool)) is None
    with pytest.raises(InvalidInputError):
        centroid(np.zeros((3, 3, 3), dtype=bool))


def test_single_window_when_volume_fits():
    tiling = tile_sliding_windows((64, 64, 64), window=128)
    assert len(tiling) == 1
    assert tiling.window == (64, 64, 64)
    np.testing.assert_allclose(tiling.weights(0), 1.0)


def test_last_window_is_flush_with_the_edge():
    tiling = tile_sliding_windows((128, 128, 200), window=128, overlap_fraction=0.5)
    assert tiling.starts == ((0,), (0,), (0, 64, 72))
    assert len(tiling) == 3
    assert tiling.corners[-1] == (0, 0, 72)


def test_blend_weights_form_a_partition_of_unity():
    tiling = tile_sliding_windows((100, 130, 150), window=64, overlap_fraction=0.25)
    total = np.zeros(tiling.dims)
    for index, box in enumerate(tiling.boxes):
        total[box] += tiling.weights(index)
    np.testing.assert_allclose(total, 1.0, atol=1e-6)


def test_partition_of_unity_at_random_voxels():
    tiling = tile_sliding_windows((192, 192, 192), window=128, overlap_fraction=0.5)
    rng = np.random.default_rng(7)
    for voxel in rng.integers(0, 192, size=(1000, 3)):
        assert abs(tiling.weight_sum_at(voxel) - 1.0) < 1e-6


def test_tiling_rejects_bad_parameters():
    with pytest.raises(InvalidInputError):
        tile_sliding_windows((10, 10, 10), window=0)
    with pytest.raises(InvalidInputError):
        tile_sliding_windows((10, 10, 10), window=4, overlap_fraction=1.0)


def test_morphology_radius_zero_is_identity():
    mask = np.random.default_rng(4).random((8, 8, 8)) > 0.5
    np.testing.assert_array_equal(morphology(mask, "erode", 0.0), mask)
    np.testing.assert_array_equal(morphology(mask, "dilate", 0.0), mask)
    with pytest.raises(InvalidInputError):
        dilate(mask, -1.0)


def test_dilation_ball_matches_enumeration():
    mask = np.zeros((9, 9, 9), dtype=bool)
    mask[4, 4, 4] = True
    assert dilate(mask, 1.0).sum() == 7

    radius = 2.0
    offsets = np.indices((9, 9, 9)) - 4
    expected = (offsets ** 2).sum(axis=0) <= radius ** 2
    np.testing.assert_array_equal(dilate(mask, radius), expected)


def test_dilation_respects_anisotropic_spacing():
    mask = np.zeros((9, 9, 9), dtype=bool)
    mask[4, 4, 4] = True
    grown = dilate(mask, 2.0, spacing=(1.0, 1.0, 2.0))
    assert grown[4, 4, 5] and not grown[4, 4, 6]
    assert grown[6, 4, 4] and not grown[7, 4, 4]


def test_erosion_treats_the_grid_border_as_background():
    cube = np.ones((64, 64, 64), dtype=bool)
    kept = np.argwhere(erode(cube, 5.0))
    assert kept.min() == 5
    assert kept.max() == 58


def test_closing_contains_the_original_mask():
    rng = np.random.default_rng(5)
    for _ in range(10):
        mask = np.zeros((12, 12, 12), dtype=bool)
        lo = rng.integers(3, 5, size=3)
        hi = lo + rng.integers(1, 4, size=3)
        mask[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True
        radius = float(rng.uniform(1.0, 2.5))
        closed = erode(dilate(mask, radius), radius)
        assert np.all(closed[mask])


def test_crop_around_moves_the_origin():
    vol = Volume3D(np.arange(1000, dtype=np.float64).reshape(10, 10, 10), origin=(1.0, 2.0, 3.0))
    crop = crop_around(vol, (5, 5, 5), 4)
    np.testing.assert_array_equal(crop.voxels, vol.voxels[3:7, 3:7, 3:7])
    np.testing.assert_allclose(crop.affine @ [0, 0, 0, 1], vol.affine @ [3, 3, 3, 1])


def test_crop_pads_outside_the_grid():
    image = crop_around(Volume3D(np.zeros((6, 6, 6))), (0, 0, 0), 4)
    assert image.voxels[0, 0, 0] == -1000.0
    assert image.voxels[2, 2, 2] == 0.0

    labels = crop_around(LabelMap(np.full((6, 6, 6), 3, dtype=np.uint8)), (0, 0, 0), 4)
    assert labels.voxels[0, 0, 0] == 0
    assert labels.voxels[3, 3, 3] == 3


def test_nifti_round_trip_keeps_geometry(tmp_path):
    voxels = np.random.default_rng(6).uniform(-1000, 1000, size=(5, 6, 7))
    vol = Volume3D(voxels, spacing=(1.5, 2.0, 3.0), origin=(10.0, -5.0, 7.0), orientation="RPS")
    path = save_volume(vol, tmp_path / "image.nii.gz")

    loaded = load_volume(path)
    assert loaded.orientation == "RPS"
    np.testing.assert_allclose(loaded.spacing, vol.spacing)
    np.testing.assert_allclose(loaded.origin, vol.origin)
    np.testing.assert_allclose(loaded.voxels, voxels.astype(np.float32))
    assert not list(tmp_path.glob(".*tmp*"))


def test_label_map_round_trip(tmp_path):
    labels = LabelMap(np.random.default_rng(8).integers(0, 26, size=(4, 5, 6)).astype(np.uint8))
    loaded = load_label_map(save_label_map(labels, tmp_path / "labels.nii.gz"))
    assert loaded.voxels.dtype == np.uint8
    np.testing.assert_array_equal(loaded.voxels, labels.voxels)


def test_compressed_output_is_byte_deterministic(tmp_path):
    vol = Volume3D(np.random.default_rng(9).normal(size=(8, 8, 8)))
    first = save_volume(vol, tmp_path / "a" / "image.nii.gz")
    second = save_volume(vol, tmp_path / "b" / "image.nii.gz")
    assert first.read_bytes() == second.read_bytes()


def test_loading_missing_or_broken_files_fails_cleanly(tmp_path):
    with pytest.raises(InvalidInputError):
        load_volume(tmp_path / "missing.nii.gz")
    broken = tmp_path / "broken.nii.gz"
    broken.write_bytes(b"not a nifti file")
    with pytest.raises(InvalidInputError):
        load_volume(broken)
