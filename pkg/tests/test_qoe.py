import numpy as np
import pytest

from pqossim.qoe import as_point_cloud, chamfer_sym, chamfer_sym_accelerated, load_point_cloud


def chamfer_brute(ref, cand):
    """Independent oracle: plain double loop over all point pairs."""
    total = 0.0
    for a in ref:
        best = min(
            (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2 for b in cand
        )
        total += best
    for b in cand:
        best = min(
            (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2 for a in ref
        )
        total += best
    return total


def random_cloud(rng, n, scale=10.0):
    return rng.uniform(-scale, scale, size=(n, 3))


def test_identity_is_exactly_zero():
    rng = np.random.default_rng(1)
    for n in (1, 2, 17, 200):
        cloud = random_cloud(rng, n)
        assert chamfer_sym(cloud, cloud) == 0.0
        assert chamfer_sym_accelerated(cloud, cloud) == 0.0


def test_single_point_pair():
    assert chamfer_sym([[0.0, 0.0, 0.0]], [[1.0, 0.0, 0.0]]) == 2.0
    assert chamfer_sym_accelerated([[0.0, 0.0, 0.0]], [[1.0, 0.0, 0.0]]) == 2.0


def test_matches_brute_force_oracle_on_small_clouds():
    rng = np.random.default_rng(2)
    for _ in range(50):
        ref = random_cloud(rng, int(rng.integers(1, 11)))
        cand = random_cloud(rng, int(rng.integers(1, 11)))
        expected = chamfer_brute(ref, cand)
        got = chamfer_sym(ref, cand)
        assert got == pytest.approx(expected, rel=1e-12)


def test_symmetry_is_exact():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = random_cloud(rng, int(rng.integers(1, 50)))
        b = random_cloud(rng, int(rng.integers(1, 50)))
        assert chamfer_sym(a, b) == chamfer_sym(b, a)
        assert chamfer_sym_accelerated(a, b) == chamfer_sym_accelerated(b, a)


def test_subset_clouds_have_zero_distance():
    # zero iff each cloud is a subset of the other's point set
    rng = np.random.default_rng(4)
    base = random_cloud(rng, 20)
    doubled = np.vstack([base, base[:7]])
    assert chamfer_sym(base, doubled) == 0.0
    extra = np.vstack([base, [[99.0, 99.0, 99.0]]])
    assert chamfer_sym(base, extra) > 0.0


def test_outlier_injection_never_decreases_distance():
    rng = np.random.default_rng(5)
    for _ in range(30):
        a = random_cloud(rng, int(rng.integers(2, 20)))
        b = random_cloud(rng, int(rng.integers(2, 20)))
        before = chamfer_sym(a, b)
        # a point farther from every point of a than any current point of b
        span = np.abs(a).max() + np.abs(b).max()
        outlier = np.array([[10.0 * span + 5.0, 0.0, 0.0]])
        after = chamfer_sym(a, np.vstack([b, outlier]))
        assert after >= before


def test_accelerated_matches_dense_randomized():
    rng = np.random.default_rng(6)
    for _ in range(100):
        a = random_cloud(rng, int(rng.integers(1, 400)))
        b = random_cloud(rng, int(rng.integers(1, 400)))
        dense = chamfer_sym(a, b)
        fast = chamfer_sym_accelerated(a, b)
        assert fast == pytest.approx(dense, rel=1e-9)


def test_duplicate_points_allowed():
    cloud = [[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]
    assert chamfer_sym(cloud, cloud) == 0.0


@pytest.mark.parametrize(
    "bad",
    [
        [],
        [[1.0, 2.0]],
        [[1.0, 2.0, np.nan]],
        [[1.0, 2.0, np.inf]],
    ],
)
def test_invalid_clouds_rejected(bad):
    good = [[0.0, 0.0, 0.0]]
    with pytest.raises(ValueError):
        chamfer_sym(bad, good)
    with pytest.raises(ValueError):
        chamfer_sym_accelerated(good, bad)


def test_as_point_cloud_returns_float64():
    out = as_point_cloud([[1, 2, 3]])
    assert out.dtype == np.float64
    assert out.shape == (1, 3)


def test_load_point_cloud(tmp_path):
    path = tmp_path / "cloud.txt"
    path.write_text("0.0 0.0 0.0\n1.5  2.5\t3.5\n")
    cloud = load_point_cloud(path)
    assert cloud.shape == (2, 3)
    assert cloud[1, 2] == 3.5


def test_load_point_cloud_rejects_malformed(tmp_path):
    for text in ("", "1.0 2.0\n", "a b c\n", "1 2 3 4\n"):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(ValueError):
            load_point_cloud(path)
