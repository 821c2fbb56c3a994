import numpy as np
import pytest

from pqossim.errors import ConfigError
from pqossim.link import DEFAULT_MCS_TABLE, McsTable, load_mcs_table, sinr_to_mcs


def test_outage_floor():
    idx, eff = sinr_to_mcs(-50.0)
    assert (idx, eff) == (0, 0.0)
    idx, eff = sinr_to_mcs(1.94)
    assert (idx, eff) == (0, 0.0)


def test_saturation_at_top_entry():
    idx, eff = sinr_to_mcs(100.0)
    assert idx == len(DEFAULT_MCS_TABLE) - 1
    assert eff == DEFAULT_MCS_TABLE[-1, 1]


def test_thresholds_are_inclusive_lower_bounds():
    for k, (thr, eff) in enumerate(DEFAULT_MCS_TABLE):
        idx, got = sinr_to_mcs(float(thr))
        assert idx == k
        assert got == eff


def test_efficiency_monotone_over_random_pairs():
    rng = np.random.default_rng(0)
    table = McsTable()
    for _ in range(1000):
        s1, s2 = sorted(rng.uniform(-20.0, 50.0, size=2))
        _, e1 = sinr_to_mcs(float(s1), table)
        _, e2 = sinr_to_mcs(float(s2), table)
        assert e1 <= e2


def test_vectorized_lookup_matches_scalar():
    rng = np.random.default_rng(1)
    table = McsTable()
    sinr = rng.uniform(-20.0, 50.0, size=200)
    idx, eff = table.lookup(sinr)
    for i, s in enumerate(sinr):
        si, se = sinr_to_mcs(float(s), table)
        assert (idx[i], eff[i]) == (si, se)


def test_non_finite_sinr_rejected():
    with pytest.raises(ValueError):
        sinr_to_mcs(float("nan"))


@pytest.mark.parametrize(
    "table",
    [
        [[1.0, 0.5], [1.0, 0.7]],  # non-increasing threshold
        [[1.0, 0.5], [2.0, 0.5]],  # non-increasing efficiency
        [[1.0, -0.5]],  # negative efficiency
        [[1.0, 0.5, 3.0]],  # wrong shape
    ],
)
def test_bad_tables_rejected(table):
    with pytest.raises(ConfigError):
        McsTable(np.array(table, dtype=float))


def test_load_mcs_table_roundtrip(tmp_path):
    path = tmp_path / "mcs.txt"
    lines = "\n".join(f"{t} {e}" for t, e in DEFAULT_MCS_TABLE)
    path.write_text(lines + "\n")
    table = load_mcs_table(path)
    assert np.array_equal(table.thresholds, DEFAULT_MCS_TABLE[:, 0])
    assert np.array_equal(table.efficiencies, DEFAULT_MCS_TABLE[:, 1])


def test_load_mcs_table_malformed(tmp_path):
    path = tmp_path / "mcs.txt"
    path.write_text("not numbers\n")
    with pytest.raises(ConfigError):
        load_mcs_table(path)
    path.write_text("")
    with pytest.raises(ConfigError):
        load_mcs_table(path)
