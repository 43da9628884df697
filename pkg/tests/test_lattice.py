import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gumbel_lpp.lattice import (CapacityError, MultiEdgeConfig, MultiEdgeWeights, PassageGrid, Semantics, ShapeError,
                                WeightField, direct_partition_function, gumbel_lpp_grid, log_gamma_grid,
                                lpp_path_oracle, multi_edge_lpp_grid, normalize_multi_edge,
                                one_step_laws, polymer_path_oracle, read_weight_table, sample_statistic)
from gumbel_lpp.randomness import DistributionSpec, ParameterError
from gumbel_lpp.statistics import ks_one_sample, ks_two_sample


def gumbel_cdf(y):
    return np.exp(-np.exp(-y))


def random_edges(rng, m, n):
    h = np.full((m, n), np.nan)
    v = np.full((m, n), np.nan)
    h[1:, :] = rng.gumbel(size=(m - 1, n))
    v[:, 1:] = rng.gumbel(size=(m, n - 1))
    return WeightField.edges(rng.gumbel(), h, v)


def hand_edges():
    h = np.full((2, 2), np.nan)
    v = np.full((2, 2), np.nan)
    h[1, 0], v[0, 1], h[1, 1], v[1, 1] = 1.0, 2.0, 5.0, 3.0
    return WeightField.edges(0.0, h, v)


# ---------------------------------------------------------------- Gumbel LPP


def test_single_cell():
    w = WeightField.edges(0.7, np.full((1, 1), np.nan), np.full((1, 1), np.nan))
    assert gumbel_lpp_grid(1, 1, w)[1, 1] == 0.7


def test_hand_example_two_by_two():
    w = hand_edges()
    assert gumbel_lpp_grid(2, 2, w)[2, 2] == 7.0
    assert lpp_path_oracle(2, 2, w) == (7.0, 2)


def test_boundary_strip_single_path():
    rng = np.random.default_rng(3)
    w = random_edges(rng, 1, 5)
    val, count = lpp_path_oracle(1, 5, w)
    assert count == 1
    assert val == pytest.approx(w.origin + np.nansum(w.vertical[0, 1:]), abs=1e-12)


@pytest.mark.parametrize("m", range(1, 6))
@pytest.mark.parametrize("n", range(1, 6))
def test_lpp_recursion_equals_oracle(m, n):
    w = random_edges(np.random.default_rng(100 * m + n), m, n)
    g = gumbel_lpp_grid(m, n, w)
    val, count = lpp_path_oracle(m, n, w)
    assert count == math.comb(m + n - 2, m - 1)
    assert abs(g.corner - val) < 1e-12


def test_wavefront_is_bit_identical():
    w = random_edges(np.random.default_rng(5), 17, 11)
    a = gumbel_lpp_grid(17, 11, w).values
    b = gumbel_lpp_grid(17, 11, w, mode="wavefront").values
    assert np.array_equal(a, b)


def test_ties_go_horizontal_and_values_unaffected():
    h = np.full((2, 2), np.nan)
    v = np.full((2, 2), np.nan)
    h[1, 0], v[0, 1], h[1, 1], v[1, 1] = 1.0, 1.0, 2.0, 2.0
    assert gumbel_lpp_grid(2, 2, WeightField.edges(0.0, h, v))[2, 2] == 3.0


def test_recursion_invariant_holds_on_sampled_grid():
    w = WeightField.sample_lpp(9, 4, 12, 9)
    t = gumbel_lpp_grid(12, 9, w).values
    h, v = w.horizontal, w.vertical
    assert np.array_equal(t[1:, 1:], np.maximum(t[:-1, 1:] + h[1:, 1:], t[1:, :-1] + v[1:, 1:]))
    assert np.allclose(t[:, 0], w.origin + np.concatenate([[0], np.cumsum(h[1:, 0])]), atol=1e-12)


def test_missing_weights_are_rejected():
    w = random_edges(np.random.default_rng(1), 2, 2)
    with pytest.raises(ShapeError):
        gumbel_lpp_grid(3, 2, w)
    h = w.horizontal.copy()
    h[1, 1] = np.nan
    with pytest.raises(ShapeError):
        gumbel_lpp_grid(2, 2, WeightField.edges(w.origin, h, w.vertical))


def test_oracle_capacity_guard():
    w = WeightField.sample_lpp(1, 1, 30, 30)
    with pytest.raises(CapacityError):
        lpp_path_oracle(30, 30, w)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31), st.floats(0.01, 5.0))
def test_lpp_monotone_in_every_weight(m, n, seed, bump):
    rng = np.random.default_rng(seed)
    w = random_edges(rng, m, n)
    base = gumbel_lpp_grid(m, n, w).values
    slots = [("origin", None)] + [("h", (i, j)) for i in range(1, m) for j in range(n)] + \
            [("v", (i, j)) for i in range(m) for j in range(1, n)]
    kind, ij = slots[rng.integers(len(slots))]
    origin, h, v = w.origin, w.horizontal.copy(), w.vertical.copy()
    if kind == "origin":
        origin += bump
    elif kind == "h":
        h[ij] += bump
    else:
        v[ij] += bump
    assert np.all(gumbel_lpp_grid(m, n, WeightField.edges(origin, h, v)).values >= base)


# ---------------------------------------------------------------- log-gamma polymer


def test_polymer_single_cell():
    w = WeightField.polymer(w=[[2.5]])
    assert log_gamma_grid(1, 1, 1.0, w)[1, 1] == pytest.approx(math.log(2.5))


def test_polymer_hand_example():
    w = WeightField.polymer(w=[[1.0, 3.0], [2.0, 4.0]])
    assert log_gamma_grid(2, 2, 1.0, w)[2, 2] == pytest.approx(math.log(20.0), abs=1e-15)
    assert polymer_path_oracle(2, 2, w)[0] == pytest.approx(math.log(20.0), abs=1e-15)
    assert direct_partition_function(2, 2, w) == pytest.approx(20.0)


@pytest.mark.parametrize("m,n,paths", [(2, 2, 2), (2, 3, 3), (4, 3, 10)])
def test_polymer_unit_weights_count_paths(m, n, paths):
    w = WeightField.polymer(w=np.ones((m, n)))
    assert log_gamma_grid(m, n, 1.0, w).corner == pytest.approx(math.log(paths), abs=1e-14)
    assert polymer_path_oracle(m, n, w) == (pytest.approx(math.log(paths), abs=1e-14), paths)


@pytest.mark.parametrize("m", range(1, 6))
@pytest.mark.parametrize("n", range(1, 6))
def test_polymer_recursion_equals_oracle(m, n):
    rng = np.random.default_rng(7 * m + 13 * n)
    w = WeightField.polymer(log_w=-np.log(rng.gamma(1.0, size=(m, n))))
    got = log_gamma_grid(m, n, 1.0, w).corner
    want, _ = polymer_path_oracle(m, n, w)
    assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def test_polymer_log_space_matches_direct_space():
    w = WeightField.sample_polymer(3, 0, 3, 3)
    got = log_gamma_grid(3, 3, 1.0, w).corner
    assert abs(got - math.log(direct_partition_function(3, 3, w))) <= 1e-10 * abs(got)


def test_polymer_large_grid_stays_finite_and_wavefront_agrees():
    w = WeightField.sample_polymer(4, 0, 300, 200, gamma=0.7)
    a = log_gamma_grid(300, 200, 0.7, w)
    b = log_gamma_grid(300, 200, 0.7, w, mode="wavefront")
    assert np.all(np.isfinite(a.values))
    assert np.allclose(a.values, b.values, rtol=1e-12, atol=0)
    z = a.values
    lw = w.log_vertex
    lhs = np.logaddexp(z[:-1, 1:], z[1:, :-1]) + lw[1:, 1:]
    assert np.allclose(z[1:, 1:], lhs, rtol=1e-12, atol=0)


def test_polymer_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        WeightField.polymer(w=[[0.0]])
    with pytest.raises(ParameterError):
        log_gamma_grid(1, 1, 0.0, WeightField.polymer(w=[[1.0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31), st.floats(0.01, 3.0))
def test_polymer_monotone_in_every_weight(m, n, seed, bump):
    rng = np.random.default_rng(seed)
    lw = rng.normal(size=(m, n))
    base = log_gamma_grid(m, n, 1.0, WeightField.polymer(log_w=lw)).values
    lw2 = lw.copy()
    lw2[rng.integers(m), rng.integers(n)] += bump
    assert np.all(log_gamma_grid(m, n, 1.0, WeightField.polymer(log_w=lw2)).values >= base)


# ---------------------------------------------------------------- boundary coupling


@pytest.mark.parametrize("m,n", [(1, 50), (50, 1), (6, 9)])
def test_boundary_coupling_row_and_column(m, n):
    poly = WeightField.sample_polymer(21, 0, m, n)
    lpp = poly.coupled_lpp()
    # bulk edges are free under the coupling; fill them so the grid is defined
    h = np.where(np.isnan(lpp.horizontal), 0.0, lpp.horizontal)
    v = np.where(np.isnan(lpp.vertical), 0.0, lpp.vertical)
    h[0, :] = np.nan
    v[:, 0] = np.nan
    t = gumbel_lpp_grid(m, n, WeightField.edges(lpp.origin, h, v)).values
    z = log_gamma_grid(m, n, 1.0, poly).values
    assert np.max(np.abs(t[:, 0] - z[:, 0])) < 1e-12
    assert np.max(np.abs(t[0, :] - z[0, :])) < 1e-12


# ---------------------------------------------------------------- multi-edge


def test_multi_edge_single_copy_is_the_plain_recursion():
    w = random_edges(np.random.default_rng(8), 4, 5)
    a = multi_edge_lpp_grid(4, 5, MultiEdgeConfig(1), w)
    assert np.array_equal(a.values, gumbel_lpp_grid(4, 5, w).values)


def test_multi_edge_pre_reduction_example():
    o = np.array([0.0, 0.0, 0.0])
    h = np.full((3, 2, 1), np.nan)
    v = np.full((3, 2, 1), np.nan)
    h[:, 1, 0] = [0.1, 0.9, 0.4]
    me = multi_edge_lpp_grid(2, 1, MultiEdgeConfig(3), MultiEdgeWeights(o, h, v))
    single = np.full((2, 1), np.nan)
    single[1, 0] = 0.9
    ref = gumbel_lpp_grid(2, 1, WeightField.edges(0.0, single, np.full((2, 1), np.nan)))
    assert me[2, 1] == ref[2, 1] == 0.9


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 6), st.integers(0, 2**31))
def test_multi_edge_equals_path_max_over_copies(m, n, N, seed):
    rng = np.random.default_rng(seed)
    o = rng.exponential(size=N)
    h = rng.exponential(size=(N, m, n))
    v = rng.exponential(size=(N, m, n))
    h[:, 0, :] = np.nan
    v[:, :, 0] = np.nan
    got = multi_edge_lpp_grid(m, n, MultiEdgeConfig(N), MultiEdgeWeights(o, h, v)).corner
    # oracle: every path picks one copy per edge; the best choice is the per-edge max
    with np.errstate(invalid="ignore"):
        red = WeightField.edges(o.max(), np.max(h, axis=0), np.max(v, axis=0))
    assert abs(got - lpp_path_oracle(m, n, red)[0]) < 1e-12


def test_multi_edge_copy_count_mismatch():
    o = np.zeros(2)
    h = np.zeros((2, 2, 2))
    with pytest.raises(ShapeError):
        multi_edge_lpp_grid(2, 2, MultiEdgeConfig(3), MultiEdgeWeights(o, h, h))


def test_normalize_identity_and_arithmetic():
    vals = np.array([[1.0, 2.0], [3.0, 10.0]])
    g = PassageGrid(2, 2, vals, Semantics.MULTI_EDGE_T)
    assert np.array_equal(normalize_multi_edge(g, MultiEdgeConfig(10), 0.0, 1.0).values, vals)
    out = normalize_multi_edge(g, MultiEdgeConfig(10), math.log(10), 1.0)
    assert out[2, 2] == pytest.approx(10 - 3 * math.log(10), abs=1e-12)
    assert round(out[2, 2], 5) == 3.09224
    assert out[1, 1] == pytest.approx(1.0 - math.log(10))


def test_normalize_rejects_other_grids():
    g = gumbel_lpp_grid(2, 2, hand_edges())
    with pytest.raises(ValueError):
        normalize_multi_edge(g, MultiEdgeConfig(2), 0.0, 1.0)


def test_multi_edge_origin_converges_to_gumbel():
    s = sample_statistic("multi_edge", (1, 1), 31, 10**5, multi_edge=MultiEdgeConfig(1000))
    assert ks_one_sample(s.values - math.log(1000), gumbel_cdf).statistic < 0.01


def test_multi_edge_sampled_field_matches_kernel():
    cfg = MultiEdgeConfig(7)
    s = sample_statistic("multi_edge", (5, 4), 12, 3, multi_edge=cfg, lane_offset=10)
    for k in range(3):
        w = WeightField.sample_multi_edge(12, 10 + k, 5, 4, cfg)
        assert multi_edge_lpp_grid(5, 4, cfg, w).corner == s.values[k]


def test_multi_edge_gamma_copies_use_n_draws():
    cfg = MultiEdgeConfig(3, DistributionSpec.gamma(2.0))
    w = WeightField.sample_multi_edge(1, 0, 3, 3, cfg)
    assert np.all(np.isfinite(w.horizontal[1:, :])) and np.all(w.horizontal[1:, :] > 0)


# ---------------------------------------------------------------- sampling


def test_sampling_determinism():
    a = sample_statistic("gumbel_lpp", (6, 6), 77, 1)
    b = sample_statistic("gumbel_lpp", (6, 6), 77, 1)
    assert a.values[0] == b.values[0]


def test_sampling_is_worker_count_invariant():
    a = sample_statistic("log_gamma", (9, 7), 5, 9000, gamma=1.5, workers=1)
    b = sample_statistic("log_gamma", (9, 7), 5, 9000, gamma=1.5, workers=4)
    assert np.array_equal(a.values, b.values)


@pytest.mark.parametrize("m,n", [(1, 1), (3, 8), (8, 3), (6, 6)])
def test_sampled_corners_match_sampled_grids(m, n):
    t = sample_statistic("gumbel_lpp", (m, n), 4, 5, lane_offset=3)
    z = sample_statistic("log_gamma", (m, n), 4, 5, gamma=2.0, lane_offset=3)
    for k in range(5):
        assert gumbel_lpp_grid(m, n, WeightField.sample_lpp(4, 3 + k, m, n)).corner == t.values[k]
        wz = WeightField.sample_polymer(4, 3 + k, m, n, gamma=2.0)
        assert log_gamma_grid(m, n, 2.0, wz).corner == pytest.approx(z.values[k], rel=1e-14)


def test_sampled_weights_independent_of_rectangle():
    small = WeightField.sample_lpp(3, 2, 4, 4)
    big = WeightField.sample_lpp(3, 2, 9, 7)
    assert np.array_equal(small.horizontal[1:], big.horizontal[1:4, :4])
    assert small.origin == big.origin


def test_origin_law_gumbel_lpp():
    s = sample_statistic("gumbel_lpp", (1, 1), 41, 10**5)
    assert ks_one_sample(s, gumbel_cdf).p_value > 0.01


def test_origin_law_log_gamma_one():
    s = sample_statistic("log_gamma", (1, 1), 42, 10**5, gamma=1.0)
    assert ks_one_sample(s, gumbel_cdf).p_value > 0.01


def test_same_law_small_grid():
    t = sample_statistic("gumbel_lpp", (3, 4), 43, 2 * 10**4)
    z = sample_statistic("log_gamma", (3, 4), 43, 2 * 10**4, gamma=1.0)
    assert ks_two_sample(t, z).p_value > 0.001


def test_sampling_rejects_bad_requests():
    with pytest.raises(ValueError):
        sample_statistic("nope", (2, 2), 0, 10)
    with pytest.raises(ValueError):
        sample_statistic("multi_edge", (2, 2), 0, 10)
    with pytest.raises(ShapeError):
        sample_statistic("gumbel_lpp", (0, 2), 0, 10)
    with pytest.raises(ValueError):
        sample_statistic("gumbel_lpp", (2, 2), 0, 0)


# ---------------------------------------------------------------- one-step identity


def exp_cdf(rate):
    return lambda x: -np.expm1(-rate * x)


@pytest.mark.parametrize("z1,z2", [(1.0, 1.0), (0.3, 2.7)])
def test_one_step_reciprocals_are_exponential(z1, z2):
    lpp, poly = one_step_laws(z1, z2, 10**5, master_seed=51)
    assert ks_one_sample(1.0 / lpp.values, exp_cdf(z1 + z2)).p_value > 0.01
    assert ks_one_sample(1.0 / poly.values, exp_cdf(z1 + z2)).p_value > 0.01


def test_one_step_one_armed_limit():
    lpp, _ = one_step_laws(1.0, 1e-12, 10**5, master_seed=52)
    assert ks_one_sample(1.0 / lpp.values, exp_cdf(1.0)).statistic < 0.01


def test_one_step_rejects_nonpositive():
    with pytest.raises(ParameterError):
        one_step_laws(0.0, 1.0, 10)


# ---------------------------------------------------------------- weight tables


def test_weight_table_round_trip(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("# hand example\n1 1 T11 0\n2 1 U 1\n1 2 V 2\n2 2 U 5\n2 2 V 3\n")
    w = read_weight_table(p, 2, 2)
    assert gumbel_lpp_grid(2, 2, w)[2, 2] == 7.0


def test_polymer_table(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("1 1 w 1\n2 1 w 2\n1 2 w 3\n2 2 logw %r\n" % math.log(4))
    assert log_gamma_grid(2, 2, 1.0, read_weight_table(p, 2, 2)).corner == pytest.approx(math.log(20))


def test_multi_edge_table(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("1 1 T11 0 0\n1 1 T11 0.5 1\n2 1 U 0.1 0\n2 1 U 0.9 1\n")
    me = read_weight_table(p, 2, 1, N=2)
    assert multi_edge_lpp_grid(2, 1, MultiEdgeConfig(2), me)[2, 1] == 1.4


@pytest.mark.parametrize("text", [
    "1 1 T11 0\n2 1 U 1\n1 2 V 2\n2 2 U 5\n",            # missing V(2,2)
    "1 1 T11 0\n2 1 U 1\n1 2 V 2\n2 2 U 5\n2 2 V 3\n3 1 U 1\n",  # outside rectangle
    "1 1 T11 0\n1 1 T11 1\n2 1 U 1\n1 2 V 2\n2 2 U 5\n2 2 V 3\n",  # duplicate
    "1 1 T11 0\n2 1 X 1\n",                              # unknown role
    "1 1 T11 0\n2 1 U 1\n1 2 V 2\n2 2 U 5\n2 2 w 3\n",    # mixed models
])
def test_weight_table_errors(tmp_path, text):
    p = tmp_path / "w.txt"
    p.write_text(text)
    with pytest.raises((ShapeError, ParameterError)):
        read_weight_table(p, 2, 2)
