import logging
import math

import numpy as np
import pytest

from qmimo.channel import ChannelModel
from qmimo.errors import DegenerateArrangementError, InsufficientADCsError, InvalidCodeError, ScenarioViolationError
from qmimo.frontend import FrontendSpec, apply_frontend_batch, bits_to_key
from qmimo.geometry import (
    Arrangement,
    RegionCode,
    bounded_cells_formula,
    build_paraboloid_code,
    build_shattering_code,
    central_cells_formula,
    count_regions,
    count_shatter_formula,
    enumerate_cells_oracle,
    feature_matrix,
    lift_paraboloid,
    paraboloid_representatives,
    random_arrangement,
    shatter_bound,
    toy_code,
    total_cells_formula,
    translate_into_bowl,
    verify_shattering,
)
from qmimo.polynomial import MultivariatePolynomial


class TestRegionCounts:
    def test_stated_count_disagrees_at_rank_one(self, caplog):
        """Two comparators on a scalar channel: stated 3, central count 4."""
        with caplog.at_level(logging.WARNING, logger="qmimo.geometry"):
            counts = count_regions(1, 2)
        assert (counts.stated, counts.alpha, counts.corrected) == (3, 4, 4)
        assert not counts.stated_matches
        assert "stated 3" in caplog.text

    @pytest.mark.parametrize("rank", [1, 2, 3])
    @pytest.mark.parametrize("n_q", [1, 2, 3, 4, 5, 6])
    def test_corrected_equals_alpha(self, rank, n_q):
        """Pascal's rule makes the corrected subtraction equal the central count."""
        counts = count_regions(rank, n_q)
        assert counts.corrected == counts.alpha == central_cells_formula(rank + 1, n_q)

    def test_invalid(self):
        """Rank and ADC count are positive."""
        with pytest.raises(ValueError):
            count_regions(0, 2)

    def test_formulas(self):
        """Small closed forms."""
        assert total_cells_formula(2, 3) == 7
        assert bounded_cells_formula(2, 3) == (1, 2)
        assert central_cells_formula(2, 3) == 6


class TestOracle:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_affine_counts(self, dim, n):
        """Generic affine arrangements have sum_i C(n, i) cells and C(n - 1, dim) bounded ones."""
        enumeration = enumerate_cells_oracle(random_arrangement(dim, n, seed=0))
        assert enumeration.total_cells == total_cells_formula(dim, n)
        assert enumeration.bounded_cells == bounded_cells_formula(dim, n)[0]

    @pytest.mark.parametrize("rank", [1, 2])
    @pytest.mark.parametrize("n_q", [2, 3, 4, 5])
    def test_central_counts_match_alpha(self, rank, n_q):
        """Central arrangements in R^(rank + 1) realize alpha cells."""
        enumeration = enumerate_cells_oracle(random_arrangement(rank + 1, n_q, seed=1, central=True))
        assert enumeration.total_cells == count_regions(rank, n_q).alpha
        assert enumeration.bounded_cells == 0

    def test_sampling_check(self):
        """Points sampled inside each cell reproduce its sign vector."""
        arrangement = random_arrangement(2, 3, seed=2)
        enumeration = enumerate_cells_oracle(arrangement, samples_per_cell_check=20, seed=0)
        points = np.array(enumeration.interior_points)
        np.testing.assert_array_equal(arrangement.sign_vectors(points), np.array(enumeration.sign_vectors))

    def test_parallel_matches_serial(self):
        """Worker count does not change the enumeration."""
        arrangement = random_arrangement(2, 4, seed=3)
        assert enumerate_cells_oracle(arrangement, jobs=2) == enumerate_cells_oracle(arrangement, jobs=1)

    def test_degenerate(self):
        """Parallel hyperplanes are not in general position."""
        arrangement = Arrangement.from_arrays([[1.0, 0.0], [1.0, 0.0]], [0.0, 1.0])
        assert not arrangement.general_position
        with pytest.raises(DegenerateArrangementError):
            enumerate_cells_oracle(arrangement)

    def test_seeded(self):
        """The same seed draws the same arrangement."""
        assert random_arrangement(3, 4, seed=9) == random_arrangement(3, 4, seed=9)
        assert random_arrangement(3, 4, seed=9) != random_arrangement(3, 4, seed=10)


class TestArrangement:
    def test_frontend_round_trip(self, quadratic_toy):
        """Scenario-V comparators lift to hyperplanes and back."""
        arrangement = Arrangement.from_frontend(quadratic_toy.frontend)
        np.testing.assert_array_equal(arrangement.normals, [[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(arrangement.offsets, [0.0, 1.0])
        assert arrangement.to_frontend().functions == quadratic_toy.frontend.functions

    def test_lifted_signs_match_frontend(self):
        """Comparing on the lifted point equals comparing on the output."""
        arrangement = random_arrangement(3, 4, seed=0)
        spec = arrangement.to_frontend()
        y = np.random.default_rng(0).normal(size=(100, 2))
        bits = apply_frontend_batch(spec, y)
        np.testing.assert_array_equal(arrangement.sign_vectors(lift_paraboloid(y)) > 0, bits.astype(bool))

    def test_non_isotropic_rejected(self):
        """Only Scenario-V functions lift."""
        cubic = MultivariatePolynomial.univariate([0.0, 0.0, 0.0, 1.0])
        spec = FrontendSpec(scenario="III", n_q=1, functions=(cubic,), thresholds=(0.0,))
        with pytest.raises(ScenarioViolationError):
            Arrangement.from_frontend(spec)

    def test_lift(self):
        """The lift appends the squared norm."""
        np.testing.assert_array_equal(lift_paraboloid([1.0, 2.0]), [1.0, 2.0, 5.0])
        np.testing.assert_array_equal(lift_paraboloid([[3.0]]), [[3.0, 9.0]])

    def test_bowl_translation(self):
        """After translation every vertex lies above the paraboloid."""
        lifted = translate_into_bowl(random_arrangement(3, 4, seed=6), margin=1.0)
        vertices = lifted.vertices()
        assert np.all(vertices[:, -1] >= np.sum(vertices[:, :-1] ** 2, axis=1) + 1.0 - 1e-9)


class TestRegionCode:
    def test_toy_codes(self, linear_toy, quadratic_toy):
        """The two built-in codes carry three and four messages."""
        assert linear_toy.size == 3
        assert quadratic_toy.size == 4
        np.testing.assert_array_equal(quadratic_toy.decode(quadratic_toy.pattern_matrix()), np.arange(4))

    def test_scaling_is_covariant(self, linear_toy, quadratic_toy):
        """Scaling by 20 moves the step thresholds to 20 and the square threshold to 400."""
        assert linear_toy.scaled(20.0).frontend.thresholds == (0.0, 20.0)
        assert quadratic_toy.scaled(20.0).frontend.thresholds == (0.0, 400.0)
        assert quadratic_toy.scaled(20.0).constellation == ((-30.0,), (-10.0,), (10.0,), (30.0,))

    def test_normalized(self, quadratic_toy):
        """Normalized codes have unit average power."""
        assert quadratic_toy.normalized().average_power == pytest.approx(1.0)

    def test_decode_ties_to_smallest(self, linear_toy):
        """Pattern 01 is one flip from both 00 and 11."""
        np.testing.assert_array_equal(linear_toy.decode(np.array([[0, 1], [1, 0]])), [0, 1])

    def test_duplicate_patterns(self, quadratic_toy):
        """Two points in one region cannot form a code."""
        with pytest.raises(InvalidCodeError):
            RegionCode.from_constellation([[0.5], [0.7]], quadratic_toy.frontend)

    def test_inconsistent_map(self, quadratic_toy):
        """Every point must produce its own pattern."""
        with pytest.raises(ValueError):
            RegionCode(constellation=((0.5,),), frontend=quadratic_toy.frontend, pattern_map={"00": 0})

    def test_precoding(self, quadratic_toy):
        """Square channels are inverted, others refused."""
        precoded = quadratic_toy.precoded_for(ChannelModel.from_matrix([[2.0]]))
        np.testing.assert_allclose(precoded, quadratic_toy.points / 2.0)
        with pytest.raises(InvalidCodeError):
            quadratic_toy.precoded_for(ChannelModel.from_matrix([[1.0, 1.0]]))

    def test_json_round_trip(self, quadratic_toy):
        """Codes survive serialization."""
        assert RegionCode.model_validate_json(quadratic_toy.model_dump_json()) == quadratic_toy


class TestParaboloidCode:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 7, 11])
    @pytest.mark.parametrize("rank", [1, 2])
    @pytest.mark.parametrize("n_q", [2, 3, 4, 5])
    def test_size_is_alpha(self, rank, n_q, seed):
        """One codeword per central-count region for every seed."""
        code = build_paraboloid_code(rank, n_q, seed=seed)
        assert code.size == count_regions(rank, n_q).alpha
        assert code.average_power == pytest.approx(1.0)
        assert code.frontend.conforms_to("V")

    def test_noiseless_round_trip(self):
        """Every codeword decodes to itself."""
        code = build_paraboloid_code(2, 3, seed=4)
        bits = apply_frontend_batch(code.frontend, code.points)
        np.testing.assert_array_equal(code.decode(bits), np.arange(code.size))

    @pytest.mark.parametrize("n_q", [1, 2, 3, 4, 5])
    def test_rank_three(self, n_q):
        """Fewer, as many and more comparators than lifted dimensions."""
        code = build_paraboloid_code(3, n_q, seed=0)
        assert code.size == count_regions(3, n_q).alpha
        bits = apply_frontend_batch(code.frontend, code.points)
        np.testing.assert_array_equal(code.decode(bits), np.arange(code.size))

    @pytest.mark.parametrize("rank,n_q,seed", [(1, 3, 0), (2, 4, 0), (2, 4, 7), (2, 5, 3)])
    def test_paraboloid_crosses_unbounded_cells(self, rank, n_q, seed):
        """Representatives lie on the paraboloid in exactly the unbounded cells of the lifted arrangement."""
        lifted = translate_into_bowl(random_arrangement(rank + 1, n_q, seed))
        found = paraboloid_representatives(lifted)
        enumeration = enumerate_cells_oracle(lifted)
        assert len(found) == enumeration.total_cells - enumeration.bounded_cells
        for key, x in found.items():
            signs = lifted.sign_vectors(lift_paraboloid(x))[0]
            assert "".join("1" if s > 0 else "0" for s in signs) == key

    def test_canonical(self, quadratic_toy):
        """The canonical rank-1 instance is the normalized quadratic toy code."""
        assert build_paraboloid_code(1, 2, seed=0, canonical=True) == quadratic_toy.normalized()
        with pytest.raises(ValueError):
            build_paraboloid_code(2, 2, seed=0, canonical=True)


class TestShattering:
    @pytest.mark.parametrize("rank,d,expected", [(1, 1, 2), (1, 2, 3), (2, 2, 6), (3, 1, 4)])
    def test_count(self, rank, d, expected):
        """C(rank + d, d) points."""
        assert count_shatter_formula(rank, d) == expected
        assert feature_matrix(np.zeros((expected, rank)), d).shape == (expected, expected)

    @pytest.mark.parametrize("rank,d", [(1, 1), (1, 2), (2, 2)])
    def test_code(self, rank, d):
        """Messages are indexed by their binary form, ADC 1 most significant."""
        count = math.comb(rank + d, d)
        n_q = math.ceil(math.log2(count))
        code = build_shattering_code(rank, d, n_q, seed=0, verify=True)
        assert code.size == count
        keys = [bits_to_key(b) for b in apply_frontend_batch(code.frontend, code.points)]
        assert keys == [format(t, f"0{n_q}b") for t in range(count)]

    def test_too_few_adcs(self):
        """Six messages need three ADCs."""
        with pytest.raises(InsufficientADCsError):
            build_shattering_code(2, 2, 2, seed=0)

    def test_generic_points_shattered(self):
        """Three generic scalars are shattered by quadratics but not by lines."""
        points = np.array([[-0.7], [0.1], [0.8]])
        assert verify_shattering(points, 2)
        assert not verify_shattering(points, 1)

    def test_bound_disagreement(self, caplog):
        """With surplus ADCs the stated rate exceeds what the points can carry."""
        with caplog.at_level(logging.WARNING, logger="qmimo.geometry"):
            bound = shatter_bound(1, 2, 4)
        assert bound.points == 3
        assert bound.stated_bits == 4
        assert bound.constructive_bits == pytest.approx(math.log2(3))
        assert "Shattering rate" in caplog.text
