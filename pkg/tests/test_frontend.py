import math

import numpy as np
import pytest

from qmimo.channel import ChannelModel
from qmimo.errors import BoundaryAmbiguityError, InvalidInputError, UnsupportedDimensionError, UnsupportedFamilyError
from qmimo.frontend import (
    Cell,
    CellConstraint,
    FrontendSpec,
    LabeledPartitionRd,
    Partition1D,
    Scenario,
    apply_frontend,
    apply_frontend_batch,
    bernstein_approximate,
    binary_entropy,
    bits_to_key,
    choose_truncation_L,
    distance_sign_features,
    distance_sign_function,
    estimate_gamma_y,
    induced_partition_1d,
    key_to_bits,
    quantize,
    realize_partition,
    real_roots,
    truncation_slack,
)
from qmimo.polynomial import MultivariatePolynomial

Y = MultivariatePolynomial.projection(1, 0)
Y2 = MultivariatePolynomial.univariate([0.0, 0.0, 1.0])


class TestQuantize:
    def test_strict_threshold(self):
        """Equality with the threshold gives 0."""
        np.testing.assert_array_equal(quantize([0.0, 1.0], [0.0, 0.5]), [0, 1])

    def test_batch(self):
        """Rows are quantized independently."""
        np.testing.assert_array_equal(quantize([[1.0, -1.0], [-1.0, 1.0]], [0.0, 0.0]), [[1, 0], [0, 1]])

    def test_length_mismatch(self):
        """One threshold per value."""
        with pytest.raises(InvalidInputError):
            quantize([1.0, 2.0], [0.0])

    def test_bit_keys(self):
        """Bit vectors render as 0/1 strings and parse back."""
        assert bits_to_key([1, 0, 1]) == "101"
        np.testing.assert_array_equal(key_to_bits("101"), [1, 0, 1])
        with pytest.raises(InvalidInputError):
            key_to_bits("012")


class TestFrontendSpec:
    def test_projections(self):
        """Scenario I reads each antenna with its own ADC."""
        spec = FrontendSpec.projections(2)
        assert spec.scenario is Scenario.PROJECTION
        np.testing.assert_array_equal(apply_frontend(spec, [-1.0, 2.0]), [0, 1])

    def test_affine_function_is_not_linear(self):
        """Scenario II functions carry no constant term."""
        affine = MultivariatePolynomial.univariate([1.0, 1.0])
        with pytest.raises(ValueError):
            FrontendSpec(scenario="II", n_q=1, functions=(affine,), thresholds=(0.0,))

    def test_bounded_degree_needs_bound(self):
        """Scenario IV is declared with its degree bound."""
        with pytest.raises(ValueError):
            FrontendSpec(scenario="IV", n_q=1, functions=(Y2,), thresholds=(0.0,))

    def test_degree_above_bound(self):
        """Scenario IV rejects functions above the bound."""
        cubic = MultivariatePolynomial.univariate([0.0, 0.0, 0.0, 1.0])
        with pytest.raises(ValueError):
            FrontendSpec(scenario="IV", n_q=1, functions=(cubic,), thresholds=(0.0,), degree_bound=2)

    def test_count_mismatch(self):
        """n_q functions and thresholds."""
        with pytest.raises(ValueError):
            FrontendSpec(scenario="III", n_q=2, functions=(Y,), thresholds=(0.0,))

    def test_families_nest(self):
        """I within II within V within IV within III."""
        spec = FrontendSpec.projections(1)
        assert spec.conforms_to("II")
        assert spec.conforms_to("V")
        assert spec.conforms_to("IV", degree_bound=1)
        assert spec.conforms_to("III")
        quadratic = FrontendSpec.isotropic(linear=[[1.0], [0.0]], quadratic=[0.0, 1.0], thresholds=[0.0, 1.0])
        assert not quadratic.conforms_to("II")
        assert quadratic.as_scenario("IV", 2).scenario is Scenario.BOUNDED_DEGREE

    def test_batch_matches_single(self):
        """The vectorized front-end agrees with per-vector evaluation."""
        spec = FrontendSpec.isotropic(linear=[[1.0, -1.0], [0.0, 2.0]], quadratic=[0.5, -1.0], thresholds=[0.1, 0.0])
        y = np.random.default_rng(1).normal(size=(50, 2))
        expected = np.array([apply_frontend(spec, row) for row in y])
        np.testing.assert_array_equal(apply_frontend_batch(spec, y), expected)

    def test_copies(self):
        """with_thresholds keeps the family."""
        spec = FrontendSpec.projections(2).with_thresholds([1.0, 2.0])
        assert spec.thresholds == (1.0, 2.0)
        assert spec.scenario is Scenario.PROJECTION


class TestPartition1D:
    def test_locate_boundary_goes_left(self):
        """Interval i is (b_(i-1), b_i]."""
        part = Partition1D.from_boundaries([0.0])
        np.testing.assert_array_equal(part.label_of([0.0, 1e-9, -5.0]), [0, 1, 0])

    def test_edges(self):
        """Edges pad the boundaries with infinities."""
        np.testing.assert_array_equal(Partition1D.from_boundaries([1.0]).edges, [-np.inf, 1.0, np.inf])

    @pytest.mark.parametrize(
        "boundaries,labels",
        [((1.0, 0.0), (0, 1, 2)), ((0.0, 0.0), (0, 1, 2)), ((0.0,), (0, 2)), ((0.0,), (0, 1, 2))],
    )
    def test_invalid(self, boundaries, labels):
        """Boundaries strictly increase and labels cover every symbol."""
        with pytest.raises(InvalidInputError):
            Partition1D(boundaries=boundaries, labels=labels)

    def test_shared_labels(self):
        """Non-adjacent intervals may share a symbol."""
        part = Partition1D(boundaries=(-1.0, 1.0), labels=(0, 1, 0))
        assert part.n_intervals == 3
        assert part.n_labels == 2


class TestInducedPartition:
    def test_quadratic_toy(self):
        """y > 0 and y**2 > 1 cut the line at -1, 0, 1 into four patterns."""
        spec = FrontendSpec.isotropic(linear=[[1.0], [0.0]], quadratic=[0.0, 1.0], thresholds=[0.0, 1.0])
        part = induced_partition_1d(spec)
        assert part.boundaries == pytest.approx((-1.0, 0.0, 1.0))
        assert part.labels == (0, 1, 2, 3)
        assert part.patterns == ("01", "00", "10", "11")

    def test_linear_toy(self):
        """Two step comparators give three intervals."""
        spec = FrontendSpec(scenario="II", n_q=2, functions=(Y, Y), thresholds=(0.0, 1.0))
        part = induced_partition_1d(spec)
        assert part.boundaries == (0.0, 1.0)
        assert part.patterns == ("00", "10", "11")

    def test_duplicate_comparators_merge(self):
        """Repeated comparators add no boundary."""
        spec = FrontendSpec(scenario="II", n_q=2, functions=(Y, Y), thresholds=(0.0, 0.0))
        part = induced_partition_1d(spec)
        assert part.boundaries == (0.0,)
        assert part.labels == (0, 1)

    def test_domain_clips_roots(self):
        """Roots outside the domain are ignored."""
        spec = FrontendSpec(scenario="II", n_q=2, functions=(Y, Y), thresholds=(0.0, 5.0))
        assert induced_partition_1d(spec, domain=(-1.0, 1.0)).boundaries == (0.0,)

    def test_cubic_unsupported(self):
        """Only degree two has closed-form roots here."""
        cubic = MultivariatePolynomial.univariate([0.0, 0.0, 0.0, 1.0])
        spec = FrontendSpec(scenario="III", n_q=1, functions=(cubic,), thresholds=(0.0,))
        with pytest.raises(UnsupportedFamilyError):
            induced_partition_1d(spec)

    def test_vector_output_rejected(self):
        """Induced 1-D partitions read one output."""
        with pytest.raises(InvalidInputError):
            induced_partition_1d(FrontendSpec.projections(2))

    def test_real_roots(self):
        """Quadratic roots are returned without cancellation."""
        assert sorted(real_roots(np.array([0.0, 0.0, 1.0]), 4.0)) == pytest.approx([-2.0, 2.0])
        assert real_roots(np.array([1.0, 0.0, 1.0])) == []
        assert real_roots(np.array([-3.0, 2.0])) == [1.5]


class TestRealizePartition:
    def test_linear(self):
        """One comparator per boundary, one label per interval."""
        part = induced_partition_1d(realize_partition([-1.0, 0.5, 2.0], "linear"))
        assert part.boundaries == (-1.0, 0.5, 2.0)
        assert part.labels == (0, 1, 2, 3)

    def test_mixed_quadratic(self):
        """2n - 1 boundaries give 2n distinct labels with n ADCs."""
        spec = realize_partition([-2.0, -1.0, 0.5], "quadratic")
        assert spec.n_q == 2
        part = induced_partition_1d(spec)
        assert part.boundaries == pytest.approx((-2.0, -1.0, 0.5))
        assert part.n_labels == 4
        assert len(set(part.labels)) == part.n_intervals

    def test_all_quadratic(self):
        """2n boundaries, outermost intervals share a label."""
        spec = realize_partition([-2.0, -1.0, 0.5, 3.0], "quadratic", layout="all-quadratic")
        part = induced_partition_1d(spec)
        assert spec.n_q == 2
        assert part.boundaries == pytest.approx((-2.0, -1.0, 0.5, 3.0))
        assert part.labels == (0, 1, 2, 3, 0)

    @pytest.mark.parametrize(
        "boundaries,layout", [([0.0, 1.0], "mixed"), ([0.0, 1.0, 2.0], "all-quadratic"), ([1.0, 0.0, 2.0], "mixed")]
    )
    def test_layout_mismatch(self, boundaries, layout):
        """Boundary counts must fit the layout."""
        with pytest.raises(InvalidInputError):
            realize_partition(boundaries, "quadratic", layout=layout)


class TestLabeledPartition:
    def test_rectangular_numbering(self):
        """Cells are numbered row-major from 1, last axis fastest."""
        part = LabeledPartitionRd.rectangular([[0.0], [0.0]])
        assert part.n_q == 2
        assert part.locate([-1.0, -1.0]).index == 1
        assert part.locate([-1.0, 1.0]).index == 2
        assert part.locate([1.0, -1.0]).index == 3
        assert part.locate([1.0, 1.0]).index == 4

    def test_boundary_is_ambiguous(self):
        """Points on a cut belong to no cell strictly."""
        with pytest.raises(BoundaryAmbiguityError):
            LabeledPartitionRd.rectangular([[0.0], [0.0]]).locate([0.0, 1.0])

    def test_duplicate_indices_rejected(self):
        """Cell indices are distinct."""
        cell = Cell(index=1, constraints=())
        with pytest.raises(ValueError):
            LabeledPartitionRd(dim=1, n_q=1, cells=(cell, cell))

    @pytest.mark.parametrize("dim", [1, 2])
    def test_random_rectangular_disjoint(self, dim):
        """Seeded random partitions are valid and disjoint."""
        part = LabeledPartitionRd.random_rectangular(dim, 3, seed=5)
        part.check_disjoint(samples=2000, radius=2.0, seed=0)
        assert part == LabeledPartitionRd.random_rectangular(dim, 3, seed=5)


class TestDistanceSign:
    @pytest.fixture
    def interval(self) -> LabeledPartitionRd:
        """Cells (-inf, -1), (-1, 1) and (1, inf) with indices 1, 2, 3."""
        return LabeledPartitionRd.from_intervals([-1.0, 1.0])

    def test_features(self, interval):
        """Sign carries the index bit, magnitude the boundary distance."""
        features = distance_sign_features(interval, np.array([[0.0], [3.0]]))
        np.testing.assert_allclose(features, [[1.0, -1.0], [-2.0, 2.0]])
        assert distance_sign_function(interval, 0, [0.0]) == pytest.approx(1.0)

    def test_strict_boundary(self, interval):
        """Strict mode refuses points on a boundary, relaxed mode maps them to zero."""
        with pytest.raises(BoundaryAmbiguityError):
            distance_sign_features(interval, np.array([[1.0]]))
        np.testing.assert_array_equal(distance_sign_features(interval, np.array([[1.0]]), strict=False), [[0.0, 0.0]])

    def test_invalid_bit(self, interval):
        """Bit positions range over 0 .. n_q - 1."""
        with pytest.raises(InvalidInputError):
            distance_sign_function(interval, 2, [0.0])

    def test_nonlinear_cells_unsupported(self):
        """Exact distances need affine cells."""
        disc = Cell(index=1, constraints=(CellConstraint(poly=MultivariatePolynomial.univariate([1.0, 0.0, -1.0])),))
        part = LabeledPartitionRd(dim=1, n_q=1, cells=(disc,))
        with pytest.raises(UnsupportedFamilyError):
            distance_sign_features(part, np.array([[0.0]]))

    @pytest.mark.parametrize("dim", [1, 2])
    @pytest.mark.parametrize("seed", range(10))
    def test_index_recovered(self, dim, seed):
        """The signs of the features decode the cell index of random interior points."""
        rng = np.random.default_rng(seed)
        cuts = [np.sort(rng.uniform(-1.0, 1.0, size=rng.integers(1, 4))) for _ in range(dim)]
        part = LabeledPartitionRd.rectangular(cuts)
        y = rng.uniform(-2.0, 2.0, size=(10_000, dim))
        bits = distance_sign_features(part, y) > 0
        decoded = 1 + bits @ (1 << np.arange(part.n_q))
        slots = tuple(np.searchsorted(c, y[:, axis]) for axis, c in enumerate(cuts))
        expected = 1 + np.ravel_multi_index(slots, tuple(len(c) + 1 for c in cuts))
        np.testing.assert_array_equal(decoded, expected)


class TestBernstein:
    def test_absolute_value_degree_two(self):
        """B_2 of |y| on [-1, 1] is (1 + y**2) / 2."""
        fit = bernstein_approximate(lambda y: np.abs(y[:, 0]), 2, 1.0)
        coefficients = fit.polynomial.to_polynomial().univariate_coefficients()
        np.testing.assert_allclose(coefficients, [0.5, 0.0, 0.5], atol=1e-12)
        assert fit.sup_error == pytest.approx(0.5, abs=1e-3)

    def test_sign_agreement_improves(self):
        """The tent 1 - |y| on [-2, 2] is matched in sign ever more closely."""
        agreements = [bernstein_approximate(lambda y: 1.0 - np.abs(y[:, 0]), n, 2.0).sign_agreement for n in (2, 8, 32)]
        assert agreements[0] == pytest.approx(0.5, abs=0.01)
        assert agreements == sorted(agreements)
        assert agreements[-1] >= 0.99

    def test_two_dimensional(self):
        """Tensor-product fits agree with the monomial expansion."""
        fit = bernstein_approximate(lambda y: y[:, 0] * y[:, 1] - 0.25, 4, 1.0, dim=2, test_grid=64)
        assert fit.sup_error < 1e-9
        poly = fit.polynomial.to_polynomial()
        assert poly.evaluate([0.5, -0.5]) == pytest.approx(-0.5)

    def test_dimension_limit(self):
        """Only one and two variables are supported."""
        with pytest.raises(UnsupportedDimensionError):
            bernstein_approximate(lambda y: y[:, 0], 2, 1.0, dim=3)


class TestTruncation:
    def test_choose_level(self):
        """L = gamma n_q / eps."""
        assert choose_truncation_L(1.0, 2, 0.1) == pytest.approx(20.0)
        with pytest.raises(InvalidInputError):
            choose_truncation_L(1.0, 2, 0.0)

    def test_slack(self):
        """Markov tail bound plus the entropy of the overflow events."""
        assert truncation_slack(1.0, 1, 2, 20.0) == pytest.approx(binary_entropy(0.05) + 0.1)
        assert binary_entropy(0.5) == pytest.approx(1.0)
        assert binary_entropy(0.0) == 0.0

    def test_gamma_gaussian(self):
        """With N(0, 1) input and unit noise, E|Y| = 2 / sqrt(pi)."""
        gamma = estimate_gamma_y(ChannelModel.identity(1), samples=200_000, seed=4)
        assert gamma == pytest.approx(2.0 / math.sqrt(math.pi), abs=0.01)
