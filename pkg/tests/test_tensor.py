"""
Unit tests for the autodiff engine.

Covers tape recording, backward accumulation, inference mode, shape
contracts and finite-difference agreement of the op surface.
"""

import sys
from pathlib import Path

import numpy as np
import numpy.testing as npt
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.exceptions import ContractError, DimensionError, ProbeError
from src.gradcheck import case_registry, initialize_cases, run_case
from src.tensor import ParamStore, Tape, Tensor, backward, grad_check, no_tape, ops


class TestTape:
    """Recording and replay of operations."""

    def setup_method(self):
        self.params = ParamStore()
        self.w = self.params.add("w", np.array([[1.0, 2.0], [3.0, 4.0]]))

    def test_ops_record_in_order(self):
        x = Tensor(np.ones((1, 2)))
        with Tape() as tape:
            ops.sum(ops.relu(ops.matmul(x, self.w)))
        assert tape.ops() == ["matmul", "relu", "sum"]

    def test_no_tape_records_nothing(self):
        x = Tensor(np.ones((1, 2)))
        with Tape() as tape:
            with no_tape():
                out = ops.matmul(x, self.w)
        assert len(tape) == 0
        npt.assert_array_equal(out.data, [[4.0, 6.0]])

    def test_constants_are_not_recorded(self):
        with Tape() as tape:
            ops.add(Tensor([1.0]), Tensor([2.0]))
        assert len(tape) == 0

    def test_matmul_gradient(self):
        x = Tensor(np.array([[1.0, -1.0]]))
        with Tape() as tape:
            loss = ops.sum(ops.matmul(x, self.w))
        grads = backward(loss, tape, self.params)
        npt.assert_array_equal(grads["w"], [[1.0, 1.0], [-1.0, -1.0]])

    def test_gradients_accumulate_over_reuse(self):
        with Tape() as tape:
            loss = ops.sum(ops.add(self.w, self.w))
        grads = backward(loss, tape, self.params)
        npt.assert_array_equal(grads["w"], np.full((2, 2), 2.0))

    def test_unused_parameter_gets_zero_gradient(self):
        other = self.params.add("unused", np.ones(3))
        with Tape() as tape:
            loss = ops.sum(self.w)
        grads = backward(loss, tape, self.params)
        npt.assert_array_equal(grads["unused"], np.zeros_like(other.data))
        assert list(grads) == ["w", "unused"]

    def test_backward_needs_scalar(self):
        with Tape() as tape:
            out = ops.relu(self.w)
        with pytest.raises(ContractError):
            backward(out, tape, self.params)

    def test_duplicate_parameter_rejected(self):
        with pytest.raises(ContractError):
            self.params.add("w", np.zeros(2))


class TestOpContracts:
    """Shape checks and closed-form values."""

    def test_matmul_dimension_error_names_shapes(self):
        with pytest.raises(DimensionError) as excinfo:
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
        assert "(2, 3)" in str(excinfo.value)

    def test_concat_split_inverse(self):
        a = Tensor(np.arange(6.0).reshape(2, 3))
        b = Tensor(np.arange(4.0).reshape(2, 2))
        left, right = ops.split(ops.concat(a, b), 3)
        npt.assert_array_equal(left.data, a.data)
        npt.assert_array_equal(right.data, b.data)

    def test_logsumexp_is_stable(self):
        x = Tensor(np.array([1000.0, 1000.0]))
        npt.assert_allclose(ops.logsumexp(x).item(), 1000.0 + np.log(2.0))

    def test_logsumexp_rejects_empty_vector(self):
        with pytest.raises(DimensionError):
            ops.logsumexp(Tensor(np.zeros(0)))

    def test_segment_logsumexp_matches_per_segment(self):
        x = np.array([0.0, 1.0, 2.0, -1.0, 3.0])
        out = ops.segment_logsumexp(Tensor(x), [0, 2, 5]).data
        npt.assert_allclose(out, [np.log(np.exp(0) + np.exp(1)),
                                  np.log(np.exp(2) + np.exp(-1) + np.exp(3))])

    def test_masked_softmax_zeroes_closed_positions(self):
        x = Tensor(np.array([[1.0, 2.0, 3.0]]))
        out = ops.masked_softmax(x, np.array([[True, True, False]])).data
        assert out[0, 2] == 0.0
        npt.assert_allclose(out.sum(), 1.0)

    def test_masked_softmax_needs_an_open_position(self):
        with pytest.raises(ContractError):
            ops.masked_softmax(Tensor(np.zeros((1, 2))), np.zeros((1, 2), dtype=bool))

    def test_matmul_matches_nested_loops(self):
        rng = np.random.default_rng(4)
        a, b = rng.standard_normal((3, 5)), rng.standard_normal((5, 2))
        expected = np.zeros((3, 2))
        for i in range(3):
            for j in range(2):
                for k in range(5):
                    expected[i, j] += a[i, k] * b[k, j]
        npt.assert_allclose(ops.matmul(Tensor(a), Tensor(b)).data, expected, atol=1e-12)

    def test_conv2d_matches_nested_loops(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((2, 3, 5, 6))
        kernel, bias = rng.standard_normal((4, 3, 3, 3)), rng.standard_normal(4)
        padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        expected = np.zeros((2, 4, 5, 6))
        for n in range(2):
            for o in range(4):
                for r in range(5):
                    for c in range(6):
                        expected[n, o, r, c] = bias[o] + np.sum(padded[n, :, r:r + 3, c:c + 3] * kernel[o])
        out = ops.conv2d(Tensor(x), Tensor(kernel), Tensor(bias))
        npt.assert_allclose(out.data, expected, atol=1e-12)

    def test_conv2d_keeps_spatial_size(self):
        out = ops.conv2d(Tensor(np.ones((2, 3, 8, 8))), Tensor(np.ones((4, 3, 3, 3))))
        assert out.shape == (2, 4, 8, 8)
        # interior pixel sees all 27 inputs, corner sees 12
        assert out.data[0, 0, 4, 4] == 27.0
        assert out.data[0, 0, 0, 0] == 12.0

    def test_maxpool_routes_to_first_maximum(self):
        params = ParamStore()
        x = params.add("x", np.array([[[[1.0, 1.0], [0.0, 1.0]]]]))
        with Tape() as tape:
            loss = ops.sum(ops.maxpool2d(x))
        grads = backward(loss, tape, params)
        npt.assert_array_equal(grads["x"], [[[[1.0, 0.0], [0.0, 0.0]]]])

    def test_maxpool_needs_even_sides(self):
        with pytest.raises(DimensionError):
            ops.maxpool2d(Tensor(np.zeros((1, 1, 3, 4))))

    def test_elementwise_dispatch(self):
        x = Tensor(np.array([-1.0, 2.0]))
        npt.assert_array_equal(ops.elementwise("relu", x).data, [0.0, 2.0])
        npt.assert_array_equal(ops.elementwise("scale", x, factor=3.0).data, [-3.0, 6.0])
        with pytest.raises(ContractError):
            ops.elementwise("softplus", x)


class TestGradCheck:
    """Finite-difference verification."""

    def test_quadratic_passes(self):
        params = ParamStore()
        w = params.add("w", np.array([0.5, -1.5, 2.0]))
        report = grad_check(lambda: ops.sum(ops.mul(w, w)), params)
        assert report.passed
        assert report.parameters[0].coords_probed == 3

    def test_max_coords_limits_probing(self):
        params = ParamStore()
        w = params.add("w", np.linspace(-1.0, 1.0, 20))
        report = grad_check(lambda: ops.sum(ops.mul(w, w)), params, max_coords=5)
        assert report.parameters[0].coords_probed == 5

    def test_non_finite_probe_raises(self):
        params = ParamStore()
        w = params.add("w", np.array([709.0]))
        with pytest.raises(ProbeError):
            grad_check(lambda: ops.sum(ops.exp(ops.scale(w, 2.0))), params)

    def test_probing_restores_parameters(self):
        params = ParamStore()
        w = params.add("w", np.array([0.3, 0.7]))
        before = w.data.copy()
        grad_check(lambda: ops.sum(ops.tanh(w)), params)
        npt.assert_array_equal(w.data, before)


class TestCaseRegistry:
    """Built-in gradient-check cases."""

    def setup_method(self):
        initialize_cases()

    def test_registration_is_idempotent(self):
        count = len(case_registry.list_cases())
        initialize_cases()
        assert len(case_registry.list_cases()) == count

    def test_unknown_case_raises(self):
        with pytest.raises(KeyError):
            case_registry.select(["no_such_case"])

    @pytest.mark.parametrize("name", [
        "matmul", "elementwise", "relu", "concat_split", "logsumexp", "segment_logsumexp",
        "gather", "attention_ops", "sequence_ops", "conv2d", "maxpool2d", "lstm_step",
        "cross_entropy", "info_nce",
    ])
    def test_op_case_passes(self, name):
        result = run_case(case_registry.find_case(name))
        assert result.passed, f"{name}: {result.report.max_rel_error:.3e}"

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["audio_encoder", "text_encoder", "combined_objective"])
    def test_composite_case_passes(self, name):
        result = run_case(case_registry.find_case(name))
        assert result.passed, f"{name}: {result.report.max_rel_error:.3e}"
