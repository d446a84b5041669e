import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reelgan import nn
from reelgan.nn import ConvSpec, Tensor


def param(rng, *shape, scale=1.0):
    return Tensor(rng.standard_normal(shape) * scale, requires_grad=True)


def naive_conv(x, w, b, spec):
    """Direct nested-loop convolution with explicit zero padding."""
    n, h, wd, cin = x.shape
    kh, kw, _, f = w.shape
    dh, dw = spec.dilation
    sh, sw = spec.stride
    oh, ph, _ = spec.geometry(h, 0)
    ow, pw, _ = spec.geometry(wd, 1)
    out = np.zeros((n, oh, ow, f))
    for i in range(n):
        for r in range(oh):
            for c in range(ow):
                for o in range(f):
                    acc = b[o]
                    for u in range(kh):
                        for v in range(kw):
                            rr = r * sh + u * dh - ph
                            cc = c * sw + v * dw - pw
                            if 0 <= rr < h and 0 <= cc < wd:
                                for k in range(cin):
                                    acc += x[i, rr, cc, k] * w[u, v, k, o]
                    out[i, r, c, o] = acc
    return out


# -- shapes ------------------------------------------------------------------


def test_conv_same_shape():
    rng = np.random.default_rng(0)
    spec = ConvSpec((2, 9), filters=32)
    out = nn.conv2d(rng.standard_normal((2, 4, 64, 1)), rng.standard_normal((2, 9, 1, 32)), np.zeros(32), spec)
    assert out.shape == (2, 4, 64, 32)


def test_dilated_extent():
    assert ConvSpec((1, 3), dilation=(1, 16)).extent == (1, 33)


def test_degenerate_conv():
    spec = ConvSpec((1, 1))
    out = nn.conv2d(np.full((1, 1, 1, 1), 3.0), np.full((1, 1, 1, 1), 2.0), np.array([0.5]), spec)
    assert out.data.item() == 6.5


def test_head_conv_valid_stride():
    spec = ConvSpec((3, 3), stride=(2, 2), padding="valid", filters=64)
    assert spec.output_hw(4, 64) == (1, 31)


@pytest.mark.parametrize(
    "cin, f, stride, hw_in, hw_out",
    [(64, 1, (2, 2), (2, 32), (4, 64)), (128, 64, (1, 1), (2, 32), (2, 32))],
)
def test_transpose_shapes(cin, f, stride, hw_in, hw_out):
    rng = np.random.default_rng(0)
    spec = ConvSpec((2, 5), stride=stride, filters=f)
    y = rng.standard_normal((1, *hw_in, cin))
    out = nn.conv2d_transpose(y, rng.standard_normal((2, 5, f, cin)), np.zeros(f), spec)
    assert out.shape == (1, *hw_out, f)


def test_transpose_stamps_kernel():
    spec = ConvSpec((2, 5), stride=(2, 2), padding="valid")
    out = nn.conv2d_transpose(np.ones((1, 1, 1, 1)), np.ones((2, 5, 1, 1)), np.zeros(1), spec, output_hw=(2, 5))
    np.testing.assert_array_equal(out.data[0, :, :, 0], np.ones((2, 5)))


conv_specs = st.builds(
    lambda kh, kw, dh, dw, sh, sw, pad: ConvSpec((kh, kw), (dh, dw), (sh, sw), pad),
    st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3),
    st.integers(1, 2), st.integers(1, 2), st.sampled_from(["same", "valid"]),
)


@settings(max_examples=60, deadline=None)
@given(conv_specs, st.integers(1, 9), st.integers(1, 9))
def test_shape_algebra(spec, h, w):
    eh, ew = spec.extent
    if spec.padding == "valid" and (eh > h or ew > w):
        with pytest.raises(ValueError):
            spec.output_hw(h, w)
        return
    oh, ow = spec.output_hw(h, w)
    if spec.padding == "same":
        assert (oh, ow) == (math.ceil(h / spec.stride[0]), math.ceil(w / spec.stride[1]))
    else:
        assert (oh, ow) == ((h - eh) // spec.stride[0] + 1, (w - ew) // spec.stride[1] + 1)
    rng = np.random.default_rng(0)
    y = nn.conv2d(rng.standard_normal((1, h, w, 2)), rng.standard_normal((*spec.kernel, 2, 3)), np.zeros(3), replace(spec, filters=3))
    assert y.shape == (1, oh, ow, 3)
    back = nn.conv2d_transpose(y.data, rng.standard_normal((*spec.kernel, 2, 3)), np.zeros(2), replace(spec, filters=2), output_hw=(h, w))
    assert back.shape == (1, h, w, 2)


# -- conv oracles --------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("padding", ["same", "valid"])
def test_conv_matches_naive_loop_bitwise(seed, padding):
    # integer-valued data keeps every partial sum exact, so any summation
    # order must produce the same bits
    rng = np.random.default_rng(seed)
    h, w = rng.integers(3, 9, size=2)
    kh, kw = rng.integers(1, 4, size=2)
    spec = ConvSpec((int(kh), int(kw)), padding=padding, filters=3)
    x = rng.integers(-4, 5, size=(2, h, w, 2)).astype(np.float64)
    wt = rng.integers(-4, 5, size=(kh, kw, 2, 3)).astype(np.float64)
    b = rng.integers(-4, 5, size=3).astype(np.float64)
    np.testing.assert_array_equal(nn.conv2d(x, wt, b, spec).data, naive_conv(x, wt, b, spec))


@pytest.mark.parametrize("spec", [
    ConvSpec((2, 3), dilation=(2, 2), filters=2),
    ConvSpec((3, 3), stride=(2, 2), padding="valid", filters=2),
    ConvSpec((1, 3), dilation=(1, 3), stride=(1, 2), filters=2),
])
def test_conv_matches_naive_loop_real(spec):
    rng = np.random.default_rng(3)
    x = rng.standard_normal((2, 5, 8, 3))
    wt = rng.standard_normal((*spec.kernel, 3, 2))
    b = rng.standard_normal(2)
    np.testing.assert_allclose(nn.conv2d(x, wt, b, spec).data, naive_conv(x, wt, b, spec), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("spec, hw", [
    (ConvSpec((2, 5), stride=(2, 2), filters=2), (4, 64)),
    (ConvSpec((2, 5), filters=2), (2, 32)),
    (ConvSpec((1, 3), dilation=(1, 16), filters=2), (4, 64)),
    (ConvSpec((3, 3), stride=(2, 2), padding="valid", filters=2), (4, 64)),
    (ConvSpec((2, 3), dilation=(2, 4), stride=(1, 3), filters=2), (5, 11)),
])
def test_transpose_is_adjoint(spec, hw):
    rng = np.random.default_rng(7)
    x = rng.standard_normal((2, *hw, 3))
    w = rng.standard_normal((*spec.kernel, 3, 2))
    y = rng.standard_normal(nn.conv2d(x, w, np.zeros(2), spec).shape)
    lhs = np.sum(nn.conv2d(x, w, np.zeros(2), spec).data * y)
    # the transpose takes weights laid out (kh, kw, F_out, Cin): same array, roles swapped
    rhs = np.sum(x * nn.conv2d_transpose(y, w, np.zeros(3), replace(spec, filters=3), output_hw=hw).data)
    assert lhs == pytest.approx(rhs, rel=1e-12)


# -- elementwise, dense, batch norm, loss ------------------------------------------


def test_activations():
    assert nn.tanh(np.zeros(1)).data[0] == 0.0
    assert nn.sigmoid(np.zeros(1)).data[0] == 0.5
    assert nn.leaky_relu(np.array([-1.0]), 0.2).data[0] == pytest.approx(-0.2)
    assert nn.relu(np.array([-1.0, 2.0])).data.tolist() == [0.0, 2.0]
    assert nn.activation("leaky_relu", np.array([-5.0]), alpha=0.1).data[0] == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        nn.activation("swish", np.zeros(1))


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20))
def test_tanh_codomain(values):
    out = nn.tanh(np.array(values)).data
    assert np.all(out >= -1) and np.all(out <= 1)
    small = np.abs(values) < 15
    assert np.all(np.abs(out[small]) < 1)


def test_dense_examples():
    x = np.array([[1.0, 2.0]])
    assert nn.dense(x, np.array([[1.0], [1.0]]), np.zeros(1)).data.tolist() == [[3.0]]
    eye = nn.dense(np.arange(6.0).reshape(2, 3), np.eye(3), np.zeros(3))
    np.testing.assert_array_equal(eye.data, np.arange(6.0).reshape(2, 3))
    assert nn.dense(np.zeros((0, 3)), np.eye(3), np.zeros(3)).shape == (0, 3)


def test_batch_norm_examples():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((64, 3))
    x = (x - x.mean(0)) / x.std(0)
    one, zero = np.ones(3), np.zeros(3)
    out = nn.batch_norm(x, one, zero, "train", np.zeros(3), np.ones(3))
    np.testing.assert_allclose(out.data, x, rtol=1e-5)
    np.testing.assert_allclose(nn.batch_norm(x, 2 * one, one, "train", np.zeros(3), np.ones(3)).data, 2 * out.data + 1)
    const = nn.batch_norm(np.full((4, 3), 7.0), one, np.array([1.0, 2.0, 3.0]), "train", np.zeros(3), np.ones(3))
    np.testing.assert_allclose(const.data, np.tile([1.0, 2.0, 3.0], (4, 1)))


def test_batch_norm_running_stats_and_inference():
    rm, rv = np.zeros(2), np.ones(2)
    x = np.array([[1.0, 10.0], [3.0, 20.0]])
    nn.batch_norm(x, np.ones(2), np.zeros(2), "train", rm, rv, momentum=0.9)
    np.testing.assert_allclose(rm, [0.2, 1.5])
    np.testing.assert_allclose(rv, [0.9 + 0.1 * 1.0, 0.9 + 0.1 * 25.0])  # biased batch variance
    out = nn.batch_norm(x, np.ones(2), np.zeros(2), "infer", rm, rv)
    np.testing.assert_allclose(out.data, (x - rm) / np.sqrt(rv + 1e-5))
    with pytest.raises(ValueError):
        nn.batch_norm(x[:1], np.ones(2), np.zeros(2), "train", rm, rv)


@pytest.mark.parametrize("p, y, expected", [(0.5, 1, math.log(2)), (0.9, 0, -math.log(0.1)), (1.0, 1, 0.0), (0.0, 0, 0.0)])
def test_bce_examples(p, y, expected):
    assert nn.bce_loss(np.array([p]), np.array([y])).data == pytest.approx(expected, abs=1e-6)


def test_bce_clamped_gradient_is_finite():
    p = Tensor(np.array([0.0, 1.0]), requires_grad=True)
    nn.bce_loss(p, np.array([1.0, 0.0])).backward()
    assert np.all(np.isfinite(p.grad))


# -- autodiff ----------------------------------------------------------------------


def test_backward_sum_and_tanh():
    x = Tensor(np.arange(5.0), requires_grad=True)
    nn.sum_all(x).backward()
    np.testing.assert_array_equal(x.grad, np.ones(5))
    z = Tensor(np.zeros(5), requires_grad=True)
    nn.sum_all(nn.tanh(z)).backward()
    np.testing.assert_array_equal(z.grad, np.ones(5))


def test_shared_subgraph_accumulates():
    x = Tensor(np.array([2.0]), requires_grad=True)
    y = nn.mul(x, x)
    nn.sum_all(nn.add(y, y)).backward()
    assert x.grad[0] == 8.0


def test_backward_requires_scalar():
    with pytest.raises(ValueError):
        Tensor(np.ones(3), requires_grad=True).backward()


def test_detach_blocks_gradient():
    x = Tensor(np.ones(2), requires_grad=True)
    nn.sum_all(nn.mul(nn.tanh(x).detach(), x)).backward()
    np.testing.assert_allclose(x.grad, np.tanh(np.ones(2)))


# -- optimiser ---------------------------------------------------------------------


def test_adam_first_step():
    p = Tensor(np.array([1.0]))
    state = nn.AdamState(lr=0.001, beta1=0.9)
    nn.adam_step({"p": p}, {"p": np.array([1.0])}, state)
    assert p.data[0] == pytest.approx(1.0 - 0.001, rel=1e-7)
    assert state.step == 1


def test_adam_zero_gradient():
    p = Tensor(np.array([1.5, -2.0]))
    nn.adam_step({"p": p}, {"p": np.zeros(2)}, nn.AdamState())
    np.testing.assert_array_equal(p.data, [1.5, -2.0])


def test_adam_defaults_and_dtype():
    state = nn.AdamState()
    assert (state.lr, state.beta1) == (2e-4, 0.5)
    p = Tensor(np.ones(3, dtype=np.float32))
    nn.adam_step({"p": p}, {"p": np.ones(3)}, state)
    assert p.data.dtype == np.float32


# -- gradient checks ------------------------------------------------------------------


def check(loss_fn, params, **kw):
    report = nn.grad_check(loss_fn, params, eps=1e-3, tol=1e-4, **kw)
    assert report.passed, report.summary()
    return report


def test_grad_check_report_fixtures():
    x = param(np.random.default_rng(0), 4)
    assert check(lambda: nn.sum_all(x), {"x": x}).max_rel_error < 1e-9
    zero = Tensor(np.zeros(4), requires_grad=True)
    check(lambda: nn.sum_all(nn.tanh(zero)), {"x": zero})


def test_grad_check_flags_wrong_gradient():
    x = param(np.random.default_rng(0), 3)

    def bad():
        out = nn.sum_all(nn.mul(x, x))
        original = out._backward

        def wrong(g):
            original(g * 1.1)

        out._backward = wrong
        return out

    assert not nn.grad_check(bad, {"x": x}).passed


@pytest.mark.parametrize("kind", ["relu", "leaky_relu", "sigmoid", "tanh"])
def test_grad_activations(kind):
    x = param(np.random.default_rng(1), 3, 4)
    check(lambda: nn.sum_all(nn.mul(nn.activation(kind, x), x)), {"x": x})


def test_grad_dense_reshape_concat():
    rng = np.random.default_rng(2)
    x, w, b = param(rng, 3, 4), param(rng, 4, 5, scale=0.4), param(rng, 5)
    other = param(rng, 3, 2)

    def loss():
        h = nn.dense(x, w, b)
        h = nn.concat([h, other], axis=1)
        return nn.mean_all(nn.tanh(nn.reshape(h, (7, 3))))

    check(loss, {"x": x, "w": w, "b": b, "other": other})


@pytest.mark.parametrize("spec", [
    ConvSpec((2, 3), filters=2),
    ConvSpec((1, 3), dilation=(1, 4), filters=2),
    ConvSpec((2, 3), dilation=(2, 2), stride=(1, 2), filters=2),
    ConvSpec((3, 3), stride=(2, 2), padding="valid", filters=2),
])
def test_grad_conv2d(spec):
    rng = np.random.default_rng(3)
    x, w, b = param(rng, 2, 4, 9, 2, scale=0.5), param(rng, *spec.kernel, 2, 2, scale=0.3), param(rng, 2)
    target = rng.standard_normal(nn.conv2d(x.data, w.data, b.data, spec).shape)
    check(lambda: nn.sum_all(nn.mul(nn.tanh(nn.conv2d(x, w, b, spec)), target)), {"x": x, "w": w, "b": b})


@pytest.mark.parametrize("spec, hw", [(ConvSpec((2, 5), stride=(2, 2), filters=2), (2, 4)), (ConvSpec((2, 5), filters=2), (2, 6))])
def test_grad_conv2d_transpose(spec, hw):
    rng = np.random.default_rng(4)
    y, w, b = param(rng, 2, *hw, 3), param(rng, *spec.kernel, 2, 3, scale=0.3), param(rng, 2)
    out_shape = nn.conv2d_transpose(y.data, w.data, b.data, spec).shape
    target = rng.standard_normal(out_shape)
    check(lambda: nn.sum_all(nn.mul(nn.tanh(nn.conv2d_transpose(y, w, b, spec)), target)), {"y": y, "w": w, "b": b})


def test_grad_batch_norm():
    rng = np.random.default_rng(5)
    x, gamma, beta = param(rng, 6, 2, 3), param(rng, 3), param(rng, 3)
    target = rng.standard_normal((6, 2, 3))

    def loss():
        out = nn.batch_norm(x, gamma, beta, "train", np.zeros(3), np.ones(3))
        return nn.sum_all(nn.mul(nn.tanh(out), target))

    check(loss, {"x": x, "gamma": gamma, "beta": beta})


def test_grad_bce():
    rng = np.random.default_rng(6)
    logits = param(rng, 8)
    labels = (rng.random(8) > 0.5).astype(float)
    check(lambda: nn.bce_loss(nn.sigmoid(logits), labels), {"logits": logits})


def test_directional_derivatives():
    rng = np.random.default_rng(8)
    spec = ConvSpec((2, 3), dilation=(1, 2), filters=2)
    x, w, b = param(rng, 2, 3, 7, 1), param(rng, 2, 3, 1, 2), param(rng, 2)
    error = nn.directional_check(lambda: nn.mean_all(nn.sigmoid(nn.conv2d(x, w, b, spec))), {"x": x, "w": w, "b": b})
    assert error < 1e-4


def test_kink_crossings_are_checked_on_the_frozen_piece():
    x = Tensor(np.array([0.0005, -0.3, 0.4]), requires_grad=True)
    report = check(lambda: nn.sum_all(nn.relu(x)), {"x": x})
    assert report.params[0].crossed == 1
    assert report.params[0].checked == 3


# -- layers and determinism -------------------------------------------------------


def test_layers_are_seeded_and_float32():
    spec = ConvSpec((2, 9), filters=32)
    a = nn.Conv2D(1, spec, np.random.default_rng(0))
    b = nn.Conv2D(1, spec, np.random.default_rng(0))
    kernel = a.params["kernel"]
    assert kernel.data.dtype == np.float32
    np.testing.assert_array_equal(kernel.data, b.params["kernel"].data)
    assert kernel.shape == (2, 9, 1, 32)


def test_repeated_forward_is_bitwise_identical():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((4, 4, 64, 1))
    w = rng.standard_normal((2, 9, 1, 8))
    spec = ConvSpec((2, 9), filters=8)
    first = nn.conv2d(x, w, np.zeros(8), spec).data.tobytes()
    assert all(nn.conv2d(x, w, np.zeros(8), spec).data.tobytes() == first for _ in range(3))
