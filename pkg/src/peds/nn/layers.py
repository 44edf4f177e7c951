"""Network layers over the autodiff tensors.

Data layout is channels-last volumes: ``(batch, H, W, T, features)`` for the
convolutional stack and ``(batch, time, features)`` for sequences.  All
convolutions are valid (no padding).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .tensor import (Tensor, _make, as_tensor, concatenate, dropout, matmul,
                     sigmoid, tanh)


def conv_output_length(n_in: int, kernel: int, stride: int) -> int:
    """Valid-convolution arithmetic: floor((in - k) / s) + 1."""
    if kernel > n_in:
        raise ValueError(f"kernel {kernel} larger than input extent {n_in}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    return (n_in - kernel) // stride + 1


def _windows(x: np.ndarray, kernel: tuple[int, int, int],
             stride: tuple[int, int, int]) -> np.ndarray:
    """Strided sliding-window view (N, Ho, Wo, To, kh, kw, kt, C)."""
    n, h, w, t, c = x.shape
    kh, kw, kt = kernel
    sh, sw, st = stride
    ho = conv_output_length(h, kh, sh)
    wo = conv_output_length(w, kw, sw)
    to = conv_output_length(t, kt, st)
    sn, s1, s2, s3, s4 = x.strides
    return as_strided(x, shape=(n, ho, wo, to, kh, kw, kt, c),
                      strides=(sn, s1 * sh, s2 * sw, s3 * st, s1, s2, s3, s4),
                      writeable=False)


def conv3d_valid(x: Tensor, weight: Tensor, bias: Tensor,
                 stride: tuple[int, int, int]) -> Tensor:
    """Valid 3-D convolution with per-filter bias.

    ``x`` is (N, H, W, T, Cin); ``weight`` is (kh, kw, kt, Cin, Cout).
    """
    x, weight, bias = as_tensor(x), as_tensor(weight), as_tensor(bias)
    kernel = weight.data.shape[:3]
    win = _windows(x.data, kernel, stride)
    out_data = np.tensordot(win, weight.data, axes=([4, 5, 6, 7], [0, 1, 2, 3]))
    out_data = out_data + bias.data

    def backward(g):
        if bias.requires_grad:
            bias._accumulate(g.sum(axis=(0, 1, 2, 3)))
        if weight.requires_grad:
            weight._accumulate(np.tensordot(win, g, axes=([0, 1, 2, 3], [0, 1, 2, 3])))
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            kh, kw, kt = kernel
            sh, sw, st = stride
            ho, wo, to = g.shape[1:4]
            for i in range(kh):
                for j in range(kw):
                    for k in range(kt):
                        # (N, Ho, Wo, To, Cout) @ (Cout, Cin)
                        contrib = g @ weight.data[i, j, k].T
                        gx[:, i:i + ho * sh:sh, j:j + wo * sw:sw,
                           k:k + to * st:st, :] += contrib
            x._accumulate(gx)
    return _make(out_data, (x, weight, bias), backward, "conv3d")


def avgpool3d(x: Tensor, kernel: tuple[int, int, int],
              stride: tuple[int, int, int]) -> Tensor:
    """Valid average pooling over (H, W, T) windows."""
    x = as_tensor(x)
    win = _windows(x.data, kernel, stride)
    out_data = win.mean(axis=(4, 5, 6))
    denom = kernel[0] * kernel[1] * kernel[2]

    def backward(g):
        gx = np.zeros_like(x.data)
        kh, kw, kt = kernel
        sh, sw, st = stride
        ho, wo, to = g.shape[1:4]
        share = g / denom
        for i in range(kh):
            for j in range(kw):
                for k in range(kt):
                    gx[:, i:i + ho * sh:sh, j:j + wo * sw:sw,
                       k:k + to * st:st, :] += share
        x._accumulate(gx)
    return _make(out_data, (x,), backward, "avgpool3d")


def he_uniform(shape: tuple, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    """Parameter container; freezing makes the optimizer skip its tensors."""

    def params(self) -> list[Tensor]:
        return []

    def set_frozen(self, flag: bool) -> None:
        for p in self.params():
            p.frozen = flag

    @property
    def frozen(self) -> bool:
        ps = self.params()
        return bool(ps) and all(p.frozen for p in ps)


class Conv3D(Layer):
    def __init__(self, kernel: tuple[int, int, int], in_features: int,
                 num_filters: int, stride: tuple[int, int, int],
                 rng: np.random.Generator, name: str = "conv"):
        fan_in = kernel[0] * kernel[1] * kernel[2] * in_features
        self.weight = Tensor(he_uniform((*kernel, in_features, num_filters), fan_in, rng),
                             requires_grad=True, name=f"{name}.weight")
        self.bias = Tensor(np.zeros(num_filters), requires_grad=True, name=f"{name}.bias")
        self.stride = stride

    def params(self):
        return [self.weight, self.bias]

    def __call__(self, x: Tensor) -> Tensor:
        return conv3d_valid(x, self.weight, self.bias, self.stride)

    def output_shape(self, in_shape: tuple[int, int, int]) -> tuple[int, int, int]:
        k = self.weight.data.shape[:3]
        return tuple(conv_output_length(n, kk, ss)
                     for n, kk, ss in zip(in_shape, k, self.stride))


class AvgPool3D(Layer):
    def __init__(self, kernel: tuple[int, int, int], stride: tuple[int, int, int]):
        self.kernel = kernel
        self.stride = stride

    def __call__(self, x: Tensor) -> Tensor:
        return avgpool3d(x, self.kernel, self.stride)

    def output_shape(self, in_shape: tuple[int, int, int]) -> tuple[int, int, int]:
        return tuple(conv_output_length(n, kk, ss)
                     for n, kk, ss in zip(in_shape, self.kernel, self.stride))


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator,
                 max_norm: float | None = None, name: str = "dense"):
        self.weight = Tensor(he_uniform((n_in, n_out), n_in, rng),
                             requires_grad=True, name=f"{name}.weight")
        self.bias = Tensor(np.zeros(n_out), requires_grad=True, name=f"{name}.bias")
        if max_norm is not None:
            self.weight.max_norm = float(max_norm)

    def params(self):
        return [self.weight, self.bias]

    def __call__(self, x: Tensor) -> Tensor:
        return matmul(x, self.weight) + self.bias


class GRU(Layer):
    """Gated recurrent unit returning the full hidden-state sequence.

    Update gate z, reset gate r, candidate tanh(Wc x + Uc (r*h) + bc), and
    state transition h <- (1 - z) * h + z * candidate, starting from zeros.
    """

    def __init__(self, n_in: int, units: int, rng: np.random.Generator,
                 name: str = "gru"):
        bound_x = 1.0 / np.sqrt(n_in)
        bound_h = 1.0 / np.sqrt(units)
        self.wx = Tensor(rng.uniform(-bound_x, bound_x, size=(n_in, 3 * units)),
                         requires_grad=True, name=f"{name}.wx")
        self.wh = Tensor(rng.uniform(-bound_h, bound_h, size=(units, 3 * units)),
                         requires_grad=True, name=f"{name}.wh")
        self.bias = Tensor(np.zeros(3 * units), requires_grad=True, name=f"{name}.bias")
        self.units = units

    def params(self):
        return [self.wx, self.wh, self.bias]

    def __call__(self, sequence: Tensor, return_sequences: bool = True) -> Tensor:
        """``sequence`` is (N, T, features); returns (N, T, units) or (N, units)."""
        n, t_len = sequence.data.shape[0], sequence.data.shape[1]
        if t_len == 0:
            raise ValueError("GRU requires at least one timestep")
        u = self.units
        h = Tensor(np.zeros((n, u)))
        states = []
        for t in range(t_len):
            x_t = sequence[:, t, :]
            gx = matmul(x_t, self.wx) + self.bias
            gh_zr = matmul(h, self.wh[:, :2 * u])
            z = sigmoid(gx[:, :u] + gh_zr[:, :u])
            r = sigmoid(gx[:, u:2 * u] + gh_zr[:, u:2 * u])
            cand = tanh(gx[:, 2 * u:] + matmul(r * h, self.wh[:, 2 * u:]))
            h = (1.0 - z) * h + z * cand
            states.append(h)
        if not return_sequences:
            return h
        expanded = [s[:, None, :] for s in states]
        return concatenate(expanded, axis=1)


class Dropout(Layer):
    def __init__(self, rate: float):
        self.rate = rate

    def __call__(self, x: Tensor, training: bool, rng: np.random.Generator) -> Tensor:
        return dropout(x, self.rate, training, rng)
