"""Network layers over (time, dim) sequences.

The GRU follows the original gating form: with update gate z, reset gate r,
and candidate n,

    z_t = sigmoid(x_t Wz + h_{t-1} Uz + bz)
    r_t = sigmoid(x_t Wr + h_{t-1} Ur + br)
    n_t = tanh(x_t Wn + (r_t * h_{t-1}) Un + bn)
    h_t = z_t * h_{t-1} + (1 - z_t) * n_t

The whole layer is one graph node with a hand-derived backprop-through-time;
the same applies to the strided 1-D convolution and batch norm. Weights are
initialized uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases at zero.
"""

from __future__ import annotations

import numpy as np

from ..errors import BadProbability, ShapeMismatch
from .tensor import Parameter, Tensor, _make, concat, matmul, relu, stable_sigmoid, tanh


class Module:
    """Base with recursive parameter/buffer discovery over attributes."""

    buffer_names: tuple[str, ...] = ()

    def named_parameters(self, prefix: str = "") -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        for attr, val in vars(self).items():
            key = f"{prefix}{attr}"
            if isinstance(val, Parameter):
                out[key] = val
            elif isinstance(val, Module):
                out.update(val.named_parameters(f"{key}."))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(f"{key}.{i}."))
                    elif isinstance(item, Parameter):
                        out[f"{key}.{i}"] = item
        return out

    def parameters(self) -> list[Parameter]:
        return list(self.named_parameters().values())

    def named_buffers(self, prefix: str = "") -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for name in self.buffer_names:
            out[f"{prefix}{name}"] = getattr(self, name)
        for attr, val in vars(self).items():
            key = f"{prefix}{attr}"
            if isinstance(val, Module):
                out.update(val.named_buffers(f"{key}."))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.update(item.named_buffers(f"{key}.{i}."))
        return out

    def set_buffer(self, path: str, value: np.ndarray) -> None:
        """Assign a buffer by its named_buffers() dotted path."""
        parts = path.split(".")
        obj = self
        for part in parts[:-1]:
            obj = obj[int(part)] if part.isdigit() else getattr(obj, part)
        if parts[-1] not in obj.buffer_names:
            raise ShapeMismatch(f"{path!r} is not a registered buffer")
        setattr(obj, parts[-1], np.asarray(value, dtype=np.float64))


def _uniform_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.w = Parameter(_uniform_init(rng, in_dim, (in_dim, out_dim)))
        self.b = Parameter(np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        return matmul(x, self.w) + self.b


class MLP(Module):
    """Stack of affine layers with a nonlinearity between them (none after
    the last layer)."""

    def __init__(self, dims: list[int], rng: np.random.Generator, activation=relu):
        if len(dims) < 2:
            raise ShapeMismatch("MLP needs at least input and output dims")
        self.layers = [Linear(dims[i], dims[i + 1], rng) for i in range(len(dims) - 1)]
        self.activation = activation

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = self.activation(x)
        return x


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: scales kept units by 1/(1-p); identity in eval."""
    if not 0.0 <= p < 1.0:
        raise BadProbability(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    mask = (rng.random(x.data.shape) >= p) / (1.0 - p)
    return x * Tensor(mask)


def gru_cell(x_t: np.ndarray, h: np.ndarray, w: np.ndarray, u_zr: np.ndarray,
             u_n: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One plain-numpy GRU step (no gradients); the layer below matches this."""
    hsz = h.shape[-1]
    pre = x_t @ w + b
    azr = pre[..., : 2 * hsz] + h @ u_zr
    z = stable_sigmoid(azr[..., :hsz])
    r = stable_sigmoid(azr[..., hsz:])
    n = np.tanh(pre[..., 2 * hsz:] + (r * h) @ u_n)
    return z * h + (1.0 - z) * n


class GRULayer(Module):
    """Unidirectional GRU over a (T, in_dim) sequence; h0 is zero.

    ``reverse=True`` runs right to left and returns outputs in input order.
    """

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator, reverse: bool = False):
        self.hidden = hidden
        self.reverse = reverse
        self.w = Parameter(_uniform_init(rng, in_dim, (in_dim, 3 * hidden)))
        self.u_zr = Parameter(_uniform_init(rng, hidden, (hidden, 2 * hidden)))
        self.u_n = Parameter(_uniform_init(rng, hidden, (hidden, hidden)))
        self.b = Parameter(np.zeros(3 * hidden))

    def __call__(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.data.shape[1] != self.w.data.shape[0]:
            raise ShapeMismatch(
                f"GRU expects (T, {self.w.data.shape[0]}), got {x.data.shape}")
        H = self.hidden
        w, u_zr, u_n, b = self.w, self.u_zr, self.u_n, self.b
        xd = x.data[::-1] if self.reverse else x.data
        T = xd.shape[0]
        pre = xd @ w.data + b.data  # (T, 3H)
        hs = np.empty((T, H))
        zrs = np.empty((T, 2 * H))
        ns = np.empty((T, H))
        h = np.zeros(H)
        for t in range(T):
            zr = stable_sigmoid(pre[t, : 2 * H] + h @ u_zr.data)
            z = zr[:H]
            n = np.tanh(pre[t, 2 * H:] + (zr[H:] * h) @ u_n.data)
            zrs[t] = zr
            ns[t] = n
            h = z * h + (1.0 - z) * n
            hs[t] = h
        out = hs[::-1].copy() if self.reverse else hs

        cache: dict = {}

        def run_bptt(g_out: np.ndarray) -> dict:
            if cache:
                return cache
            g = g_out[::-1] if self.reverse else g_out
            # h_{t-1} is hs shifted by one (zero at t=0)
            hprevs = np.vstack([np.zeros((1, H)), hs[:-1]])
            dpre = np.empty((T, 3 * H))
            un_t = u_n.data.T
            uzr_t = u_zr.data.T
            dh = np.zeros(H)
            for t in range(T - 1, -1, -1):
                dh_tot = g[t] + dh
                zr, n, hp = zrs[t], ns[t], hprevs[t]
                z, r = zr[:H], zr[H:]
                dn = dh_tot - dh_tot * z
                dan = dn * (1.0 - n * n)
                dhr = dan @ un_t
                row = dpre[t]
                row[:H] = dh_tot * (hp - n)
                row[H: 2 * H] = dhr * hp
                row[: 2 * H] *= zr * (1.0 - zr)
                row[2 * H:] = dan
                dh = dh_tot * z + dhr * r + row[: 2 * H] @ uzr_t
            dxd = dpre @ w.data.T
            rh = zrs[:, H:] * hprevs
            cache.update({
                "x": dxd[::-1].copy() if self.reverse else dxd,
                "w": xd.T @ dpre,
                "u_zr": hprevs.T @ dpre[:, : 2 * H],
                "u_n": rh.T @ dpre[:, 2 * H:],
                "b": dpre.sum(axis=0),
            })
            return cache

        return _make(out, [
            (x, lambda g: run_bptt(g)["x"]),
            (w, lambda g: run_bptt(g)["w"]),
            (u_zr, lambda g: run_bptt(g)["u_zr"]),
            (u_n, lambda g: run_bptt(g)["u_n"]),
            (b, lambda g: run_bptt(g)["b"]),
        ])


class BiGRU(Module):
    """Stack of bidirectional GRU layers; per frame the forward and backward
    hidden states are concatenated, so each layer outputs (T, 2 * hidden)."""

    def __init__(self, in_dim: int, hidden: int, layers: int, rng: np.random.Generator):
        self.fwd = []
        self.bwd = []
        d = in_dim
        for _ in range(layers):
            self.fwd.append(GRULayer(d, hidden, rng, reverse=False))
            self.bwd.append(GRULayer(d, hidden, rng, reverse=True))
            d = 2 * hidden
        self.out_dim = d

    def __call__(self, x: Tensor, between=None) -> Tensor:
        """``between`` (if given) is applied to every layer's output, e.g.
        a dropout closure."""
        for fwd, bwd in zip(self.fwd, self.bwd):
            x = concat([fwd(x), bwd(x)], axis=1)
            if between is not None:
                x = between(x)
        return x


class BatchNorm1d(Module):
    """Normalizes each feature over the time/batch axis; exponential running
    statistics are used in eval mode."""

    buffer_names = ("running_mean", "running_var")

    def __init__(self, dim: int, momentum: float = 0.1, eps: float = 1e-5):
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))
        self.running_mean = np.zeros(dim)
        self.running_var = np.ones(dim)
        self.momentum = momentum
        self.eps = eps

    def __call__(self, x: Tensor, training: bool) -> Tensor:
        if x.data.ndim != 2 or x.data.shape[1] != self.gamma.data.shape[0]:
            raise ShapeMismatch(f"batch norm expects (T, {self.gamma.data.shape[0]})")
        gamma, beta = self.gamma, self.beta
        if training:
            mu = x.data.mean(axis=0)
            var = x.data.var(axis=0)
            self.running_mean = (1 - self.momentum) * self.running_mean + self.momentum * mu
            self.running_var = (1 - self.momentum) * self.running_var + self.momentum * var
        else:
            mu, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x.data - mu) * inv_std
        out = gamma.data * xhat + beta.data
        T = x.data.shape[0]

        def vjp_x(g):
            gxhat = g * gamma.data
            if not training:
                return gxhat * inv_std
            # standard batch-norm gradient through the batch statistics
            return (inv_std / T) * (
                T * gxhat - gxhat.sum(axis=0) - xhat * (gxhat * xhat).sum(axis=0)
            )

        return _make(out, [
            (x, vjp_x),
            (gamma, lambda g: (g * xhat).sum(axis=0)),
            (beta, lambda g: g.sum(axis=0)),
        ])


class Conv1d(Module):
    """Valid (unpadded) strided 1-D convolution over (T, in_channels);
    output length is floor((T - kernel) / stride) + 1."""

    def __init__(self, in_ch: int, out_ch: int, kernel: int, stride: int, rng: np.random.Generator):
        self.kernel = kernel
        self.stride = stride
        self.w = Parameter(_uniform_init(rng, kernel * in_ch, (kernel, in_ch, out_ch)))
        self.b = Parameter(np.zeros(out_ch))

    def out_len(self, t: int) -> int:
        return (t - self.kernel) // self.stride + 1

    def __call__(self, x: Tensor) -> Tensor:
        k, s = self.kernel, self.stride
        T, cin = x.data.shape
        if cin != self.w.data.shape[1]:
            raise ShapeMismatch(f"conv expects {self.w.data.shape[1]} channels, got {cin}")
        if T < k:
            raise ShapeMismatch(f"sequence of {T} frames shorter than kernel {k}")
        n_out = self.out_len(T)
        w, b = self.w, self.b
        # windows[t] = x[t*s : t*s + k]
        idx = np.arange(n_out)[:, None] * s + np.arange(k)[None, :]
        windows = x.data[idx]  # (n_out, k, cin)
        out = np.tensordot(windows, w.data, axes=([1, 2], [0, 1])) + b.data

        def vjp_x(g):
            dx = np.zeros_like(x.data)
            for j in range(k):
                dx[j: j + n_out * s: s] += g @ w.data[j].T
            return dx

        return _make(out, [
            (x, vjp_x),
            (w, lambda g: np.einsum("tkc,td->kcd", windows, g)),
            (b, lambda g: g.sum(axis=0)),
        ])
