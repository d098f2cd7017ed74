"""Stacked LSTM regressor with hand-rolled backpropagation through time.

Two recurrent stacks (standard input/forget/output gates plus cell candidate),
dropout after each stack while training, and a single tanh output unit read
from the final timestep. Everything is plain float64 numpy, so training is
bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import json
from typing import Optional

import numpy as np
from numba import njit

HIDDEN = 12
LAYERS = 2
DROPOUT = 0.2


@njit(cache=True)
def _forward_kernel(xw, U, gi, gf, gg, go, cs, tc, hs, h_prev, c_prev):
    # All sequence arrays are (T, B, H); xw is the precomputed x @ W + b.
    T, B, H4 = xw.shape
    H = H4 // 4
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        for bi in range(B):
            for hi in range(H):
                h_prev[t, bi, hi] = h[bi, hi]
                c_prev[t, bi, hi] = c[bi, hi]
        for bi in range(B):
            for k in range(H):
                zi = xw[t, bi, k]
                zf = xw[t, bi, H + k]
                zg = xw[t, bi, 2 * H + k]
                zo = xw[t, bi, 3 * H + k]
                for hj in range(H):
                    hv = h[bi, hj]
                    zi += hv * U[hj, k]
                    zf += hv * U[hj, H + k]
                    zg += hv * U[hj, 2 * H + k]
                    zo += hv * U[hj, 3 * H + k]
                iv = 1.0 / (1.0 + np.exp(-zi))
                fv = 1.0 / (1.0 + np.exp(-zf))
                gv = np.tanh(zg)
                ov = 1.0 / (1.0 + np.exp(-zo))
                cv = fv * c[bi, k] + iv * gv
                tv = np.tanh(cv)
                gi[t, bi, k] = iv
                gf[t, bi, k] = fv
                gg[t, bi, k] = gv
                go[t, bi, k] = ov
                cs[t, bi, k] = cv
                tc[t, bi, k] = tv
        for bi in range(B):
            for k in range(H):
                c[bi, k] = cs[t, bi, k]
                h[bi, k] = go[t, bi, k] * tc[t, bi, k]
                hs[t, bi, k] = h[bi, k]


@njit(cache=True)
def _backward_kernel(U, gi, gf, gg, go, cs, tc, c_prev, dh_seq, dz_all):
    T, B, H = dh_seq.shape
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        for bi in range(B):
            for k in range(H):
                iv = gi[t, bi, k]
                fv = gf[t, bi, k]
                gv = gg[t, bi, k]
                ov = go[t, bi, k]
                tv = tc[t, bi, k]
                dh = dh_seq[t, bi, k] + dh_next[bi, k]
                dc = dc_next[bi, k] + dh * ov * (1.0 - tv * tv)
                do = dh * tv
                di = dc * gv
                df = dc * c_prev[t, bi, k]
                dg = dc * iv
                dz_all[t, bi, k] = di * iv * (1.0 - iv)
                dz_all[t, bi, H + k] = df * fv * (1.0 - fv)
                dz_all[t, bi, 2 * H + k] = dg * (1.0 - gv * gv)
                dz_all[t, bi, 3 * H + k] = do * ov * (1.0 - ov)
                dc_next[bi, k] = dc * fv
        for bi in range(B):
            for k in range(H):
                acc = 0.0
                for k4 in range(4 * H):
                    acc += dz_all[t, bi, k4] * U[k, k4]
                dh_next[bi, k] = acc


class LSTMLayer:
    """One recurrent stack. Gate slices in z: [input, forget, cell, output]."""

    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator):
        kw = 1.0 / np.sqrt(n_in)
        ku = 1.0 / np.sqrt(n_hidden)
        self.W = rng.uniform(-kw, kw, (n_in, 4 * n_hidden))
        self.U = rng.uniform(-ku, ku, (n_hidden, 4 * n_hidden))
        self.b = np.zeros(4 * n_hidden)
        self.b[n_hidden : 2 * n_hidden] = 1.0  # open forget gates at start
        self.n_in = n_in
        self.n_hidden = n_hidden

    def forward(self, xs: np.ndarray):
        """xs (B, T, n_in) -> hs (B, T, n_hidden) plus the BPTT cache."""
        B, T, _ = xs.shape
        H = self.n_hidden
        xw = (xs.reshape(B * T, self.n_in) @ self.W + self.b).reshape(B, T, 4 * H)
        xw = np.ascontiguousarray(xw.transpose(1, 0, 2))
        shape = (T, B, H)
        gi, gf, gg, go = (np.empty(shape) for _ in range(4))
        cs, tc, hs, h_prev, c_prev = (np.empty(shape) for _ in range(5))
        _forward_kernel(xw, self.U, gi, gf, gg, go, cs, tc, hs, h_prev, c_prev)
        cache = {"x": xs, "i": gi, "f": gf, "g": gg, "o": go, "c": cs, "tc": tc,
                 "h_prev": h_prev, "c_prev": c_prev}
        return hs.transpose(1, 0, 2), cache

    def backward(self, cache, dh_seq: np.ndarray):
        """dh_seq (B, T, H): external gradient on each h_t. Returns (dx, grads)."""
        B, T, H = dh_seq.shape
        dh_tbh = np.ascontiguousarray(dh_seq.transpose(1, 0, 2))
        dz_all = np.empty((T, B, 4 * H))
        _backward_kernel(self.U, cache["i"], cache["f"], cache["g"], cache["o"],
                         cache["c"], cache["tc"], cache["c_prev"], dh_tbh, dz_all)
        flat_dz = dz_all.transpose(1, 0, 2).reshape(B * T, 4 * H)
        grads = {
            "W": cache["x"].reshape(B * T, self.n_in).T @ flat_dz,
            "U": cache["h_prev"].transpose(1, 0, 2).reshape(B * T, H).T @ flat_dz,
            "b": flat_dz.sum(axis=0),
        }
        dx = (flat_dz @ self.W.T).reshape(B, T, self.n_in)
        return dx, grads


class CriticModel:
    """input(4) -> LSTM(12) -> dropout -> LSTM(12) -> dropout -> dense tanh(1)."""

    def __init__(self, n_in: int = 4, n_hidden: int = HIDDEN, seed: int = 0,
                 dropout: float = DROPOUT):
        rng = np.random.default_rng(seed)
        self.layer1 = LSTMLayer(n_in, n_hidden, rng)
        self.layer2 = LSTMLayer(n_hidden, n_hidden, rng)
        kd = 1.0 / np.sqrt(n_hidden)
        self.w_out = rng.uniform(-kd, kd, n_hidden)
        self.b_out = 0.0
        self.dropout = dropout
        self.n_in = n_in
        self.n_hidden = n_hidden

    # -- parameter plumbing ------------------------------------------------

    def parameters(self) -> dict:
        return {
            "l1.W": self.layer1.W, "l1.U": self.layer1.U, "l1.b": self.layer1.b,
            "l2.W": self.layer2.W, "l2.U": self.layer2.U, "l2.b": self.layer2.b,
            "out.w": self.w_out,
        }

    def get_flat(self) -> np.ndarray:
        parts = [v.ravel() for _, v in sorted(self.parameters().items())]
        parts.append(np.array([self.b_out]))
        return np.concatenate(parts)

    def set_flat(self, flat: np.ndarray) -> None:
        k = 0
        for _, v in sorted(self.parameters().items()):
            v[...] = flat[k : k + v.size].reshape(v.shape)
            k += v.size
        self.b_out = float(flat[k])

    # -- forward / backward -------------------------------------------------

    def forward(self, X: np.ndarray, train_rng: Optional[np.random.Generator] = None):
        """Predictions in (-1, 1). A rng enables dropout (training only)."""
        X = np.asarray(X, dtype=float)
        h1, c1 = self.layer1.forward(X)
        if train_rng is not None:
            m1 = (train_rng.random(h1.shape) >= self.dropout) / (1.0 - self.dropout)
            h1d = h1 * m1
        else:
            m1 = None
            h1d = h1
        h2, c2 = self.layer2.forward(h1d)
        last = h2[:, -1]
        if train_rng is not None:
            m2 = (train_rng.random(last.shape) >= self.dropout) / (1.0 - self.dropout)
            lastd = last * m2
        else:
            m2 = None
            lastd = last
        pred = np.tanh(lastd @ self.w_out + self.b_out)
        cache = {"c1": c1, "c2": c2, "m1": m1, "m2": m2, "lastd": lastd, "pred": pred,
                 "T": X.shape[1], "B": X.shape[0]}
        return pred, cache

    def predict(self, X: np.ndarray) -> np.ndarray:
        pred, _ = self.forward(X, train_rng=None)
        return pred

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray,
                       train_rng: Optional[np.random.Generator] = None):
        """Mean squared error and gradients for every parameter."""
        y = np.asarray(y, dtype=float)
        pred, cache = self.forward(X, train_rng)
        err = pred - y
        loss = float((err * err).mean())
        B, T = cache["B"], cache["T"]

        dpred = 2.0 * err / B
        dz_out = dpred * (1.0 - cache["pred"] ** 2)
        g_w_out = cache["lastd"].T @ dz_out
        g_b_out = dz_out.sum()
        dlast = np.outer(dz_out, self.w_out)
        if cache["m2"] is not None:
            dlast = dlast * cache["m2"]
        dh2_seq = np.zeros((B, T, self.n_hidden))
        dh2_seq[:, -1] = dlast
        dh1d, g2 = self.layer2.backward(cache["c2"], dh2_seq)
        if cache["m1"] is not None:
            dh1d = dh1d * cache["m1"]
        _, g1 = self.layer1.backward(cache["c1"], dh1d)
        grads = {
            "l1.W": g1["W"], "l1.U": g1["U"], "l1.b": g1["b"],
            "l2.W": g2["W"], "l2.U": g2["U"], "l2.b": g2["b"],
            "out.w": g_w_out, "out.b": g_b_out,
        }
        return loss, grads

    # -- serialization -------------------------------------------------------

    def save(self, path, meta: Optional[dict] = None) -> None:
        arrays = {k.replace(".", "_"): v for k, v in self.parameters().items()}
        arrays["out_b"] = np.array([self.b_out])
        header = {
            "n_in": self.n_in,
            "n_hidden": self.n_hidden,
            "dropout": self.dropout,
            "shapes": {k: list(v.shape) for k, v in self.parameters().items()},
        }
        if meta:
            header.update(meta)
        arrays["header_json"] = np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
        np.savez(path, **arrays)

    @staticmethod
    def load(path) -> tuple:
        with np.load(path) as z:
            header = json.loads(bytes(z["header_json"]).decode())
            model = CriticModel(n_in=header["n_in"], n_hidden=header["n_hidden"],
                                dropout=header["dropout"])
            model.layer1.W = z["l1_W"]
            model.layer1.U = z["l1_U"]
            model.layer1.b = z["l1_b"]
            model.layer2.W = z["l2_W"]
            model.layer2.U = z["l2_U"]
            model.layer2.b = z["l2_b"]
            model.w_out = z["out_w"]
            model.b_out = float(z["out_b"][0])
        return model, header


class Adam:
    """Adaptive moment gradient descent with bias correction."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, model: CriticModel, grads: dict) -> None:
        self.t += 1
        params = model.parameters()
        params["out.b"] = None  # scalar handled separately
        for k in grads:
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * (g * g)
            mhat = self.m[k] / (1 - self.beta1**self.t)
            vhat = self.v[k] / (1 - self.beta2**self.t)
            update = self.lr * mhat / (np.sqrt(vhat) + self.eps)
            if k == "out.b":
                model.b_out -= float(update)
            else:
                params[k] -= update
