#!/usr/bin/env python3
"""Train the small MNIST network shipped in data/.

Input: mnist_5k.csv.gz (784 pixels, then the label, per row), as bundled in the
mlxtend wheel. Images are downscaled to 14x14 by 2x2 averaging and rounded to
integers in [0, 255]. Rows are shuffled with a fixed seed; the first 4000
train, the rest form the test set.

Writes data/mnist14_net.json, data/mnist14_test_images.idx and
data/mnist14_test_labels.idx (labels stored 1-based, class k+1 = digit k).
"""
import argparse
import gzip
import io
import json
import struct
import zipfile
from pathlib import Path

import numpy as np
import torch
from torch import nn


def load_csv(path):
    raw = Path(path).read_bytes()
    if path.endswith(".whl"):
        with zipfile.ZipFile(io.BytesIO(raw)) as z:
            name = next(n for n in z.namelist() if n.endswith("mnist_5k.csv.gz"))
            raw = z.read(name)
    rows = np.loadtxt(io.StringIO(gzip.decompress(raw).decode()), delimiter=",")
    rows = rows[np.random.RandomState(0).permutation(len(rows))]
    labels = rows[:, -1].astype(np.int64)
    pixels = rows[:, :-1].reshape(-1, 28, 28)
    small = pixels.reshape(-1, 14, 2, 14, 2).mean(axis=(2, 4))
    return np.rint(small).astype(np.uint8), labels


class Net(nn.Module):
    def __init__(self):
        super().__init__()
        self.conv = nn.Conv2d(1, 2, 5)
        self.pool = nn.MaxPool2d(2)
        self.fc = nn.Linear(50, 10)

    def forward(self, x):
        x = self.pool(torch.relu(self.conv(x)))
        # Flatten in (row, column, channel) order, the verifier's layout.
        return self.fc(x.permute(0, 2, 3, 1).flatten(1))


def random_shift(x, gen):
    """Zero-padded shift of every image by an independent offset in [-1, 1]^2."""
    out = torch.zeros_like(x)
    offsets = torch.randint(-1, 2, (len(x), 2), generator=gen)
    for i, (tx, ty) in enumerate(offsets.tolist()):
        src = x[i, 0, max(tx, 0):14 + min(tx, 0), max(ty, 0):14 + min(ty, 0)]
        out[i, 0, max(-tx, 0):14 + min(-tx, 0), max(-ty, 0):14 + min(-ty, 0)] = src
    return out


def export(net):
    k = net.conv.weight.detach().numpy()  # [k][c_in][p][q]
    fc = net.fc.weight.detach().numpy()
    return {
        "input_shape": [14, 14, 1],
        "class_count": 10,
        "layers": [
            {"type": "conv", "kernels": k.transpose(0, 2, 3, 1).tolist(),
             "biases": net.conv.bias.detach().numpy().tolist(), "pool": [2, 2]},
            {"type": "fc", "weights": fc.tolist(), "bias": net.fc.bias.detach().numpy().tolist(),
             "activation": "argmax"},
        ],
    }


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 14, 14))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("source", help="mnist_5k.csv.gz or the mlxtend wheel")
    ap.add_argument("--out", default="data")
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--no-augment", action="store_true", help="train without random 1-pixel shifts")
    ap.add_argument("--test-count", type=int, default=100)
    args = ap.parse_args()

    torch.manual_seed(0)
    torch.use_deterministic_algorithms(True)
    images, labels = load_csv(args.source)
    x = torch.tensor(images[:, None] / 255.0, dtype=torch.float32)
    y = torch.tensor(labels)
    xtr, ytr, xte, yte = x[:4000], y[:4000], x[4000:], y[4000:]

    gen = torch.Generator().manual_seed(1)
    net = Net()
    opt = torch.optim.Adam(net.parameters(), lr=3e-3)
    for epoch in range(args.epochs):
        perm = torch.randperm(len(xtr))
        for i in range(0, len(xtr), 64):
            idx = perm[i:i + 64]
            batch = xtr[idx] if args.no_augment else random_shift(xtr[idx], gen)
            opt.zero_grad()
            loss = nn.functional.cross_entropy(net(batch), ytr[idx])
            loss.backward()
            opt.step()
    with torch.no_grad():
        acc = (net(xte).argmax(1) == yte).float().mean().item()
    print(f"test accuracy {acc:.3f}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "mnist14_net.json").write_text(json.dumps(export(net)) + "\n")
    n = args.test_count
    write_idx_images(out / "mnist14_test_images.idx", images[4000:4000 + n])
    write_idx_labels(out / "mnist14_test_labels.idx", labels[4000:4000 + n] + 1)


if __name__ == "__main__":
    main()
