"""Trains the toy 64-32-10 digit classifier shipped in data/digits_mlp.json.

The C++ side replays inference from the stored float32 weights, so this only
needs rerunning if the model itself should change.
"""
import json
import sys

import numpy as np
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split
from sklearn.neural_network import MLPClassifier


def f32_list(a):
    return [float(v) for v in np.asarray(a, dtype=np.float32).ravel()]


def main(out_path):
    digits = load_digits()
    x = (digits.data / 16.0).astype(np.float32)
    y = digits.target
    x_train, x_test, y_train, y_test = train_test_split(x, y, test_size=0.2, random_state=0, stratify=y)
    clf = MLPClassifier(hidden_layer_sizes=(32,), activation="relu", max_iter=600, random_state=0)
    clf.fit(x_train, y_train)
    doc = {
        "name": "digits-mlp-64-32-10",
        "layers": [
            {"in": 64, "out": 32, "relu": True,
             "weights": f32_list(clf.coefs_[0].T), "bias": f32_list(clf.intercepts_[0])},
            {"in": 32, "out": 10, "relu": False,
             "weights": f32_list(clf.coefs_[1].T), "bias": f32_list(clf.intercepts_[1])},
        ],
        "test": {"features": [f32_list(r) for r in x_test], "labels": [int(v) for v in y_test]},
        "sklearn_test_accuracy": float(clf.score(x_test, y_test)),
    }
    with open(out_path, "w") as f:
        json.dump(doc, f, separators=(",", ":"))
    print(f"wrote {out_path}: test accuracy {doc['sklearn_test_accuracy']:.4f}, {len(y_test)} samples")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/digits_mlp.json")
