#!/usr/bin/env python3
"""Brute-force matmul check of the small projection / LoRA examples.

Row-vector convention: y = x @ (W0 + (alpha / r) * B @ A)."""
import numpy as np

W0 = np.eye(2)
B = np.array([[1.0], [0.0]])
A = np.array([[0.0, 1.0]])
W = W0 + (1.0 / 1.0) * B @ A
y = np.array([1.0, 1.0]) @ W
print("W =", W.tolist(), "y_raw =", y.tolist(), "y =", (y / np.linalg.norm(y)).tolist())

B = np.array([[1.0], [1.0]])
A = np.array([[1.0, 0.0]])
print("delta =", ((2.0 / 1.0) * B @ A).tolist())

# k = 2 InfoNCE closed form: matched pairs identical, cross pairs orthogonal.
tau = 0.07
print("infonce k=2: %.17g" % np.log1p(np.exp(-1.0 / tau)))
