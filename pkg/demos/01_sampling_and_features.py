"""Frame sampling and temporal features.

Every segment contributes its three consecutive middle frames; their
embeddings concatenate (in temporal order) into one feature used for
clustering. A uniform sampler is available as the spread-out baseline.
"""

import numpy as np

from semaug.frame_sampler import (
    middle_frame_indices,
    temporal_concat,
    uniform_sample_indices,
)

print("middle triples for a few segment lengths:")
for n in (3, 7, 10, 31):
    print(f"  N={n:>2} frames -> indices {middle_frame_indices(n)}")

print("\nuniform sampling spreads across the whole segment instead:")
for n, k in ((10, 3), (31, 5)):
    print(f"  N={n}, k={k} -> {uniform_sample_indices(n, k)}")

print("\nconcatenating three d=4 frame embeddings keeps temporal order:")
rng = np.random.default_rng(0)
frames = [rng.integers(0, 10, size=4).astype(float) for _ in range(3)]
feature = temporal_concat(frames)
for i, f in enumerate(frames):
    print(f"  frame {i}: {f}")
print(f"  temporal feature ({feature.shape[0]} dims): {feature}")
print(f"  slice [4:8] recovers the middle frame: {feature[4:8]}")
