"""K-means diversity batching versus random batching.

Clustering the temporal features and drawing each batch round-robin from
distinct clusters yields batches whose members are farther apart than a
uniformly shuffled plan - cleaner negatives for the contrastive loss.
"""

import numpy as np

from semaug.diversity_batcher import (
    build_diverse_batches,
    build_random_batches,
    kmeans_fit,
    mean_pairwise_distance,
)

rng = np.random.default_rng(7)
centers = [(0, 0), (12, 0), (0, 12), (12, 12)]
features = np.vstack(
    [rng.normal(loc=c, scale=1.0, size=(25, 2)) for c in centers]
)

model = kmeans_fit(features, k=4, seed=0)
print(f"k-means: k=4, inertia {model.inertia:.1f}, "
      f"cluster sizes {np.bincount(model.assignments)}")

diverse = build_diverse_batches(model, batch_size=4, seed=1)
random_plan = build_random_batches(features.shape[0], batch_size=4, seed=1)

print("\nfirst three diverse batches (cluster per row in brackets):")
for rows, clusters in list(zip(diverse.batches, diverse.clusters))[:3]:
    print(f"  rows {rows} clusters {clusters}")


def plan_spread(plan):
    return np.mean(
        [mean_pairwise_distance(features, b) for b in plan.batches if len(b) >= 2]
    )


print(f"\nmean within-batch pairwise distance:")
print(f"  diverse plan: {plan_spread(diverse):.3f}")
print(f"  random plan:  {plan_spread(random_plan):.3f}")
