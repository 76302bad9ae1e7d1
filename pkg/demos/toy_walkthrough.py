"""Walk through the core pipeline on a synthetic two-cluster problem.

Each class occupies two separate clusters along the x-axis, so a global
between/within class-scatter method (fda) collapses the classes, while the
locality-aware variants keep them apart.  A handful of labels plus the
unlabeled geometry is enough for the semi-supervised variant to recover the
discriminative direction.
"""
import numpy as np

from ssdr import (KnnIndex, LearnerSpec, SplitSpec, embed, fit,
                  generate_multimodal_toy, knn_classify, split)

data = generate_multimodal_toy("two-cluster", n_per_cluster=50, noise=0.5,
                               seed=0)
splits = SplitSpec(labeled=20, seed=0, realizations=1, per_class_labels=True)
labeled, unlabeled, _ = split(data, splits, realization=0)
train = data.with_labels_hidden(labeled)

print(f"{data.n} points, {len(labeled)} labeled, {len(unlabeled)} unlabeled")
print(f"{'learner':10s} {'accuracy':>8s}  first embedding axis")

for name, spec in [
    ("fda", LearnerSpec(base="fda", unlabel="none", gamma=0.0, dim=1)),
    ("lfda", LearnerSpec(base="lfda", unlabel="none", gamma=0.0, dim=1)),
    ("ss-lfda", LearnerSpec(base="lfda", unlabel="heat", gamma=1.0, dim=1)),
]:
    model = fit(train, spec)
    Z = embed(model, data.X)
    index = KnnIndex(Z[:, labeled], data.labels[labeled], k=1)
    predicted = knn_classify(index, Z[:, unlabeled])
    accuracy = float((predicted == data.labels[unlabeled]).mean())
    axis = model.A[0] / np.linalg.norm(model.A[0])
    print(f"{name:10s} {accuracy:8.3f}  [{axis[0]:+.3f}, {axis[1]:+.3f}]")

print("\nThe informative direction is the x-axis.  Because each class is"
      "\nbimodal along x, the global class means nearly coincide there and fda"
      "\nfalls back to the noisy y-axis; the locality-aware learners only"
      "\ncompare nearby same-class points and keep the x-axis.")
