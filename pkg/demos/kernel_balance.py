"""Kernelize the pipeline on the balance-scale dataset.

The class is decided by comparing the products left-weight*left-distance and
right-weight*right-distance, a quadratic function of the four features, so a
degree-2 polynomial kernel separates what no linear projection can.
"""
import numpy as np

from ssdr import (KernelSpec, KnnIndex, LearnerSpec, SplitSpec, embed, fit,
                  generate_balance, knn_classify, kpca_embed, kpca_trick_fit,
                  split)

data = generate_balance()
splits = SplitSpec(labeled=100, seed=0, realizations=10)
spec = LearnerSpec(base="lfda", unlabel="heat", gamma=0.001, dim=4)

scores = {"linear": [], "poly-2": []}
for r in range(splits.realizations):
    labeled, unlabeled, _ = split(data, splits, r)
    train = data.with_labels_hidden(labeled)

    model = fit(train, spec)
    Z = embed(model, data.X)
    scores["linear"].append(float(
        (knn_classify(KnnIndex(Z[:, labeled], data.labels[labeled], 1),
                      Z[:, unlabeled]) == data.labels[unlabeled]).mean()))

    kmap, kmodel = kpca_trick_fit(train, KernelSpec("polynomial", 2), spec)
    Z = kpca_embed(kmap, kmodel, data.X)
    scores["poly-2"].append(float(
        (knn_classify(KnnIndex(Z[:, labeled], data.labels[labeled], 1),
                      Z[:, unlabeled]) == data.labels[unlabeled]).mean()))

for name, acc in scores.items():
    print(f"{name:8s} mean accuracy {np.mean(acc):.4f} over "
          f"{splits.realizations} label draws")
