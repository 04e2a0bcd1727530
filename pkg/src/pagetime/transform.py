"""Manifest feature extraction as a scikit-learn transformer."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

FEATURE_NAMES = ("n_static", "m_domains", "o_js", "p_other", "total_kb", "avg_kb_per_request")


class ManifestFeatures(TransformerMixin, BaseEstimator):
    """Turn page manifests into a numeric matrix of page aggregates.

    Columns follow ``FEATURE_NAMES``. Stateless, so ``fit`` is a no-op.
    """

    def fit(self, X, y=None):
        self.n_features_out_ = len(FEATURE_NAMES)
        return self

    def transform(self, X):
        rows = []
        for manifest in X:
            agg = manifest.aggregates
            rows.append(
                [agg.n_static, agg.m_domains, agg.o_js, agg.p_other, agg.total_kb, agg.avg_kb_per_request]
            )
        return np.asarray(rows, dtype=float).reshape(-1, len(FEATURE_NAMES))

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FEATURE_NAMES, dtype=object)
