import numpy as np


class IncrementalClassifier:
    """Common surface of the incremental binary classifiers.

    A model that was never fitted is in *cold start*: ``predict`` returns class 0
    for every row and ``predict_score`` returns 0.0. Callers check ``is_fitted``
    to flag such predictions.

    Subclasses implement ``_init_state``, ``_fit`` and ``_score``.
    """

    kind = None
    single_pass = True  # ignores the ``epochs`` argument

    def __init__(self, seed=0):
        self.seed = seed
        self.reset()

    def reset(self):
        """Drop all learned state; hyperparameters and seed are kept."""
        self.n_features_in_ = None
        self.n_fits_ = 0
        self._init_state()
        return self

    @property
    def is_fitted(self):
        return self.n_fits_ > 0

    def _check_X(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"expected a 2-D feature matrix, got shape {X.shape}")
        if self.n_features_in_ is not None and X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"dimension mismatch: model has {self.n_features_in_} features, X has {X.shape[1]}"
            )
        return X

    def fit_incremental(self, X, y, epochs=1):
        """Update the model with one labelled batch.

        Args:
            X: feature matrix of shape (n_samples, n_features).
            y: labels in {0, 1}, one per row of ``X``.
            epochs: passes over the batch; single-pass learners ignore it.
        """
        X = self._check_X(X)
        y = np.asarray(y).astype(np.int64, copy=False)
        if y.ndim != 1 or len(y) != len(X):
            raise ValueError(f"dimension mismatch: X has {len(X)} rows, y has shape {y.shape}")
        if epochs < 1:
            raise ValueError(f"epochs must be positive, got {epochs}")
        if len(X) == 0:
            return self
        if self.n_features_in_ is None:
            self.n_features_in_ = X.shape[1]
        self._fit(X, y, 1 if self.single_pass else int(epochs))
        self.n_fits_ += 1
        return self

    def predict_score(self, X):
        """Class-1 score in [0, 1] for every row of ``X``."""
        X = self._check_X(X)
        if not self.is_fitted:
            return np.zeros(len(X))
        return self._score(X)

    def predict(self, X):
        return (self.predict_score(X) >= 0.5).astype(np.int64)

    def get_params(self):
        raise NotImplementedError

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({params})"
