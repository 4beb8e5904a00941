"""Scikit-learn style front end.

Wraps model construction, training and inference in an estimator with the
usual fit/predict/predict_proba surface and get_params/set_params
semantics, so the detector drops into pipelines, grid searches and
cross-validation like any other classifier.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .inference import assemble_shots, predict_video
from .model import WINDOW, build_model, load_weights, save_weights
from .training import TrainConfig, predict_centers, train


class ShotBoundaryDetector(BaseEstimator, ClassifierMixin):
    """Binary classifier over 10-frame snippets, fully convolutional in time.

    ``X`` is ``(n, 10, 64, 64, 3)`` float in [0, 1] (a flattened
    ``(n, 122880)`` view is also accepted); ``y`` holds center labels
    where 0 means the center frame pair crosses a transition and 1 means
    same shot. Whole videos of any length are handled by
    :meth:`predict_video` and :meth:`detect`.

    Parameters
    ----------
    learning_rate, batch_size, epochs, eval_fraction:
        Passed through to the training loop; eval_fraction holds out a
        seeded slice per fit for the training history.
    random_state:
        Seeds both initialization and the data order.
    chunk_frames:
        Window length for chunked video inference.
    """

    def __init__(
        self,
        learning_rate=0.02,
        batch_size=32,
        epochs=30,
        eval_fraction=0.0,
        random_state=0,
        chunk_frames=100,
    ):
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.eval_fraction = eval_fraction
        self.random_state = random_state
        self.chunk_frames = chunk_frames

    _SNIPPET_SHAPE = (WINDOW, 64, 64, 3)

    def _check_x(self, X):
        X = np.asarray(X)
        flat = int(np.prod(self._SNIPPET_SHAPE))
        if X.ndim == 2 and X.shape[1] == flat:
            X = X.reshape((X.shape[0],) + self._SNIPPET_SHAPE)
        if X.ndim != 5 or X.shape[1:] != self._SNIPPET_SHAPE:
            raise ValueError(
                f"X must be (n, {WINDOW}, 64, 64, 3) or (n, {flat}), got {X.shape}"
            )
        if X.dtype not in (np.float32, np.float64):
            X = X.astype(np.float32)
        return X

    def fit(self, X, y):
        X = self._check_x(X)
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise ValueError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("y must contain center labels in {0, 1}")
        config = TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.random_state,
            eval_fraction=self.eval_fraction,
        )
        params = build_model(self.random_state)
        self.params_, self.history_ = train(params, (X, y.astype(np.uint8)), config)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = int(np.prod(self._SNIPPET_SHAPE))
        return self

    def predict(self, X):
        """Center labels: 1 = same shot, 0 = transition at the center pair."""
        check_is_fitted(self, "params_")
        labels, _ = predict_centers(self.params_, self._check_x(X), self.batch_size)
        return labels

    def predict_proba(self, X):
        """Column order follows ``classes_``: [p(label 0), p(label 1)]."""
        check_is_fitted(self, "params_")
        _, probs = predict_centers(self.params_, self._check_x(X), self.batch_size)
        return probs[:, ::-1]  # (p_same, p_transition) -> (p_transition, p_same)

    def predict_video(self, frames, threshold=None):
        """Per-frame labels for a whole video; see inference.predict_video."""
        check_is_fitted(self, "params_")
        return predict_video(
            self.params_, frames, chunk_frames=self.chunk_frames, threshold=threshold
        )

    def detect(self, frames, threshold=None):
        """Shots and transition events for a whole video."""
        return assemble_shots(self.predict_video(frames, threshold))

    def save_weights(self, sink):
        check_is_fitted(self, "params_")
        save_weights(self.params_, sink)

    @classmethod
    def from_weights(cls, source, **params):
        """A fitted detector backed by a saved weight file."""
        detector = cls(**params)
        detector.params_ = load_weights(source)
        detector.history_ = []
        detector.classes_ = np.array([0, 1])
        detector.n_features_in_ = int(np.prod(cls._SNIPPET_SHAPE))
        return detector
