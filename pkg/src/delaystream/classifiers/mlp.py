import numpy as np
from scipy.special import expit

from .base import IncrementalClassifier


def init_params(rng, n_features, n_hidden):
    """Glorot-uniform weights and biases for a (n_features, n_hidden, 1) network."""
    params = []
    for fan_in, fan_out in ((n_features, n_hidden), (n_hidden, 1)):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        params.append(rng.uniform(-bound, bound, size=fan_out))
    return params


def forward(params, X):
    W1, b1, W2, b2 = params
    a1 = X @ W1 + b1
    h = np.maximum(a1, 0.0)
    z = (h @ W2 + b2)[:, 0]
    return a1, h, z


def loss_and_grad(params, X, y, alpha):
    """Mean logistic loss plus L2 penalty on the weights, and its gradient.

    The penalty is ``alpha / (2 n) * (||W1||^2 + ||W2||^2)`` with ``n`` the
    batch size.

    Returns:
        (loss, [dW1, db1, dW2, db2])
    """
    W1, b1, W2, b2 = params
    n = len(X)
    a1, h, z = forward(params, X)
    loss = np.mean(np.logaddexp(0.0, z) - y * z)
    loss += 0.5 * alpha * ((W1**2).sum() + (W2**2).sum()) / n
    dz = (expit(z) - y) / n
    dW2 = h.T @ dz[:, None] + alpha * W2 / n
    db2 = np.array([dz.sum()])
    dh = (dz[:, None] @ W2.T) * (a1 > 0)
    dW1 = X.T @ dh + alpha * W1 / n
    db1 = dh.sum(axis=0)
    return loss, [dW1, db1, dW2, db2]


class MLP(IncrementalClassifier):
    """One-hidden-layer rectifier network with a logistic output, trained by Adam.

    Each epoch is one shuffled pass over the batch in mini-batches of
    ``batch_size``. Optimizer moments persist across ``fit_incremental`` calls.
    """

    kind = "MLP"
    single_pass = False

    def __init__(self, hidden=100, learning_rate=1e-3, alpha=1e-4, batch_size=200,
                 beta_1=0.9, beta_2=0.999, epsilon=1e-8, seed=0):
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.alpha = alpha
        self.batch_size = batch_size
        self.beta_1 = beta_1
        self.beta_2 = beta_2
        self.epsilon = epsilon
        super().__init__(seed=seed)

    def get_params(self):
        return {
            "hidden": self.hidden, "learning_rate": self.learning_rate, "alpha": self.alpha,
            "batch_size": self.batch_size, "beta_1": self.beta_1, "beta_2": self.beta_2,
            "epsilon": self.epsilon, "seed": self.seed,
        }

    def _init_state(self):
        self._rng = np.random.default_rng(self.seed)
        self.params_ = None
        self._m = self._v = None
        self._t = 0

    def _fit(self, X, y, epochs):
        if self.params_ is None:
            self.params_ = init_params(self._rng, X.shape[1], self.hidden)
            self._m = [np.zeros_like(p) for p in self.params_]
            self._v = [np.zeros_like(p) for p in self.params_]
        n = len(X)
        step = max(1, min(self.batch_size, n))
        yf = y.astype(float)
        for _ in range(epochs):
            order = self._rng.permutation(n)
            for start in range(0, n, step):
                idx = order[start:start + step]
                _, grads = loss_and_grad(self.params_, X[idx], yf[idx], self.alpha)
                self._adam_step(grads)

    def _adam_step(self, grads):
        self._t += 1
        b1, b2 = self.beta_1, self.beta_2
        lr = self.learning_rate * np.sqrt(1 - b2**self._t) / (1 - b1**self._t)
        for p, g, m, v in zip(self.params_, grads, self._m, self._v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= lr * m / (np.sqrt(v) + self.epsilon)

    def _score(self, X):
        return expit(forward(self.params_, X)[2])
