"""
Synthetic streams with sudden and gradual drift
===============================================

Build a short stream, look at where the concepts change, and check that a
classifier fitted on one concept loses accuracy on the next one.
"""

# %%
import numpy as np

from delaystream import GaussianNB, StreamConfig, balanced_accuracy, drift_points, generate_stream

cfg = StreamConfig(n_chunks=60, chunk_size=250, n_drifts=2, seed=1)
stream = generate_stream(cfg)
print("drift chunks:", stream.drift_chunks)
print("same as the closed-form placement:", drift_points(cfg))

# %%
# Each chunk carries its concept id; it steps up by one at every drift.
ids = np.array([c.concept_id for c in stream])
print(ids)

# %%
# Fit on the first concept, then score every chunk.
clf = GaussianNB().fit_incremental(stream[0].X, stream[0].y)
scores = np.array([balanced_accuracy(c.y, clf.predict(c.X)) for c in stream])
for cid in np.unique(ids):
    print(f"concept {cid}: mean BAC {scores[ids == cid].mean():.3f}")

# %%
# A gradual drift mixes old and new concepts sample by sample.
g = generate_stream(StreamConfig(n_chunks=60, n_drifts=1, drift_dynamic="gradual", gradual_width=10, seed=1))
d = g.drift_chunks[0]
share_new = [float(np.mean(g[i].sample_concepts == 1)) for i in range(d - 6, d + 7)]
print(np.round(share_new, 2))
