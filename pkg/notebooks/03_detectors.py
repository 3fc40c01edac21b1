"""
Drift detectors side by side
============================

DDM watches the error stream, OCDD watches the feature distribution and MD3
watches the share of samples close to a linear decision boundary.
"""

# %%
import numpy as np

from delaystream import DDM, MD3, OCDD, Decision, StreamConfig, generate_stream

rng = np.random.default_rng(7)
bits = np.concatenate([rng.random(5000) < 0.1, rng.random(5000) < 0.5]).astype(int)
ddm = DDM()
decisions = [ddm.update(b) for b in bits]
first = next(k for k, d in enumerate(decisions) if d is Decision.DRIFT)
print("error rate jumps at 5000, DDM fires at", first)

# %%
stream = generate_stream(StreamConfig(n_drifts=5, seed=0))
ocdd = OCDD()
fired = [c.index for c in stream if ocdd.detect_unsupervised(c.X) is Decision.DRIFT]
print("true drifts:", stream.drift_chunks)
print("OCDD alarms:", fired)

# %%
# MD3 needs labels to calibrate, then monitors the margin density without them.
md3 = MD3()
md3.calibrate(stream[0].X, stream[0].y)
ref, sigma = md3.state.md_ref, md3.state.sigma_ref
md = np.array([md3.margin_density(c.X) for c in stream])
print(f"reference density {ref:.3f}, alarm band +/- {3 * sigma:.3f}")
for d in stream.drift_chunks:
    print(f"chunk {d}: density {md[d]:.3f} (shift {md[d] - ref:+.3f})")
