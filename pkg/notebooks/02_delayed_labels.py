"""
Processing a stream when labels arrive late
===========================================

Compare the four processing frameworks on one stream with an exact drift
signal, first with almost immediate labels and then with a long delay.
"""

# %%
import numpy as np

from delaystream import DelayPolicy, StreamConfig, generate_stream, run

stream = generate_stream(StreamConfig(n_drifts=5, seed=0))
setups = [("CR", None), ("TR_S", "ORACLE"), ("TR_U", "ORACLE"), ("TR_P", "ORACLE")]


def describe(logs):
    bac = np.array([log.bac for log in logs])
    req = sum(log.label_requested for log in logs)
    trained = sum(log.trained for log in logs)
    return f"BAC {bac.mean():.3f}  labels requested {req:3d}  trained {trained:3d}"


# %%
for delta in (1, 60):
    print(f"-- delay {delta}")
    for fw, det in setups:
        logs = run(fw, stream, "GNB", det, DelayPolicy(delta=delta), seed=0)
        print(f"{fw:5s} {describe(logs)}")

# %%
# Where does a triggered framework pay for labels, and when does it get to use them?
logs = run("TR_P", stream, "MLP", "ORACLE", DelayPolicy(delta=10), seed=0)
print("requested at:", [log.chunk_index for log in logs if log.label_requested])
print("trained at:  ", [log.chunk_index for log in logs if log.trained])

# %%
# Around a drift the score falls and only recovers once the delayed labels land.
bac = np.array([log.bac for log in logs])
print(np.round(bac[45:75], 2))

# %%
# Delays can also be random: uniform between two bounds.
logs = run("CR", stream, "HT", None, DelayPolicy("uniform", low=5, high=30), seed=3)
print(describe(logs))
