"""Forward + backward passes and per-sequence feature pooling.

The same reservoir consumes a sequence and its time reversal; the two
trajectories are aligned by original frame index and reduced to one feature
vector (forward block first, backward block second).
"""

import numpy as np

from besn import ReservoirConfig, aggregate, init_weights, run_bidirectional

config = ReservoirConfig(n_units=100, seed=7)
weights = init_weights(config, input_dim=8)

rng = np.random.default_rng(3)
sequence = rng.uniform(-1, 1, size=(60, 8))
bi = run_bidirectional(weights, sequence, config)  # shared weights, per the architecture
print(f"forward trajectory {bi.forward.shape}, backward trajectory {bi.backward.shape}")
print("backward[t] aligns with input frame t (already re-reversed)")

for mode in ("final", "mean", "mean_plus_final"):
    features = aggregate(bi, mode)
    print(f"aggregation={mode:<16} feature width {features.shape[0]}")

final = aggregate(bi, "final")
print("\nfinal = forward state after the last frame (+) backward state after")
print("consuming the whole reversed sequence:")
print("  forward block matches bi.forward[-1]: ",
      bool(np.array_equal(final[:100], bi.forward[-1])))
print("  backward block matches bi.backward[0]:",
      bool(np.array_equal(final[100:], bi.backward[0])))

palindrome = np.vstack([sequence[:30], sequence[:30][::-1]])
bi_pal = run_bidirectional(weights, palindrome, config)
print("\npalindromic input -> identical forward/backward trajectories:",
      bool(np.array_equal(bi_pal.forward, bi_pal.backward[::-1])))
