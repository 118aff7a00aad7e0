"""KPS1 sample files, missing-marker cleaning, and model persistence."""

import tempfile
from pathlib import Path

import numpy as np

from besn import (
    KeypointSequence,
    RunConfig,
    SyntheticSpec,
    clean_sequence,
    generate_synthetic,
    load_pipeline,
    read_sample,
    save_pipeline,
    train_pipeline,
    write_sample,
)

workdir = Path(tempfile.mkdtemp())

# KPS1 round trip with missing markers (quiet NaN)
frames = np.random.default_rng(1).uniform(-1, 1, size=(50, 126)).astype(np.float32)
frames[10:20, 63:] = np.nan  # right-hand block lost for 10 frames
path = workdir / "clip.kps"
write_sample(path, KeypointSequence(frames=frames, label="hello", sample_id="clip"))
back = read_sample(path, label="hello")
print(f"KPS1 round trip bit-exact: {back.frames.tobytes() == frames.tobytes()}")
print(f"missing markers on disk: {int(np.isnan(back.frames).sum())}")

cleaned = clean_sequence(back)
print(f"after cleaning: finite = {bool(np.isfinite(cleaned.frames).all())}")

# model persistence: save, reload, identical predictions
dataset = generate_synthetic(SyntheticSpec(n_classes=4, samples_per_class=12))
pipeline, _ = train_pipeline(dataset, RunConfig(units=40, seed=5))
model_path = workdir / "model.besn"
save_pipeline(model_path, pipeline)
reloaded = load_pipeline(model_path)

labels_a, _ = pipeline.predict_sequences(dataset.test)
labels_b, _ = reloaded.predict_sequences(dataset.test)
print(f"model file: {model_path.stat().st_size} bytes; "
      f"predictions identical after reload: {labels_a == labels_b}")
