"""Temperature sweep: one balanced-distillation student per temperature.

Temperature controls how soft the teacher's targets are. The sweep retrains
the student from the same seed for each value and tabulates test accuracy.
"""

from longtail_kd import (
    BKDConfig,
    ImbalanceProfile,
    KDConfig,
    LrSchedule,
    TrainConfig,
    make_longtail_counts,
    synth_gaussian_mixture,
    temperature_sweep,
    train_teacher,
)

counts = make_longtail_counts(ImbalanceProfile("exponential", 100, n_max=300, num_classes=6))
train, test = synth_gaussian_mixture(counts, 12, separation=3.0, seed=42, per_class_test=80)

cfg = TrainConfig(
    loss="bkd", epochs=60, batch_size=64, hidden_dims=(48,),
    schedule=LrSchedule("cosine", 0.02), seed=0,
    kd=KDConfig(alpha=0.5, temperature=2.0),
    bkd=BKDConfig(beta=0.9999, temperature=2.0),
)

teacher, tlog = train_teacher(train, test, cfg)
print(f"teacher accuracy: {tlog[-1].acc_all:.3f}")

rows = temperature_sweep(train, test, teacher, cfg, temps=[1.0, 2.0, 3.0, 4.0])
print("\n T   student accuracy")
for T, acc in rows:
    bar = "#" * int(40 * acc)
    print(f"{T:3.1f}  {acc:.3f}  {bar}")
