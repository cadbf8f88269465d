import math

import numpy as np
import pytest

from longtail_kd.data import synth_gaussian_mixture
from longtail_kd.losses import BKDConfig, KDConfig
from longtail_kd.mlp import LrSchedule, forward, params_to_bytes
from longtail_kd.pipeline import (
    MetricRow,
    TrainConfig,
    config_digest,
    metrics_from_csv,
    metrics_to_csv,
    read_checkpoint,
    train_student,
    train_teacher,
)
from longtail_kd.weights import effective_number_weights


def small_cfg(**overrides):
    base = dict(
        loss="ce",
        epochs=8,
        batch_size=16,
        hidden_dims=(12,),
        schedule=LrSchedule("cosine", 0.05),
        seed=3,
        kd=KDConfig(alpha=0.5, temperature=2.0),
        bkd=BKDConfig(beta=0.999, temperature=2.0),
    )
    base.update(overrides)
    return TrainConfig(**base)


def two_class_separable(seed=17):
    return synth_gaussian_mixture([120, 80], 4, separation=8.0, seed=seed, per_class_test=50)


def nearest_mean_accuracy(train, test):
    means = np.vstack(
        [train.features[train.labels == c].mean(axis=0) for c in range(train.num_classes)]
    )
    d = ((test.features[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    return float((d.argmin(axis=1) == test.labels).mean())


class TestTrainTeacher:
    def test_learns_separable_data(self):
        train, test = two_class_separable()
        assert nearest_mean_accuracy(train, test) >= 0.95  # oracle baseline
        _, log = train_teacher(train, test, small_cfg(epochs=50))
        assert log[-1].loss < log[0].loss
        assert log[-1].acc_all >= 0.95

    def test_zero_epochs_returns_initialized_params(self):
        from longtail_kd.mlp import init_mlp

        train, test = two_class_separable()
        cfg = small_cfg(epochs=0)
        params, log = train_teacher(train, test, cfg)
        assert log == []
        expected = init_mlp((train.dimension, *cfg.hidden_dims, train.num_classes), cfg.seed)
        for a, b in zip(params.weights, expected.weights):
            np.testing.assert_array_equal(a, b)

    def test_same_seed_identical_metric_log(self):
        train, test = two_class_separable()
        _, a = train_teacher(train, test, small_cfg())
        _, b = train_teacher(train, test, small_cfg())
        assert metrics_to_csv(a) == metrics_to_csv(b)

    def test_all_losses_finite(self):
        train, test = two_class_separable()
        _, log = train_teacher(train, test, small_cfg())
        assert all(math.isfinite(r.loss) for r in log)

    def test_divergence_aborts_with_diagnostic(self):
        train, test = two_class_separable()
        cfg = small_cfg(schedule=LrSchedule("constant", 1e30), epochs=30)
        with np.errstate(over="ignore", invalid="ignore"):  # overflow is the point
            with pytest.raises(RuntimeError, match="diverged"):
                train_teacher(train, test, cfg)

    def test_dimension_mismatch_rejected(self):
        train, _ = two_class_separable(seed=1)
        _, other_test = synth_gaussian_mixture([10, 10], 6, 1.0, seed=2, per_class_test=5)
        with pytest.raises(ValueError):
            train_teacher(train, other_test, small_cfg())


class TestTrainStudent:
    def test_kd_alpha_one_matches_ce_teacher_run(self):
        train, test = two_class_separable()
        teacher, _ = train_teacher(train, test, small_cfg(epochs=4))
        ce_steps, kd_steps = [], []
        cfg_ce = small_cfg(shuffle=False)
        _, ce_log = train_teacher(train, test, cfg_ce, on_batch=lambda e, b, v: ce_steps.append(v))
        cfg_kd = small_cfg(loss="kd", kd=KDConfig(alpha=1.0, temperature=3.0), shuffle=False)
        _, kd_log = train_student(
            train, test, teacher, cfg_kd, on_batch=lambda e, b, v: kd_steps.append(v)
        )
        assert len(ce_steps) == len(kd_steps)
        assert all(abs(a - b) < 1e-12 for a, b in zip(ce_steps, kd_steps))
        assert metrics_to_csv(ce_log) == metrics_to_csv(kd_log)

    def test_bkd_on_balanced_counts_is_ce_plus_scaled_kl(self):
        # constant class counts -> constant weights -> the distillation term
        # must equal T^2 * KL(teacher || student at T) on every step
        train, test = synth_gaussian_mixture([60, 60], 4, 3.0, seed=23, per_class_test=20)
        cfg = small_cfg(loss="bkd", shuffle=False, epochs=2)
        teacher, _ = train_teacher(train, test, small_cfg(epochs=3))

        from longtail_kd.losses import bkd_loss_batch, ce_loss_batch, softmax_rows

        recorded = []

        def check(epoch, batch, value):
            recorded.append(value)

        train_student(train, test, teacher, cfg, on_batch=check)

        # replay the first batch by hand (shuffle off, fresh student)
        from longtail_kd.mlp import init_mlp

        student = init_mlp((4, *cfg.hidden_dims, 2), cfg.seed)
        X = train.features[: cfg.batch_size]
        ys = train.labels[: cfg.batch_size]
        logits, _ = forward(student, X)
        t_logits, _ = forward(teacher, X)
        phat = softmax_rows(t_logits, cfg.bkd.temperature)
        w = effective_number_weights(train.class_counts, cfg.bkd.beta)
        bkd_values, _ = bkd_loss_batch(logits, phat, ys, w, cfg.bkd)
        ce_values, _ = ce_loss_batch(logits, ys)
        T = cfg.bkd.temperature
        log_pT = np.log(softmax_rows(logits, T))
        kl = (phat * (np.log(phat) - log_pT)).sum(axis=1)
        np.testing.assert_allclose(bkd_values, ce_values + T * T * kl, atol=1e-10)
        assert abs(recorded[0] - float(bkd_values.mean())) < 1e-12

    def test_teacher_parameters_untouched(self):
        train, test = two_class_separable()
        teacher, _ = train_teacher(train, test, small_cfg(epochs=3))
        before = params_to_bytes(teacher)
        train_student(train, test, teacher, small_cfg(loss="bkd", epochs=4))
        assert params_to_bytes(teacher) == before

    def test_defer_epoch_switches_loss(self):
        train, test = two_class_separable()
        teacher, _ = train_teacher(train, test, small_cfg(epochs=3))
        cfg = small_cfg(loss="bkd", epochs=4, defer_epoch=2, shuffle=False)
        per_epoch_first_batch = {}

        def record(epoch, batch, value):
            if batch == 0:
                per_epoch_first_batch[epoch] = value

        train_student(train, test, teacher, cfg, on_batch=record)

        # identical to a pure-kd run until the switch, different from it after
        kd_first_batch = {}
        cfg_kd = small_cfg(loss="kd", epochs=4, shuffle=False)
        train_student(
            train, test, teacher, cfg_kd,
            on_batch=lambda e, b, v: kd_first_batch.__setitem__(e, v) if b == 0 else None,
        )
        assert per_epoch_first_batch[0] == kd_first_batch[0]
        assert per_epoch_first_batch[1] == kd_first_batch[1]
        assert per_epoch_first_batch[2] != kd_first_batch[2]

    def test_defer_epoch_validation(self):
        with pytest.raises(ValueError):
            small_cfg(loss="kd", defer_epoch=2)
        with pytest.raises(ValueError):
            small_cfg(loss="bkd", defer_epoch=8)

    def test_teacher_class_count_mismatch_rejected(self):
        train, test = two_class_separable()
        wrong_train, wrong_test = synth_gaussian_mixture([10, 10, 10], 4, 2.0, seed=5, per_class_test=5)
        teacher, _ = train_teacher(wrong_train, wrong_test, small_cfg(epochs=1))
        with pytest.raises(ValueError, match="classes"):
            train_student(train, test, teacher, small_cfg(loss="kd"))

    def test_missing_teacher_rejected(self):
        train, test = two_class_separable()
        with pytest.raises(ValueError):
            train_student(train, test, None, small_cfg(loss="kd"))

    def test_weights_function_of_train_counts_only(self):
        train, _ = two_class_separable()
        w1 = effective_number_weights(train.class_counts, 0.999)
        w2 = effective_number_weights(train.class_counts, 0.999)
        np.testing.assert_array_equal(w1, w2)


class TestCheckpointResume:
    def test_mid_run_resume_reproduces_uninterrupted_run(self, tmp_path):
        train, test = two_class_separable()
        cfg = small_cfg(epochs=8)
        full_params, full_log = train_teacher(train, test, cfg)

        ckpt = str(tmp_path / "mid.ckpt")
        train_teacher(train, test, cfg, out_ckpt=ckpt, stop_after_epoch=4)
        resumed_params, resumed_log = train_teacher(train, test, cfg, resume_from=ckpt)

        assert params_to_bytes(resumed_params) == params_to_bytes(full_params)
        assert metrics_to_csv(resumed_log) == metrics_to_csv(full_log)

    def test_student_mid_run_resume(self, tmp_path):
        train, test = two_class_separable()
        teacher, _ = train_teacher(train, test, small_cfg(epochs=3))
        cfg = small_cfg(loss="bkd", epochs=6)
        full_params, _ = train_student(train, test, teacher, cfg)
        ckpt = str(tmp_path / "mid.ckpt")
        train_student(train, test, teacher, cfg, out_ckpt=ckpt, stop_after_epoch=3)
        resumed_params, _ = train_student(train, test, teacher, cfg, resume_from=ckpt)
        assert params_to_bytes(resumed_params) == params_to_bytes(full_params)

    def test_checkpoint_after_init_resumes_to_initial_state(self, tmp_path):
        train, test = two_class_separable()
        cfg = small_cfg(epochs=5)
        ckpt = str(tmp_path / "init.ckpt")
        params0, _ = train_teacher(train, test, cfg, out_ckpt=ckpt, stop_after_epoch=0)
        state = read_checkpoint(ckpt)
        assert state.epoch == 0
        assert params_to_bytes(state.params) == params_to_bytes(params0)

    def test_resume_from_missing_path(self):
        train, test = two_class_separable()
        with pytest.raises(FileNotFoundError):
            train_teacher(train, test, small_cfg(), resume_from="/nonexistent/x.ckpt")

    def test_resume_under_different_config_rejected(self, tmp_path):
        train, test = two_class_separable()
        ckpt = str(tmp_path / "a.ckpt")
        train_teacher(train, test, small_cfg(epochs=4), out_ckpt=ckpt, stop_after_epoch=2)
        with pytest.raises(ValueError, match="config"):
            train_teacher(train, test, small_cfg(epochs=4, seed=99), resume_from=ckpt)

    def test_corrupt_checkpoint_rejected(self, tmp_path):
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(b"ckpt-v1" + b"\x00" * 10)
        with pytest.raises(ValueError):
            read_checkpoint(str(bad))
        not_ckpt = tmp_path / "not.ckpt"
        not_ckpt.write_bytes(b"garbage")
        with pytest.raises(ValueError):
            read_checkpoint(str(not_ckpt))

    def test_checkpoint_write_is_atomic_replace(self, tmp_path):
        # the temp file must not survive a successful write
        train, test = two_class_separable()
        ckpt = str(tmp_path / "final.ckpt")
        train_teacher(train, test, small_cfg(epochs=2), out_ckpt=ckpt)
        assert (tmp_path / "final.ckpt").exists()
        assert not (tmp_path / "final.ckpt.tmp").exists()

    def test_digest_differs_across_configs(self):
        assert config_digest(small_cfg()) != config_digest(small_cfg(seed=4))
        assert config_digest(small_cfg()) == config_digest(small_cfg())


class TestMetricCsv:
    def test_round_trip(self):
        rows = [
            MetricRow(0, 1.5, 0.1, 0.5, 0.9, None, 0.1),
            MetricRow(1, 1.25, 0.09, 0.55, 0.91, 0.5, None),
        ]
        assert metrics_from_csv(metrics_to_csv(rows)) == rows

    def test_header_enforced(self):
        with pytest.raises(ValueError):
            metrics_from_csv("nope\n1,2,3\n")
