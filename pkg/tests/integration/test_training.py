"""Integration tests for the PPO training loop"""

import numpy as np
import pytest

from src.passive_homing.models import PpoConfig, RunConfig
from src.passive_homing.ppo import PpoTrainer, train
from src.passive_homing.storage.checkpoints import load_checkpoint
from src.passive_homing.storage.reports import read_learning_curve


def tiny_config(**kwargs):
    return RunConfig(
        ppo=PpoConfig(
            total_batches=2,
            episodes_per_batch=2,
            episodes_per_minibatch=1,
            epochs_per_batch=1,
        ),
        master_seed=4,
        **kwargs,
    )


# Training Loop Tests


def test_train_writes_outputs(tmp_path):
    """Test a short run writes the curve and both checkpoints"""
    result = train(tiny_config(), tmp_path)

    assert len(result.rows) == 2
    assert [row.batch for row in result.rows] == [0, 1]
    assert result.best_checkpoint == tmp_path / "best.npz"
    assert result.final_checkpoint == tmp_path / "final.npz"
    assert read_learning_curve(tmp_path / "learning_curve.csv") == result.rows

    final = load_checkpoint(result.final_checkpoint)
    assert final.meta["batch_index"] == 1
    assert final.meta["master_seed"] == 4


def test_train_rows_are_finite():
    """Test learning-curve statistics are finite and ordered"""
    result = train(tiny_config())
    for row in result.rows:
        assert np.isfinite(row.mean_reward)
        assert row.min_reward <= row.mean_reward <= row.max_reward
        assert 0.0 <= row.hit_rate <= 1.0
        assert row.mean_steps > 0
    assert result.best_checkpoint is None


def test_train_is_reproducible():
    """Test the master seed fixes the learning curve"""
    assert train(tiny_config()).rows == train(tiny_config()).rows


def test_callback_sees_every_batch():
    """Test the batch callback receives each row with update stats"""
    seen = []
    PpoTrainer(tiny_config()).train(
        on_batch=lambda row, stats: seen.append((row.batch, stats))
    )
    assert [b for b, _ in seen] == [0, 1]
    assert all(stats is not None and np.isfinite(stats.kl) for _, stats in seen)


# Long Run Tests


@pytest.fixture(scope="module")
def long_run():
    """Sixty default-size batches with their update stats"""
    config = RunConfig(ppo=PpoConfig(total_batches=60), master_seed=17, thread_count=4)
    stats = []
    result = PpoTrainer(config).train(on_batch=lambda row, update: stats.append(update))
    return result, stats


@pytest.mark.slow
def test_kl_stays_near_target(long_run):
    """Test post-burn-in KL divergence stays within the adaptive clip band"""
    _, stats = long_run
    kls = np.array([s.kl for s in stats[10:] if s is not None])
    assert len(kls) >= 40
    assert 2e-4 <= float(np.median(kls)) <= 5e-3
    assert np.all((kls >= 0.0) & np.isfinite(kls))
    assert all(0.02 <= s.clip_eps <= 0.5 for s in stats if s is not None)


@pytest.mark.slow
def test_policy_improves(long_run):
    """Test late batches earn more reward than the initial policy"""
    result, _ = long_run
    first = np.mean([row.mean_reward for row in result.rows[:10]])
    last = np.mean([row.mean_reward for row in result.rows[-10:]])
    assert last > first
