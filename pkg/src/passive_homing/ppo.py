"""Recurrent PPO: rollouts, dual-discount returns and clipped updates

Episodes are the minibatch unit, so the recurrent state is always rebuilt
from the start of an episode when log-probabilities are recomputed.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .dynamics import ThrusterAction
from .environment import EngagementEnv
from .errors import HomingError, UpdateAbortedError, UsageError
from .models import LearningCurveRow, Outcome, PpoConfig, RewardConfig, RunConfig
from .neuralnet import (
    N_CATEGORIES,
    Params,
    PolicyNetwork,
    ValueNetwork,
    log_softmax,
    policy_forward,
    sample_action,
    value_forward,
)
from .rewards import shaping_reward, terminal_reward
from .scenario import episode_rng

logger = logging.getLogger(__name__)

__all__ = [
    "Adam",
    "EpisodeTrajectory",
    "PpoTrainer",
    "PpoUpdater",
    "RolloutBatch",
    "StepRecord",
    "TrainingResult",
    "UpdateStats",
    "advantage",
    "batch_statistics",
    "clipped_surrogate",
    "collect_rollouts",
    "discounted_returns",
    "dual_discount_return",
    "normalize_advantages",
    "ppo_update",
    "run_policy_episode",
    "shaping_reward",
    "terminal_reward",
    "train",
]

Array = NDArray[np.float64]

# Network initialization draws from its own stream, apart from episode seeds
_INIT_STREAM = 1


@dataclass(frozen=True)
class StepRecord:
    """One guidance cycle of a rollout"""

    obs: Array
    action: ThrusterAction
    log_prob: float
    value_estimate: float
    shaping_reward: float
    terminal_reward: float
    done: bool


@dataclass
class EpisodeTrajectory:
    """Ordered step records of one episode and its result"""

    steps: list[StepRecord]
    outcome: Outcome
    miss_distance: float
    fuel_used: float
    index: int = 0

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("A trajectory needs at least one step")
        if self.miss_distance < 0:
            raise ValueError("miss_distance must be non-negative")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def observations(self) -> Array:
        return np.array([s.obs for s in self.steps])

    @property
    def actions(self) -> NDArray[np.int8]:
        return np.array([s.action for s in self.steps], dtype=np.int8)

    @property
    def log_probs(self) -> Array:
        return np.array([s.log_prob for s in self.steps])

    @property
    def values(self) -> Array:
        return np.array([s.value_estimate for s in self.steps])

    @property
    def shaping(self) -> Array:
        return np.array([s.shaping_reward for s in self.steps])

    @property
    def terminal(self) -> Array:
        return np.array([s.terminal_reward for s in self.steps])

    def total_reward(self, cfg: RewardConfig) -> float:
        """Undiscounted episode reward"""
        return float(np.sum(cfg.alpha * self.shaping + self.terminal))


class RolloutBatch(NamedTuple):
    trajectories: list[EpisodeTrajectory]
    failed: list[int]


class UpdateStats(NamedTuple):
    """Result of one PPO update

    ``kl`` is KL(π_old‖π_new) averaged over the batch states and
    ``clip_eps`` the clip parameter after adaptation.
    """

    kl: float
    clip_eps: float
    policy_loss: float
    value_loss: float


# Returns and advantages


def discounted_returns(traj: EpisodeTrajectory, cfg: RewardConfig) -> Array:
    """Dual-discount return ``G_k`` for every step

    Shaping rewards (weighted by α) are discounted by γ₁ and terminal
    rewards by γ₂.
    """
    shaping = cfg.alpha * traj.shaping
    terminal = traj.terminal
    out = np.empty(len(traj))
    g1 = 0.0
    g2 = 0.0
    for k in range(len(traj) - 1, -1, -1):
        g1 = shaping[k] + cfg.gamma1 * g1
        g2 = terminal[k] + cfg.gamma2 * g2
        out[k] = g1 + g2
    return out


def dual_discount_return(traj: EpisodeTrajectory, k: int, cfg: RewardConfig) -> float:
    """Dual-discount return from step ``k`` by direct summation

    Raises:
        IndexError: If ``k`` is outside the trajectory
    """
    if not 0 <= k < len(traj):
        raise IndexError(f"Step {k} outside trajectory of length {len(traj)}")
    lags = np.arange(len(traj) - k)
    shaping = cfg.alpha * traj.shaping[k:]
    terminal = traj.terminal[k:]
    return float(
        np.sum(cfg.gamma1**lags * shaping) + np.sum(cfg.gamma2**lags * terminal)
    )


def advantage(
    traj: EpisodeTrajectory,
    cfg: RewardConfig,
    values: Optional[Array] = None,
) -> Array:
    """Return minus baseline, before batch normalization

    Args:
        traj: Episode
        cfg: Reward settings
        values: Baseline per step (the values recorded in the rollout if None)
    """
    baseline = traj.values if values is None else np.asarray(values, dtype=np.float64)
    return discounted_returns(traj, cfg) - baseline


def normalize_advantages(advantages: Sequence[Array]) -> list[Array]:
    """Zero-mean, unit-variance advantages across a whole batch

    A batch with no spread is only centred.
    """
    flat = np.concatenate([np.asarray(a, dtype=np.float64) for a in advantages])
    mean = float(flat.mean())
    std = float(flat.std())
    scale = 1.0 / std if std > 1e-12 else 1.0
    return [(np.asarray(a) - mean) * scale for a in advantages]


def clipped_surrogate(ratio: Array, adv: Array, eps: float) -> Array:
    """Per-sample objective ``min(p·A, clip(p, 1-ε, 1+ε)·A)``"""
    ratio = np.asarray(ratio, dtype=np.float64)
    adv = np.asarray(adv, dtype=np.float64)
    return np.minimum(ratio * adv, np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv)


# Optimizer


class Adam:
    """Adaptive-moment optimizer over named parameter arrays (updated in place)"""

    def __init__(
        self,
        params: Params,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        """Descend along ``grads``"""
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name, p in params.items():
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g * g
            p -= self.lr * (self.m[name] / c1) / (np.sqrt(self.v[name] / c2) + self.eps)

    def state_dict(self) -> dict[str, object]:
        return {
            "t": self.t,
            "m": {k: v.copy() for k, v in self.m.items()},
            "v": {k: v.copy() for k, v in self.v.items()},
        }

    def load_state_dict(self, state: dict[str, object]) -> None:
        self.t = int(state["t"])  # type: ignore[call-overload]
        m: Params = state["m"]  # type: ignore[assignment]
        v: Params = state["v"]  # type: ignore[assignment]
        self.m = {k: a.copy() for k, a in m.items()}
        self.v = {k: a.copy() for k, a in v.items()}


def _accumulate(total: Optional[Params], grads: Params) -> Params:
    if total is None:
        return {k: v.copy() for k, v in grads.items()}
    for k, v in grads.items():
        total[k] += v
    return total


def _all_finite(grads: Params) -> bool:
    return all(bool(np.all(np.isfinite(g))) for g in grads.values())


# Update


class PpoUpdater:
    """Clipped-surrogate policy update with KL-targeted clip adaptation"""

    def __init__(
        self,
        policy: PolicyNetwork,
        value_net: ValueNetwork,
        ppo: PpoConfig,
        reward: RewardConfig,
        clip_eps: Optional[float] = None,
    ):
        self.policy = policy
        self.value_net = value_net
        self.ppo = ppo
        self.reward = reward
        self.clip_eps = ppo.clip_eps_init if clip_eps is None else clip_eps
        self.policy_opt = Adam(
            policy.named_parameters(),
            ppo.policy_lr,
            ppo.adam_beta1,
            ppo.adam_beta2,
            ppo.adam_eps,
        )
        self.value_opt = Adam(
            value_net.named_parameters(),
            ppo.value_lr,
            ppo.adam_beta1,
            ppo.adam_beta2,
            ppo.adam_eps,
        )

    def log_prob_ratios(self, traj: EpisodeTrajectory) -> Array:
        """``π_new(u|o)/π_old(u|o)`` per step with a fresh recurrent pass"""
        logits, _ = self.policy.forward_sequence(traj.observations)
        new_logp = self._chosen_log_probs(logits, traj.actions)
        return np.exp(new_logp - traj.log_probs)

    def _chosen_log_probs(self, logits: Array, actions: NDArray[np.int8]) -> Array:
        lp = log_softmax(logits.reshape(len(actions), -1, N_CATEGORIES))
        return np.take_along_axis(lp, actions[..., None].astype(np.intp), axis=2)[
            ..., 0
        ].sum(axis=1)

    def _policy_loss_and_grads(
        self, batch: Sequence[EpisodeTrajectory], advs: Sequence[Array]
    ) -> tuple[float, Params]:
        n_samples = sum(len(t) for t in batch)
        eps = self.clip_eps
        c_ent = self.ppo.entropy_coef
        objective = 0.0
        entropy = 0.0
        grads: Optional[Params] = None

        for traj, adv in zip(batch, advs):
            steps = len(traj)
            logits, cache = self.policy.forward_sequence(traj.observations)
            lp = log_softmax(logits.reshape(steps, -1, N_CATEGORIES))
            p = np.exp(lp)
            actions = traj.actions.astype(np.intp)
            onehot = np.zeros_like(lp)
            np.put_along_axis(onehot, actions[..., None], 1.0, axis=2)

            new_logp = np.sum(lp * onehot, axis=(1, 2))
            ratio = np.exp(new_logp - traj.log_probs)
            unclipped = ratio * adv
            surr = clipped_surrogate(ratio, adv, eps)
            objective += float(surr.sum())

            # The clipped branch carries no gradient
            coeff = np.where(unclipped <= surr, unclipped, 0.0)
            d_obj = coeff[:, None, None] * (onehot - p)

            h_pair = -np.sum(p * lp, axis=2, keepdims=True)
            entropy += float(h_pair.sum())
            d_ent = -p * (lp + h_pair)

            d_loss = -(d_obj + c_ent * d_ent) / n_samples
            grads = _accumulate(
                grads, self.policy.backward(cache, d_loss.reshape(steps, -1))
            )

        loss = -(objective + c_ent * entropy) / n_samples
        assert grads is not None
        return loss, grads

    def _value_loss_and_grads(
        self, batch: Sequence[EpisodeTrajectory], returns: Sequence[Array]
    ) -> tuple[float, Params]:
        n_samples = sum(len(t) for t in batch)
        loss = 0.0
        grads: Optional[Params] = None
        for traj, g in zip(batch, returns):
            out, cache = self.value_net.forward_sequence(traj.observations)
            err = out[:, 0] - g
            loss += float(np.sum(err * err))
            d_out = (2.0 / n_samples) * err[:, None]
            grads = _accumulate(grads, self.value_net.backward(cache, d_out))
        assert grads is not None
        return loss / n_samples, grads

    def mean_kl(
        self, batch: Sequence[EpisodeTrajectory], ref_log_probs: Sequence[Array]
    ) -> float:
        """KL(π_ref‖π_current) averaged over every state in the batch"""
        total = 0.0
        count = 0
        for traj, lp_old in zip(batch, ref_log_probs):
            logits, _ = self.policy.forward_sequence(traj.observations)
            lp_new = log_softmax(logits.reshape(len(traj), -1, N_CATEGORIES))
            total += float(np.sum(np.exp(lp_old) * (lp_old - lp_new)))
            count += len(traj)
        return total / count

    def adapt_clip(self, kl: float) -> float:
        """Steer the measured KL toward the target by rescaling ε"""
        target = self.ppo.kl_target
        eps = self.clip_eps
        if kl > 1.5 * target:
            eps /= 1.5
        elif kl < target / 1.5:
            eps *= 1.1
        self.clip_eps = min(max(eps, self.ppo.clip_eps_min), self.ppo.clip_eps_max)
        return self.clip_eps

    def update(
        self,
        batch: Sequence[EpisodeTrajectory],
        rng: Optional[np.random.Generator] = None,
        batch_index: int = 0,
    ) -> UpdateStats:
        """Run ``epochs_per_batch`` passes over the batch in episode minibatches

        Args:
            batch: Rollout trajectories with recorded log-probs and values
            rng: Shuffles the episode order each epoch when given
            batch_index: Reported with an aborted update

        Returns:
            Update statistics

        Raises:
            UsageError: If the batch is empty
            UpdateAbortedError: If a loss or gradient turns non-finite; the
                parameters and optimizer state are restored first
        """
        if not batch:
            raise UsageError("PPO update needs at least one trajectory")

        returns = [discounted_returns(t, self.reward) for t in batch]
        advs = normalize_advantages(
            [g - t.values for g, t in zip(returns, batch)]
        )
        ref_log_probs = [
            log_softmax(
                self.policy.forward_sequence(t.observations)[0].reshape(
                    len(t), -1, N_CATEGORIES
                )
            )
            for t in batch
        ]

        policy_snapshot = self.policy.get_parameters()
        value_snapshot = self.value_net.get_parameters()
        policy_opt_state = self.policy_opt.state_dict()
        value_opt_state = self.value_opt.state_dict()

        order = np.arange(len(batch))
        mb = self.ppo.episodes_per_minibatch
        policy_loss = value_loss = 0.0
        for _ in range(self.ppo.epochs_per_batch):
            if rng is not None:
                rng.shuffle(order)
            p_losses: list[float] = []
            v_losses: list[float] = []
            for start in range(0, len(order), mb):
                idx = order[start : start + mb]
                sub = [batch[i] for i in idx]
                p_loss, p_grads = self._policy_loss_and_grads(
                    sub, [advs[i] for i in idx]
                )
                v_loss, v_grads = self._value_loss_and_grads(
                    sub, [returns[i] for i in idx]
                )
                if not (
                    math.isfinite(p_loss)
                    and math.isfinite(v_loss)
                    and _all_finite(p_grads)
                    and _all_finite(v_grads)
                ):
                    self.policy.set_parameters(policy_snapshot)
                    self.value_net.set_parameters(value_snapshot)
                    self.policy_opt.load_state_dict(policy_opt_state)
                    self.value_opt.load_state_dict(value_opt_state)
                    raise UpdateAbortedError(
                        "Non-finite loss; parameters restored", batch_index
                    )
                self.policy_opt.step(self.policy.named_parameters(), p_grads)
                self.value_opt.step(self.value_net.named_parameters(), v_grads)
                p_losses.append(p_loss)
                v_losses.append(v_loss)
            policy_loss = float(np.mean(p_losses))
            value_loss = float(np.mean(v_losses))

        kl = self.mean_kl(batch, ref_log_probs)
        old_eps = self.clip_eps
        eps = self.adapt_clip(kl)
        logger.debug("KL %.6f, clip epsilon %.4f -> %.4f", kl, old_eps, eps)
        return UpdateStats(
            kl=kl, clip_eps=eps, policy_loss=policy_loss, value_loss=value_loss
        )


def ppo_update(
    policy: PolicyNetwork,
    value_net: ValueNetwork,
    batch: Sequence[EpisodeTrajectory],
    ppo: Optional[PpoConfig] = None,
    reward: Optional[RewardConfig] = None,
) -> UpdateStats:
    """One-off update with fresh optimizer state"""
    updater = PpoUpdater(
        policy, value_net, ppo or PpoConfig(), reward or RewardConfig()
    )
    return updater.update(batch)


# Rollouts


def run_policy_episode(
    policy: PolicyNetwork,
    value_net: ValueNetwork,
    env: EngagementEnv,
    rng: np.random.Generator,
    index: int = 0,
) -> EpisodeTrajectory:
    """Fly one episode under the sampling policy

    Hidden states of both networks are reset first. The observation stored
    with step ``k`` is the network input; its shaping reward is computed on
    the observation that follows the action.
    """
    obs = env.reset(rng)
    policy.reset_state()
    value_net.reset_state()
    steps: list[StepRecord] = []
    while True:
        dist, _ = policy_forward(policy, obs)
        action, log_prob = sample_action(dist, rng)
        value = value_forward(value_net, obs)
        result = env.step(action)
        steps.append(
            StepRecord(
                obs=obs.as_array(),
                action=action,
                log_prob=log_prob,
                value_estimate=value,
                shaping_reward=result.shaping,
                terminal_reward=result.terminal,
                done=result.done,
            )
        )
        obs = result.observation
        if result.done:
            break
    summary = env.summary()
    return EpisodeTrajectory(
        steps=steps,
        outcome=summary.outcome,
        miss_distance=summary.miss_distance,
        fuel_used=summary.fuel_used,
        index=index,
    )


def _rollout_chunk(
    policy: PolicyNetwork,
    value_net: ValueNetwork,
    env: EngagementEnv,
    master_seed: int,
    indices: Sequence[int],
) -> tuple[list[EpisodeTrajectory], list[int]]:
    trajectories: list[EpisodeTrajectory] = []
    failed: list[int] = []
    for i in indices:
        try:
            rng = episode_rng(master_seed, i)
            trajectories.append(run_policy_episode(policy, value_net, env, rng, i))
        except (HomingError, ArithmeticError) as e:
            logger.error("Episode %d failed: %s", i, e)
            failed.append(i)
    return trajectories, failed


def _chunks(indices: Sequence[int], n: int) -> list[list[int]]:
    size = math.ceil(len(indices) / n)
    return [list(indices[i : i + size]) for i in range(0, len(indices), size)]


def collect_rollouts(
    policy: PolicyNetwork,
    value_net: ValueNetwork,
    env: EngagementEnv,
    n_episodes: int = 30,
    master_seed: int = 0,
    first_index: int = 0,
    thread_count: int = 1,
) -> RolloutBatch:
    """Run a batch of sampling-policy episodes

    Episode ``first_index + j`` draws from seed ``master_seed + first_index + j``.
    With ``thread_count > 1`` episodes run in worker processes on copies of
    the networks; results come back ordered by episode index.

    Returns:
        Successful trajectories and the indices of episodes that raised
    """
    indices = list(range(first_index, first_index + n_episodes))
    if thread_count <= 1 or n_episodes == 1:
        trajectories, failed = _rollout_chunk(
            policy, value_net, env, master_seed, indices
        )
    else:
        trajectories, failed = [], []
        with ProcessPoolExecutor(max_workers=thread_count) as pool:
            futures = [
                pool.submit(_rollout_chunk, policy, value_net, env, master_seed, chunk)
                for chunk in _chunks(indices, thread_count)
            ]
            for future in futures:
                t, f = future.result()
                trajectories.extend(t)
                failed.extend(f)
        trajectories.sort(key=lambda t: t.index)
        failed.sort()
    return RolloutBatch(trajectories, failed)


# Training


def batch_statistics(
    batch_index: int, trajectories: Sequence[EpisodeTrajectory], cfg: RewardConfig
) -> LearningCurveRow:
    """Learning-curve row for one batch"""
    if not trajectories:
        nan = float("nan")
        return LearningCurveRow(
            batch=batch_index,
            mean_reward=nan,
            sd_reward=nan,
            min_reward=nan,
            max_reward=nan,
            mean_steps=0.0,
            hit_rate=0.0,
            mean_miss=nan,
            sd_miss=nan,
        )
    rewards = np.array([t.total_reward(cfg) for t in trajectories])
    misses = np.array([t.miss_distance for t in trajectories])
    return LearningCurveRow(
        batch=batch_index,
        mean_reward=float(rewards.mean()),
        sd_reward=float(rewards.mean() - rewards.std()),
        min_reward=float(rewards.min()),
        max_reward=float(rewards.max()),
        mean_steps=float(np.mean([len(t) for t in trajectories])),
        hit_rate=float(np.mean(misses < cfg.hit_radius)),
        mean_miss=float(misses.mean()),
        sd_miss=float(misses.std()),
    )


@dataclass
class TrainingResult:
    """Learning curve and the checkpoints written by a training run"""

    rows: list[LearningCurveRow]
    best_hit_rate: float
    best_batch: int
    aborted_batches: list[int] = field(default_factory=list)
    best_checkpoint: Optional[Path] = None
    final_checkpoint: Optional[Path] = None
    learning_curve: Optional[Path] = None


BatchCallback = Callable[[LearningCurveRow, Optional[UpdateStats]], None]


class PpoTrainer:
    """Collect → update loop over ``total_batches`` batches"""

    def __init__(self, config: RunConfig, output_dir: Optional[Path] = None):
        self.config = config
        self.output_dir = output_dir
        ppo = config.ppo
        self.rng = np.random.default_rng((config.master_seed, _INIT_STREAM))
        scaling = {"obs_scale": ppo.obs_scale, "obs_offset": ppo.obs_offset}
        self.policy = PolicyNetwork(self.rng, **scaling)
        self.value_net = ValueNetwork(self.rng, **scaling)
        self.env = EngagementEnv.from_config(config)
        self.updater = PpoUpdater(self.policy, self.value_net, ppo, config.reward)

    def _save(self, name: str, batch_index: int) -> Optional[Path]:
        if self.output_dir is None:
            return None
        from .storage.checkpoints import save_checkpoint

        return save_checkpoint(
            self.output_dir / f"{name}.npz",
            self.policy,
            self.value_net,
            batch_index=batch_index,
            rng_state=self.rng.bit_generator.state,
            clip_eps=self.updater.clip_eps,
            master_seed=self.config.master_seed,
        )

    def train(self, on_batch: Optional[BatchCallback] = None) -> TrainingResult:
        """Run the full training loop

        Args:
            on_batch: Called after each batch with its row and update stats

        Returns:
            ``TrainingResult`` with one learning-curve row per batch
        """
        cfg = self.config
        ppo = cfg.ppo
        result = TrainingResult(rows=[], best_hit_rate=-1.0, best_batch=-1)

        for b in range(ppo.total_batches):
            rollouts = collect_rollouts(
                self.policy,
                self.value_net,
                self.env,
                n_episodes=ppo.episodes_per_batch,
                master_seed=cfg.master_seed,
                first_index=b * ppo.episodes_per_batch,
                thread_count=cfg.thread_count,
            )
            row = batch_statistics(b, rollouts.trajectories, cfg.reward)
            result.rows.append(row)

            if row.hit_rate > result.best_hit_rate:
                result.best_hit_rate = row.hit_rate
                result.best_batch = b
                result.best_checkpoint = self._save("best", b)

            stats: Optional[UpdateStats] = None
            if rollouts.trajectories:
                try:
                    stats = self.updater.update(rollouts.trajectories, self.rng, b)
                except UpdateAbortedError as e:
                    logger.warning("Batch %d: update aborted (%s)", b, e)
                    result.aborted_batches.append(b)
            else:
                logger.warning("Batch %d: every episode failed, skipping update", b)

            logger.info(
                "Batch %d/%d: reward %.3f (min %.3f, max %.3f), hit rate %.3f, "
                "mean miss %.2f m, %.1f steps%s",
                b + 1,
                ppo.total_batches,
                row.mean_reward,
                row.min_reward,
                row.max_reward,
                row.hit_rate,
                row.mean_miss,
                row.mean_steps,
                f", KL {stats.kl:.5f}, eps {stats.clip_eps:.3f}" if stats else "",
            )
            if on_batch is not None:
                on_batch(row, stats)

        result.final_checkpoint = self._save("final", ppo.total_batches - 1)
        if self.output_dir is not None:
            from .storage.reports import write_learning_curve

            result.learning_curve = write_learning_curve(
                self.output_dir / "learning_curve.csv", result.rows
            )
        return result


def train(config: RunConfig, output_dir: Optional[Path] = None) -> TrainingResult:
    """Train a policy from ``config``; files go to ``output_dir`` when given"""
    return PpoTrainer(config, output_dir).train()
