"""Seeded training loops for DDPG and PPO, with CSV run logs.

A single ``numpy.random.Generator`` (PCG64 seeded with ``config.seed``) feeds
every random draw. The order is fixed:

1. network initialisation (actor, then critic);
2. for DDPG, per episode: env reset (theta, theta_dot); per step: exploration
   noise, then replay sampling for each update;
3. for PPO, per season: per episode an env reset, per step one policy sample;
   then the minibatch permutations of each training epoch.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .buffers import ReplayBuffer, RolloutBuffer, Transition
from .checkpoint import make_agent, save_checkpoint
from .config import TrainConfig
from .env import EnvParams, PendulumEnv

log = logging.getLogger(__name__)

DDPG_FIELDS = ("episode", "total_reward", "avg40_reward")
PPO_FIELDS = ("season", "season_score", "actor_loss", "critic_loss", "mean_kl", "beta")
AVG_WINDOW = 40
STRICT_SOLVE_WINDOW = 50


@dataclass
class RunLog:
    algo: str
    rows: list = field(default_factory=list)
    solved_at: int | None = None

    @property
    def fieldnames(self):
        return DDPG_FIELDS if self.algo == "ddpg" else PPO_FIELDS

    def column(self, name) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)


def trailing_mean(values, window=AVG_WINDOW) -> list:
    """Mean of the last ``min(window, i + 1)`` values at every position ``i``."""
    out = []
    for i in range(len(values)):
        out.append(float(np.mean(values[max(0, i + 1 - window): i + 1])))
    return out


def ddpg_solved(avg_rewards, threshold=-200.0, window=10) -> bool:
    """True once the last ``window`` running averages all exceed ``threshold``."""
    tail = avg_rewards[-window:]
    return len(tail) == window and all(a > threshold for a in tail)


def ppo_solved(season_scores, threshold=-200.0) -> bool:
    return len(season_scores) > 0 and season_scores[-1] > threshold


def write_log(run_log: RunLog, path) -> None:
    path = Path(path)
    names = run_log.fieldnames
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(names)
            for row in run_log.rows:
                writer.writerow([_fmt(row[n]) for n in names])
    except OSError as exc:
        raise OSError(f"cannot write log {path}: {exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def read_log(path) -> RunLog:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        names = tuple(reader.fieldnames or ())
        algo = "ddpg" if names == DDPG_FIELDS else "ppo"
        rows = []
        for rec in reader:
            row = {k: float(v) for k, v in rec.items()}
            key = names[0]
            row[key] = int(row[key])
            rows.append(row)
    return RunLog(algo, rows)


def _prepare_output(config: TrainConfig) -> Path | None:
    if not config.output_dir:
        return None
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.echo").write_text(config.to_text())
    except OSError as exc:
        raise OSError(f"cannot prepare output directory {out}: {exc}") from exc
    return out


def run_ddpg(config: TrainConfig, return_agent=False, replay: ReplayBuffer | None = None):
    """Train DDPG episode by episode; stops on a sustained solve or ``max_episodes``.

    ``replay`` lets a caller supply (and afterwards inspect) the replay buffer.
    """
    config = config.replace(algo="ddpg")
    out = _prepare_output(config)
    rng = np.random.default_rng(config.seed)
    env = PendulumEnv(EnvParams(max_torque=config.max_torque, episode_len=config.episode_len))
    agent = make_agent(config, rng)
    buf = ReplayBuffer(config.replay_size) if replay is None else replay
    run_log = RunLog("ddpg")
    rewards, averages = [], []
    window = STRICT_SOLVE_WINDOW if config.strict_solve else config.solve_window
    crossed = False

    for episode in range(1, config.max_episodes + 1):
        obs = env.reset(rng)
        agent.noise.reset()
        total = 0.0
        done = False
        while not done:
            action = agent.policy(obs, explore=True, rng=rng)
            obs_next, reward, done = env.step(action)
            buf.add(Transition(obs, action, reward, obs_next, float(done)))
            total += reward
            obs = obs_next
            if len(buf) >= config.ddpg_batch_size:
                for _ in range(config.updates_per_step):
                    agent.train_step(buf, config.ddpg_batch_size, rng)
        rewards.append(total)
        avg = float(np.mean(rewards[-AVG_WINDOW:]))
        averages.append(avg)
        run_log.rows.append({"episode": episode, "total_reward": total, "avg40_reward": avg})
        log.info("episode %d reward %.2f avg40 %.2f", episode, total, avg)

        if avg > config.solve_threshold and not crossed:
            crossed = True
            if out is not None:
                save_checkpoint(agent, config, out / "checkpoint.solved")
        if ddpg_solved(averages, config.solve_threshold, window):
            run_log.solved_at = episode
            break

    if out is not None:
        write_log(run_log, out / "log.csv")
        save_checkpoint(agent, config, out / "checkpoint.final")
    return (run_log, agent) if return_agent else run_log


def collect_season(agent, env: PendulumEnv, buf: RolloutBuffer, rng, bootstrap=True) -> list:
    """Fill ``buf`` with fresh on-policy episodes; returns completed episode rewards."""
    episode_rewards = []
    while not buf.full:
        obs = env.reset(rng)
        total = 0.0
        done = False
        while not done and not buf.full:
            action, logp, value = agent.policy(obs, rng)
            obs_next, reward, done = env.step(np.clip(action, -agent.max_action, agent.max_action))
            buf.store(obs, action, reward, value, logp)
            total += reward
            obs = obs_next
        if done:
            episode_rewards.append(total)
        # time-limit end is not a true terminal, so optionally bootstrap V(s_T)
        last_v = float(agent.value(obs)) if (bootstrap or not done) else 0.0
        buf.finish_path(last_v)
    return episode_rewards


def run_ppo(config: TrainConfig, return_agent=False, rollout: RolloutBuffer | None = None):
    """Train PPO season by season; stops once a season score beats the threshold.

    ``rollout`` lets a caller supply (and afterwards inspect) the rollout buffer.
    """
    config = config.replace(algo="ppo")
    out = _prepare_output(config)
    rng = np.random.default_rng(config.seed)
    env = PendulumEnv(EnvParams(max_torque=config.max_torque, episode_len=config.episode_len))
    agent = make_agent(config, rng)
    if rollout is None:
        rollout = RolloutBuffer(config.buffer_size, gamma=config.ppo_gamma, lam=config.lambda_gae)
    buf = rollout
    run_log = RunLog("ppo")
    scores = []

    for season in range(1, config.max_seasons + 1):
        episode_rewards = collect_season(agent, env, buf, rng, config.bootstrap_truncation)
        stats = agent.train(buf, rng)
        buf.clear()
        score = float(np.mean(episode_rewards))
        scores.append(score)
        run_log.rows.append({
            "season": season, "season_score": score, "actor_loss": stats.actor_loss,
            "critic_loss": stats.critic_loss, "mean_kl": stats.mean_kl,
            "beta": stats.beta_after,
        })
        log.info("season %d score %.2f kl %.4f beta %.4f", season, score, stats.mean_kl,
                 stats.beta_after)
        if ppo_solved(scores, config.solve_threshold):
            run_log.solved_at = season
            if out is not None:
                save_checkpoint(agent, config, out / "checkpoint.solved")
            break

    if out is not None:
        write_log(run_log, out / "log.csv")
        save_checkpoint(agent, config, out / "checkpoint.final")
    return (run_log, agent) if return_agent else run_log


def run(config: TrainConfig, **kwargs):
    return run_ddpg(config, **kwargs) if config.algo == "ddpg" else run_ppo(config, **kwargs)


def evaluate(agent, episodes: int, seed: int = 0, params: EnvParams | None = None) -> list:
    """Greedy rollouts; returns per-episode total rewards."""
    rng = np.random.default_rng(seed)
    env = PendulumEnv(params or EnvParams(max_torque=agent.max_action))
    totals = []
    for _ in range(episodes):
        obs = env.reset(rng)
        total, done = 0.0, False
        while not done:
            if hasattr(agent, "greedy_action"):
                action = agent.greedy_action(obs)
            else:
                action = agent.policy(obs, explore=False)
            obs, reward, done = env.step(action)
            total += reward
        totals.append(total)
    return totals
