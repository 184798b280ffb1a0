"""JSON checkpoints holding the algo tag, resolved config and every network.

Floats are written with ``repr`` precision, so a reload reproduces the
parameters bit for bit.
"""

import json
from pathlib import Path

import numpy as np

from .config import ConfigError, TrainConfig
from .ddpg import DdpgAgent
from .nn import MLP
from .ppo import PpoAgent

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def make_agent(config: TrainConfig, rng):
    if config.algo == "ddpg":
        return DdpgAgent(
            rng, max_action=config.max_torque, actor_lr=config.ddpg_actor_lr,
            critic_lr=config.ddpg_critic_lr, gamma=config.ddpg_gamma, tau=config.tau,
            noise=config.noise, ou_theta=config.ou_theta,
            ou_sigma=config.ou_sigma_frac * config.max_torque, ou_dt=config.ou_dt,
            gauss_sigma=config.gauss_sigma_frac * config.max_torque)
    return PpoAgent(
        rng, max_action=config.max_torque, method=config.method,
        actor_lr=config.ppo_actor_lr, critic_lr=config.ppo_critic_lr,
        epsilon=config.epsilon, beta=config.beta, kl_target=config.kl_target,
        gamma=config.ppo_gamma, lam=config.lambda_gae, epochs=config.epochs,
        batch_size=config.ppo_batch_size, entropy_coeff=config.entropy_coeff,
        normalize_adv=config.normalize_adv, kl_upper=config.kl_upper_factor,
        kl_lower=config.kl_lower_divisor, beta_min=config.beta_min, beta_max=config.beta_max)


def net_to_dict(net: MLP) -> dict:
    return {
        "layer_dims": net.layer_dims,
        "hidden_activation": net.hidden_activation,
        "output_activation": net.output_activation,
        "output_bound": net.output_bound,
        "layers": [{"weights": w.ravel().tolist(), "biases": b.tolist()}
                   for w, b in zip(net.weights, net.biases)],
    }


def net_from_dict(d: dict) -> MLP:
    net = MLP(d["layer_dims"], d["hidden_activation"], d["output_activation"],
              d["output_bound"])
    layers = d["layers"]
    if len(layers) != len(net.weights):
        raise CheckpointError(f"expected {len(net.weights)} layers, found {len(layers)}")
    for k, (w, b, rec) in enumerate(zip(net.weights, net.biases, layers)):
        wv = np.asarray(rec["weights"], dtype=np.float64)
        bv = np.asarray(rec["biases"], dtype=np.float64)
        if wv.size != w.size or bv.size != b.size:
            raise CheckpointError(f"layer {k}: parameter count does not match dims")
        w[...] = wv.reshape(w.shape)
        b[...] = bv
    return net


def agent_to_dict(agent, config: TrainConfig) -> dict:
    algo = "ddpg" if isinstance(agent, DdpgAgent) else "ppo"
    doc = {
        "format": FORMAT_VERSION,
        "algo": algo,
        "config": {k: v for k, v in vars(config).items()},
        "networks": {name: net_to_dict(net) for name, net in agent.networks().items()},
    }
    if algo == "ppo":
        doc["method"] = agent.method
        doc["beta"] = agent.beta
        doc["log_std_raw"] = agent.log_std_raw.tolist()
    return doc


def save_checkpoint(agent, config: TrainConfig, path) -> None:
    path = Path(path)
    text = json.dumps(agent_to_dict(agent, config), indent=1)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path, expect_algo=None):
    """Rebuild ``(agent, config)`` from a checkpoint file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    except OSError as exc:
        raise OSError(f"cannot read checkpoint {path}: {exc}") from exc
    try:
        return agent_from_dict(doc, expect_algo)
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"invalid checkpoint {path}: {exc!r}") from exc


def agent_from_dict(doc: dict, expect_algo=None):
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_VERSION:
        raise CheckpointError("unsupported checkpoint format")
    algo = doc["algo"]
    if expect_algo is not None and algo != expect_algo:
        raise CheckpointError(f"checkpoint holds a {algo!r} agent, expected {expect_algo!r}")
    config = TrainConfig(**doc["config"])
    if config.algo != algo:
        raise CheckpointError("algo tag disagrees with config echo")
    # init draws are overwritten below; any generator will do
    agent = make_agent(config, np.random.default_rng(0))
    nets = doc["networks"]
    for name, net in agent.networks().items():
        loaded = net_from_dict(nets[name])
        if loaded.layer_dims != net.layer_dims:
            raise CheckpointError(
                f"{name}: dims {loaded.layer_dims} do not match {net.layer_dims}")
        if (loaded.hidden_activation, loaded.output_activation) != \
                (net.hidden_activation, net.output_activation):
            raise CheckpointError(f"{name}: activations do not match the configured network")
        net.load_params(loaded)
    if algo == "ppo":
        raw = np.asarray(doc["log_std_raw"], dtype=np.float64)
        if raw.shape != agent.log_std_raw.shape:
            raise CheckpointError("log_std_raw has the wrong shape")
        agent.log_std_raw[...] = raw
        agent.method = doc["method"]
        agent.beta = float(doc["beta"])
    return agent, config
