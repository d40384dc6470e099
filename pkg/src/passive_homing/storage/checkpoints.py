"""Policy/value checkpoints as ``.npz`` archives

Layout (format version 1):

  ``policy/<param>``  float64 arrays of the policy network
  ``value/<param>``   float64 arrays of the value network
  ``meta``            0-d string array holding a JSON object with
                      ``format_version``, ``package_version``,
                      ``policy_sizes``, ``value_sizes``, ``obs_scale``,
                      ``obs_offset`` and any training extras
                      (``batch_index``, ``clip_eps``, ``master_seed``,
                      ``rng_state``)

Parameter names follow ``RecurrentNet.named_parameters``.
"""

import json
import logging
import zipfile
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from .. import __version__
from ..errors import CheckpointError, ConfigurationError
from ..neuralnet import NetworkSizes, PolicyNetwork, RecurrentNet, ValueNetwork

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

_POLICY_PREFIX = "policy/"
_VALUE_PREFIX = "value/"


class Checkpoint(NamedTuple):
    policy: PolicyNetwork
    value_net: ValueNetwork
    meta: dict[str, Any]


def save_checkpoint(
    path: Path,
    policy: PolicyNetwork,
    value_net: ValueNetwork,
    **extra: Any,
) -> Path:
    """Write both networks and metadata to ``path``

    Args:
        path: Destination file (parents are created)
        policy: Policy network
        value_net: Value network
        **extra: JSON-serializable training metadata

    Returns:
        The written path
    """
    arrays = {f"{_POLICY_PREFIX}{k}": v for k, v in policy.named_parameters().items()}
    arrays.update(
        {f"{_VALUE_PREFIX}{k}": v for k, v in value_net.named_parameters().items()}
    )
    meta = {
        "format_version": FORMAT_VERSION,
        "package_version": __version__,
        "policy_sizes": list(policy.sizes),
        "value_sizes": list(value_net.sizes),
        "obs_scale": policy.obs_scale.tolist(),
        "obs_offset": policy.obs_offset.tolist(),
        **extra,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        np.savez(f, meta=np.array(json.dumps(meta)), **arrays)
    logger.info("Wrote checkpoint %s", path)
    return path


def _restore(net: RecurrentNet, data: Any, prefix: str, path: Path) -> None:
    params = {
        key[len(prefix) :]: data[key] for key in data.files if key.startswith(prefix)
    }
    try:
        net.set_parameters(params)
    except ConfigurationError as e:
        raise CheckpointError(f"{path}: {e}") from e


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint written by ``save_checkpoint``

    Raises:
        CheckpointError: If the file is missing, unreadable, of another
            format version, or does not match its recorded architecture
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            if "meta" not in data.files:
                raise CheckpointError(f"{path}: missing 'meta' record")
            meta = json.loads(str(data["meta"]))
            version = meta.get("format_version")
            if version != FORMAT_VERSION:
                raise CheckpointError(
                    f"{path}: unsupported checkpoint format version {version}"
                )
            scale = tuple(meta["obs_scale"])
            offset = tuple(meta["obs_offset"])
            policy = PolicyNetwork(
                sizes=NetworkSizes(*meta["policy_sizes"]),
                obs_scale=scale,
                obs_offset=offset,
            )
            value_net = ValueNetwork(
                sizes=NetworkSizes(*meta["value_sizes"]),
                obs_scale=scale,
                obs_offset=offset,
            )
            _restore(policy, data, _POLICY_PREFIX, path)
            _restore(value_net, data, _VALUE_PREFIX, path)
    except CheckpointError:
        raise
    except (OSError, ValueError, KeyError, TypeError, zipfile.BadZipFile) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint ({e})") from e
    return Checkpoint(policy, value_net, meta)
