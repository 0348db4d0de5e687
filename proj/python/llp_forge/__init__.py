"""Learning from label proportions with a bounded proportion loss."""

from ._core import (
    LlpError,
    Model,
    TrainConfig,
    bag_loss,
    bag_proportions,
    evaluate,
    gen_blobs,
    init_model,
    kl_proportion_loss,
    load_checkpoint,
    make_bags,
    save_checkpoint,
    ssc_gradient,
    ssc_loss,
    sweep,
    theory,
    train,
    tv_distance,
    tv_star_gradient,
    tv_star_loss,
    weighted_prf,
)

__all__ = [
    "LlpError",
    "Model",
    "TrainConfig",
    "bag_loss",
    "bag_proportions",
    "evaluate",
    "gen_blobs",
    "init_model",
    "kl_proportion_loss",
    "load_checkpoint",
    "make_bags",
    "save_checkpoint",
    "ssc_gradient",
    "ssc_loss",
    "sweep",
    "theory",
    "train",
    "tv_distance",
    "tv_star_gradient",
    "tv_star_loss",
    "weighted_prf",
]
