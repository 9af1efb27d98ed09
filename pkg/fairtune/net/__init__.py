from fairtune.net.arch import ModelArch
from fairtune.net.model import (
    DatasetTag,
    GradientSnapshot,
    GroupRole,
    Model,
    ParameterGroup,
    accuracy,
    apply_update,
    forward_loss,
    init_model,
    logits,
    mean_gradient,
    predict,
)
from fairtune.net.serialize import load_model, save_model, dumps_model
