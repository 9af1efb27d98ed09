from dataclasses import dataclass, field

from fairtune.errors import ConfigurationError


NUM_CLASSES = 2


@dataclass(frozen=True)
class ModelArch:
    """
    Fully connected ReLU classifier layout.

    block_assignment maps each linear layer (input side first) to a block
    id; consecutive layers share a block. When omitted every layer is its
    own block.
    """
    input_dim: int
    hidden_widths: tuple
    num_classes: int = NUM_CLASSES
    block_assignment: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(
            self, "hidden_widths", tuple(int(w) for w in self.hidden_widths)
        )
        if self.block_assignment is None:
            blocks = tuple(range(len(self.hidden_widths) + 1))
        else:
            blocks = tuple(int(b) for b in self.block_assignment)
        object.__setattr__(self, "block_assignment", blocks)

    @classmethod
    def default(cls):
        return cls(input_dim=20, hidden_widths=(32, 16))

    @property
    def widths(self):
        return (self.input_dim, *self.hidden_widths, self.num_classes)

    @property
    def num_layers(self):
        return len(self.hidden_widths) + 1

    @property
    def num_groups(self):
        return 2 * self.num_layers

    @property
    def num_blocks(self):
        return self.block_assignment[-1] + 1 if self.block_assignment else 0

    def layer_shape(self, layer):
        widths = self.widths
        return (widths[layer + 1], widths[layer])

    def validate(self):
        if self.num_classes != NUM_CLASSES:
            raise ConfigurationError(
                f"only {NUM_CLASSES}-class heads are supported, "\
                f"got {self.num_classes}"
            )
        if self.input_dim < 1:
            raise ConfigurationError(
                f"input_dim must be positive, got {self.input_dim}"
            )
        if not self.hidden_widths:
            raise ConfigurationError("at least one hidden layer is required")
        if any(w < 1 for w in self.hidden_widths):
            raise ConfigurationError(
                f"hidden widths must be positive, got {list(self.hidden_widths)}"
            )
        blocks = self.block_assignment
        if len(blocks) != self.num_layers:
            raise ConfigurationError(
                f"block assignment covers {len(blocks)} layers, "\
                f"architecture has {self.num_layers}"
            )
        if blocks[0] != 0 or any(
            b - a not in (0, 1) for a, b in zip(blocks, blocks[1:])
        ):
            raise ConfigurationError(
                f"block ids must be contiguous from 0 over consecutive "\
                f"layers, got {list(blocks)}"
            )
        return self

    def to_dict(self):
        return {
            "input_dim": self.input_dim,
            "hidden_widths": list(self.hidden_widths),
            "num_classes": self.num_classes,
            "block_assignment": list(self.block_assignment),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            input_dim=data["input_dim"],
            hidden_widths=tuple(data["hidden_widths"]),
            num_classes=data.get("num_classes", NUM_CLASSES),
            block_assignment=tuple(data["block_assignment"]),
        )
