"""
Architecture specifications for partitioned heteroscedastic networks

Two presets ship with the project:
- convergence_architecture(): one Dense(50, elu) trunk layer, 1-unit heads
- uci_architecture(): two Dense(50, elu) trunk layers, dim(Y)-unit heads
"""

from dataclasses import dataclass, field, replace

from HeteroLab.exceptions import ArchitectureError

ACTIVATIONS = ('elu', 'relu', 'softplus', 'linear')


@dataclass(frozen=True)
class LayerSpec:
    width: int
    activation: str = 'elu'


@dataclass(frozen=True)
class ArchitectureSpec:
    """
    Trunk layers plus mean / scale / dof heads

    The mean head is always present and linear. The scale head outputs a
    softplus standard deviation; the dof head outputs 3 + softplus(.).
    Every head reads the same trunk output z.
    """
    input_dim: int
    output_dim: int = 1
    trunk: tuple = field(default=(LayerSpec(50),))
    scale_head: bool = True
    dof_head: bool = False
    dropout_rate: float = 0.0

    def validate(self):
        if self.input_dim < 1 or self.output_dim < 1:
            raise ArchitectureError(
                f'input and output dimensions must be positive, got {self.input_dim}, {self.output_dim}')
        for index, layer in enumerate(self.trunk):
            if layer.width < 1:
                raise ArchitectureError(f'trunk layer {index} has zero width')
            if layer.activation not in ACTIVATIONS:
                raise ArchitectureError(f'trunk layer {index}: unknown activation {layer.activation!r}')
        if self.dof_head and not self.scale_head:
            raise ArchitectureError('a dof head requires a scale head')
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ArchitectureError(f'dropout rate must lie in [0, 1), got {self.dropout_rate}')
        return self

    @property
    def trunk_width(self):
        """Width of z (the input dimension when the trunk is empty)"""
        return self.trunk[-1].width if self.trunk else self.input_dim

    def mean_only(self):
        return replace(self, scale_head=False, dof_head=False)

    def with_dropout(self, rate):
        return replace(self, dropout_rate=float(rate)).validate()

    def with_dof_head(self):
        return replace(self, scale_head=True, dof_head=True)

    def to_dict(self):
        return {
            'input_dim': self.input_dim,
            'output_dim': self.output_dim,
            'trunk': [[layer.width, layer.activation] for layer in self.trunk],
            'scale_head': self.scale_head,
            'dof_head': self.dof_head,
            'dropout_rate': self.dropout_rate,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            input_dim=int(data['input_dim']),
            output_dim=int(data['output_dim']),
            trunk=tuple(LayerSpec(int(width), str(activation)) for width, activation in data['trunk']),
            scale_head=bool(data['scale_head']),
            dof_head=bool(data['dof_head']),
            dropout_rate=float(data['dropout_rate']),
        ).validate()


def convergence_architecture(input_dim=1, output_dim=1, **options):
    """Dense (50 elu units) trunk, Dense (1 linear) mean, Dense (1 softplus) scale"""
    return ArchitectureSpec(input_dim, output_dim, (LayerSpec(50, 'elu'),), **options).validate()


def uci_architecture(input_dim, output_dim=1, **options):
    """Two Dense (50 elu units) trunk layers, dim(Y)-unit heads"""
    return ArchitectureSpec(
        input_dim, output_dim, (LayerSpec(50, 'elu'), LayerSpec(50, 'elu')), **options).validate()


PRESETS = {
    'convergence': convergence_architecture,
    'uci': uci_architecture,
}
