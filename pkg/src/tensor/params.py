"""
Named parameter storage.

The store keeps insertion order, so two runs that register the same
parameters in the same sequence iterate identically.
"""

from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..exceptions import ContractError, DimensionError
from .tensor import Tensor


class ParamStore:
    """Ordered map from parameter path (``audio_cnn.layer0.kernel``) to leaf tensor."""

    def __init__(self):
        self._params: Dict[str, Tensor] = {}

    def add(self, name: str, value: np.ndarray) -> Tensor:
        """Register a new trainable parameter."""
        if name in self._params:
            raise ContractError(f"Duplicate parameter name: {name}")
        tensor = Tensor(np.array(value, copy=True), requires_grad=True, name=name)
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._params[name]
        except KeyError:
            raise KeyError(f"Unknown parameter: {name}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def names(self) -> List[str]:
        return list(self._params)

    def items(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self._params.items())

    def with_prefix(self, prefix: str) -> List[str]:
        return [name for name in self._params if name.startswith(prefix)]

    @property
    def num_parameters(self) -> int:
        return sum(p.size for p in self._params.values())

    def arrays(self) -> Dict[str, np.ndarray]:
        """Copies of all parameter arrays, in store order."""
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_arrays(self, arrays: Dict[str, np.ndarray], strict: bool = True) -> None:
        """Overwrite parameter values in place from a name→array mapping."""
        if strict:
            missing = set(self._params) - set(arrays)
            extra = set(arrays) - set(self._params)
            if missing or extra:
                raise ContractError(
                    f"Parameter mismatch: missing={sorted(missing)} unexpected={sorted(extra)}"
                )
        for name, value in arrays.items():
            if name not in self._params:
                continue
            target = self._params[name]
            if tuple(value.shape) != target.shape:
                raise DimensionError(f"shape mismatch for {name}", target.shape, value.shape)
            target.data = np.array(value, dtype=target.dtype, copy=True)

    def copy(self, dtype: Optional[np.dtype] = None) -> "ParamStore":
        """Deep copy, optionally casting every parameter."""
        clone = ParamStore()
        for name, p in self._params.items():
            clone.add(name, p.data.astype(dtype) if dtype is not None else p.data)
        return clone
