"""
Registry of gradient-check cases.

A case builds a small double-precision program together with the
parameters it depends on; the registry runs any subset of cases
through ``grad_check`` and collects the reports.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..tensor import GradCheckReport, ParamStore, Tensor, grad_check

logger = logging.getLogger(__name__)

Program = Callable[[], Tensor]


class GradCheckCase(ABC):
    """Abstract base class for gradient-check cases."""

    @property
    @abstractmethod
    def case_name(self) -> str:
        """Short unique name used on the command line and in reports."""
        pass

    @abstractmethod
    def build(self, rng: np.random.Generator) -> Tuple[Program, ParamStore]:
        """
        Create the program and its parameters.

        Args:
            rng: Generator for parameter and input values

        Returns:
            (zero-argument program returning a scalar loss, parameters to probe)
        """
        pass


@dataclass
class CaseResult:
    case_name: str
    report: GradCheckReport

    @property
    def passed(self) -> bool:
        return self.report.passed


class CaseRegistry:
    """Registry for managing gradient-check cases."""

    def __init__(self):
        self._cases: List[GradCheckCase] = []

    def register(self, case: GradCheckCase) -> None:
        if self.find_case(case.case_name) is not None:
            return
        self._cases.append(case)
        logger.debug(f"Registered gradient-check case: {case.case_name}")

    def get_cases(self) -> List[GradCheckCase]:
        return self._cases.copy()

    def find_case(self, name: str) -> Optional[GradCheckCase]:
        for case in self._cases:
            if case.case_name.lower() == name.lower():
                return case
        return None

    def list_cases(self) -> List[str]:
        return [case.case_name for case in self._cases]

    def select(self, names: Optional[Sequence[str]] = None) -> List[GradCheckCase]:
        """Cases by name (all when ``names`` is empty); unknown names raise KeyError."""
        if not names:
            return self.get_cases()
        selected = []
        for name in names:
            case = self.find_case(name)
            if case is None:
                raise KeyError(f"Unknown gradient-check case: {name} (known: {', '.join(self.list_cases())})")
            selected.append(case)
        return selected


def run_case(case: GradCheckCase, h: float = 1e-5, tol: float = 1e-4,
             max_coords: Optional[int] = None, seed: int = 0) -> CaseResult:
    program, params = case.build(np.random.default_rng(seed))
    report = grad_check(program, params, h=h, tol=tol, max_coords=max_coords, seed=seed)
    status = "ok" if report.passed else "FAILED"
    logger.info(f"gradcheck {case.case_name}: max rel error {report.max_rel_error:.3e} [{status}]")
    return CaseResult(case.case_name, report)


# Global registry instance
case_registry = CaseRegistry()
