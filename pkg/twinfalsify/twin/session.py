"""Twin session contract"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence


class TwinSession(ABC):
    """One simulated trajectory at a time: init, then one step per action"""

    @abstractmethod
    def init(self, x0: Sequence[float]):
        """
        Start a trajectory from initial covariates.

        Args:
            x0: Vector of X0 features
        """
        pass

    @abstractmethod
    def step(self, action: int, raw: Optional[Sequence[float]] = None) -> List[float]:
        """
        Advance one timestep.

        Args:
            action: Action index at this step
            raw: Representative raw doses for twins that consume doses

        Returns:
            Next observation vector
        """
        pass

    def reset(self):
        """Discard the current trajectory"""
        pass

    def close(self):
        pass


class TwinFactory(ABC):
    """Creates independent sessions for one twin"""

    twin_id: str = "twin"
    consumes_raw_doses: bool = False

    @abstractmethod
    def create(self, index: int, seed: int) -> TwinSession:
        """
        Create the session used for one trajectory.

        Args:
            index: Session index within a generate call
            seed: Base seed of the generate call

        Returns:
            A fresh TwinSession
        """
        pass

    def release(self, session: TwinSession):
        """Return a session after its trajectory completed"""
        session.close()

    def metadata(self) -> Dict[str, Any]:
        return {"twin_id": self.twin_id}

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
