from enum import Enum
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict


class FrozenSchema(BaseModel):
    """Immutable configuration model shared by every solver stage"""
    model_config = ConfigDict(frozen=True, extra="forbid")


class NormalizedEnum(str, Enum):
    """String enum that accepts case/underscore/hyphen variants and aliases"""

    @classmethod
    def _aliases(cls) -> dict:
        return {}

    @classmethod
    def _missing_(cls, value: Any) -> Optional["NormalizedEnum"]:
        if not isinstance(value, str):
            return None
        key = value.strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        for member in cls:
            if member.value.replace("_", "") == key:
                return member
        return cls._aliases().get(key)


def split_csv(value: Any) -> Any:
    """Turn "a,b,c" into ["a", "b", "c"]; lists pass through"""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def as_int_list(values: List[Any]) -> List[int]:
    return [int(float(v)) if isinstance(v, str) else v for v in values]
