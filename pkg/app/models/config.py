import os
from typing import Dict, Optional

from pydantic import BaseModel, model_validator
from sympy import isprime

from app.models.minimizer import Strategy


BIT_WIDTH = int(os.getenv("ZKC_BIT_WIDTH", "32"))
FIELD_MODULUS = os.getenv("ZKC_FIELD_MODULUS", "")
MAX_UNROLL = int(os.getenv("ZKC_MAX_UNROLL", "1024"))
CORES = int(os.getenv("ZKC_CORES", "1"))
STRATEGY = os.getenv("ZKC_STRATEGY", "lpt")
MAX_PUSH = int(os.getenv("ZKC_MAX_PUSH", "520"))
MAX_SCRIPT = int(os.getenv("ZKC_MAX_SCRIPT", "1461"))
RNG_SEED = os.getenv("ZKC_RNG_SEED", "")
MAX_LOGIC_INPUTS = int(os.getenv("ZKC_MAX_LOGIC_INPUTS", "16"))

# Mersenne primes used when no modulus is configured
MERSENNE_61 = 2**61 - 1
MERSENNE_127 = 2**127 - 1


def default_modulus(bit_width: int) -> int:
    """Smallest built-in prime that can hold products of two n-bit values."""
    if 2 ** (2 * bit_width) < MERSENNE_61:
        return MERSENNE_61
    return MERSENNE_127


class PipelineConfig(BaseModel):
    """Settings shared by every pipeline stage."""
    bit_width: int = BIT_WIDTH
    field_modulus: Optional[int] = int(FIELD_MODULUS) if FIELD_MODULUS else None
    max_unroll: int = MAX_UNROLL
    cores: int = CORES
    strategy: Strategy = STRATEGY
    max_push: int = MAX_PUSH
    max_script: int = MAX_SCRIPT
    rng_seed: Optional[int] = int(RNG_SEED) if RNG_SEED else None
    max_logic_inputs: int = MAX_LOGIC_INPUTS
    defines: Dict[str, str] = {}

    @model_validator(mode="after")
    def check_limits(self):
        """Positive limits, prime modulus, representable n-bit products."""
        for name in ("bit_width", "max_unroll", "cores", "max_push", "max_script", "max_logic_inputs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_logic_inputs > 16:
            raise ValueError("max_logic_inputs cannot exceed 16")
        if self.field_modulus is None:
            self.field_modulus = default_modulus(self.bit_width)
        if not isprime(self.field_modulus):
            raise ValueError(f"field_modulus {self.field_modulus} is not prime")
        if 2 ** (2 * self.bit_width) >= self.field_modulus:
            raise ValueError(
                f"field_modulus too small for bit_width {self.bit_width}: need 2^{2 * self.bit_width} < p"
            )
        return self
