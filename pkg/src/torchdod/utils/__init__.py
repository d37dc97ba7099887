from .intrinsic_dim import LOW_DIMENSION, estimate_intrinsic_dimension

__all__ = ["LOW_DIMENSION", "estimate_intrinsic_dimension"]
