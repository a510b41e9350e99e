"""p-order tensor algebra under invertible linear transforms (``*_L``)."""
from .core import (
    DenseTensor,
    ShapeError,
    SliceIndexMap,
    add,
    as_tensor,
    conj,
    frobenius,
    from_slices,
    inner,
    l1_norm,
    linf_norm,
    matrix_slice,
    mode_m_product,
    scale,
    set_matrix_slice,
    slices,
    sub,
    zeros,
)
from .decomposition import (
    MultiRank,
    SingularSpectrum,
    TSVDFactors,
    multi_rank,
    reconstruct,
    singular_spectrum,
    synthesize,
    truncate,
    tsvd,
    tubal_rank,
)
from .determinant import det_fast, det_recursive, identity_det_tube
from .envelope import (
    UNBOUNDED,
    conjugate_lower_bound_check,
    upsilon,
    upsilon_biconjugate,
    upsilon_conjugate,
)
from .norms import multirank_l1, multirank_l2, nuclear_norm_L, spectral_norm_L
from .product import (
    NumericalError,
    SingularSliceError,
    conj_transpose,
    facewise_product,
    gram,
    identity_tensor,
    into_real,
    inverse_tensor,
    is_unitary_tensor,
    t_product_L,
    tube_add,
    tube_identity,
    tube_mul,
)
from .ptns import read_ptns, write_ptns
from .transforms import (
    TransformError,
    TransformL,
    TransformMismatchError,
    forward,
    inverse,
    make_dct,
    make_dft,
    make_dft_unitary,
    make_identity,
    make_random_invertible,
    make_random_unitary,
    make_transform,
    parse_transform,
)

__version__ = "0.1.0"
