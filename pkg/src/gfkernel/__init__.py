"""Generalized functions along smoothing-kernel sequences on subsets of R.

The package builds, in order: smooth scalar functions and domains
(`smooth`), distributions and pairings (`dist`), two-variable smoothing
kernels and graded sequences of them (`kernel`), the algebra of
kernel-indexed elements with embeddings and derivatives (`basic`),
asymptotic classification of those elements (`testing`), the
sequence-space model and its round trip (`simplified`), and a command
line front end (`cli`).
"""

from .errors import (
    ConfigError,
    DomainMismatch,
    GFKernelError,
    NoConvergence,
    NoSeparation,
    OutOfDomain,
    ParseError,
    TooFewPoints,
)
from .smooth import (
    CompactInterval,
    Domain,
    QuadResult,
    SmoothFn,
    TestFn,
    VectorField,
    bump,
    constant,
    constant_field,
    derivative_fn,
    exp_fn,
    extend_by_zero,
    integrate,
    lin_comb,
    partition_of_unity,
    plateau,
    polynomial,
    restrict_view,
    seminorm,
    sin_fn,
    smoothstep,
)
from .dist import (
    Distribution,
    PairingReport,
    default_test_battery,
    delta,
    heaviside,
    lie_dist,
    mollify,
    pair,
    pushforward_dist,
    regular,
    restrict_dist,
)
from .kernel import (
    DEFAULT_K_GRID,
    Kernel,
    KernelSequence,
    Mollifier,
    apply_kernel,
    combo_seq,
    constant_witness_seq,
    eventually_equal,
    extend_seq,
    glue_seqs,
    is_localizing,
    lie_seq,
    make_mollifier,
    restrict_seq,
    standard_sequence,
)
from .basic import (
    BasicElement,
    Diffeo1D,
    LocalityReport,
    LocalityTag,
    affine_diffeo,
    as_generic,
    audit_tag,
    d_eval,
    eval_basic,
    iota,
    lie_hat,
    lie_tilde,
    probe_locality,
    pushforward,
    restrict_basic,
    sigma,
    tag_of,
)
from .testing import (
    AssociationReport,
    AsymptoticFit,
    ClassificationReport,
    TestObjectReport,
    associated,
    embedding_residual_sweep,
    fit_order,
    is_moderate,
    is_negligible,
    validate_test_object,
)
from .simplified import (
    SimplifiedRep,
    classify_seq,
    iota_seq,
    pullback_seq,
    section_seq,
    separation_values,
    sigma_seq,
)

__version__ = "0.1.0"

__all__ = [
    "AssociationReport",
    "AsymptoticFit",
    "BasicElement",
    "ClassificationReport",
    "CompactInterval",
    "ConfigError",
    "DEFAULT_K_GRID",
    "Diffeo1D",
    "Distribution",
    "Domain",
    "DomainMismatch",
    "GFKernelError",
    "Kernel",
    "KernelSequence",
    "LocalityReport",
    "LocalityTag",
    "Mollifier",
    "NoConvergence",
    "NoSeparation",
    "OutOfDomain",
    "PairingReport",
    "ParseError",
    "QuadResult",
    "SimplifiedRep",
    "SmoothFn",
    "TestFn",
    "TestObjectReport",
    "TooFewPoints",
    "VectorField",
    "affine_diffeo",
    "apply_kernel",
    "as_generic",
    "associated",
    "audit_tag",
    "bump",
    "classify_seq",
    "combo_seq",
    "constant",
    "constant_field",
    "constant_witness_seq",
    "d_eval",
    "default_test_battery",
    "delta",
    "derivative_fn",
    "embedding_residual_sweep",
    "eval_basic",
    "eventually_equal",
    "exp_fn",
    "extend_by_zero",
    "extend_seq",
    "fit_order",
    "glue_seqs",
    "heaviside",
    "integrate",
    "iota",
    "iota_seq",
    "is_localizing",
    "is_moderate",
    "is_negligible",
    "lie_dist",
    "lie_hat",
    "lie_seq",
    "lie_tilde",
    "lin_comb",
    "make_mollifier",
    "mollify",
    "pair",
    "partition_of_unity",
    "plateau",
    "polynomial",
    "probe_locality",
    "pullback_seq",
    "pushforward",
    "pushforward_dist",
    "regular",
    "restrict_basic",
    "restrict_dist",
    "restrict_seq",
    "restrict_view",
    "section_seq",
    "seminorm",
    "separation_values",
    "sigma",
    "sigma_seq",
    "sin_fn",
    "smoothstep",
    "standard_sequence",
    "tag_of",
    "validate_test_object",
]
