//! Computational hyperbolic geometry for comparing length spectra of surfaces:
//! Moebius arithmetic, marked Fuchsian groups, spectrum enumeration, counting
//! asymptotics, horoball diagrams, Dehn-filling estimates and Farey distances.

pub mod cusp;
pub mod document;
pub mod error;
pub mod farey;
pub mod filling;
pub mod growth;
pub mod moebius;
pub mod reproduce;
pub mod spectrum;
pub mod surface;
pub mod word;

pub use error::{Error, Result};
pub use moebius::{
    apply_to_horoball, c64, classify, complex_length, horoball_distance, Complex, ComplexLength, HalfSpacePoint,
    Horoball, IsometryKind, ProjectiveMatrix,
};
pub use spectrum::{
    compare_spectra, counting_function, enumerate_spectrum, enumerate_spectrum_with, naive_spectrum, zeta_truncated,
    LengthSpectrum, SpectrumComparison, SpectrumEntry, SpectrumOptions,
};
pub use surface::{
    collar_condition, gauss_bonnet_area, genus2_from_fn, hyperelliptic_action, pants_group, twist_along_curve,
    FenchelNielsenGenus2, MarkedGroup, Signature,
};
pub use word::{Letter, Word};
pub use growth::{
    crossover_length, fit_growth_exponent, logarithmic_integral, margulis_count, ps_lower_bound, CountingModel,
};
pub use cusp::{
    build_horoball_diagram, build_horoball_diagram_partial, check_one_sided_isolation, check_pairwise_tangent,
    check_rotational_symmetry, find_distinguished_lines, horocycle_shortcut, pants_voronoi_constants, CuspNormalization,
    DiagramBall, DistinguishedLine, HoroballDiagram, Lattice, VoronoiConstants,
};
pub use filling::{
    core_length_estimate, normalized_length, sufficiently_different, volume_drop_estimate, CuspLattice,
    SeparationReport, Slope, DEFAULT_MARGIN, MIN_ORBIFOLD_VOLUME,
};
pub use farey::{
    bfs_distances, farey_adjacent, farey_distance, stable_translation_length, stable_translation_length_capped,
    FareySlope, IntegerMappingClass, MappingClassKind, StableLength,
};
pub use document::WorkbenchDocument;
