//! Baily-Borel boundary components of the `L_{2p^2}` and `L_2` quotients.

mod graph;
mod modular;
mod normal_form;
mod points;

pub use graph::{
    build_boundary_graph, build_boundary_graph_l2, classify_rank2_l2, curve_count_bounds, incidence,
    incidence_by_scan, l2_plane_representatives, plane_star_classes, point_for_star, Ambient, BoundaryCurve,
    BoundaryGraph, CurveCountBounds, L2PlaneClass, L2PlaneClassification,
};
pub use modular::{curve_group, CurveGroup};
pub use normal_form::{
    admissible_b, check_shape, in_gamma1, lift_parabolic, pi_e, rank2_normal_form, rank2_representatives,
    rank2_type, BaseChange, NormalForm,
};
pub use points::{
    boundary_points, classify_isotropic_vector, classify_star, point_representative, BoundaryPoint, PointFamily,
};
