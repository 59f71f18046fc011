//! Geometry of the five supported homogeneous spaces.

mod distance;
mod io;
mod isometry;
mod linalg;
mod points;
mod random;

pub use distance::{
    hyperboloid_distance, log_euclidean_distance, sphere_distance, sphere_extrinsic_distance,
    stiefel_extrinsic_distance, torus_distance, Metric,
};
pub use io::{
    point_from_array, point_from_json, point_to_array, point_to_json, read_data_file,
    write_data_file, DataHeader,
};
pub use isometry::{apply_isometry, minkowski_gram, Isometry};
pub use linalg::{expm, log_det, matrix_exp, matrix_log, polar_factor, spd_sqrt, sym_apply, symmetrize};
pub use points::{
    minkowski, wrap_angle, HyperboloidPoint, ManifoldKind, ManifoldPoint, SpdMatrix,
    StiefelFrame, TorusPoint, UnitVector,
};
pub use random::{
    axis_boost, boost_from_apex, haar_orthogonal, haar_torus_element, random_lorentz,
    spatial_rotation, uniform_on_sphere, uniform_on_stiefel,
};
