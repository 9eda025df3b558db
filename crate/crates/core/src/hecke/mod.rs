//! Built-in holomorphic newforms and their normalized Hecke eigenvalues.

mod curve;
mod form;
mod table;
mod tau;
mod twist;

pub use curve::{ap_point_count, EllipticCurveSpec, AP_CEILING};
pub use form::{EigenSource, HeckeForm};
pub use table::{eigen_table, parse_table_file, tau_table, EigenvalueTable, TableFileData};
pub use tau::{normalized_tau, tau_by_recurrence, tau_values, TAU_CEILING};
pub use twist::{check_admissible, family_modulus, find_admissible_residue, root_number_twist};

