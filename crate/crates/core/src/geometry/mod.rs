//! Twist profiles, slowdown profiles, frame transport and the strip immersion.

mod beta;
mod frame;
mod immersion;
mod twist;

pub use beta::{signed_zero_mean_beta, triangle_beta, BetaShape, SlowdownBeta};
pub use frame::{integrate_frame, CurveSpec, FramePath, FrameSample};
pub use immersion::{immersion_sample, Immersion, Lattice};
pub use twist::{
    make_constant_twist, make_square_twist, make_twist_from_beta, metric_factor, metric_factor_rate,
    TwistJet, TwistKind, TwistProfile, TABLE_FD_STEP,
};
