use nalgebra::{Matrix3, Matrix4};

use crate::Vec3;

/// Homogeneous rotation carrying the projection frame (plane normal ẑ) onto
/// the gradient frame of orientation (θ, φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationOp {
    pub theta: f64,
    pub phi: f64,
    pub matrix: Matrix4<f64>,
}

impl RotationOp {
    pub fn linear(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.linear() * p
    }
}

/// In-plane rotation by −a: [[cos(−a), −sin(−a), 0], [sin(−a), cos(−a), 0], [0, 0, 1]].
pub fn xy_rotation(a: f64) -> Matrix4<f64> {
    let (s, c) = (-a).sin_cos();
    Matrix4::new(
        c, -s, 0.0, 0.0, //
        s, c, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

/// Rotation about y by −b: [[cos(−b), 0, sin(−b)], [0, 1, 0], [−sin(−b), 0, cos(−b)]].
pub fn y_rotation(b: f64) -> Matrix4<f64> {
    let (s, c) = (-b).sin_cos();
    Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -s, 0.0, c, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

/// `xy_rotation(−φ) · y_rotation(−θ)`, i.e. R_z(φ)·R_y(θ).
///
/// The angle assignment is chosen so that R·ẑ = (sinθ cosφ, sinθ sinφ, cosθ),
/// the gradient direction used by the encoder.
pub fn rotation_for(theta: f64, phi: f64) -> RotationOp {
    RotationOp {
        theta,
        phi,
        matrix: xy_rotation(-phi) * y_rotation(-theta),
    }
}
