//! Damped least-squares position IK for serial chains; stands in for full
//! motion planning as the executability check.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::geom::Pose;
use crate::model::{JointKind, KinematicChain};

const DAMPING: f64 = 0.05;
const MAX_STEP_NORM: f64 = 0.2;

/// Solves for joint positions placing the fingertip center at `target`.
/// Returns `None` when no solution within tolerance is found.
pub fn solve_position_ik(
    chain: &KinematicChain,
    base: &Pose,
    target: &Point3<f64>,
    q_init: &[f64],
    max_iters: usize,
    tol: f64,
) -> Option<Vec<f64>> {
    let mut q = q_init.to_vec();
    chain.clamp_q(&mut q);
    for _ in 0..max_iters {
        let fk = chain.fk(base, &q);
        let tip = Point3::from(fk.mount.translation.vector);
        let err = target - tip;
        if err.norm() < tol {
            return Some(q);
        }
        // Analytic 3×d Jacobian of the fingertip position.
        let cols: Vec<Vector3<f64>> = chain
            .joints
            .iter()
            .enumerate()
            .map(|(i, joint)| {
                let frame = &fk.joint_frames[i];
                let axis_w = frame.rotation * joint.axis.into_inner();
                match joint.kind {
                    JointKind::Prismatic => axis_w,
                    JointKind::Revolute => {
                        let origin = Point3::from(frame.translation.vector);
                        axis_w.cross(&(tip - origin))
                    }
                }
            })
            .collect();
        // Δq = Jᵀ (J Jᵀ + λ² I)⁻¹ e
        let mut jjt = Matrix3::identity() * (DAMPING * DAMPING);
        for c in &cols {
            jjt += c * c.transpose();
        }
        let Some(inv) = jjt.try_inverse() else {
            return None;
        };
        let y = inv * err;
        let mut dq: Vec<f64> = cols.iter().map(|c| c.dot(&y)).collect();
        let norm: f64 = dq.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > MAX_STEP_NORM {
            for v in dq.iter_mut() {
                *v *= MAX_STEP_NORM / norm;
            }
        }
        for (qi, d) in q.iter_mut().zip(&dq) {
            *qi += d;
        }
        chain.clamp_q(&mut q);
    }
    let fk = chain.fk(base, &q);
    let tip = Point3::from(fk.mount.translation.vector);
    if (target - tip).norm() < tol {
        Some(q)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pose;

    #[test]
    fn gantry_reaches_in_workspace_target() {
        let chain = crate::sim::tests::gantry();
        let target = Point3::new(0.4, -0.2, 0.3);
        let q = solve_position_ik(
            &chain,
            &Pose::identity(),
            &target,
            &[0.0, 0.0, 0.3, 0.0],
            200,
            1e-3,
        )
        .expect("target within limits must be reachable");
        let fk = chain.fk(&Pose::identity(), &q);
        let tip = Point3::from(fk.mount.translation.vector);
        assert!((tip - target).norm() < 1e-3);
        assert!(chain.within_limits(&q));
    }

    #[test]
    fn out_of_reach_target_fails() {
        let chain = crate::sim::tests::gantry();
        assert!(solve_position_ik(
            &chain,
            &Pose::identity(),
            &Point3::new(10.0, 0.0, 0.3),
            &[0.0, 0.0, 0.3, 0.0],
            200,
            1e-3,
        )
        .is_none());
    }
}
