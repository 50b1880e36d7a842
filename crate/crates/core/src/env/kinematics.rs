//! Planar kinematic chains and segment geometry.

/// Joint positions of a planar chain rooted at the origin.
///
/// Angles are relative: link `i` points along the sum of the first `i + 1`
/// angles. Returns `len + 1` points, the first being the origin.
pub fn forward_kinematics(angles: &[f64], link_lengths: &[f64]) -> Vec<[f64; 2]> {
    let mut joints = Vec::with_capacity(angles.len() + 1);
    let mut p = [0.0, 0.0];
    let mut heading = 0.0;
    joints.push(p);
    for (theta, len) in angles.iter().zip(link_lengths) {
        heading += theta;
        p = [p[0] + len * heading.cos(), p[1] + len * heading.sin()];
        joints.push(p);
    }
    joints
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> bool {
    r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn straight_chain() {
        let j = forward_kinematics(&[0.0; 4], &[0.25; 4]);
        assert_eq!(j.len(), 5);
        for (i, p) in j.iter().enumerate() {
            assert!((p[0] - 0.25 * i as f64).abs() < 1e-15);
            assert_eq!(p[1], 0.0);
        }
    }

    #[test]
    fn first_joint_up() {
        let j = forward_kinematics(&[PI / 2.0, 0.0, 0.0], &[1.0 / 3.0; 3]);
        let tip = j[3];
        assert!(tip[0].abs() < 1e-12);
        assert!((tip[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_link_elbow() {
        let j = forward_kinematics(&[PI / 2.0, -PI / 2.0], &[0.5, 0.5]);
        assert!((j[2][0] - 0.5).abs() < 1e-12);
        assert!((j[2][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        assert!((wrap_angle(PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.3), 0.3);
    }

    #[test]
    fn intersections() {
        assert!(segments_intersect([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]));
        assert!(!segments_intersect([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]));
        assert!(segments_intersect([0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 1.0]));
        assert!(!segments_intersect([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]));
    }
}
