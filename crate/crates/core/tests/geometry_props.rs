use proptest::prelude::*;
use viewlab::geometry::*;

fn bounds() -> ViewpointBounds {
    ViewpointBounds::standard()
}

fn interior_point() -> impl Strategy<Value = Viewpoint> {
    // Fractions strictly inside (0, 1) mapped onto each axis.
    prop::array::uniform6(0.001f64..0.999).prop_map(|f| {
        let b = bounds();
        let mut v = [0.0; DIMS];
        for d in 0..DIMS {
            v[d] = b.v_min()[d] + f[d] * (b.v_max()[d] - b.v_min()[d]);
        }
        Viewpoint::from_array(v)
    })
}

fn angle() -> impl Strategy<Value = f64> {
    -720.0f64..720.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverse_then_forward_is_identity(v in interior_point()) {
        let b = bounds();
        let u = b.inverse_transform(&v).unwrap();
        let back = b.tanh_transform(&u).unwrap().to_array();
        for (x, y) in back.iter().zip(v.to_array()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn forward_lands_strictly_inside(u in prop::array::uniform6(-1e3f64..1e3)) {
        let b = bounds();
        let v = b.tanh_transform(&u).unwrap();
        prop_assert!(b.contains_strictly(&v));
    }

    #[test]
    fn forward_is_monotone_per_axis(u in prop::array::uniform6(-5f64..5.0), axis in 0usize..DIMS, step in 1e-3f64..2.0) {
        let b = bounds();
        let mut w = u;
        w[axis] += step;
        let lo = b.tanh_transform(&u).unwrap().to_array()[axis];
        let hi = b.tanh_transform(&w).unwrap().to_array()[axis];
        prop_assert!(hi >= lo);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn rotations_are_proper_orthonormal(psi in angle(), theta in angle(), phi in angle()) {
        let r = rotation_matrix(psi, theta, phi).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let rtr: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((rtr - id).abs() < 1e-9);
            }
        }
        prop_assert!((determinant(&r) - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn untranslated_camera_stays_on_orbit(psi in angle(), theta in angle(), phi in angle()) {
        let v = Viewpoint { psi, theta, phi, ..Viewpoint::ZERO };
        let pose = camera_pose(&v, &BASE_POSITION).unwrap();
        prop_assert!((norm(&pose.position) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn camera_axes_are_orthonormal_and_aimed(v in interior_point()) {
        let pose = camera_pose(&v, &BASE_POSITION).unwrap();
        let (r, u, f) = (pose.right(), pose.up(), pose.forward());
        for a in [&r, &u, &f] {
            prop_assert!((norm(a) - 1.0).abs() < 1e-9);
        }
        prop_assert!(dot(&r, &u).abs() < 1e-9 && dot(&r, &f).abs() < 1e-9 && dot(&u, &f).abs() < 1e-9);
        let to_origin = normalize(&[-pose.position[0], -pose.position[1], -pose.position[2]]);
        prop_assert!((dot(&f, &to_origin) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wider_fov_spreads_corner_rays(fov in 10.0f64..80.0, extra in 1.0f64..60.0) {
        let pose = camera_pose(&Viewpoint::ZERO, &BASE_POSITION).unwrap();
        let narrow = CameraIntrinsics { width: 8, height: 8, fov_y: fov, ..Default::default() };
        let wide = CameraIntrinsics { fov_y: fov + extra, ..narrow };
        let f = pose.forward();
        let corner = |i: &CameraIntrinsics| dot(&generate_rays(&pose, i)[0].dir, &f);
        prop_assert!(corner(&wide) < corner(&narrow));
    }

    #[test]
    fn rays_are_unit_and_start_at_camera(v in interior_point()) {
        let pose = camera_pose(&v, &BASE_POSITION).unwrap();
        let intr = CameraIntrinsics { width: 5, height: 4, ..Default::default() };
        let rays = generate_rays(&pose, &intr);
        prop_assert_eq!(rays.len(), 20);
        for ray in rays {
            prop_assert!((norm(&ray.dir) - 1.0).abs() < 1e-12);
            prop_assert_eq!(ray.origin, pose.position);
        }
    }
}

#[test]
fn center_pixel_looks_forward() {
    let pose = camera_pose(&Viewpoint { psi: 37.0, phi: 61.0, ..Viewpoint::ZERO }, &BASE_POSITION).unwrap();
    let intr = CameraIntrinsics { width: 9, height: 9, ..Default::default() };
    let rays = generate_rays(&pose, &intr);
    let center = rays[4 * 9 + 4].dir;
    let f = pose.forward();
    for k in 0..3 {
        assert!((center[k] - f[k]).abs() < 1e-6);
    }
}

#[test]
fn rotation_composes_from_single_axis_factors() {
    let (psi, theta, phi) = (33.0, -12.0, 71.0);
    let z = rotation_matrix(psi, 0.0, 0.0).unwrap();
    let y = rotation_matrix(0.0, theta, 0.0).unwrap();
    let x = rotation_matrix(0.0, 0.0, phi).unwrap();
    let mul = |a: &Mat3, b: &Mat3| {
        let mut o = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                o[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        o
    };
    let full = rotation_matrix(psi, theta, phi).unwrap();
    let composed = mul(&mul(&z, &y), &x);
    for i in 0..3 {
        for j in 0..3 {
            assert!((full[i][j] - composed[i][j]).abs() < 1e-12);
        }
    }
}
