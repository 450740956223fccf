use std::path::Path;

use proptest::prelude::*;
use treeskel::colmap::{encode_colmap_model, parse_colmap_model};
use treeskel::core::{CameraModel, CameraPose, Intrinsics, LabeledPointCloud, Mat3, SemanticLabel, SkeletonGraph, Vec3};
use treeskel::graph::{encode_graph, parse_graph, GraphFormat};
use treeskel::ply::{encode_ply, parse_ply, quantized_color, PlyEncoding, PlyOptions, PlyPrecision};

fn cloud() -> impl Strategy<Value = LabeledPointCloud> {
    let point = (
        prop::array::uniform3(-1e4..1e4f64),
        prop::array::uniform3(0.0..=1.0f64),
        prop::sample::select(SemanticLabel::ALL.to_vec()),
    );
    prop::collection::vec(point, 0..60).prop_map(|v| {
        let positions = v.iter().map(|p| Vec3(p.0)).collect();
        let colors = v.iter().map(|p| quantized_color(p.1)).collect();
        let labels = v.iter().map(|p| p.2).collect();
        LabeledPointCloud::new(positions, colors, labels).unwrap()
    })
}

fn options() -> impl Strategy<Value = PlyOptions> {
    (
        prop::sample::select(vec![PlyEncoding::Ascii, PlyEncoding::BinaryLittleEndian]),
        prop::sample::select(vec![PlyPrecision::Float, PlyPrecision::Double]),
    )
        .prop_map(|(encoding, precision)| PlyOptions { encoding, precision })
}

proptest! {
    #[test]
    fn ply_round_trip(c in cloud(), opts in options()) {
        let back = parse_ply(&encode_ply(&c, opts).unwrap(), Path::new("c.ply")).unwrap();
        prop_assert_eq!(back.len(), c.len());
        prop_assert_eq!(back.labels(), c.labels());
        prop_assert_eq!(back.colors(), c.colors());
        for (p, q) in c.positions().iter().zip(back.positions()) {
            for k in 0..3 {
                let expect = match opts.precision {
                    PlyPrecision::Double => p.0[k],
                    PlyPrecision::Float => p.0[k] as f32 as f64,
                };
                match opts.encoding {
                    PlyEncoding::BinaryLittleEndian => prop_assert_eq!(q.0[k].to_bits(), expect.to_bits()),
                    PlyEncoding::Ascii => prop_assert!((q.0[k] - expect).abs() <= 1e-6 * expect.abs().max(1e-300)),
                }
            }
        }
    }

    #[test]
    fn ply_reader_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..400), keep in 0usize..200) {
        // a valid header followed by arbitrary or truncated data
        let valid = encode_ply(&LabeledPointCloud::from_positions(vec![Vec3::ZERO; 3]).unwrap(), PlyOptions::default()).unwrap();
        let mut mixed = valid[..keep.min(valid.len())].to_vec();
        mixed.extend(&bytes);
        for input in [&bytes, &mixed] {
            if let Ok(c) = parse_ply(input, Path::new("x.ply")) {
                prop_assert_eq!(c.positions().len(), c.labels().len());
                prop_assert_eq!(c.positions().len(), c.colors().len());
            }
        }
    }

    #[test]
    fn colmap_rotations_are_orthonormal(q in prop::array::uniform4(-1.0..1.0f64), t in prop::array::uniform3(-10.0..10.0f64)) {
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let q = q.map(|v| v / norm);
        let cameras = "1 PINHOLE 1280 960 800 810 640 480\n";
        let images = format!("7 {:?} {:?} {:?} {:?} {:?} {:?} {:?} 1 a.jpg\n\n", q[0], q[1], q[2], q[3], t[0], t[1], t[2]);
        let model = parse_colmap_model(cameras, &images, Path::new("cameras.txt"), Path::new("images.txt")).unwrap();
        let pose = model.pose(7).unwrap();
        let r = pose.rotation;
        let rtr = r.transpose() * r;
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((rtr.0[i][j] - e).abs() <= 1e-9);
            }
        }
        // world-to-camera maps the camera origin to zero
        let local = r.transpose() * pose.origin;
        prop_assert!((local + Vec3(t)).norm() <= 1e-9 * (1.0 + Vec3(t).norm()));
    }

    #[test]
    fn colmap_writer_round_trips(qs in prop::collection::vec((prop::array::uniform4(-1.0..1.0f64), prop::array::uniform3(-5.0..5.0f64)), 1..6)) {
        let poses: Vec<CameraPose> = qs
            .iter()
            .enumerate()
            .filter_map(|(i, (q, o))| {
                let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                (n > 0.1).then(|| {
                    let r = Mat3::from_quaternion(q[0] / n, q[1] / n, q[2] / n, q[3] / n);
                    CameraPose::new(i as u32 + 1, format!("img{i}.png"), r, Vec3(*o)).unwrap()
                })
            })
            .collect();
        prop_assume!(!poses.is_empty());
        let model = CameraModel::new(Intrinsics::new(700.0, 700.0, 320.0, 240.0).unwrap(), poses);
        let (c, i) = encode_colmap_model(&model);
        let back = parse_colmap_model(&c, &i, Path::new("c"), Path::new("i")).unwrap();
        prop_assert_eq!(back.len(), model.len());
        for (a, b) in model.poses().zip(back.poses()) {
            prop_assert_eq!(a.image_id, b.image_id);
            prop_assert_eq!(&a.name, &b.name);
            prop_assert!(a.origin.distance(b.origin) <= 1e-9 * (1.0 + a.origin.norm()));
            for k in 0..3 {
                prop_assert!((a.rotation.col(k) - b.rotation.col(k)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn graph_round_trip(n in 1usize..40, seed: u64, obj: bool) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state
        };
        let nodes = (0..n).map(|_| Vec3::new(f64::from_bits(next() >> 2) % 1e3, -(next() as f64) / 7e17, 1e-9 * (next() % 1000) as f64)).collect();
        let edges = (1..n).map(|i| ((next() as usize) % i, i)).collect();
        let g = SkeletonGraph::new(nodes, edges).unwrap();
        let format = if obj { GraphFormat::Obj } else { GraphFormat::EdgeList };
        prop_assert_eq!(parse_graph(&encode_graph(&g, format), format, Path::new("g")).unwrap(), g);
    }
}
