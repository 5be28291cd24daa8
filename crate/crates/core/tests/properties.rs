//! Property tests for the module invariants.

mod common;

use common::*;
use proptest::prelude::*;
use uvcamo::attack::{
    attack_loss, detection_score, iou, optimize_texture, smooth_loss, AttackConfig, BBox,
    Detection, RoaParams, ToyDetector,
};
use uvcamo::envfusion::{efe_loss, fuse, EnvFeatureMaps, GlobalScalarModel};
use uvcamo::geometry::{camera_matrix, primitives, CameraTransform, FacetUvIndex, UvMap};
use uvcamo::renderer::{backward_rasterize, composite, rasterize, segment_scene, RenderedImage};
use uvcamo::sampler::{
    coverage_map, trilinear_taps, CoverageFlag, FacetTexture, SamplingMethod, TextureSampler,
};
use uvcamo::scenegen::{apply_weather, generate_grid, plan_grid, GridOptions, Placement, WeatherParams};
use uvcamo::{ForegroundMask, Image};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn methods() -> impl Strategy<Value = SamplingMethod> {
    prop_oneof![Just(SamplingMethod::TensorTraversal), Just(SamplingMethod::UvTraversal)]
}

fn lincomb(a: f64, x: &Image, b: f64, y: &Image) -> Image {
    let data = x.data().iter().zip(y.data()).map(|(p, q)| a * p + b * q).collect();
    Image::from_vec(x.width(), x.height(), data).unwrap()
}

fn boxes() -> impl Strategy<Value = BBox> {
    (0.0..50.0f64, 0.0..50.0f64, 0.1..30.0f64, 0.1..30.0f64)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, x + w, y + h).unwrap())
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn ownership_is_lowest_id_partition(seed in any::<u64>(), nf in 1usize..10, w in 2usize..30, h in 2usize..30) {
        let mut r = rng(seed);
        let mesh = random_mesh(nf, &mut r);
        let index = FacetUvIndex::build(&mesh, w, h).unwrap();
        for y in 0..h {
            for x in 0..w {
                let p = [(x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / h as f64];
                let inside: Vec<usize> = (0..nf)
                    .filter(|&m| bary_ref(&mesh.facet(m).uvs, p).iter().all(|&c| c >= -1e-9))
                    .collect();
                match index.owner(x, y) {
                    Some(m) => {
                        prop_assert!(inside.contains(&m));
                        prop_assert!(inside.iter().all(|&o| o >= m || bary_ref(&mesh.facet(o).uvs, p).iter().any(|&c| c < -1e-12)));
                        let l = index.barycentric(x, y);
                        let t = mesh.facet(m).uvs;
                        for k in 0..2 {
                            let rec = l[0] * t[0][k] + l[1] * t[1][k] + l[2] * t[2][k];
                            prop_assert!((rec - p[k]).abs() < 1e-6);
                        }
                    }
                    None => prop_assert!(inside.is_empty() || inside.iter().all(|&o| bary_ref(&mesh.facet(o).uvs, p).iter().any(|&c| c < -1e-12))),
                }
            }
        }
    }

    #[test]
    fn camera_matrix_is_deterministic(az in -360.0..360.0f64, el in -89.0..89.0f64, d in 0.5..50.0f64) {
        let cam = CameraTransform::new(az, el, d, 64, 48).unwrap();
        let a = camera_matrix(&cam);
        let b = camera_matrix(&cam.clone());
        prop_assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn samplers_preserve_constants(seed in any::<u64>(), method in methods(), ts in 2usize..7, v in 0.0..1.0f64) {
        let mut r = rng(seed);
        let mesh = random_mesh(6, &mut r);
        let uv = UvMap::filled(17, 23, [v, 1.0 - v, v * 0.5]).unwrap();
        let s = TextureSampler::new(&mesh, method, (17, 23), ts).unwrap();
        let t = s.forward(&mesh, &uv).unwrap();
        for texel in t.data().chunks_exact(3) {
            prop_assert_eq!(texel, &[v, 1.0 - v, v * 0.5][..]);
        }
    }

    #[test]
    fn samplers_are_linear(seed in any::<u64>(), method in methods(), ts in 2usize..6, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let mut r = rng(seed);
        let mesh = random_mesh(5, &mut r);
        let (w, h) = (15, 12);
        let u = random_signed(w, h, &mut r);
        let v = random_signed(w, h, &mut r);
        let s = TextureSampler::new(&mesh, method, (w, h), ts).unwrap();
        let f = |img: &Image| s.forward(&mesh, &UvMap::new(img.clone()).unwrap()).unwrap();
        let lhs = f(&lincomb(a, &u, b, &v));
        let (fu, fv) = (f(&u), f(&v));
        for i in 0..lhs.data().len() {
            prop_assert!((lhs.data()[i] - (a * fu.data()[i] + b * fv.data()[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_adjoint_identity(seed in any::<u64>(), method in methods(), ts in 2usize..6) {
        let mut r = rng(seed);
        let mesh = random_mesh(6, &mut r);
        let (w, h) = (13, 19);
        let s = TextureSampler::new(&mesh, method, (w, h), ts).unwrap();
        let d = random_signed(w, h, &mut r);
        let g = FacetTexture::from_vec(6, ts, random_signed(6 * ts * ts * ts, 1, &mut r).into_vec()).unwrap();
        let lhs = s.backward(&mesh, &g).unwrap().dot(&d);
        let rhs = g.dot(&s.forward(&mesh, &UvMap::new(d).unwrap()).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-9, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn trilinear_weights_sum_to_one(x in 0.0..1.0f64, y in 0.0..1.0f64, ts in 2usize..9) {
        let z = (1.0 - x - y).max(0.0);
        let s = x + y + z;
        let coord = [x / s, y / s, z / s].map(|c| c * (ts - 1) as f64);
        let total: f64 = trilinear_taps(0, coord, ts).iter().map(|t| t.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uv_traversal_coverage_dominates(seed in any::<u64>(), nf in 1usize..10, ts in 2usize..6) {
        let mut r = rng(seed);
        let mesh = random_mesh(nf, &mut r);
        let t = coverage_map(&mesh, (24, 24), ts, SamplingMethod::TensorTraversal).unwrap();
        let u = coverage_map(&mesh, (24, 24), ts, SamplingMethod::UvTraversal).unwrap();
        for (a, b) in t.flags().iter().zip(u.flags()) {
            if *a == CoverageFlag::Optimized {
                prop_assert_eq!(*b, CoverageFlag::Optimized);
            }
            if *b != CoverageFlag::Unowned {
                prop_assert_eq!(*b, CoverageFlag::Optimized);
            }
        }
    }

    #[test]
    fn rasterizer_is_linear_and_adjoint(seed in any::<u64>(), az in 0.0..360.0f64, el in -60.0..60.0f64, ts in 2usize..5) {
        let mut r = rng(seed);
        let mesh = primitives::box_vehicle([2.0, 1.0, 0.8]);
        let cam = CameraTransform::new(az, el, 5.0, 40, 32).unwrap();
        let n = 12 * ts * ts * ts;
        let t1 = FacetTexture::from_vec(12, ts, random_signed(n, 1, &mut r).into_vec()).unwrap();
        let t2 = FacetTexture::from_vec(12, ts, random_signed(n, 1, &mut r).into_vec()).unwrap();
        let sum: Vec<f64> = t1.data().iter().zip(t2.data()).map(|(a, b)| a + b).collect();
        let (r1, tape) = rasterize(&mesh, &t1, &cam).unwrap();
        let (r2, _) = rasterize(&mesh, &t2, &cam).unwrap();
        let (r12, _) = rasterize(&mesh, &FacetTexture::from_vec(12, ts, sum).unwrap(), &cam).unwrap();
        for i in 0..r1.image.data().len() {
            prop_assert!((r12.image.data()[i] - r1.image.data()[i] - r2.image.data()[i]).abs() < 1e-9);
        }
        let g = random_signed(40, 32, &mut r);
        let lhs = backward_rasterize(&tape, &g).unwrap().dot(&t2);
        prop_assert!((lhs - r2.image.dot(&g)).abs() < 1e-9);
        let (again, _) = rasterize(&mesh, &t1, &cam).unwrap();
        prop_assert!(again.image.data().iter().zip(r1.image.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn segment_composite_round_trip(seed in any::<u64>(), w in 1usize..20, h in 1usize..20) {
        let mut r = rng(seed);
        let i_in = random_image(w, h, &mut r);
        let bits: Vec<bool> = (0..w * h).map(|_| rand::Rng::gen_bool(&mut r, 0.4)).collect();
        let fg = ForegroundMask::from_vec(w, h, bits).unwrap();
        let (x_ref, b) = segment_scene(&i_in, &fg.to_scene_mask()).unwrap();
        let out = composite(&RenderedImage { image: x_ref, foreground: fg }, &b).unwrap();
        prop_assert!(out.data().iter().zip(i_in.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn fuse_identity_is_fixed_point(seed in any::<u64>()) {
        let mut r = rng(seed);
        let bits: Vec<bool> = (0..63).map(|_| rand::Rng::gen_bool(&mut r, 0.5)).collect();
        // A raw render is zero off the vehicle.
        let image = Image::from_fn(9, 7, |x, y| {
            let c = [rand::Rng::gen(&mut r), rand::Rng::gen(&mut r), rand::Rng::gen(&mut r)];
            if bits[y * 9 + x] { c } else { [0.0; 3] }
        });
        let x = RenderedImage { image, foreground: ForegroundMask::from_vec(9, 7, bits).unwrap() };
        let out = fuse(&x, &EnvFeatureMaps::identity(9, 7)).unwrap();
        prop_assert_eq!(out, x);
    }

    #[test]
    fn efe_loss_properties(seed in any::<u64>(), weight in 0.1..10.0f64) {
        let mut r = rng(seed);
        let gt = random_image(6, 5, &mut r);
        let ren = random_image(6, 5, &mut r);
        let l = efe_loss(&ren, &gt, weight).unwrap();
        prop_assert!(l >= 0.0);
        let at_gt = efe_loss(&gt, &gt, weight).unwrap();
        let n = gt.data().len() as f64;
        let entropy: f64 = gt.data().iter().map(|&y| {
            let p = y.clamp(1e-7, 1.0 - 1e-7);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        }).sum::<f64>() / n;
        prop_assert!((at_gt - weight * entropy).abs() < 1e-9);
        prop_assert!(at_gt <= l + 1e-12);
        let nudged = lincomb(0.97, &gt, 0.03, &ren);
        prop_assert!(at_gt <= efe_loss(&nudged, &gt, weight).unwrap() + 1e-12);
    }

    #[test]
    fn detection_score_and_attack_loss_ranges(seed in any::<u64>(), gt in boxes(), n in 0usize..8) {
        let mut r = rng(seed);
        let dets: Vec<Detection> = (0..n).map(|k| {
            let x = rand::Rng::gen_range(&mut r, 0.0..60.0);
            let y = rand::Rng::gen_range(&mut r, 0.0..60.0);
            Detection {
                bbox: BBox::new(x, y, x + 10.0, y + 8.0).unwrap(),
                objectness: rand::Rng::gen(&mut r),
                class_confidence: rand::Rng::gen(&mut r),
                source: k,
            }
        }).collect();
        let (s, _) = detection_score(&dets, &gt);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(attack_loss(s) >= 0.0);
        prop_assert_eq!(attack_loss(0.0), 0.0);
    }

    #[test]
    fn smooth_loss_invariances(seed in any::<u64>(), w in 2usize..12, h in 2usize..12, shift in -1.0..1.0f64) {
        let mut r = rng(seed);
        let uv = random_image(w, h, &mut r);
        let base = smooth_loss(&uv);
        prop_assert!((smooth_loss(&uv.map(|v| v + shift)) - base).abs() < 1e-12);
        let flip_h = Image::from_fn(w, h, |x, y| uv.get(w - 1 - x, y));
        let flip_v = Image::from_fn(w, h, |x, y| uv.get(x, h - 1 - y));
        prop_assert!((smooth_loss(&flip_h) - base).abs() < 1e-12);
        prop_assert!((smooth_loss(&flip_v) - base).abs() < 1e-12);
    }

    #[test]
    fn iou_properties(a in boxes(), b in boxes()) {
        let ab = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, iou(&b, &a));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weather_contracts_toward_fog_color(seed in any::<u64>(), fog in 0.0..100.0f64, c in 0.0..1.0f64) {
        let mut r = rng(seed);
        let img = random_image(8, 6, &mut r);
        let fc = [c, 1.0 - c, 0.3];
        let w = WeatherParams::new(90.0, fog, fc).unwrap();
        let out = apply_weather(&img, &w);
        let dist = |im: &Image| im.data().iter().enumerate().map(|(i, v)| (v - fc[i % 3]).abs()).fold(0.0, f64::max);
        prop_assert!((dist(&out) - (1.0 - fog / 100.0) * dist(&img)).abs() < 1e-12);
    }

    #[test]
    fn grid_plan_size(nw in 1usize..20, np in 1usize..25, nc in 1usize..130) {
        prop_assert_eq!(plan_grid(nw, np, nc).len(), nw * np * nc);
    }
}

#[test]
fn generated_masks_match_rasterizer_foreground() {
    let mesh = primitives::box_vehicle([2.0, 1.0, 0.8]);
    let uv = UvMap::random(32, 32, 5).unwrap();
    let cams: Vec<CameraTransform> = [0.0, 60.0, 200.0]
        .iter()
        .map(|&az| CameraTransform::new(az, 25.0, 5.0, 48, 48).unwrap())
        .collect();
    let weathers = [WeatherParams::clear(), WeatherParams::new(-30.0, 50.0, [0.6, 0.6, 0.7]).unwrap()];
    let placements = [Placement::new(0.0, 0.0), Placement::new(-20.0, 31.0)];
    let opts = GridOptions::default();
    let scenes = generate_grid(&mesh, &uv, &GlobalScalarModel::identity(), &weathers, &cams, &placements, &opts).unwrap();
    assert_eq!(scenes.len(), 2 * 2 * 3);
    let sampler = TextureSampler::new(&mesh, opts.method, (32, 32), opts.texture_size).unwrap();
    let tex = sampler.forward(&mesh, &uv).unwrap();
    for s in &scenes {
        let (x_nr, _) = rasterize(&mesh, &tex, &s.cam).unwrap();
        for y in 0..48 {
            for x in 0..48 {
                assert_eq!(s.mask.get(x, y) == 0.0, x_nr.foreground.get(x, y));
            }
        }
    }
}

#[test]
fn optimize_texture_is_reproducible() {
    let mesh = primitives::box_vehicle([2.0, 1.0, 0.8]);
    let cams = vec![CameraTransform::new(30.0, 20.0, 5.0, 32, 32).unwrap()];
    let scenes = generate_grid(
        &mesh,
        &UvMap::random(16, 16, 9).unwrap(),
        &GlobalScalarModel::identity(),
        &[WeatherParams::clear()],
        &cams,
        &[Placement::new(0.0, 0.0)],
        &GridOptions::default(),
    )
    .unwrap();
    let cfg = AttackConfig { uv_width: 16, uv_height: 16, epochs: 3, seed: 4, roa: RoaParams { seed: 4, ..RoaParams::default() }, ..AttackConfig::default() };
    let det = ToyDetector::seeded(2);
    let env = GlobalScalarModel::identity();
    let a = optimize_texture(&scenes, &mesh, &det, &env, &cfg).unwrap();
    let b = optimize_texture(&scenes, &mesh, &det, &env, &cfg).unwrap();
    assert!(a.uv.data().iter().zip(b.uv.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a.trace, b.trace);
}
