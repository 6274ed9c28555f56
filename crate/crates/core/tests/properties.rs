use maskvec::geometry::{Point, StyleClass};
use maskvec::io::{parse_svg, write_svg};
use maskvec::raster::render;
use proptest::prelude::*;

mod common;

fn any_style() -> impl Strategy<Value = StyleClass> {
    (0..6usize).prop_map(|i| StyleClass::ALL[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integer_translation_shifts_the_render(
        seed in 0u64..10_000,
        style in any_style(),
        dx in -6i32..=6,
        dy in -6i32..=6,
    ) {
        let scene = common::random_scene(seed, 40, 4, style);
        let mut moved = scene.clone();
        for path in &mut moved.paths {
            *path = path.translated(Point::new(dx as f64, dy as f64));
        }
        let (a, b) = (render(&scene), render(&moved));
        let (w, h) = (scene.width as i32, scene.height as i32);
        for y in 0..h {
            for x in 0..w {
                let (tx, ty) = (x + dx, y + dy);
                if tx < 0 || ty < 0 || tx >= w || ty >= h {
                    continue;
                }
                let p = a.pixel(x as u32, y as u32);
                let q = b.pixel(tx as u32, ty as u32);
                for c in 0..4 {
                    prop_assert!((p[c] - q[c]).abs() < 1e-9, "pixel ({x},{y}) channel {c}: {} vs {}", p[c], q[c]);
                }
            }
        }
    }

    #[test]
    fn svg_text_is_a_fixed_point_after_one_round_trip(seed in 0u64..10_000, style in any_style()) {
        let scene = common::random_scene(seed, 48, 6, style);
        let text = write_svg(&scene);
        let back = parse_svg(&text).unwrap();
        prop_assert_eq!(back.paths.len(), scene.paths.len());
        for (p, q) in scene.paths.iter().zip(&back.paths) {
            prop_assert_eq!(p.style, q.style);
            prop_assert_eq!(p.group, q.group);
            prop_assert_eq!(p.closed, q.closed);
            for (u, v) in p.points.iter().zip(&q.points) {
                prop_assert!((u.x - v.x).abs() <= 5e-5 && (u.y - v.y).abs() <= 5e-5);
            }
        }
        prop_assert_eq!(write_svg(&back), text);
    }

    #[test]
    fn render_is_bit_identical_across_calls(seed in 0u64..10_000, style in any_style()) {
        let scene = common::random_scene(seed, 32, 5, style);
        let (a, b) = (render(&scene), render(&scene));
        prop_assert_eq!(a.data(), b.data());
    }
}
