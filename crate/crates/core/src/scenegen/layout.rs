use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::catalog::{ConceptTuple, PLATE};
use crate::seed::Rng;

pub const PLATE_JITTER: f64 = 0.05;
pub const FOOD_RADIUS: f64 = 0.05;
pub const PLACEMENT_OFFSET: f64 = 0.25;
pub const DRINK_JITTER: f64 = 0.03;
pub const TOOL_PAIR_SEPARATION: f64 = 0.06;
pub const TOOL_PAIR_JITTER: f64 = 0.03;
/// `tool3` sits in an annulus around the drink, outside the glass itself.
pub const NEXT_TO_MIN: f64 = 0.05;
pub const NEXT_TO_MAX: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub concept: String,
    pub centroid: [f64; 2],
}

/// Object layout in the unit square, y-up. Objects are ordered
/// plate, food, drink, tool1, tool2, tool3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    pub tuple: ConceptTuple,
}

pub const OBJECTS_PER_SCENE: usize = 6;

fn in_disc(rng: &mut Rng, min_r: f64, max_r: f64) -> [f64; 2] {
    // area-uniform radius between min_r and max_r
    let u: f64 = rng.random();
    let r = (min_r * min_r + u * (max_r * max_r - min_r * min_r)).sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    [r * theta.cos(), r * theta.sin()]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn scaled(v: [f64; 2], s: f64) -> [f64; 2] {
    [v[0] * s, v[1] * s]
}

fn clamp_unit(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0)]
}

/// Places the template objects around a jittered central plate.
pub fn layout_scene(tuple: &ConceptTuple, rng: &mut Rng) -> Scene {
    let plate = add([0.5, 0.5], in_disc(rng, 0.0, PLATE_JITTER));
    let food = add(plate, in_disc(rng, 0.0, FOOD_RADIUS));

    let drink_dir = tuple.dir1.offset();
    let drink = add(
        add(plate, scaled(drink_dir, PLACEMENT_OFFSET)),
        in_disc(rng, 0.0, DRINK_JITTER),
    );

    let tool_dir = tuple.dir2.offset();
    let perp = [-tool_dir[1], tool_dir[0]];
    let pair_centre = add(
        add(plate, scaled(tool_dir, PLACEMENT_OFFSET)),
        in_disc(rng, 0.0, TOOL_PAIR_JITTER),
    );
    let half = TOOL_PAIR_SEPARATION / 2.0;
    let tool1 = add(pair_centre, scaled(perp, half));
    let tool2 = add(pair_centre, scaled(perp, -half));

    let tool3 = add(drink, in_disc(rng, NEXT_TO_MIN, NEXT_TO_MAX));

    let placed = [
        (PLATE, plate),
        (tuple.food.as_str(), food),
        (tuple.drink.as_str(), drink),
        (tuple.tool1.as_str(), tool1),
        (tuple.tool2.as_str(), tool2),
        (tuple.tool3.as_str(), tool3),
    ];
    Scene {
        objects: placed
            .iter()
            .map(|&(concept, c)| SceneObject {
                concept: concept.to_string(),
                centroid: clamp_unit(c),
            })
            .collect(),
        tuple: tuple.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::catalog::{sample_concept_tuple, ConceptCatalog, Direction};
    use crate::seed;

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    fn tuple_with(dir1: Direction, dir2: Direction) -> ConceptTuple {
        let mut t = sample_concept_tuple(&ConceptCatalog::default(), &mut seed::rng(1)).unwrap();
        t.dir1 = dir1;
        t.dir2 = dir2;
        t
    }

    #[test]
    fn drink_left_of_plate() {
        let mut rng = seed::rng(10);
        for dir2 in [Direction::Right, Direction::Top, Direction::Bottom] {
            let s = layout_scene(&tuple_with(Direction::Left, dir2), &mut rng);
            assert!(s.objects[2].centroid[0] < s.objects[0].centroid[0]);
        }
    }

    #[test]
    fn top_and_bottom_are_y_up() {
        let mut rng = seed::rng(11);
        for _ in 0..50 {
            let s = layout_scene(&tuple_with(Direction::Top, Direction::Bottom), &mut rng);
            let plate = s.objects[0].centroid;
            assert!(s.objects[2].centroid[1] > plate[1]);
            assert!(s.objects[3].centroid[1] < plate[1]);
            assert!(s.objects[4].centroid[1] < plate[1]);
        }
    }

    #[test]
    fn placement_geometry() {
        let catalog = ConceptCatalog::default();
        let mut rng = seed::rng(12);
        for _ in 0..1000 {
            let t = sample_concept_tuple(&catalog, &mut rng).unwrap();
            let s = layout_scene(&t, &mut rng);
            assert_eq!(s.objects.len(), OBJECTS_PER_SCENE);
            let c: Vec<[f64; 2]> = s.objects.iter().map(|o| o.centroid).collect();
            assert!(c.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
            assert!(dist(c[0], [0.5, 0.5]) <= PLATE_JITTER + 1e-12);
            assert!(dist(c[1], c[0]) <= FOOD_RADIUS + 1e-12);
            let drink_anchor = add(c[0], scaled(t.dir1.offset(), PLACEMENT_OFFSET));
            assert!(dist(c[2], drink_anchor) <= DRINK_JITTER + 1e-12);
            assert!((dist(c[3], c[4]) - TOOL_PAIR_SEPARATION).abs() < 1e-12);
            assert!(dist(c[5], c[2]) <= NEXT_TO_MAX + 1e-12, "tool3 too far from drink");
            assert_eq!(s.objects[0].concept, PLATE);
        }
    }
}
