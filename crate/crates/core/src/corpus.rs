//! A fixed set of small instances shared by tests, benches and examples.

use crate::bodies::ConvexBody;
use crate::ellipsoids::Ellipsoid;
use crate::numerics::Matrix;

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: &'static str,
    pub body: ConvexBody,
    pub reference: Ellipsoid,
}

fn inst(name: &'static str, body: ConvexBody, reference: Ellipsoid) -> Instance {
    Instance { name, body, reference }
}

fn hexagon() -> ConvexBody {
    let facets = (0..3)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / 3.0;
            vec![t.cos(), t.sin()]
        })
        .collect();
    ConvexBody::polytope_h(facets).expect("hexagon")
}

pub fn instances() -> Vec<Instance> {
    let ball2 = Ellipsoid::unit_ball(2);
    let ball3 = Ellipsoid::unit_ball(3);
    let tilted = Ellipsoid::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).expect("spd");
    let shear = Matrix::from_rows(&[vec![1.0, 0.6], vec![0.0, 1.5]]).expect("2x2");
    vec![
        inst("square", ConvexBody::cube(2), ball2.clone()),
        inst("square_tilted", ConvexBody::cube(2), tilted.clone()),
        inst(
            "rectangle",
            ConvexBody::polytope_h(vec![vec![0.5, 0.0], vec![0.0, 1.0]]).expect("rectangle"),
            ball2.clone(),
        ),
        inst("cross2", ConvexBody::cross_polytope(2), ball2.clone()),
        inst("hexagon", hexagon(), tilted),
        inst("sheared_square", ConvexBody::cube(2).linear_image(&shear).expect("invertible"), ball2.clone()),
        inst("l3_disk", ConvexBody::lp_ball(2, 3.0, 1.0).expect("lp"), Ellipsoid::from_diag(&[1.0, 3.0]).expect("spd")),
        inst("cube3", ConvexBody::cube(3), Ellipsoid::from_diag(&[1.0, 2.0, 4.0]).expect("spd")),
        inst("cross3", ConvexBody::cross_polytope(3), ball3.clone()),
        inst(
            "slab3",
            ConvexBody::polytope_h(vec![
                vec![1.0, 0.2, 0.0],
                vec![0.0, 1.0, 0.3],
                vec![0.1, 0.0, 2.0],
                vec![0.7, 0.7, 0.0],
            ])
            .expect("polytope"),
            ball3,
        ),
    ]
}

/// The planar part of the corpus.
pub fn planar() -> Vec<Instance> {
    instances().into_iter().filter(|i| i.body.dim() == 2).collect()
}
