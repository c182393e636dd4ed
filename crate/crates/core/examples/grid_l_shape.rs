//! Two-stage triggering simulation of an L-shaped grid: two bending units
//! joined by a short CF-PLA joint, then an OBJ dump of the final shape.
//!
//! ```text
//! cargo run -p morphsim --example grid_l_shape
//! ```

use morphsim::grid::{BendingUnitSpec, GridDesign, JointSpec, MaterialSet, Member, MemberKind, MeshConfig, Node};
use morphsim::material::MaterialCard;
use morphsim::sim::{obj_polylines, run_sequential, SolverConfig};

fn node(id: &str, x: f64, y: f64, fixed: bool) -> Node {
    Node {
        id: id.into(),
        position: [x, y, 0.0],
        fixed,
    }
}

fn unit(id: &str, a: &str, b: &str, ratio: f64) -> Member {
    Member {
        id: id.into(),
        kind: MemberKind::BendingUnit,
        node_a: a.into(),
        node_b: b.into(),
        unit: Some(BendingUnitSpec::standard("PLA", "CFPLA", ratio, 0.203)),
        joint: None,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cards = MaterialSet::new();
    cards.insert("PLA".into(), MaterialCard::pla());
    cards.insert("CFPLA".into(), MaterialCard::cfpla());

    let mut d = GridDesign::single_unit("l_shape", BendingUnitSpec::standard("PLA", "CFPLA", 1.0, 0.203));
    d.nodes = vec![
        node("a", 0.0, 0.0, true),
        node("b", 100.0, 0.0, false),
        node("c", 110.0, 0.0, false),
        node("d", 110.0, 100.0, false),
    ];
    d.members = vec![
        unit("u1", "a", "b", 1.0),
        Member {
            id: "j1".into(),
            kind: MemberKind::Joint,
            node_a: "b".into(),
            node_b: "c".into(),
            unit: None,
            joint: Some(JointSpec {
                width: 7.2,
                thickness: 4.0,
                material: "CFPLA".into(),
            }),
        },
        unit("u2", "c", "d", 0.5),
    ];

    let r = run_sequential(&d, &cards, &MeshConfig { n_min: 16 }, &SolverConfig::default())?;
    println!("{} elements, {} dofs", r.mesh.elements.len(), r.mesh.n_dofs());
    for m in ["u1", "u2"] {
        println!(
            "{m}: end distance stage A {:.3} mm, stage B {:.3} mm",
            r.stage_a.member_end_distance(&r.mesh, m)?,
            r.stage_b.member_end_distance(&r.mesh, m)?
        );
    }
    let tip = r.stage_b.member_point(&r.mesh, "u2", 1.0)?;
    println!("free corner after stage B: ({:.2}, {:.2}, {:.2}) mm\n", tip[0], tip[1], tip[2]);
    print!("{}", obj_polylines(&r.stage_b, &r.mesh).lines().take(6).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
