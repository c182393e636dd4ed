use morphsim::grid::{
    assign_eigenstrains, mesh_design, BendingUnitSpec, GridDesign, GridError, JointSpec, MaterialSet, Member,
    MemberKind, MeshConfig, Node,
};
use morphsim::material::MaterialCard;
use proptest::prelude::*;

fn cards() -> MaterialSet {
    let mut s = MaterialSet::new();
    s.insert("PLA".into(), MaterialCard::pla());
    s.insert("CFPLA".into(), MaterialCard::cfpla());
    s
}

fn node(id: &str, x: f64, y: f64, fixed: bool) -> Node {
    Node {
        id: id.into(),
        position: [x, y, 0.0],
        fixed,
    }
}

fn unit(id: &str, a: &str, b: &str, ratio: f64, sigma0: f64) -> Member {
    Member {
        id: id.into(),
        kind: MemberKind::BendingUnit,
        node_a: a.into(),
        node_b: b.into(),
        unit: Some(BendingUnitSpec::standard("PLA", "CFPLA", ratio, sigma0)),
        joint: None,
    }
}

/// Two units in an L joined by a short joint.
fn l_shape(r1: f64, r2: f64) -> GridDesign {
    let mut d = GridDesign::single_unit("l", BendingUnitSpec::standard("PLA", "CFPLA", r1, 0.203));
    d.nodes = vec![
        node("a", 0.0, 0.0, true),
        node("b", 100.0, 0.0, false),
        node("c", 110.0, 0.0, false),
        node("d", 110.0, 100.0, false),
    ];
    d.members = vec![
        unit("u1", "a", "b", r1, 0.203),
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
        unit("u2", "c", "d", r2, 0.132),
    ];
    d
}

#[test]
fn l_shape_round_trips_through_json() {
    let d = l_shape(1.0, 0.5);
    d.validate_with(&cards()).unwrap();
    assert_eq!(GridDesign::from_json(&d.to_json()).unwrap(), d);
}

#[test]
fn meshing_is_deterministic() {
    let d = l_shape(0.75, 0.4);
    let a = mesh_design(&d, &MeshConfig::default()).unwrap();
    let b = mesh_design(&d, &MeshConfig::default()).unwrap();
    assert_eq!(a, b);
    let ea = assign_eigenstrains(&a, &cards()).unwrap();
    let eb = assign_eigenstrains(&b, &cards()).unwrap();
    assert_eq!(ea, eb);
}

#[test]
fn disconnected_and_unfixed() {
    let mut d = l_shape(1.0, 1.0);
    d.members.remove(1);
    assert!(matches!(mesh_design(&d, &MeshConfig::default()), Err(GridError::DisconnectedGraph { components: 2 })));
    let mut d = l_shape(1.0, 1.0);
    d.nodes[0].fixed = false;
    assert!(matches!(mesh_design(&d, &MeshConfig::default()), Err(GridError::NoFixedNode)));
}

#[test]
fn unknown_material_is_reported() {
    let mut d = l_shape(1.0, 1.0);
    d.members[0].unit.as_mut().unwrap().actuator_material = "NYLON".into();
    assert!(matches!(d.validate_with(&cards()), Err(GridError::UnknownMaterial(_))));
}

#[test]
fn sigma_out_of_span_propagates() {
    let mut d = l_shape(1.0, 1.0);
    d.members[0].unit.as_mut().unwrap().sigma0 = 0.3;
    let mesh = mesh_design(&d, &MeshConfig::default()).unwrap();
    assert!(assign_eigenstrains(&mesh, &cards()).is_err());
}

#[test]
fn plain_design_has_thermal_field_only() {
    let d = l_shape(0.0, 0.0);
    let mesh = assign_eigenstrains(&mesh_design(&d, &MeshConfig::default()).unwrap(), &cards()).unwrap();
    let dt = d.delta_t();
    for e in &mesh.elements {
        assert!(!e.actuated);
        assert_eq!(e.eigencurvature, 0.0);
        for l in &e.layers {
            let card = &cards()[&l.material];
            assert!((l.eigenstrain - card.alpha_t * dt).abs() < 1e-15);
        }
    }
}

proptest! {
    #[test]
    fn element_lengths_sum_to_member_lengths(r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, n in 1usize..40) {
        let d = l_shape(r1, r2);
        let mesh = mesh_design(&d, &MeshConfig { n_min: n }).unwrap();
        let total: f64 = mesh.elements.iter().map(|e| e.length).sum();
        let want: f64 = d.members.iter().map(|m| d.member_length(m).unwrap()).sum();
        prop_assert!((total - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn transition_sits_on_a_boundary(r in 0.05f64..0.95, n in 2usize..40) {
        let d = GridDesign::single_unit("u", BendingUnitSpec::standard("PLA", "PLA", r, 0.1));
        let mesh = mesh_design(&d, &MeshConfig { n_min: n }).unwrap();
        let act: f64 = mesh.elements.iter().filter(|e| e.actuated).map(|e| e.length).sum();
        let cuts: Vec<f64> = mesh.elements.iter().map(|e| e.t_range[1] * 100.0).collect();
        prop_assert!(cuts.iter().any(|c| (c - act).abs() < 1e-9));
    }
}
