use losr_core::assemblage::{Assemblage, AssemblageKind};
use losr_core::catalog::{catalog, r_family, sigma_ptp, Axis, CatalogName};
use losr_core::membership::{certify, Certificate};
use losr_core::sdp::sample::sample_free;
use losr_core::sdp::{build_conversion, build_free_test, solve, Alphabets, Dims, InteriorPoint, Status};

const EPS: f64 = 1e-6;

fn free(kind: AssemblageKind, al: Alphabets, dims: Dims, seed: u64) -> Assemblage {
    sample_free(kind, &al, &dims, seed).unwrap()
}

fn converts(src: &Assemblage, dst: &Assemblage) -> (Status, Option<f64>) {
    let conv = build_conversion(src, dst).unwrap();
    let v = solve(conv.problem(), EPS, &InteriorPoint::default());
    let dev = v.witness().map(|w| conv.image_deviation(src, dst, w).unwrap());
    (v.status, dev)
}

#[test]
fn sampled_free_channels_are_free() {
    let al = Alphabets {
        na: 2,
        nx: 2,
        ..Default::default()
    };
    for seed in 0..50 {
        let a = free(AssemblageKind::Channel, al, Dims::default(), seed);
        let v = solve(&build_free_test(&a).unwrap(), EPS, &InteriorPoint::default());
        assert_eq!(v.status, Status::Feasible, "seed {seed}: {:?}", v.diagnostics);
    }
}

#[test]
fn sampled_free_bwi_and_mdi_are_free() {
    for seed in 0..10 {
        for kind in [AssemblageKind::Bwi, AssemblageKind::Mdi] {
            let a = free(kind, Alphabets::default(), Dims::default(), seed);
            let v = solve(&build_free_test(&a).unwrap(), EPS, &InteriorPoint::default());
            assert_eq!(v.status, Status::Feasible, "{kind:?} seed {seed}");
        }
    }
}

#[test]
fn conversion_is_reflexive_with_accurate_witness() {
    let al = Alphabets { na: 2, nx: 2, ny: 1, nb: 2 };
    let items = [
        catalog("sigma-chsh").unwrap(),
        free(AssemblageKind::Bwi, al, Dims::default(), 3),
        free(AssemblageKind::Channel, al, Dims { d_in: 2, d_out: 1 }, 4),
    ];
    for a in &items {
        let (s, dev) = converts(a, a);
        assert_eq!(s, Status::Feasible, "{:?}", a.kind());
        assert!(dev.unwrap() <= 10.0 * EPS, "{dev:?}");
    }
}

#[test]
fn every_source_reaches_a_free_target() {
    let al = Alphabets { na: 2, nx: 2, ny: 1, nb: 2 };
    let target = free(AssemblageKind::Bwi, al, Dims::default(), 11);
    for src in [catalog("sigma-chsh").unwrap(), free(AssemblageKind::Bwi, al, Dims::default(), 12)] {
        let (s, dev) = converts(&src, &target);
        assert_eq!(s, Status::Feasible);
        assert!(dev.unwrap() <= 10.0 * EPS);
    }
}

#[test]
fn a_free_source_does_not_reach_a_resource() {
    let al = Alphabets { na: 2, nx: 2, ny: 1, nb: 2 };
    let src = free(AssemblageKind::Bwi, al, Dims::default(), 5);
    let (s, _) = converts(&src, &catalog("sigma-chsh").unwrap());
    assert_eq!(s, Status::Infeasible);
}

#[test]
fn rotation_family_conversions_compose() {
    let theta = [std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_8, std::f64::consts::PI / 16.0];
    let nodes: Vec<Assemblage> = theta.iter().map(|&t| r_family(Axis::X, t).unwrap().into()).collect();
    let mut ok = [[false; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let (s, dev) = converts(&nodes[i], &nodes[j]);
                assert_ne!(s, Status::Indeterminate, "{i} -> {j}");
                ok[i][j] = s == Status::Feasible;
                if ok[i][j] {
                    assert!(dev.unwrap() <= 10.0 * EPS);
                }
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                if i != j && j != k && i != k && ok[i][j] && ok[j][k] {
                    assert!(ok[i][k], "{i} -> {j} -> {k}");
                }
            }
        }
    }
}

#[test]
fn free_mdi_passes_the_quantum_relaxation() {
    for seed in 0..5 {
        let n = free(AssemblageKind::Mdi, Alphabets::default(), Dims::default(), seed);
        let (c, _) = certify(n.as_mdi().unwrap(), EPS, &InteriorPoint::default()).unwrap();
        assert_eq!(c, Certificate::QuantumCompatibleAtLevel1, "seed {seed}");
    }
}

#[test]
fn catalog_entries_satisfy_their_invariants() {
    let mut names: Vec<String> = CatalogName::FIXED.iter().map(|s| s.to_string()).collect();
    names.extend(["r:x:pi/2", "r:y:pi/8", "r:z:pi/16"].map(String::from));
    for name in names {
        let report = catalog(&name).unwrap().validate(1e-9);
        assert!(report.all_passed(), "{name}: {:?}", report.failures().collect::<Vec<_>>());
    }
}

#[test]
fn second_bob_input_is_the_transpose() {
    let s = sigma_ptp().unwrap();
    for a in 0..s.na() {
        for x in 0..s.nx() {
            let d = (s.element(a, x, 0).data().transpose() - s.element(a, x, 1).data()).norm();
            assert!(d < 1e-12);
        }
    }
}
