//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};
use std::time::Instant;

use losr_core::assemblage::{bwi_from_quantum, mdi_from_quantum, Assemblage, AssemblageKind, MdiAssemblage, A, B, B_IN};
use losr_core::catalog::{catalog, r_family, sigma_chsh, Axis};
use losr_core::choi::ChoiOperator;
use losr_core::functionals::{evaluate, make_sptp};
use losr_core::membership::{build_membership_test, certify, Certificate, MomentMatrix};
use losr_core::random::{random_channel, random_density, random_povm, seeded};
use losr_core::sdp::sample::sample_free;
use losr_core::sdp::{
    build_conversion, build_free_test, solve, Alphabets, AlternatingProjection, BlockValue, ConicProblem, Dims, FeasibilityVerdict, InteriorPoint, LinearMap,
    Status, Term,
};
use losr_core::strategies::{alice_count, bob_wiring_count, enumerate_alice, enumerate_bwi, AliceAlphabets, MAX_STRATEGIES};
use losr_core::tensor::{qubit, ComplexMatrix, Subsystem};
use losr_core::DMatrix;

const EPS: f64 = 1e-6;
const EPS_SWEEP: [f64; 3] = [1e-7, 1e-6, 1e-5];
const MIN_GAP: f64 = 1e-4;
const WITNESS_TOL: f64 = 1e-5;
const SPTP_ZERO_TOL: f64 = 1e-9;
const SPTP_PR_MIN: f64 = 0.1;
const SPTP_PR_EXACT: f64 = 3.0;
const PROPERTY_TOL: f64 = 1e-9;

struct Outcome {
    verdict: FeasibilityVerdict,
    deviation: Option<f64>,
}

impl Outcome {
    fn status(&self) -> Status {
        self.verdict.status
    }

    fn robust(&self) -> bool {
        EPS_SWEEP.iter().all(|&e| self.verdict.reclassify(e) == self.verdict.status)
    }

    fn gap(&self) -> f64 {
        self.verdict.infeasibility_gap.unwrap_or(0.0)
    }

    fn summary(&self) -> String {
        match (self.status(), self.deviation) {
            (Status::Infeasible, _) => format!("Infeasible gap {:.3e}", self.gap()),
            (s, Some(d)) => format!("{s} deviation {d:.1e}"),
            (s, None) => format!("{s} residual {:.1e}", self.verdict.diagnostics.residual),
        }
    }
}

fn convert(src: &Assemblage, dst: &Assemblage) -> Outcome {
    let conv = build_conversion(src, dst).expect("conversion builds");
    let verdict = solve(conv.problem(), EPS, &InteriorPoint::default());
    let deviation = verdict.witness().map(|w| conv.image_deviation(src, dst, w).expect("image"));
    Outcome { verdict, deviation }
}

fn named(name: &str) -> Assemblage {
    catalog(name).expect("catalog entry")
}

struct Report {
    failures: usize,
}

impl Report {
    fn record(&mut self, id: u32, title: &str, pass: bool, detail: String, started: Instant) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "{} {id:>2} {title}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
}

fn rotation_graph(r: &mut Report) {
    let t = Instant::now();
    let thetas = [("pi/2", FRAC_PI_2), ("pi/8", FRAC_PI_8), ("pi/16", PI / 16.0)];
    let axes = [Axis::X, Axis::Y, Axis::Z];
    let nodes: Vec<(String, f64, Assemblage)> = thetas
        .iter()
        .flat_map(|&(label, th)| {
            axes.iter()
                .map(move |&ax| (format!("r:{}:{label}", ax.as_char()), th, r_family(ax, th).expect("family").into()))
        })
        .collect();
    let mut wrong = Vec::new();
    let mut fragile = 0;
    let mut arrows = 0;
    for (i, (ni, ti, ai)) in nodes.iter().enumerate() {
        for (j, (nj, tj, aj)) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let o = convert(ai, aj);
            let expected = if ti >= tj { Status::Feasible } else { Status::Infeasible };
            if o.status() == Status::Feasible {
                arrows += 1;
            }
            if !o.robust() {
                fragile += 1;
            }
            if o.status() != expected {
                wrong.push(format!("{ni} -> {nj} {}", o.status()));
            }
        }
    }
    let detail = format!(
        "{arrows}/72 Feasible (expected 36), {} verdicts differ, {fragile} not robust over eps sweep{}",
        wrong.len(),
        first_few(&wrong)
    );
    r.record(1, "rotation family conversion graph", wrong.is_empty() && fragile == 0, detail, t);
}

fn first_few(v: &[String]) -> String {
    if v.is_empty() {
        String::new()
    } else {
        format!(" (e.g. {})", v.iter().take(3).cloned().collect::<Vec<_>>().join(", "))
    }
}

fn incomparable(r: &mut Report, id: u32, title: &str, a: &str, b: &str, min_gap: f64) {
    let t = Instant::now();
    let (sa, sb) = (named(a), named(b));
    let ab = convert(&sa, &sb);
    let ba = convert(&sb, &sa);
    let pass = [&ab, &ba].iter().all(|o| o.status() == Status::Infeasible && o.gap() > min_gap && o.robust());
    r.record(id, title, pass, format!("{a} -> {b} {}; {b} -> {a} {}", ab.summary(), ba.summary()), t);
}

fn pr_prime_versus_aq(r: &mut Report) {
    let t = Instant::now();
    let (pr, aq) = (named("sigma-pr-prime"), named("sigma-aq"));
    let fwd = convert(&pr, &aq);
    let back = convert(&aq, &pr);
    let pass = fwd.status() == Status::Feasible
        && fwd.deviation.is_some_and(|d| d <= WITNESS_TOL)
        && back.status() == Status::Infeasible
        && fwd.robust()
        && back.robust();
    r.record(
        4,
        "sigma-pr-prime -> sigma-aq only",
        pass,
        format!("forward {}; backward {}", fwd.summary(), back.summary()),
        t,
    );
}

fn bell_measurement() -> Vec<ComplexMatrix> {
    let phi = qubit::bell_state(B, B_IN);
    let rest = &ComplexMatrix::identity(phi.subsystems().to_vec()).expect("identity") - &phi;
    vec![phi, rest]
}

fn alice_paulis() -> Vec<Vec<ComplexMatrix>> {
    (0..3).map(|ax| (0..2).map(|a| qubit::pauli_effect(ax, a, A)).collect()).collect()
}

fn realised_witness() -> (f64, f64, Certificate) {
    let psi = qubit::bell_state(A, B);
    let bob = bell_measurement();
    let n: MdiAssemblage = mdi_from_quantum(&psi, &alice_paulis(), &bob).expect("quantum mdi");
    let g = MomentMatrix::for_assemblage(&n)
        .from_realization(&psi, &alice_paulis(), &bob, A, B, B_IN)
        .expect("moments");
    let residual = build_membership_test(&n)
        .expect("membership")
        .max_residual(&[BlockValue::Hermitian(g.clone())])
        .expect("residual");
    let (c, _) = certify(&n, EPS, &InteriorPoint::default()).expect("certify");
    (residual, g.min_eigenvalue(), c)
}

fn membership(r: &mut Report) {
    let t = Instant::now();
    let ip = InteriorPoint::default();
    let (ptp, v) = certify(named("n-ptp").as_mdi().expect("mdi"), EPS, &ip).expect("certify");
    let mut free_ok = 0;
    for seed in 0..20 {
        let n = sample_free(AssemblageKind::Mdi, &Alphabets::default(), &Dims::default(), seed).expect("sample");
        let (c, _) = certify(n.as_mdi().expect("mdi"), EPS, &ip).expect("certify");
        free_ok += (c == Certificate::QuantumCompatibleAtLevel1) as usize;
    }
    let (residual, min_eig, realised) = realised_witness();
    let witness_ok = residual <= PROPERTY_TOL && min_eig >= -PROPERTY_TOL && realised == Certificate::QuantumCompatibleAtLevel1;
    let pass = ptp == Certificate::PostQuantum && free_ok == 20 && witness_ok;
    let detail = format!(
        "n-ptp {} (residual {:.1e}); {free_ok}/20 free samples compatible; realised moment matrix residual {residual:.1e}, min eigenvalue {min_eig:.1e}, {}",
        ptp.as_str(),
        v.diagnostics.residual,
        realised.as_str()
    );
    r.record(7, "level-1 quantum membership", pass, detail, t);
}

fn sptp(r: &mut Report) {
    let t = Instant::now();
    let f = make_sptp();
    let on_ptp = evaluate(&f, named("sigma-ptp").as_bwi().expect("bwi")).expect("evaluate");
    let on_pr = evaluate(&f, named("sigma-pr").as_bwi().expect("bwi")).expect("evaluate");
    let mut rng = seeded(8);
    let mut lowest = f64::INFINITY;
    for k in 0..1000u64 {
        let s = if k % 2 == 0 {
            let rho = random_density(&mut rng, vec![Subsystem::new(A, 2), Subsystem::new(B, 2)]);
            let povm: Vec<Vec<ComplexMatrix>> = (0..3).map(|_| random_povm(&mut rng, 2, vec![Subsystem::new(A, 2)])).collect();
            let xi: Vec<ChoiOperator> = (0..2)
                .map(|_| random_channel(&mut rng, vec![Subsystem::new(B, 2)], vec![Subsystem::new("B'", 2)], 2))
                .collect();
            bwi_from_quantum(&rho, &povm, &xi).expect("quantum bwi").into()
        } else {
            sample_free(AssemblageKind::Bwi, &Alphabets { na: 2, nx: 3, ny: 2, nb: 2 }, &Dims::default(), k).expect("sample")
        };
        lowest = lowest.min(evaluate(&f, s.as_bwi().expect("bwi")).expect("evaluate"));
    }
    let pass = on_ptp.abs() <= SPTP_ZERO_TOL && lowest >= -SPTP_ZERO_TOL && on_pr > SPTP_PR_MIN && (on_pr - SPTP_PR_EXACT).abs() <= SPTP_ZERO_TOL;
    r.record(
        8,
        "S_PTP functional",
        pass,
        format!("sigma-ptp {on_ptp:.2e}; sigma-pr {on_pr:.12}; min over 1000 samples {lowest:.3e}"),
        t,
    );
}

fn standard_steering(sigma: &[Vec<ComplexMatrix>]) -> ConicProblem {
    let (nx, na, d) = (sigma.len(), sigma[0].len(), sigma[0][0].dim());
    let mut p = ConicProblem::new("standard steering");
    let count = na.pow(nx as u32);
    let blocks: Vec<_> = (0..count).map(|l| p.add_psd(format!("sigma_{l}"), vec![Subsystem::new(B, d)])).collect();
    let id = p.add_map(LinearMap::identity(d * d));
    for x in 0..nx {
        for a in 0..na {
            let terms = (0..count)
                .filter(|l| (l / na.pow(x as u32)) % na == a)
                .map(|l| Term {
                    block: blocks[l],
                    map: id,
                    scale: 1.0,
                })
                .collect();
            p.add_equality(format!("a={a}, x={x}"), terms, &sigma[x][a]).expect("equality");
        }
    }
    p
}

fn properties(r: &mut Report) {
    let t = Instant::now();
    let ip = InteriorPoint::default();
    let mut notes = Vec::new();
    let free_ok = (0..50)
        .filter(|&seed| {
            let a = sample_free(AssemblageKind::Channel, &Alphabets::default(), &Dims::default(), seed).expect("sample");
            solve(&build_free_test(&a).expect("free test"), EPS, &ip).status == Status::Feasible
        })
        .count();
    notes.push(format!("{free_ok}/50 free channel samples Feasible"));

    let chsh = sigma_chsh().expect("chsh");
    let sigma: Vec<Vec<ComplexMatrix>> = (0..chsh.nx())
        .map(|x| (0..chsh.na()).map(|a| chsh.element(a, x, 0).clone()).collect())
        .collect();
    let mats: Vec<DMatrix<_>> = sigma.iter().flat_map(|row| row.iter().map(|m| m.data().clone())).collect();
    let as_channel: Assemblage = losr_core::assemblage::ChannelAssemblage::from_matrices(chsh.na(), chsh.nx(), 1, chsh.d(), mats)
        .expect("channel")
        .into();
    let sdp1 = solve(&build_free_test(&as_channel).expect("free test"), EPS, &ip).status;
    let oracle = standard_steering(&sigma);
    let oracle_ip = solve(&oracle, EPS, &ip).status;
    let oracle_ap = solve(&oracle, EPS, &AlternatingProjection::default()).status;
    let steering_ok = sdp1 == Status::Infeasible && oracle_ip == Status::Infeasible && oracle_ap == Status::Infeasible;
    notes.push(format!("steering data {sdp1}, oracle {oracle_ip}/{oracle_ap}"));

    let mut worst_choi: f64 = 0.0;
    let mut worst_link: f64 = 0.0;
    let mut worst_embed: f64 = 0.0;
    let mut embed_disagree = 0;
    let sub = |l: &str, d: usize| vec![Subsystem::new(l, d)];
    for seed in 0..30u64 {
        let mut rng = seeded(1000 + seed);
        let (da, db, dc) = (1 + seed as usize % 3, 1 + (seed as usize / 3) % 3, 2);
        let f = random_channel(&mut rng, sub("a", da), sub("b", db), 2);
        let g = random_channel(&mut rng, sub("b", db), sub("c", dc), 2);
        let rebuilt = ChoiOperator::from_map(sub("a", da), sub("b", db), |rho| f.apply(rho)).expect("choi");
        worst_choi = worst_choi.max(rebuilt.canonical_matrix().max_abs_diff(&f.canonical_matrix()));
        let rho = random_density(&mut rng, sub("a", da));
        let direct = g.apply(&f.apply(&rho).expect("apply")).expect("apply");
        worst_link = worst_link.max(f.link(&g).expect("link").apply(&rho).expect("apply").max_abs_diff(&direct));

        let s = vec![Subsystem::new("a", 2), Subsystem::new("b", 2)];
        let shift = 0.02 + 0.3 * (seed as f64 / 30.0) * (seed % 2) as f64;
        let m = &random_density(&mut rng, s.clone()) - &ComplexMatrix::identity(s).expect("identity").scale(shift);
        let complex_min = m.min_eigenvalue();
        let y: DMatrix<f64> = m.real_embed().expect("embed");
        let real_min = y.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        worst_embed = worst_embed.max((real_min - complex_min).abs());
        embed_disagree += ((real_min >= -PROPERTY_TOL) != (complex_min >= -PROPERTY_TOL)) as usize;
    }
    let props_ok = worst_choi <= PROPERTY_TOL && worst_link <= PROPERTY_TOL && worst_embed <= PROPERTY_TOL && embed_disagree == 0;
    notes.push(format!("choi {worst_choi:.1e}, link {worst_link:.1e}, embedding {worst_embed:.1e}"));
    r.record(9, "property suite", free_ok == 50 && steering_ok && props_ok, notes.join("; "), t);
}

fn strategy_counts(r: &mut Report) {
    let t = Instant::now();
    let mut checked = 0;
    let mut bad = Vec::new();
    for na in 1..=3 {
        for nx in 1..=3 {
            for na_target in 1..=3 {
                for nx_target in 1..=3 {
                    let al = AliceAlphabets { na, nx, na_target, nx_target };
                    let alice = (na_target as u128).pow((na * nx_target) as u32) * (nx as u128).pow(nx_target as u32);
                    let enumerated = enumerate_alice(al).expect("enumerate").len() as u128;
                    checked += 1;
                    if enumerated != alice || alice_count(al) != alice {
                        bad.push(format!("{al:?}"));
                    }
                    for ny in 1..=3 {
                        for ny_t in 1..=3 {
                            let want = alice * (ny as u128).pow(ny_t as u32);
                            let got = match enumerate_bwi(al, ny, ny_t) {
                                Ok(v) => v.len() as u128,
                                Err(_) if want > MAX_STRATEGIES => want,
                                Err(e) => panic!("{e}"),
                            };
                            checked += 1;
                            if got != want || alice_count(al) * bob_wiring_count(ny, ny_t) != want {
                                bad.push(format!("{al:?} {ny} {ny_t}"));
                            }
                        }
                    }
                }
            }
        }
    }
    r.record(
        10,
        "strategy counts",
        bad.is_empty(),
        format!("{checked} alphabet choices, {} mismatches", bad.len()),
        t,
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    rotation_graph(&mut r);
    incomparable(&mut r, 2, "i-pr and i-ptp incomparable", "i-pr", "i-ptp", MIN_GAP);
    incomparable(&mut r, 3, "sigma-ptp and sigma-pr incomparable", "sigma-ptp", "sigma-pr", 0.0);
    pr_prime_versus_aq(&mut r);
    incomparable(&mut r, 5, "sigma-chsh and sigma-aq incomparable", "sigma-chsh", "sigma-aq", 0.0);
    incomparable(&mut r, 6, "n-pr and n-ptp incomparable", "n-pr", "n-ptp", 0.0);
    membership(&mut r);
    sptp(&mut r);
    properties(&mut r);
    strategy_counts(&mut r);
    println!("{} of 10 criteria failed", r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
