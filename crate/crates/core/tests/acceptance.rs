//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::Instant;

use systl::generators::{self, gen_csaszar, perturb, Family, FamilySpec};
use systl::harness::{genus_instance, verify_instance, InequalityReport};
use systl::homology::{build_basis, is_separating, oracle_is_separating};
use systl::mesh::EmbeddedMesh;
use systl::sweep::{coarea_check, trace_proof, Axis, ProofCase};
use systl::systole::{brute_force_systole, loewner_check, shortest_nonseparating, simple_cycles, LOEWNER_CONSTANT};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn handle_disks(refine: u32) -> Vec<FamilySpec> {
    [0.4, 0.2, 0.1, 0.05].map(|eps| FamilySpec::new(Family::HandleDisk { eps, refine })).to_vec()
}

fn tori(refine: u32) -> Vec<FamilySpec> {
    [(2.0, 0.5), (1.5, 0.3)].map(|(major, minor)| FamilySpec::new(Family::RevolutionTorus { major, minor, refine })).to_vec()
}

fn genus2(refine: u32) -> Vec<FamilySpec> {
    [0.2, 0.1].map(|eps| FamilySpec::new(Family::Genus2Disk { eps, refine })).to_vec()
}

fn oracle_equivalence() -> Outcome {
    let base = gen_csaszar();
    let mut worst = 0.0f64;
    let mut meshes = vec![base.clone()];
    for seed in 0..100 {
        meshes.push(perturb(&base, 0.05, seed).map_err(|e| e.to_string())?);
    }
    for (i, m) in meshes.iter().enumerate() {
        let fast = shortest_nonseparating(m).map_err(|e| e.to_string())?;
        let slow = brute_force_systole(m).map_err(|e| e.to_string())?;
        let diff = (fast.length - slow.length).abs();
        worst = worst.max(diff);
        check(diff <= 1e-12, format!("variant {i}: {} vs {}", fast.length, slow.length))?;
        check(!oracle_is_separating(m, &fast.witness).map_err(|e| e.to_string())?, format!("variant {i}: witness separates"))?;
    }
    Ok(format!("{} meshes, max |diff| = {worst:.2e}", meshes.len()))
}

fn small_meshes() -> Vec<(&'static str, EmbeddedMesh)> {
    let tet = EmbeddedMesh::new(3, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
        .expect("tetrahedron");
    let oct = EmbeddedMesh::new(
        3,
        vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0],
        vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]],
    )
    .expect("octahedron");
    vec![
        ("csaszar", gen_csaszar()),
        ("csaszar-jittered", perturb(&gen_csaszar(), 0.05, 11).expect("jitter")),
        ("clifford-3", generators::gen_clifford_torus(3).expect("clifford")),
        ("tetrahedron", tet),
        ("octahedron", oct),
        ("square", generators::gen_square()),
        ("tilted-square", generators::gen_tilted_square(PI / 4.0)),
    ]
}

fn classifier_agreement() -> Outcome {
    let mut total = 0;
    let mut names = Vec::new();
    for (name, m) in small_meshes() {
        check(m.num_edges() <= 30, format!("{name} has {} edges", m.num_edges()))?;
        let basis = build_basis(&m).map_err(|e| e.to_string())?;
        for (c, _) in simple_cycles(&m) {
            let fast = is_separating(&basis, &c).map_err(|e| e.to_string())?;
            let slow = oracle_is_separating(&m, &c).map_err(|e| e.to_string())?;
            check(fast == slow, format!("{name}: cycle {:?} classifier {fast} oracle {slow}", c.vertices()))?;
            total += 1;
        }
        names.push(name);
    }
    Ok(format!("{total} simple cycles on {} meshes agree", names.len()))
}

fn all_instances() -> Vec<FamilySpec> {
    let mut v = handle_disks(3);
    v.extend(tori(3));
    v.extend(genus2(3));
    v.extend([8, 16, 32, 64].map(|n| FamilySpec::new(Family::CliffordTorus { n })));
    v.push(FamilySpec::new(Family::Csaszar));
    v.push(FamilySpec::new(Family::UnitDisk { refine: 3 }));
    v
}

fn coarea() -> Outcome {
    let mut count = 0;
    for spec in all_instances() {
        let m = spec.build().map_err(|e| e.to_string())?;
        for axis in [Axis::X, Axis::Y] {
            let c = coarea_check(&m, axis);
            check(c.integral_rhs <= c.area_lhs + 1e-9, format!("{} {axis:?}: {} > {}", spec.name(), c.integral_rhs, c.area_lhs))?;
            count += 1;
        }
    }
    for m in [generators::gen_unit_disk(3).map_err(|e| e.to_string())?, generators::gen_square()] {
        for axis in [Axis::X, Axis::Y] {
            let c = coarea_check(&m, axis);
            check((c.integral_rhs - c.area_lhs).abs() <= 1e-9, format!("planar {axis:?}: {} vs {}", c.integral_rhs, c.area_lhs))?;
        }
    }
    for deg in [30.0f64, 45.0, 60.0] {
        let theta = deg.to_radians();
        let c = coarea_check(&generators::gen_tilted_square(theta), Axis::X);
        let r = c.integral_rhs / c.area_lhs;
        check((r - theta.cos()).abs() <= 1e-9, format!("tilt {deg}: ratio {r} vs {}", theta.cos()))?;
    }
    Ok(format!("{count} instance-axis pairs bounded; planar equality and cos θ at 30/45/60 degrees"))
}

fn loewner() -> Outcome {
    let mut ratios = Vec::new();
    for n in [8, 16, 32, 64] {
        let m = generators::gen_clifford_torus(n).map_err(|e| e.to_string())?;
        let r = loewner_check(&m, 0.0).map_err(|e| e.to_string())?;
        check((r.ratio - 1.0).abs() <= 1e-12, format!("n={n}: ratio {}", r.ratio))?;
        check(r.pass && r.ratio <= LOEWNER_CONSTANT, format!("n={n} fails"))?;
        ratios.push(format!("n={n}:{:.15}", r.ratio));
    }
    Ok(ratios.join(" "))
}

fn reports(specs: &[FamilySpec]) -> Result<Vec<InequalityReport>, String> {
    specs
        .iter()
        .map(|s| {
            let m = s.build().map_err(|e| e.to_string())?;
            if m.genus() >= 2 { genus_instance(&m, s.name(), Some(s), 1e6) } else { verify_instance(&m, s.name(), Some(s), 1000.0) }.map_err(|e| format!("{}: {e}", s.params()))
        })
        .collect()
}

fn stability(coarse: &[InequalityReport], fine: &[InequalityReport]) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (a, b) in coarse.iter().zip(fine) {
        let rel = (a.ratio - b.ratio).abs() / b.ratio;
        worst = worst.max(rel);
    }
    let max = |r: &[InequalityReport]| r.iter().map(|x| x.ratio).fold(0.0, f64::max);
    let max_rel = (max(coarse) - max(fine)).abs() / max(fine);
    check(worst <= 0.2 && max_rel <= 0.2, format!("ratio drifts by {worst:.3} between refine 2 and 3"))?;
    Ok(worst)
}

fn main_inequality() -> Outcome {
    let mut specs = handle_disks(3);
    specs.extend(tori(3));
    let fine = reports(&specs)?;
    let mut coarse_specs = handle_disks(2);
    coarse_specs.extend(tori(2));
    let coarse = reports(&coarse_specs)?;
    for r in &fine {
        check(r.pass && r.defect > 0.0 && r.consistent(), format!("{:?} fails with ratio {}", r.spec.as_ref().map(|s| s.params()), r.ratio))?;
    }
    let (max, arg) = fine.iter().map(|r| (r.ratio, format!("{} {}", r.instance, r.spec.as_ref().map(|s| s.params()).unwrap_or_default()))).fold((0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a });
    let drift = stability(&coarse, &fine)?;
    Ok(format!("{} instances pass M=1000, max ratio {max:.4} at {arg}, refine drift {:.2}%", fine.len(), 100.0 * drift))
}

fn tracer() -> Outcome {
    let mut specs = handle_disks(3);
    specs.extend(tori(3));
    specs.extend(handle_disks(2));
    let mut cases = Vec::new();
    for s in &specs {
        let m = s.build().map_err(|e| e.to_string())?;
        let basis = build_basis(&m).map_err(|e| e.to_string())?;
        let cert = trace_proof(&m, &basis).map_err(|e| e.to_string())?;
        let tag = s.params();
        let bound = cert.recheck().map_err(|e| format!("{tag}: {e}"))?;
        check(bound == cert.bound, format!("{tag}: recheck {bound} vs stored {}", cert.bound))?;
        check(cert.case != ProofCase::Inconclusive, format!("{tag}: no case certified"))?;
        check(cert.bound >= cert.ell.powi(2) / 1000.0 - cert.tol_area, format!("{tag}: bound {} below ℓ²/1000", cert.bound))?;
        check(cert.bound_holds, format!("{tag}: defect {} below bound {}", cert.defect, cert.bound))?;
        if cert.case == ProofCase::C {
            let c = &cert.construction;
            let (w, t1, t2) = (c.w_length.unwrap_or(f64::INFINITY), c.area_t1.unwrap_or(0.0), c.area_t2.unwrap_or(0.0));
            let l2 = cert.ell.powi(2);
            check(w < 0.9 * cert.ell + cert.tol, format!("{tag}: length(w) {w}"))?;
            check(t2 > l2 / 8.0 - cert.tol_area, format!("{tag}: area(T2) {t2}"))?;
            check(t1 >= PI - 0.81 / (4.0 * PI) * l2 - cert.tol_area, format!("{tag}: area(T1) {t1}"))?;
        }
        cases.push(cert.case.label());
    }
    Ok(format!("{} certificates re-checked, cases {}", cases.len(), cases.join("")))
}

fn genus_two() -> Outcome {
    let fine = reports(&genus2(3))?;
    let coarse = reports(&genus2(2))?;
    for r in &fine {
        let c = r.census.as_ref().ok_or("missing census")?;
        check(r.ratio.is_finite(), "ratio not finite")?;
        check(c.x.len() <= 2 && c.y.len() <= 2, format!("census {} x, {} y", c.x.len(), c.y.len()))?;
    }
    let drift = stability(&coarse, &fine)?;
    let ratios: Vec<String> = fine.iter().map(|r| format!("{:.4}", r.ratio)).collect();
    Ok(format!("ratios {}, refine drift {:.2}%", ratios.join(", "), 100.0 * drift))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_systl");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |args: &[&str]| -> Result<i32, String> {
        let out = Command::new(bin).current_dir(dir.path()).args(args).output().map_err(|e| e.to_string())?;
        Ok(out.status.code().unwrap_or(-1))
    };
    for f in ["a.smesh", "b.smesh"] {
        run(&["gen", "--family", "handle-disk", "--eps", "0.1", "--refine", "2", "--seed", "9", "--jitter", "0.1", "-o", f])?;
    }
    let grid = r#"[{"family":"handle_disk","eps":0.2,"refine":2},{"family":"revolution_torus","major":2,"minor":0.5,"refine":1,"seed":4,"jitter":0.05}]"#;
    fs::write(dir.path().join("grid.json"), grid).map_err(|e| e.to_string())?;
    for f in ["a.csv", "b.csv"] {
        check(run(&["family", "--grid", "grid.json", "-o", f])? == 0, "family run did not pass")?;
    }
    let read = |f: &str| fs::read(dir.path().join(f)).map_err(|e| e.to_string());
    check(read("a.smesh")? == read("b.smesh")?, "SMESH differs")?;
    check(read("a.csv")? == read("b.csv")?, "CSV differs")?;
    Ok("SMESH and CSV byte-identical across runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence (systole)", oracle_equivalence),
        ("separating classifier", classifier_agreement),
        ("PL co-area", coarea),
        ("Loewner check on grid tori", loewner),
        ("main inequality with M = 1000", main_inequality),
        ("proof tracer soundness", tracer),
        ("genus-2 report", genus_two),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
