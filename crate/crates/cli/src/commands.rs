//! One handler per subcommand. Each returns an [`Outcome`]; library errors
//! that are failed checks become a false verdict in `main`.

use std::path::{Path, PathBuf};

use isoclinic_core::construct::{
    graph_projection, kestelman_family, omega_commuting_generators, p_infinity,
    two_adic_valuation,
};
use isoclinic_core::io::{
    read_cmat, read_mum_bundle, write_canonical_bundle, write_cmat, write_family_bundle,
    write_mum_bundle, FamilyManifest,
};
use isoclinic_core::isoclinic::{canonical_angles, isoclinic_family_check};
use isoclinic_core::kl::{kl_classic_check, kl_general_check};
use isoclinic_core::linalg::{
    check_projection, orthonormal_basis, projection_from_subspace,
    spectral_norm, trace, ComplexMatrix, Subspace,
};
use isoclinic_core::mum::{
    canonical_form_extract, canonical_relations_check, measurement_check, mum_check,
    mum_from_construction,
};
use isoclinic_core::pauli::{
    parse_pauli_list, stabilizer_projection, verify_stabilizer_isoclinic, ErrorClass,
    StabilizerGroup,
};
use isoclinic_core::{Error, Result, Tolerance};
use serde_json::{json, Value};

use crate::report::Outcome;

/// How an input matrix describes a subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Interpretation {
    /// Column span of the matrix.
    Span,
    /// Range of an orthogonal projection (validated).
    Projection,
}

fn load_subspace(path: &Path, how: Interpretation, index: usize, tol: &Tolerance) -> Result<Subspace> {
    let m = read_cmat(path)?;
    if how == Interpretation::Projection {
        check_projection(&m, index, tol)?;
    }
    orthonormal_basis(&m, tol)
}

fn load_projection(path: &Path, how: Interpretation, index: usize, tol: &Tolerance) -> Result<ComplexMatrix> {
    Ok(projection_from_subspace(&load_subspace(path, how, index, tol)?))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<ComplexMatrix>> {
    paths.iter().map(|p| read_cmat(p)).collect()
}

fn real_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

fn complex_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn angles(a: &Path, b: &Path, how: Interpretation, tol: &Tolerance) -> Result<Outcome> {
    let v = load_subspace(a, how, 0, tol)?;
    let w = load_subspace(b, how, 1, tol)?;
    let spectrum = canonical_angles(&v, &w)?;
    let cos_squared: Vec<f64> = spectrum.angles.iter().map(|t| t.cos().powi(2)).collect();
    let isoclinic = v.dim() == w.dim() && tol.accepts(spectrum.spread(), 1.0);
    Ok(Outcome::pass(
        0.0,
        json!({
            "dim_a": v.dim(),
            "dim_b": w.dim(),
            "angles": spectrum.angles,
            "cos_squared": cos_squared,
            "spread": spectrum.spread(),
            "isoclinic": isoclinic,
        }),
    ))
}

pub fn isoclinic_check(inputs: &[PathBuf], how: Interpretation, tol: &Tolerance) -> Result<Outcome> {
    let ps = inputs
        .iter()
        .enumerate()
        .map(|(i, p)| load_projection(p, how, i, tol))
        .collect::<Result<Vec<_>>>()?;
    let report = isoclinic_family_check(&ps, tol)?;
    let failures: Vec<Value> = report
        .failing_pairs
        .iter()
        .map(|f| json!({ "indices": [f.i, f.j], "residual": f.residual }))
        .collect();
    Ok(Outcome {
        verdict: report.verdict,
        max_residual: report.worst_residual,
        payload: json!({
            "rank": report.rank,
            "lambda_matrix": real_rows(&report.lambda_matrix),
            "residuals": real_rows(&report.residuals),
            "failing_pairs": failures,
        }),
        artifacts_written: Vec::new(),
    })
}

pub fn kl_check(
    code: &Path,
    ops: &[PathBuf],
    classic: bool,
    out: Option<&Path>,
    tol: &Tolerance,
) -> Result<Outcome> {
    let p_c = read_cmat(code)?;
    let ops = load_all(ops)?;
    if classic {
        let c = kl_classic_check(&ops, &p_c, tol)?;
        return Ok(Outcome::pass(
            c.residual,
            json!({
                "mode": "classic",
                "lambdas": complex_rows(&c.lambdas),
                "lambda_matrix_positive": c.is_positive,
                "min_eigenvalue": c.min_eigenvalue,
            }),
        ));
    }
    let w = kl_general_check(&ops, &p_c, tol)?;
    let n = w.n;
    let nontrivial: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| w.nontriviality(i, j)).collect())
        .collect();
    let mut written = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        for i in 0..n {
            for j in 0..n {
                let path = dir.join(format!("u_{i}_{j}.cmat.json"));
                write_cmat(&path, w.unitary(i, j))?;
                written.push(path);
            }
        }
    }
    Ok(Outcome::pass(
        w.max_residual(),
        json!({
            "mode": "general",
            "lambdas": complex_rows(&w.lambdas),
            "residuals": real_rows(&w.residuals),
            "unitary_nontriviality": nontrivial,
        }),
    )
    .with_artifacts(written))
}

fn parse_group(generators: &str) -> Result<StabilizerGroup> {
    StabilizerGroup::parse(generators)
}

pub fn stabilizer_project(generators: &str, out: Option<&Path>) -> Result<Outcome> {
    let s = parse_group(generators)?;
    let p = stabilizer_projection(&s)?;
    let expected = 1usize << s.logical_qubits();
    let tr = trace(&p);
    let residual = (tr.re - expected as f64).abs().max(tr.im.abs());
    let mut written = Vec::new();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join("projection.cmat.json");
        write_cmat(&path, &p)?;
        written.push(path);
    }
    Ok(Outcome::pass(
        residual,
        json!({
            "qubits": s.num_qubits(),
            "generators": s.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "logical_qubits": s.logical_qubits(),
            "code_dimension": expected,
            "trace": tr.re,
        }),
    )
    .with_artifacts(written))
}

fn class_name(c: ErrorClass) -> &'static str {
    match c {
        ErrorClass::StabilizerCoset => "stabilizer_coset",
        ErrorClass::Logical => "logical",
        ErrorClass::Detectable => "detectable",
    }
}

pub fn stabilizer_classify(generators: &str, errors: &str) -> Result<Outcome> {
    let s = parse_group(generators)?;
    let errors = parse_pauli_list(errors)?;
    let rows = errors
        .iter()
        .map(|e| {
            let c = s.classify(e)?;
            Ok(json!({ "error": e.to_string(), "class": class_name(c.class), "phase": c.phase }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::pass(0.0, json!({ "classes": rows })))
}

pub fn stabilizer_verify(generators: &str, errors: &str, tol: &Tolerance) -> Result<Outcome> {
    let s = parse_group(generators)?;
    let errors = parse_pauli_list(errors)?;
    let r = verify_stabilizer_isoclinic(&s, &errors, tol)?;
    let m = errors.len();
    let classes: Vec<Vec<&str>> = (0..m)
        .map(|i| (0..m).map(|j| class_name(r.pair_classes[(i, j)].0)).collect())
        .collect();
    let mut failures: Vec<Value> = r
        .inconsistent_pairs
        .iter()
        .map(|&(i, j)| json!({ "indices": [i, j], "residual": r.witness.nontriviality(i, j) }))
        .collect();
    if let Some(f) = &r.family {
        failures.extend(
            f.failing_pairs
                .iter()
                .map(|p| json!({ "indices": [p.i, p.j], "residual": p.residual })),
        );
    }
    let max_residual = r
        .family
        .as_ref()
        .map_or(0.0, |f| f.worst_residual)
        .max(r.witness.max_residual());
    Ok(Outcome {
        verdict: r.isoclinic && r.consistent,
        max_residual,
        payload: json!({
            "isoclinic": r.isoclinic,
            "consistent": r.consistent,
            "pair_classes": classes,
            "lambdas": complex_rows(&r.witness.lambdas),
            "kl_nontrivial_pairs": r.kl_nontrivial_pairs,
            "failing_pairs": failures,
        }),
        artifacts_written: Vec::new(),
    })
}

fn anticommutation_residual(members: &[ComplexMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            worst = worst.max(spectral_norm(&(a * b + b * a)));
        }
    }
    worst
}

pub fn construct_anticommuting(m: usize, out: Option<&Path>) -> Result<Outcome> {
    let family = kestelman_family(m)?;
    let residual = anticommutation_residual(&family.members);
    let mut written = Vec::new();
    if let Some(dir) = out {
        let manifest = FamilyManifest {
            kind: "anticommuting".into(),
            d: 2,
            dim: m,
            count: family.members.len(),
            omega: [-1.0, 0.0],
        };
        written = write_family_bundle(dir, &manifest, &family.members)?;
    }
    Ok(Outcome::pass(
        residual,
        json!({
            "m": m,
            "q": two_adic_valuation(m),
            "count": family.members.len(),
            "anticommutation_residual": residual,
        }),
    )
    .with_artifacts(written))
}

pub fn construct_graphs(m: usize, out: Option<&Path>, tol: &Tolerance) -> Result<Outcome> {
    let family = kestelman_family(m)?;
    let mut ps = family
        .members
        .iter()
        .map(|a| graph_projection(a, 2, tol))
        .collect::<Result<Vec<_>>>()?;
    ps.push(p_infinity(m, 2));
    let report = isoclinic_family_check(&ps, tol)?;
    let n = ps.len();
    let mut lambda_deviation: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            lambda_deviation = lambda_deviation.max((report.lambda_matrix[(i, j)] - 0.5).abs());
        }
    }
    let mut written = Vec::new();
    if let Some(dir) = out {
        let manifest = FamilyManifest {
            kind: "graphs".into(),
            d: 2,
            dim: 2 * m,
            count: n,
            omega: [-1.0, 0.0],
        };
        written = write_family_bundle(dir, &manifest, &ps)?;
    }
    Ok(Outcome {
        verdict: report.verdict && tol.accepts(lambda_deviation, 1.0),
        max_residual: report.worst_residual.max(lambda_deviation),
        payload: json!({
            "m": m,
            "count": n,
            "rank": report.rank,
            "max_lambda_deviation_from_half": lambda_deviation,
            "last_member": "p_infinity",
        }),
        artifacts_written: written,
    })
}

pub fn construct_omega(d: usize, n: usize, out: Option<&Path>) -> Result<Outcome> {
    let family = omega_commuting_generators(d, n)?;
    let residual = family.residual();
    let mut written = Vec::new();
    if let Some(dir) = out {
        let manifest = FamilyManifest {
            kind: "omega".into(),
            d,
            dim: family.dim,
            count: family.members.len(),
            omega: family.omega,
        };
        written = write_family_bundle(dir, &manifest, &family.members)?;
    }
    Ok(Outcome::pass(
        residual,
        json!({
            "d": d,
            "n": n,
            "dim": family.dim,
            "omega": family.omega,
            "commutation_residual": residual,
        }),
    )
    .with_artifacts(written))
}

pub fn construct_mum(d: usize, n: usize, out: Option<&Path>) -> Result<Outcome> {
    let family = mum_from_construction(d, n)?;
    let mut written = Vec::new();
    if let Some(dir) = out {
        written = write_mum_bundle(dir, &family)?;
    }
    Ok(Outcome::pass(
        family.max_residual,
        json!({
            "d": family.d,
            "k": family.k,
            "dim": family.dim,
            "n_measurements": family.measurements.len(),
            "max_scalar_deviation": family.max_scalar_deviation,
        }),
    )
    .with_artifacts(written))
}

fn load_mum(dir: &Path, tol: &Tolerance) -> Result<isoclinic_core::mum::MumFamily> {
    let (_, effects) = read_mum_bundle(dir)?;
    let measurements = effects
        .iter()
        .map(|e| measurement_check(e, tol))
        .collect::<Result<Vec<_>>>()?;
    mum_check(&measurements, tol)
}

pub fn mum_check_bundle(dir: &Path, tol: &Tolerance) -> Result<Outcome> {
    let family = load_mum(dir, tol)?;
    // the pooled ranges are isoclinic with λ ∈ {0, 1/d}
    let pooled = isoclinic_family_check(&family.pooled_effects(), tol)?;
    Ok(Outcome {
        verdict: pooled.verdict,
        max_residual: family.max_residual.max(pooled.worst_residual),
        payload: json!({
            "d": family.d,
            "k": family.k,
            "dim": family.dim,
            "n_measurements": family.measurements.len(),
            "max_scalar_deviation": family.max_scalar_deviation,
            "pooled_isoclinic": pooled.verdict,
            "failing_pairs": pooled
                .failing_pairs
                .iter()
                .map(|f| json!({ "indices": [f.i, f.j], "residual": f.residual }))
                .collect::<Vec<_>>(),
        }),
        artifacts_written: Vec::new(),
    })
}

/// Canonical form of measurements `pair` of the bundle, anchored at effect
/// `anchor` of the first.
pub fn mum_canonical(
    dir: &Path,
    pair: [usize; 2],
    anchor: usize,
    out: Option<&Path>,
    tol: &Tolerance,
) -> Result<Outcome> {
    let all = load_mum(dir, tol)?;
    let mut chosen = Vec::with_capacity(2);
    for m in pair {
        let meas = all.measurements.get(m).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "measurement {m} out of range for {} measurements",
                all.measurements.len()
            ))
        })?;
        chosen.push(meas.clone());
    }
    let family = mum_check(&chosen, tol)?;
    let cf = canonical_form_extract(&family, anchor, tol)?;
    let relations = canonical_relations_check(&cf, tol);
    let (ps, qs) = cf.rebuild();
    let mut rebuild: f64 = 0.0;
    for (rebuilt, original) in [ps, qs].iter().zip(&family.measurements) {
        for (a, b) in rebuilt.iter().zip(&original.effects) {
            rebuild = rebuild.max(spectral_norm(&(a - b)));
        }
    }
    let rebuild_ok = tol.accepts(rebuild, 1.0);
    let mut written = Vec::new();
    if let Some(out) = out {
        written = write_canonical_bundle(out, &cf)?;
    }
    let mut failures: Vec<Value> = relations
        .relations
        .iter()
        .filter(|r| !tol.accepts(r.residual, cf.d as f64))
        .map(|r| json!({ "relation": r.relation, "indices": r.indices, "residual": r.residual }))
        .collect();
    if !rebuild_ok {
        failures.push(json!({ "relation": "rebuild", "indices": [], "residual": rebuild }));
    }
    Ok(Outcome {
        verdict: relations.verdict && rebuild_ok,
        max_residual: relations.max_residual().max(rebuild),
        payload: json!({
            "k": cf.k,
            "d": cf.d,
            "anchor": cf.anchor,
            "measurements": pair,
            "relations": relations.relations,
            "rebuild_residual": rebuild,
            "failing_relations": failures,
        }),
        artifacts_written: written,
    })
}
