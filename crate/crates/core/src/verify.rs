//! The identity suite behind `pnhier verify`.
//!
//! Every check is a per-point defect evaluated on the same seeded sample and
//! reduced in point order, so reports do not depend on the thread count.

use std::cell::OnceCell;

use rayon::prelude::*;

use crate::ad::{lift_coords, Jet2, Scalar};
use crate::error::{Error, Result};
use crate::geometry::{jacobi_defect, pn_compatibility_defect, torsion_defect, BivectorField, Multivector, ScalarField};
use crate::hierarchy::{Hierarchy, HierarchyPoint, HierarchySpec, MAX_DEPTH};
use crate::master::{conformal_defects, deformation_defect, modular_at, oevel_at, transport_defect};
use crate::modular::{
    koszul_derivation_defect, koszul_square, mu_change_defect, mu_independence_defect, nondegenerate_defect,
    pn_modular_poisson_defect, trace_formula_defect, VolumeDensity,
};
use crate::report::{CheckRow, Environment, HierarchyTable, Interval, RowAnchor, VerificationReport};
use crate::sampling::{box_point, sample_points};
use crate::systems::{self, canonical, cn_canonical_hamiltonian, cn_eigen_lenard_defect, cn_printed_flow, CatalogEntry};

/// Check families in report order; `--checks` selects among these.
pub const FAMILIES: [&str; 21] = [
    "jacobi",
    "torsion",
    "compatibility",
    "hierarchy-poisson",
    "modular-pn",
    "ladder",
    "lenard-chain",
    "involution",
    "commuting-flows",
    "mu-independence",
    "density-change",
    "koszul",
    "oevel-conformal",
    "oevel-relations",
    "modular-hierarchy",
    "coincidence",
    "deformation",
    "lenard",
    "eigen-lenard",
    "flaschka",
    "printed-flow",
];

/// Index range of the Oevel relation sweep.
pub const OEVEL_RANGE: i32 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub system: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub depth: usize,
    /// Overrides the entry's lowest hierarchy index.
    pub min_index: Option<i32>,
    /// Families to run; `None` runs all of them.
    pub checks: Option<Vec<String>>,
}

impl VerifyConfig {
    pub fn new(system: impl Into<String>, n: usize) -> Self {
        VerifyConfig {
            system: system.into(),
            n,
            samples: 100,
            seed: 42,
            tol: 1e-8,
            depth: 4,
            min_index: None,
            checks: None,
        }
    }

    pub fn only(mut self, families: &[&str]) -> Self {
        self.checks = Some(families.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tol)));
        }
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(Error::Config(format!("depth {} outside 1..={MAX_DEPTH}", self.depth)));
        }
        if let Some(sel) = &self.checks {
            if let Some(bad) = sel.iter().find(|c| !FAMILIES.contains(&c.as_str())) {
                return Err(Error::Config(format!("unknown check family `{bad}`")));
            }
        }
        Ok(())
    }

    fn selected(&self, family: &str) -> bool {
        self.checks.as_ref().is_none_or(|s| s.iter().any(|c| c == family))
    }
}

/// Densities used for the `μ`-independence and Koszul checks.
pub fn test_densities(m: usize) -> Vec<VolumeDensity> {
    vec![
        VolumeDensity::standard(m),
        VolumeDensity::new(
            "exponential",
            ScalarField::new(m, move |x| {
                let mut s = Jet2::constant(0.0, m);
                for (k, xk) in x.iter().enumerate() {
                    s = s.add(&xk.scale(0.3 * (k + 1) as f64 / m as f64));
                }
                Ok(s.exp())
            }),
        ),
        VolumeDensity::new(
            "quadratic",
            ScalarField::new(m, move |x| {
                let mut s = Jet2::constant(1.0, m);
                for xk in x {
                    s = s.add(&xk.mul(xk).scale(0.5));
                }
                Ok(s)
            }),
        ),
    ]
}

/// Positive factor `g` for the density-change rule.
fn density_factor(m: usize) -> ScalarField {
    ScalarField::new(m, move |x| {
        let mut s = Jet2::constant(0.0, m);
        for (k, xk) in x.iter().enumerate() {
            s = s.add(&xk.scale(0.2 * if k % 2 == 0 { 1.0 } else { -1.0 }));
        }
        Ok(s.exp().mul(&x[0].mul(&x[0]).add_const(1.0)))
    })
}

struct Sample<'a> {
    index: u64,
    x: &'a [f64],
    hier: &'a Hierarchy,
    pt: OnceCell<Result<HierarchyPoint>>,
}

impl Sample<'_> {
    fn pt(&self) -> Result<&HierarchyPoint> {
        self.pt.get_or_init(|| self.hier.at(self.x)).as_ref().map_err(Clone::clone)
    }
}

type Eval = Box<dyn Fn(&Sample) -> Result<f64> + Send + Sync>;

struct Check {
    family: &'static str,
    name: String,
    tag: String,
    formula: String,
    tol_scale: f64,
    eval: std::result::Result<Eval, String>,
}

struct Plan {
    checks: Vec<Check>,
}

impl Plan {
    fn push(
        &mut self,
        family: &'static str,
        suffix: &str,
        tag: &str,
        formula: impl Into<String>,
        eval: impl Fn(&Sample) -> Result<f64> + Send + Sync + 'static,
    ) {
        self.checks.push(Check {
            family,
            name: if suffix.is_empty() { family.into() } else { format!("{family}:{suffix}") },
            tag: tag.into(),
            formula: formula.into(),
            tol_scale: 1.0,
            eval: Ok(Box::new(eval)),
        });
    }

    fn skip(&mut self, family: &'static str, tag: &str, formula: &str, reason: impl Into<String>) {
        self.checks.push(Check {
            family,
            name: family.into(),
            tag: tag.into(),
            formula: formula.into(),
            tol_scale: 1.0,
            eval: Err(reason.into()),
        });
    }

    fn loosen(&mut self, family: &str, scale: f64) {
        for c in self.checks.iter_mut().filter(|c| c.family == family) {
            c.tol_scale = scale;
        }
    }
}

fn max_of(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut w = 0.0f64;
    for v in it {
        let v = v?;
        w = if v.is_nan() || w.is_nan() { f64::NAN } else { w.max(v) };
    }
    Ok(w)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |w, (u, v)| w.max((u - v).abs()))
}

/// `(i, j)` with `|i|, |j| ≤ OEVEL_RANGE` and `i`, `j`, `i + j` built.
fn oevel_pairs(lo: i32, hi: i32) -> Vec<(i32, i32)> {
    let inside = |k: i32| k >= lo && k <= hi;
    let mut out = Vec::new();
    for i in -OEVEL_RANGE..=OEVEL_RANGE {
        for j in -OEVEL_RANGE..=OEVEL_RANGE {
            if inside(i) && inside(j) && inside(i + j) {
                out.push((i, j));
            }
        }
    }
    out
}

fn plan(e: &CatalogEntry, hier: &Hierarchy, seed: u64) -> Plan {
    let mut p = Plan { checks: Vec::new() };
    let m = e.dim();
    let (lo, hi) = (hier.lo, hier.hi);
    let pn = e.pn.clone();
    let pi0 = pn.pi0.clone();
    let pi1 = pn.pi1();

    let mut tensors: Vec<(String, BivectorField)> = vec![("pi0".into(), pi0.clone()), ("pi1".into(), pi1.clone())];
    tensors.extend(e.extra_poisson.iter().cloned());
    for (name, t) in tensors {
        p.push("jacobi", &name, "poisson", format!("[{name}, {name}] = 0"), move |s| jacobi_defect(&t, s.x));
    }
    let nij = pn.nij.clone();
    p.push("torsion", "", "nijenhuis", "T_N = 0", move |s| torsion_defect(&nij, s.x));
    {
        let (pi0, nij) = (pi0.clone(), pn.nij.clone());
        p.push("compatibility", "", "pn-compatible", "C(π₀, N) = 0, Nπ₀ = π₀N*", move |s| {
            pn_compatibility_defect(&pi0, &nij, s.x)
        });
    }
    p.push(
        "hierarchy-poisson",
        "",
        "hierarchy",
        format!("[π_i, π_j] = 0 for {lo} ≤ i ≤ j ≤ {hi}"),
        move |s| {
            let pt = s.pt()?;
            max_of((lo..=hi).flat_map(|i| (i..=hi).map(move |j| (i, j))).map(|(i, j)| pt.pairwise_compat(i, j)))
        },
    );

    let standard = VolumeDensity::standard(m);
    {
        let (pn, mu) = (pn.clone(), standard.clone());
        p.push("modular-pn", "trace", "modular-pn", "X_N = π₀♯d(−½ tr N)", move |s| trace_formula_defect(&pn, &mu, s.x));
        let (pn, mu) = (e.pn.clone(), standard.clone());
        p.push("modular-pn", "log-det", "modular-pn", "X_N = π₁♯d(−½ log|det N|)", move |s| {
            nondegenerate_defect(&pn, &mu, s.x)
        });
        let (pn, mu) = (e.pn.clone(), standard.clone());
        p.push("modular-pn", "poisson", "modular-pn", "L_{X_N}π₁ = 0", move |s| {
            pn_modular_poisson_defect(&pn, &mu, s.x)
        });
    }

    p.push(
        "ladder",
        "",
        "hierarchy",
        format!("π_i♯dĥ_j = π_{{i+j−l}}♯dĥ_l, levels {}..={}", 2 * lo, 2 * hi),
        move |s| {
            let pt = s.pt()?;
            max_of((2 * lo..=2 * hi).map(|k| pt.level_defect(k)))
        },
    );
    p.push("lenard-chain", "", "recursion", "N*dĥ_k = dĥ_{k+1}", move |s| {
        let pt = s.pt()?;
        max_of((lo..hi).map(|k| pt.lenard(k)))
    });
    p.push("involution", "", "involution", "{ĥ_a, ĥ_b}_{π_k} = 0", move |s| {
        let pt = s.pt()?;
        max_of((lo..=hi).map(|k| -> Result<f64> {
            let mtx = pt.involution_matrix(k)?;
            Ok(mtx.iter().flatten().fold(0.0f64, |w, v| w.max(v.abs())))
        }))
    });
    p.push("commuting-flows", "", "involution", "[X_i, X_j] = 0, X_k = π₀♯dĥ_k", move |s| {
        let pt = s.pt()?;
        max_of((lo..=hi).flat_map(|i| (i + 1..=hi).map(move |j| (i, j))).map(|(i, j)| pt.commuting(i, j)))
    });
    p.loosen("commuting-flows", 10.0);

    let densities = test_densities(m);
    {
        let (pn, ds) = (e.pn.clone(), densities.clone());
        p.push("mu-independence", "", "modular-pn", "X_N independent of μ", move |s| {
            mu_independence_defect(&pn, &ds, s.x)
        });
    }
    for (name, pi) in [("pi0", pi0.clone()), ("pi1", pi1.clone())] {
        let (mu, g) = (densities[1].clone(), density_factor(m));
        p.push("density-change", name, "modular", "X_{gμ} = X_μ − π♯d log|g|", move |s| {
            mu_change_defect(&pi, &mu, &g, s.x)
        });
    }
    {
        let (pi, mu) = (pi0.clone(), densities[2].clone());
        p.push("koszul", "square", "koszul", "D_μ² π₀ = 0", move |s| {
            let jets = lift_coords(s.x);
            let a = Multivector::bivector(&pi.eval_jets(&jets)?)?;
            Ok(koszul_square(&a, &mu.log_density(&jets)?)?.max_abs())
        });
        let (a, b, mu) = (pi0.clone(), pi1.clone(), densities[2].clone());
        p.push("koszul", "derivation", "koszul", "D_μ[A,B] = [A,D_μB] + (−1)^{b−1}[D_μA,B]", move |s| {
            let jets = lift_coords(s.x);
            let a = Multivector::bivector(&a.eval_jets(&jets)?)?;
            let b = Multivector::bivector(&b.eval_jets(&jets)?)?;
            koszul_derivation_defect(&a, &b, &mu.log_density(&jets)?)
        });
    }

    symmetry_checks(&mut p, e, hier);

    match &e.deformation {
        Some(z) => {
            let (a, b, zz) = (pi0.clone(), pi1.clone(), z.clone());
            p.push("deformation", "transport", "deformation", "L_Z π₀ = π₁", move |s| transport_defect(&a, &b, &zz, s.x));
            let (a, b, zz, mu) = (pi0.clone(), pi1.clone(), z.clone(), standard.clone());
            p.push("deformation", "modular", "deformation", "X¹_μ = [Z, X⁰_μ] + π₀♯d(div_μ Z)", move |s| {
                deformation_defect(&a, &b, &zz, &mu, s.x)
            });
        }
        None => p.skip(
            "deformation",
            "deformation",
            "X¹_μ = [Z, X⁰_μ] + π₀♯d(div_μ Z)",
            format!("{} has no field Z with L_Z π₀ = π₁", e.id),
        ),
    }

    match &e.bihamiltonian {
        Some(bh) => {
            let bh = bh.clone();
            p.push("lenard", "", "bi-hamiltonian", bh.formula, move |s| bh.defect(s.x));
        }
        None => p.skip("lenard", "bi-hamiltonian", "π₁♯dh_a = π₀♯dh_b", format!("{} lists no pair", e.id)),
    }

    cn_checks(&mut p, e, seed);
    p
}

fn symmetry_checks(p: &mut Plan, e: &CatalogEntry, hier: &Hierarchy) {
    const FORMULAS: [(&str, &str); 4] = [
        ("oevel-conformal", "L_{Z₀}π₀ = λπ₀, L_{Z₀}π₁ = μπ₁, Z₀(h) = νh"),
        ("oevel-relations", "L_{Z_i}π_j = c π_{i+j}, Z_i(ĥ_j) = a ĥ_{i+j}, [Z_i, Z_j] = b Z_{i+j}"),
        ("modular-hierarchy", "[Z_i, X^j_μ] = c X^{i+j}_μ − π_j♯d(div_μ Z_i)"),
        ("coincidence", "[Z_i, X_a] = (c(i,0) + a(i,a)) X_{i+a}"),
    ];
    let Some(sym) = e.symmetry.clone() else {
        for (family, formula) in FORMULAS {
            p.skip(family, "master-symmetry", formula, format!("{} has no conformal symmetry", e.id));
        }
        return;
    };
    let co = sym.coeffs;
    let (lo, hi) = (hier.lo, hier.hi);
    let (pi0, pi1) = (e.pn.pi0.clone(), e.pn.pi1());
    let h = hier.h(co.anchor.clamp(lo, hi));
    let Ok(h) = h else {
        for (family, formula) in FORMULAS {
            p.skip(family, "master-symmetry", formula, format!("anchor {} outside built range", co.anchor));
        }
        return;
    };
    for (k, suffix) in ["pi0", "pi1", "h"].into_iter().enumerate() {
        let (z0, a, b, h) = (sym.z0.clone(), pi0.clone(), pi1.clone(), h.clone());
        p.push("oevel-conformal", suffix, "conformal", FORMULAS[0].1, move |s| {
            let d = conformal_defects(&z0, &a, &b, &h, co.lambda, co.mu_c, co.nu, s.x)?;
            Ok([d.0, d.1, d.2][k])
        });
    }

    let pairs = oevel_pairs(lo, hi);
    for (k, suffix) in ["pi", "hamiltonian", "z"].into_iter().enumerate() {
        let (z0, pairs) = (sym.z0.clone(), pairs.clone());
        p.push("oevel-relations", suffix, "conformal", FORMULAS[1].1, move |s| {
            let pt = s.pt()?;
            let z = z0.eval_jets(&lift_coords(s.x))?;
            max_of(pairs.iter().map(|&(i, j)| -> Result<f64> {
                let d = oevel_at(pt, &z, &co, i, j)?;
                Ok(match k {
                    0 => d.pi,
                    1 => d.hamiltonian.unwrap_or(0.0),
                    _ => d.z,
                })
            }))
        });
    }
    let m = e.dim();
    for (k, suffix) in ["bracket", "compat"].into_iter().enumerate() {
        let (z0, pairs, mu) = (sym.z0.clone(), pairs.clone(), VolumeDensity::standard(m));
        p.push("modular-hierarchy", suffix, "modular-hierarchy", FORMULAS[2].1, move |s| {
            let pt = s.pt()?;
            let jets = lift_coords(s.x);
            let z = z0.eval_jets(&jets)?;
            let lf = mu.log_density(&jets)?;
            max_of(pairs.iter().map(|&(i, j)| -> Result<f64> {
                let d = modular_at(pt, &z, &lf, &co, i, j)?;
                Ok(if k == 0 { d.0 } else { d.1 })
            }))
        });
    }
    let levels: Vec<i32> = (lo..=hi)
        .filter(|&k| {
            let i = k - co.anchor;
            i >= lo && i <= hi && co.anchor >= lo && co.anchor <= hi && co.a(i, co.anchor).is_some()
        })
        .collect();
    let hier = hier.clone();
    p.push("coincidence", "", "master-symmetry", FORMULAS[3].1, move |s| {
        max_of(levels.iter().map(|&k| crate::master::coincidence_defect(&hier, &sym, k, s.x)))
    });
}

fn cn_checks(p: &mut Plan, e: &CatalogEntry, seed: u64) {
    const ONLY: &str = "defined for cn-toda only";
    if e.id != "cn-toda" {
        p.skip("eigen-lenard", "eigen-lenard", "π₃♯dλ_i = λ_i² π₁♯dλ_i", ONLY);
        p.skip("flaschka", "flaschka", "J Π_can Jᵀ = −¼ π₁", ONLY);
        p.skip("printed-flow", "printed-flow", "π₁♯dH₂ = −2 (ȧ, ḃ)", ONLY);
        return;
    }
    let entry = e.clone();
    p.push("eigen-lenard", "", "eigen-lenard", "π₃♯dλ_i = λ_i² π₁♯dλ_i", move |s| {
        cn_eigen_lenard_defect(&entry, s.x)
    });
    p.loosen("eigen-lenard", 10.0);

    let Some(fl) = e.flaschka.clone() else {
        p.skip("flaschka", "flaschka", "J Π_can Jᵀ = −¼ π₁", "no Flaschka map");
        return;
    };
    let n = e.n;
    let pi1 = e.pn.pi0.clone();
    {
        let (fl, pi1) = (fl.clone(), pi1.clone());
        p.push("flaschka", "pushforward", "flaschka", "J Π_can Jᵀ = −¼ π₁", move |s| {
            let q = box_point(&fl.source_box, seed, s.index);
            let pushed = fl.pushforward(&canonical(n).eval(&q)?.values(), &q)?;
            let target = pi1.eval(&fl.apply(&q)?)?.values().scale(-0.25);
            Ok(pushed.sub(&target)?.max_abs())
        });
    }
    {
        let fl = fl.clone();
        let h = cn_canonical_hamiltonian(n);
        p.push("printed-flow", "canonical", "flaschka", "J X_H(q, p) = (ȧ, ḃ)", move |s| {
            let q = box_point(&fl.source_box, seed, s.index);
            let xc = crate::geometry::hamiltonian_vf(&canonical(n), &h).values(&q)?;
            let v = fl.push_vector(&xc, &q)?;
            Ok(max_diff(&v, &cn_printed_flow(&fl.apply(&q)?)))
        });
    }
    match e.hamiltonian("H2") {
        Some(h2) => {
            let x2 = crate::geometry::hamiltonian_vf(&pi1, h2);
            p.push("printed-flow", "scaled", "flaschka", "π₁♯dH₂ = −2 (ȧ, ḃ)", move |s| {
                let v = x2.values(s.x)?;
                let printed: Vec<f64> = cn_printed_flow(s.x).iter().map(|w| -2.0 * w).collect();
                Ok(max_diff(&v, &printed))
            });
        }
        None => p.skip("printed-flow", "flaschka", "π₁♯dH₂ = −2 (ȧ, ḃ)", "no hamiltonian H2"),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PNHIER_THREADS") {
        let k: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("PNHIER_THREADS={v} is not a thread count")))?;
        b = b.num_threads(k.max(1));
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Runs the selected check families on `cfg.samples` seeded points.
pub fn verify(cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let entry = systems::build(&cfg.system, cfg.n)?;
    verify_entry(&entry, cfg)
}

/// Like [`verify`] on an already built entry.
pub fn verify_entry(entry: &CatalogEntry, cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let lo = cfg.min_index.unwrap_or(entry.min_index);
    let hier = Hierarchy::build(HierarchySpec::new(entry.pn.clone(), cfg.depth).with_negative(lo))?;
    let points = sample_points(&entry.pn.chart, cfg.seed, cfg.samples)?;
    let checks: Vec<Check> = plan(entry, &hier, cfg.seed)
        .checks
        .into_iter()
        .filter(|c| cfg.selected(c.family))
        .collect();
    let pool = thread_pool()?;
    let per_point: Vec<Vec<Result<f64>>> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(k, x)| {
                let s = Sample {
                    index: k as u64,
                    x,
                    hier: &hier,
                    pt: OnceCell::new(),
                };
                checks
                    .iter()
                    .map(|c| match &c.eval {
                        Ok(f) => f(&s),
                        Err(_) => Ok(f64::NAN),
                    })
                    .collect()
            })
            .collect()
    });
    let rows = checks
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let anchor = RowAnchor {
                tag: c.tag.clone(),
                formula: c.formula.clone(),
            };
            let tol = cfg.tol * c.tol_scale;
            match &c.eval {
                Err(reason) => CheckRow::not_applicable(c.name.clone(), c.family, anchor, tol, reason.clone()),
                Ok(_) => {
                    let defects = per_point.iter().map(|row| row[ci].clone()).collect();
                    CheckRow::from_defects(c.name.clone(), c.family, anchor, tol, defects)
                }
            }
        })
        .collect();
    let chart = &entry.pn.chart;
    let environment = Environment {
        system: entry.id.to_string(),
        n: entry.n,
        seed: cfg.seed,
        samples: cfg.samples,
        tol: cfg.tol,
        depth: cfg.depth,
        min_index: hier.lo,
        sample_box: chart
            .coord_names
            .iter()
            .zip(&chart.sample_box)
            .map(|(c, &(lo, hi))| Interval { coord: c.clone(), lo, hi })
            .collect(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(VerificationReport::new(environment, rows))
}

/// `ĥ_i` at the entry's probe point and the ladder defects of every index pair.
pub fn hierarchy_table(system: &str, n: usize, depth: usize) -> Result<HierarchyTable> {
    let e = systems::build(system, n)?;
    let hier = Hierarchy::build(HierarchySpec::new(e.pn.clone(), depth).with_negative(e.min_index))?;
    let pt = hier.at(&e.probe)?;
    let indices: Vec<i32> = (hier.lo..=hier.hi).collect();
    let h = indices.iter().map(|&i| Ok(pt.h(i)?.value)).collect::<Result<_>>()?;
    let ladder = indices
        .iter()
        .map(|&i| indices.iter().map(|&j| pt.ladder_pair(i, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(HierarchyTable {
        system: e.id.to_string(),
        n,
        depth,
        probe: e.probe.clone(),
        indices,
        h,
        ladder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    #[test]
    fn toda_moser_suite_passes() {
        let mut cfg = VerifyConfig::new("toda-moser", 2);
        cfg.samples = 4;
        let r = verify(&cfg).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{}: {:?} {:?}", c.name, c.max_abs_defect, c.reason);
        }
        assert_eq!(r.row("eigen-lenard").unwrap().status, Status::NotApplicable);
        assert_eq!(r.environment.min_index, -2);
    }

    #[test]
    fn families_cover_plan() {
        let e = systems::build("cn-toda", 2).unwrap();
        let hier = Hierarchy::build(HierarchySpec::new(e.pn.clone(), 2)).unwrap();
        let fams: Vec<&str> = plan(&e, &hier, 1).checks.iter().map(|c| c.family).collect();
        for f in &fams {
            assert!(FAMILIES.contains(f), "{f}");
        }
        let mut ordered = fams.clone();
        ordered.dedup();
        let pos: Vec<usize> = ordered.iter().map(|f| FAMILIES.iter().position(|g| g == f).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ordered.len(), FAMILIES.len());
    }

    #[test]
    fn selection_and_config_errors() {
        let cfg = VerifyConfig::new("cn-toda", 2).only(&["lenard"]);
        let r = verify(&VerifyConfig { samples: 3, ..cfg }).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.all_pass);
        assert!(matches!(
            verify(&VerifyConfig::new("toda-moser", 2).only(&["nope"])),
            Err(Error::Config(_))
        ));
        assert!(matches!(verify(&VerifyConfig::new("nope", 2)), Err(Error::UnknownSystem(_))));
        let bad = VerifyConfig {
            tol: 0.0,
            ..VerifyConfig::new("identity", 1)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn tiny_tolerance_fails() {
        let cfg = VerifyConfig {
            samples: 3,
            tol: 1e-16,
            ..VerifyConfig::new("toda-moser", 2).only(&["ladder", "involution"])
        };
        assert!(!verify(&cfg).unwrap().all_pass);
    }

    #[test]
    fn hierarchy_tables() {
        let t = hierarchy_table("toda-moser", 2, 2).unwrap();
        assert_eq!(t.indices, vec![-2, -1, 0, 1, 2]);
        let at = |i: i32| t.h[(i + 2) as usize];
        assert!((at(0) - 2f64.ln()).abs() < 1e-14);
        assert!((at(1) - 3.0).abs() < 1e-14);
        assert!((at(2) - 2.5).abs() < 1e-14);
        let t = hierarchy_table("identity", 2, 3).unwrap();
        assert!(t.ladder.iter().flatten().all(|&v| v == 0.0));
        let t = hierarchy_table("an-toda", 2, 3).unwrap();
        assert!(t.ladder.iter().flatten().all(|&v| v < 1e-8));
    }

    #[test]
    fn oevel_pairs_respect_range() {
        let p = oevel_pairs(-2, 4);
        assert!(p.contains(&(-2, 3)) && p.contains(&(3, 1)));
        assert!(!p.contains(&(3, 2)) && !p.contains(&(-1, -2)));
    }
}
