//! End-to-end verification of a family against its expected table row.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, FamilySpec, Resolution};
use crate::geometry::{self, ModuliReport, SliceProfile, Verdict};
use crate::lattice::{self, AbelianGroup, KernelError, SpecializedBlock};
use crate::poly::CorrPoly;

/// `t` values used for the `t`-independence check.
pub const T_PROBES: [i64; 3] = [1, 2, 3];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name, pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceGroup {
    pub k: usize,
    pub group: AbelianGroup,
    /// `|N(det D(A)_k)|²`.
    pub norm_squared: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub family: String,
    pub n: usize,
    pub d: u64,
    pub t: i64,
    pub provenance: catalog::Provenance,
    pub variant: Option<String>,
    pub genus: u64,
    pub profile: Option<SliceProfile>,
    pub moduli: Option<ModuliReport>,
    pub m: Option<u64>,
    pub expected_m: Option<u64>,
    pub e: usize,
    pub kernel: Option<AbelianGroup>,
    pub expected_kernel: Option<AbelianGroup>,
    pub kernel_template: Option<String>,
    pub slices: Vec<SliceGroup>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

type GroupResult = Result<AbelianGroup, KernelError>;

/// A family with its resolved `A` and memoized `G(A, k)` per `t`, shared
/// across degrees `d`.
pub struct FamilyAnalysis {
    pub spec: FamilySpec,
    pub resolution: Result<Resolution, String>,
    blocks: Mutex<BTreeMap<i64, Arc<Result<SpecializedBlock, KernelError>>>>,
    groups: Mutex<BTreeMap<(i64, usize), GroupResult>>,
}

impl FamilyAnalysis {
    pub fn new(spec: FamilySpec) -> Self {
        let resolution = catalog::resolve_variant(&spec).map_err(|e| e.to_string());
        FamilyAnalysis {
            spec,
            resolution,
            blocks: Mutex::new(BTreeMap::new()),
            groups: Mutex::new(BTreeMap::new()),
        }
    }

    /// The resolved `A`, or the bundled one when resolution failed.
    pub fn a(&self) -> &CorrPoly {
        self.resolution.as_ref().map_or(&self.spec.a, |r| &r.a)
    }

    fn specialized(&self, t: i64) -> Arc<Result<SpecializedBlock, KernelError>> {
        if let Some(b) = self.blocks.lock().expect("lock").get(&t) {
            return b.clone();
        }
        let block = match &self.resolution {
            Ok(r) => Ok(r.block.clone()),
            Err(_) => crate::diffrep::differential_block(self.a(), self.spec.n).map_err(KernelError::from),
        };
        let spec = Arc::new(block.and_then(|b| SpecializedBlock::new(&b, t)));
        self.blocks.lock().expect("lock").entry(t).or_insert(spec).clone()
    }

    /// `G(A, k)` for each `k`, at `t`.
    pub fn groups(&self, t: i64, ks: &[usize]) -> BTreeMap<usize, GroupResult> {
        let block = self.specialized(t);
        let missing: Vec<usize> = {
            let cache = self.groups.lock().expect("lock");
            ks.iter().copied().filter(|k| !cache.contains_key(&(t, *k))).collect()
        };
        let computed: Vec<(usize, GroupResult)> = missing
            .par_iter()
            .map(|&k| {
                let g = match block.as_ref() {
                    Ok(b) => b.group(k),
                    Err(e) => Err(e.clone()),
                };
                (k, g)
            })
            .collect();
        let mut cache = self.groups.lock().expect("lock");
        for (k, g) in computed {
            cache.insert((t, k), g);
        }
        ks.iter().map(|&k| (k, cache[&(t, k)].clone())).collect()
    }

    pub fn norm_squared(&self, t: i64, k: usize) -> Option<BigInt> {
        self.specialized(t).as_ref().as_ref().ok().map(|b| b.norm_squared_det(k))
    }

    /// Kernel of the isogeny for degree `d` at `t`.
    pub fn kernel(&self, d: u64, t: i64) -> Result<AbelianGroup, KernelError> {
        let profile = geometry::slice_profile(d, self.spec.n as u64)?;
        let ks = distinct_sizes(&profile);
        let groups = self
            .groups(t, &ks)
            .into_iter()
            .map(|(k, g)| g.map(|g| (k, g)))
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        let m = self.resolution.as_ref().ok().and_then(|r| r.m);
        Ok(lattice::kernel_from_groups(&profile, &groups, self.spec.field.degree(), m)?.group)
    }
}

fn distinct_sizes(profile: &SliceProfile) -> Vec<usize> {
    let mut ks: Vec<usize> = profile.p.iter().map(|&k| k as usize).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

pub fn verify_family(spec: FamilySpec, d: u64, t: i64) -> VerificationReport {
    FamilyAnalysis::new(spec).verify(d, t)
}

impl FamilyAnalysis {
    /// Runs every applicable check; failures are recorded, never raised.
    pub fn verify(&self, d: u64, t: i64) -> VerificationReport {
        let spec = &self.spec;
        let n = spec.n;
        let mut checks = Vec::new();
        let e = spec.field.degree();

        let (variant, m) = match &self.resolution {
            Ok(r) => {
                checks.push(Check::new("variant", true, r.variant.clone()));
                (Some(r.variant.clone()), r.m)
            }
            Err(msg) => {
                checks.push(Check::new("variant", false, msg.clone()));
                (None, crate::diffrep::check_split(&spec.a, n).ok().flatten())
            }
        };
        let a = self.a();

        match a.shape_check(n) {
            Ok(r) => checks.push(Check::new("shape", true, format!("r = {r}"))),
            Err(err) => checks.push(Check::new("shape", false, err.to_string())),
        }

        if let Some(s) = spec.tau_sign {
            let target = if s < 0 { -a.sigma() } else { a.sigma() };
            let label = if s < 0 { "tau(A) = -sigma(A)" } else { "tau(A) = sigma(A)" };
            checks.push(Check::new("tau-symmetry", a.tau() == target, label));
        }

        if let Some(diff) = spec.difference() {
            let (pass, detail) = match diff.exact_divide(a) {
                Ok(q) => (true, format!("quotient x1-degree {}", q.deg_x1())),
                Err(err) => (false, err.to_string()),
            };
            checks.push(Check::new("factorization", pass, detail));
        }

        if let Some(expected) = spec.expected.m {
            checks.push(Check::new(
                "split",
                m == Some(expected),
                format!("computed {}, expected {expected}", m.map_or("none".into(), |v| v.to_string())),
            ));
        }

        let genus = geometry::genus(d, n as u64);
        let profile = geometry::slice_profile(d, n as u64);
        if let Err(err) = &profile {
            checks.push(Check::new("profile", false, err.to_string()));
        }
        let profile = profile.ok();

        let moduli = match (&spec.f, spec.expected.nu) {
            (Some(f), nu) => match geometry::moduli_count(f, n, d) {
                Ok(report) => {
                    if let Some(nu) = nu {
                        let pass = matches!(
                            (&report.verdict, nu),
                            (Verdict::DModuli, catalog::NuTemplate::D)
                                | (Verdict::DMinus1Moduli, catalog::NuTemplate::DMinus1)
                        );
                        let got = report.moduli(d).map_or("hypotheses violated".into(), |v| v.to_string());
                        checks.push(Check::new(
                            "moduli",
                            pass,
                            format!("{got} moduli, expected {}", nu.evaluate(d)),
                        ));
                    }
                    Some(report)
                }
                Err(err) => {
                    checks.push(Check::new("moduli", false, err.to_string()));
                    None
                }
            },
            _ => None,
        };

        let mut slices = Vec::new();
        let mut kernel = None;
        if let Some(profile) = &profile {
            let ks = distinct_sizes(profile);
            let groups = self.groups(t, &ks);
            let mut norm_ok = true;
            let mut norm_detail = Vec::new();
            for (k, g) in &groups {
                match g {
                    Ok(g) => {
                        let ns = self.norm_squared(t, *k).unwrap_or_default();
                        let mut ok = g.order() == ns;
                        if let Some(m) = m {
                            ok &= g.order() == BigInt::from(m).pow((e * k) as u32);
                        }
                        if !ok {
                            norm_detail.push(format!("k = {k}: |G| = {}, |N(det)|^2 = {ns}", g.order()));
                        }
                        norm_ok &= ok;
                        slices.push(SliceGroup { k: *k, group: g.clone(), norm_squared: ns.to_string() });
                    }
                    Err(err) => {
                        norm_ok = false;
                        norm_detail.push(format!("k = {k}: {err}"));
                    }
                }
            }
            let detail = if norm_ok {
                match m {
                    Some(m) => format!("|G(A,k)| = |N(det D_k)|^2 = {m}^(e k)"),
                    None => "|G(A,k)| = |N(det D_k)|^2".to_string(),
                }
            } else {
                norm_detail.join("; ")
            };
            checks.push(Check::new("norm-consistency", norm_ok, detail));

            match self.kernel(d, t) {
                Ok(g) => kernel = Some(g),
                Err(err) => checks.push(Check::new("kernel", false, err.to_string())),
            }

            if spec.has_t() {
                let probes: Vec<i64> = T_PROBES.iter().copied().filter(|&p| p != t).collect();
                let mut pass = kernel.is_some();
                let mut detail = Vec::new();
                for p in probes {
                    let other = self.kernel(d, p);
                    let same = matches!((&other, &kernel), (Ok(a), Some(b)) if a == b);
                    if !same {
                        detail.push(format!(
                            "t = {p}: {}",
                            other.map_or_else(|e| e.to_string(), |g| g.to_string())
                        ));
                    }
                    pass &= same;
                }
                let detail = if pass { format!("same kernel for t in {T_PROBES:?}") } else { detail.join("; ") };
                checks.push(Check::new("t-independence", pass, detail));
            }
        }

        let (expected_kernel, kernel_template) = match &spec.expected.kernel {
            Some(template) => match template.evaluate(d) {
                Ok(g) => (Some(g), Some(template.to_string())),
                Err(err) => {
                    checks.push(Check::new("expected-kernel", false, err.to_string()));
                    (None, Some(template.to_string()))
                }
            },
            None => (None, None),
        };
        if let (Some(exp), Some(got)) = (&expected_kernel, &kernel) {
            checks.push(Check::new(
                "kernel",
                exp == got,
                format!("computed {got}, expected {exp}"),
            ));
        }

        let pass = checks.iter().all(|c| c.pass);
        VerificationReport {
            family: spec.id.to_string(),
            n,
            d,
            t,
            provenance: spec.provenance.clone(),
            variant,
            genus,
            profile,
            moduli,
            m,
            expected_m: spec.expected.m,
            e,
            kernel,
            expected_kernel,
            kernel_template,
            slices,
            checks,
            pass,
        }
    }
}
