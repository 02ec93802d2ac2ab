//! Full analysis of one scheme, as text or JSON.

use serde::Serialize;

use scheme_forge::exactnum::Scalar;
use scheme_forge::imprimitivity::{find_imprimitivity_systems, ImprimitivitySystem};
use scheme_forge::qantipodal::{classify_cometric_imprimitive, dismantled_krein_array, profile};
use scheme_forge::schemes::{verify_scheme, RelationTable};
use scheme_forge::spectral::{
    cometric_orderings, eigendata_with, krein_tensor, metric_orderings, natural_relation_ordering,
    Eigendata, FieldPolicy, KreinArray, SpectralError,
};
use scheme_forge::uniformity::{
    certificate_for, decomposable, dismantle_all, is_q_higman, is_uniform, Decomposable,
};

use crate::Exit;

#[derive(Serialize, Debug)]
pub struct AnalysisReport {
    pub v: usize,
    pub d: usize,
    pub valencies: Vec<usize>,
    pub multiplicities: Vec<u64>,
    /// 0 for Q, else the D of Q(sqrt D).
    pub field: u64,
    pub p: Vec<Vec<String>>,
    pub q: Vec<Vec<String>>,
    pub krein: KreinSummary,
    pub metric_orderings: Vec<Vec<usize>>,
    pub cometric: Vec<OrderingReport>,
    pub systems: Vec<SystemReport>,
    pub tags: Vec<String>,
}

#[derive(Serialize, Debug)]
pub struct KreinSummary {
    pub nonnegative: bool,
    pub vanishing: usize,
    pub minimum_nonzero: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct OrderingReport {
    pub ordering: Vec<usize>,
    pub krein_array: String,
    pub krein_array_exact: String,
    pub natural_relations: Vec<usize>,
    /// v = 1 + v_1 + ... in the natural relation order.
    pub partition: String,
    /// Eigenvalues of the first natural relation, in the ordering.
    pub spectrum: Vec<String>,
    pub q_antipodal: bool,
    pub q_bipartite: bool,
    pub rectangular_exception: bool,
    pub profile: Option<ProfileReport>,
}

#[derive(Serialize, Debug)]
pub struct ProfileReport {
    pub w: usize,
    pub ell: usize,
    pub subscheme: String,
    pub dismantled: Vec<DismantledArray>,
}

#[derive(Serialize, Debug)]
pub struct DismantledArray {
    pub w: usize,
    pub formula: String,
    /// Array recomputed from an actual dismantled scheme, when checked.
    pub spectral: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct SystemReport {
    pub relations: Vec<usize>,
    pub idempotents: Vec<usize>,
    pub w: usize,
    pub n: usize,
    pub uniform: bool,
    pub uniform_detail: Option<String>,
    pub q_higman: Option<(usize, usize)>,
    pub dismantling: String,
    pub decomposable: Option<String>,
}

fn strs(row: &[Scalar]) -> Vec<String> {
    row.iter().map(|x| x.to_string()).collect()
}

fn system_report(
    t: &RelationTable,
    p: &scheme_forge::schemes::IntersectionTensor,
    sys: &ImprimitivitySystem,
    higman: Option<(usize, usize)>,
) -> SystemReport {
    let u = is_uniform(t, p, &sys.base);
    let uniform = u.is_ok();
    let dismantling = if !uniform {
        "not attempted (not uniform)".to_string()
    } else if sys.w() < 3 {
        "nothing to dismantle (w = 2)".to_string()
    } else {
        let mut counts = 0;
        let mut err = None;
        for k in 2..sys.w() {
            match dismantle_all(t, &sys.base, k) {
                Ok(v) => counts += v.len(),
                Err(e) => {
                    err = Some(e.to_string());
                    break;
                }
            }
        }
        err.unwrap_or_else(|| format!("{counts} unions verified"))
    };
    let decomposable = match decomposable(t, p, &sys.base) {
        Ok(Some(Decomposable::Wreath)) => Some("wreath".to_string()),
        Ok(Some(Decomposable::Tensor)) => Some("tensor".to_string()),
        _ => None,
    };
    SystemReport {
        relations: sys.i_set().to_vec(),
        idempotents: sys.j_set.clone(),
        w: sys.w(),
        n: sys.n(),
        uniform,
        uniform_detail: u.err().map(|e| e.to_string()),
        q_higman: higman,
        dismantling,
        decomposable,
    }
}

/// Krein array of the scheme on `wp` fibres, computed directly.
fn spectral_dismantled(
    t: &RelationTable,
    sys: &ImprimitivitySystem,
    wp: usize,
) -> Option<KreinArray> {
    let which: Vec<usize> = (0..wp).collect();
    let dis = scheme_forge::uniformity::dismantle(t, &sys.base, &which).ok()?;
    let e = scheme_forge::spectral::eigendata(&dis.tensor).ok()?;
    let k = krein_tensor(&e).ok()?;
    cometric_orderings(&k, &dis.tensor)
        .ok()?
        .arrays
        .into_iter()
        .next()
}

pub fn analyze(t: &RelationTable, policy: FieldPolicy) -> Result<AnalysisReport, Exit> {
    let p = verify_scheme(t).map_err(|e| Exit::negative(e.to_string()))?;
    let e: Eigendata = eigendata_with(&p, policy).map_err(|e| match e {
        SpectralError::UnsupportedField(m) => Exit::field(m),
        other => Exit::internal(other.to_string()),
    })?;
    let k = krein_tensor(&e).map_err(|e| Exit::internal(e.to_string()))?;
    let d = p.d();
    let mut vanishing = 0;
    let mut minimum: Option<Scalar> = None;
    for h in 0..=d {
        for i in 0..=d {
            for j in 0..=d {
                let q = k.q(h, i, j);
                if q.is_zero() {
                    vanishing += 1;
                } else if minimum.as_ref().is_none_or(|m| q < m) {
                    minimum = Some(q.clone());
                }
            }
        }
    }
    let metric = metric_orderings(&p);
    let orders = cometric_orderings(&k, &p).map_err(|e| Exit::internal(e.to_string()))?;
    let systems =
        find_imprimitivity_systems(t, &p, &e, &k).map_err(|e| Exit::internal(e.to_string()))?;
    let certs = is_q_higman(&k).unwrap_or_default();
    let classes = if orders.is_cometric() && !systems.is_empty() {
        classify_cometric_imprimitive(t, &p, &e, &orders.arrays, &systems)
            .map_err(|e| Exit::internal(e.to_string()))?
    } else {
        Vec::new()
    };
    let vals = t.valencies();
    let mut cometric = Vec::new();
    for (n, a) in orders.arrays.iter().enumerate() {
        let nat = natural_relation_ordering(&e, a).map_err(|e| Exit::internal(e.to_string()))?;
        let parts: Vec<String> = nat[1..].iter().map(|&i| vals[i].to_string()).collect();
        let class = classes.get(n);
        let profile_report = match class {
            Some(c) if c.q_antipodal && d >= 3 => {
                let sys = &systems[c.antipodal_systems[0]];
                let w = sys.w();
                let prof = profile(a, w).map_err(|e| Exit::internal(e.to_string()))?;
                let mut dismantled = Vec::new();
                for wp in 2..w {
                    let formula = dismantled_krein_array(a, w, wp)
                        .map_err(|e| Exit::internal(e.to_string()))?;
                    let spectral = spectral_dismantled(t, sys, wp);
                    if let Some(s) = &spectral {
                        if !s.same_parameters(&formula) {
                            return Err(Exit::internal(format!(
                                "dismantled array {s} differs from the formula {formula}"
                            )));
                        }
                    }
                    dismantled.push(DismantledArray {
                        w: wp,
                        formula: formula.to_string(),
                        spectral: spectral.map(|s| s.to_string()),
                    });
                }
                Some(ProfileReport {
                    w,
                    ell: prof.ell,
                    subscheme: prof.subscheme.to_string(),
                    dismantled,
                })
            }
            _ => None,
        };
        cometric.push(OrderingReport {
            ordering: a.ordering.clone(),
            krein_array: a.to_string(),
            krein_array_exact: a.exact_string(),
            partition: format!("{}=1+{}", t.v(), parts.join("+")),
            spectrum: a
                .ordering
                .iter()
                .map(|&j| e.p(j, nat[1]).render3())
                .collect(),
            natural_relations: nat,
            q_antipodal: class.is_some_and(|c| c.q_antipodal),
            q_bipartite: a.a.iter().all(Scalar::is_zero),
            rectangular_exception: class.is_some_and(|c| c.rectangular_exception),
            profile: profile_report,
        });
    }
    let sys_reports: Vec<SystemReport> = systems
        .iter()
        .map(|s| system_report(t, &p, s, certificate_for(&certs, s).map(|c| (c.ell, c.w))))
        .collect();

    let mut tags = vec![if systems.is_empty() {
        "primitive"
    } else {
        "imprimitive"
    }
    .to_string()];
    if !metric.is_empty() {
        tags.push("metric".into());
    }
    if orders.is_cometric() {
        tags.push("cometric".into());
    }
    if cometric.iter().any(|o| o.q_antipodal) {
        tags.push("Q-antipodal".into());
    }
    if cometric.iter().any(|o| o.q_bipartite) {
        tags.push("Q-bipartite".into());
    }
    if sys_reports.iter().any(|s| s.uniform) {
        tags.push("uniform".into());
    }
    if sys_reports.iter().any(|s| s.q_higman.is_some()) {
        tags.push("Q-Higman".into());
    }
    Ok(AnalysisReport {
        v: t.v(),
        d,
        valencies: vals,
        multiplicities: e.multiplicities().to_vec(),
        field: e.field(),
        p: e.p_matrix().iter().map(|r| strs(r)).collect(),
        q: e.q_matrix().iter().map(|r| strs(r)).collect(),
        krein: KreinSummary {
            nonnegative: true,
            vanishing,
            minimum_nonzero: minimum.map(|m| m.to_string()),
        },
        metric_orderings: metric,
        cometric,
        systems: sys_reports,
        tags,
    })
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn matrix(out: &mut String, name: &str, m: &[Vec<String>]) {
    out.push_str(&format!("{name}:\n"));
    for row in m {
        out.push_str(&format!("  {}\n", row.join("  ")));
    }
}

pub fn render_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("scheme v={} d={}\n", r.v, r.d));
    out.push_str(&format!("tags: {}\n", r.tags.join(", ")));
    let vals: Vec<String> = r.valencies.iter().map(|x| x.to_string()).collect();
    let mults: Vec<String> = r.multiplicities.iter().map(|x| x.to_string()).collect();
    out.push_str(&format!("valencies: {}\n", vals.join(" ")));
    out.push_str(&format!("multiplicities: {}\n", mults.join(" ")));
    out.push_str(&format!(
        "field: {}\n",
        if r.field == 0 {
            "Q".to_string()
        } else {
            format!("Q(sqrt {})", r.field)
        }
    ));
    matrix(&mut out, "P", &r.p);
    matrix(&mut out, "Q", &r.q);
    out.push_str(&format!(
        "krein: nonnegative, {} vanishing, smallest nonzero {}\n",
        r.krein.vanishing,
        r.krein.minimum_nonzero.as_deref().unwrap_or("-")
    ));
    if r.metric_orderings.is_empty() {
        out.push_str("metric: no\n");
    }
    for o in &r.metric_orderings {
        out.push_str(&format!("metric ordering: {o:?}\n"));
    }
    if r.cometric.is_empty() {
        out.push_str("cometric: no\n");
    }
    for o in &r.cometric {
        out.push_str(&format!("cometric ordering {:?}\n", o.ordering));
        out.push_str(&format!("  krein array: {}\n", o.krein_array));
        out.push_str(&format!("  exact: {}\n", o.krein_array_exact));
        out.push_str(&format!("  partition: {}\n", o.partition));
        out.push_str(&format!(
            "  spectrum of R{}: ({})\n",
            o.natural_relations[1],
            o.spectrum.join(", ")
        ));
        out.push_str(&format!(
            "  Q-antipodal: {}  Q-bipartite: {}\n",
            yes(o.q_antipodal),
            yes(o.q_bipartite)
        ));
        if o.rectangular_exception {
            out.push_str("  note: rectangular R(w,2) with d = 3, E_d need not be last\n");
        }
        if let Some(p) = &o.profile {
            out.push_str(&format!(
                "  w={} ell={} fibre subscheme {}\n",
                p.w, p.ell, p.subscheme
            ));
            for d in &p.dismantled {
                out.push_str(&format!(
                    "  dismantled to w'={}: {} (direct: {})\n",
                    d.w,
                    d.formula,
                    d.spectral.as_deref().unwrap_or("not computed")
                ));
            }
        }
    }
    if r.systems.is_empty() {
        out.push_str("imprimitivity systems: none\n");
    }
    for s in &r.systems {
        out.push_str(&format!(
            "system I={:?} J={:?} w={} n={}\n",
            s.relations, s.idempotents, s.w, s.n
        ));
        out.push_str(&format!("  uniform: {}", yes(s.uniform)));
        if let Some(why) = &s.uniform_detail {
            out.push_str(&format!(" ({why})"));
        }
        out.push('\n');
        match s.q_higman {
            Some((ell, w)) => out.push_str(&format!("  Q-Higman: ell={ell} w={w}\n")),
            None => out.push_str("  Q-Higman: no\n"),
        }
        out.push_str(&format!("  dismantling: {}\n", s.dismantling));
        if let Some(dec) = &s.decomposable {
            out.push_str(&format!("  decomposable: {dec}\n"));
        }
    }
    out
}
