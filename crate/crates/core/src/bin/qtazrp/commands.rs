use num_complex::Complex64 as C64;
use rayon::prelude::*;

use qtazrp::asym::{fit_slope, q1_asym_for, q3_asym_for, q4_asym, q5_asym, q6_asym, ScalingParams};
use qtazrp::contour::{default_contours, exponents_from_x1, ContourFamily};
use qtazrp::exact::{scaling_exact, scaling_to_lattice, two_point_value, ContourChoice, EvalOptions};
use qtazrp::sim::mc_estimate;
use qtazrp::specfun::{cn_polynomial, cn_residual};

use crate::config::Settings;
use crate::table::{Cell, Table};
use crate::CliError;

const CN_MAX: u32 = 8;
const COMPARED: [&str; 5] = ["q1", "q3", "q4", "q5", "q6"];

/// Scaling point with its exact and asymptotic terms.
type ComparePoint = (ScalingParams, [f64; 5], [f64; 5]);

fn numbered(prefix: &str) -> impl Iterator<Item = String> + '_ {
    (1..=6).map(move |i| format!("{prefix}{i}"))
}

pub fn exact(s: &Settings) -> Result<Table, CliError> {
    let params = s.lattice()?;
    let opts = EvalOptions { conventions: s.conventions(), contours: ContourChoice::Adapted, quad: s.quad()? };
    let r = two_point_value(&params, &opts)?;
    let mut headers: Vec<String> = numbered("delta").chain(numbered("q")).chain(numbered("p")).collect();
    headers.extend(["total".into(), "imag_max".into()]);
    let mut row: Vec<Cell> = r.deltas.iter().chain(&r.qs).chain(&r.ps).map(|&v| v.into()).collect();
    row.extend([r.total.into(), r.diagnostics.max_imag().into()]);
    if s.diagnostics {
        let d = &r.diagnostics;
        for (i, name) in ["q4", "q5", "q6"].iter().enumerate() {
            headers.push(format!("nodes_{name}"));
            row.push(d.nodes[i].into());
        }
        for (i, name) in ["q4", "q5", "q6"].iter().enumerate() {
            headers.push(format!("change_{name}"));
            row.push(d.change[i].into());
        }
        headers.push("q5_route".into());
        row.push(d.q5_route.as_str().into());
    }
    let mut t = Table::new(headers);
    t.push(row);
    Ok(t)
}

fn asym_terms(s: &ScalingParams) -> qtazrp::Result<[f64; 5]> {
    Ok([
        q1_asym_for(s)?.value,
        q3_asym_for(s)?.value,
        q4_asym(s)?.value,
        q5_asym(s)?.value,
        q6_asym(s)?.value,
    ])
}

pub fn compare(s: &Settings) -> Result<Table, CliError> {
    let points = s.scaling()?;
    let quad = s.quad()?;
    let results: Vec<qtazrp::Result<ComparePoint>> = points
        .par_iter()
        .map(|p| {
            scaling_to_lattice(p)?;
            Ok((*p, scaling_exact(p, &quad)?, asym_terms(p)?))
        })
        .collect();
    let mut headers = vec!["L".to_string()];
    for group in ["exact", "asym", "err"] {
        headers.extend(COMPARED.iter().map(|q| format!("{group}_{q}")));
    }
    let mut t = Table::new(headers);
    let mut ls = Vec::new();
    let mut errs = vec![Vec::new(); COMPARED.len()];
    for r in results {
        let (p, exact, asym) = r?;
        let mut row: Vec<Cell> = vec![p.l.into()];
        row.extend(exact.iter().map(|&v| Cell::from(v)));
        row.extend(asym.iter().map(|&v| Cell::from(v)));
        for (k, (e, a)) in exact.iter().zip(&asym).enumerate() {
            let err = (e - a).abs();
            errs[k].push(err);
            row.push(err.into());
        }
        ls.push(p.l);
        t.push(row);
    }
    let mut footer = vec![Cell::from("slope")];
    footer.extend(std::iter::repeat_n(Cell::Empty, 2 * COMPARED.len()));
    footer.extend(errs.iter().map(|e| fit_slope(&ls, e).map_or(Cell::Empty, Cell::from)));
    t.push(footer);
    Ok(t)
}

pub fn simulate(s: &Settings) -> Result<Table, CliError> {
    let params = s.lattice()?;
    let samples = s.samples.unwrap_or(100_000);
    let seed = s.seed.unwrap_or(0);
    let opts = EvalOptions { conventions: s.conventions(), contours: ContourChoice::Adapted, quad: s.quad()? };
    let exact = two_point_value(&params, &opts)?.total;
    let mc = mc_estimate(&params, samples, seed)?;
    let diff = mc.mean - exact;
    let z = if mc.stderr > 0.0 {
        diff / mc.stderr
    } else if diff.abs() <= 1e-9 * exact.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    let mut t = Table::new(["mean", "stderr", "exact", "z", "samples", "seed"]);
    t.push(vec![mc.mean.into(), mc.stderr.into(), exact.into(), z.into(), mc.samples.into(), mc.seed.into()]);
    Ok(t)
}

pub fn cn(s: &Settings) -> Result<Table, CliError> {
    let n_max = s.order.unwrap_or(CN_MAX);
    if n_max > CN_MAX {
        return Err(CliError::Usage(format!("cn needs --order <= {CN_MAX}, got {n_max}")));
    }
    let mut t = Table::new(["n", "degree", "coefficients", "residual"]);
    for n in 0..=n_max as usize {
        let p = cn_polynomial(n);
        let degree = p.degree().map_or(Cell::Empty, Cell::from);
        t.push(vec![n.into(), degree, p.to_string().into(), cn_residual(n).to_string().into()]);
    }
    Ok(t)
}

fn family_row(name: &str, fam: &ContourFamily) -> Vec<Cell> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut row: Vec<Cell> = vec![
        name.into(),
        fam.q.into(),
        fam.large.nodes.into(),
        fam.large.radius.into(),
        fam.small_outer.center.re.into(),
        fam.small_outer.radius.into(),
        fam.small_inner.radius.into(),
        fam.inner_gap().into(),
    ];
    for c in [&fam.large, &fam.small_outer, &fam.small_inner] {
        row.push(c.winding_number(zero).into());
        row.push(c.winding_number(one).into());
    }
    match fam.validate() {
        Ok(()) => row.extend(["true".into(), Cell::Empty]),
        Err(e) => row.extend(["false".into(), e.to_string().into()]),
    }
    row
}

pub fn contours_check(s: &Settings) -> Result<Table, CliError> {
    let q = s.q.ok_or_else(|| CliError::Usage("missing required value --q".into()))?;
    let nodes = s.nodes.unwrap_or(256);
    let mut t = Table::new([
        "family", "q", "nodes", "large_radius", "outer_center", "outer_radius", "inner_radius", "inner_gap",
        "wind_large_0", "wind_large_1", "wind_outer_0", "wind_outer_1", "wind_inner_0", "wind_inner_1", "valid",
        "message",
    ]);
    let fam = default_contours(q)?;
    t.push(family_row("default", &fam.with_nodes(nodes)));
    if s.y1.is_some() && s.y2.is_some() && s.t.is_some() {
        let params = s.lattice()?;
        params.validate()?;
        let (e1, e2) = exponents_from_x1(&params, &s.conventions());
        let fam = ContourFamily::adapted(q, e1, e2, params.t, nodes)?;
        t.push(family_row("adapted", &fam));
    }
    Ok(t)
}
