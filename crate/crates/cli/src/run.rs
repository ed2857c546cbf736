use crate::config::{Command, FamilyScan, RunConfig, Source};
use crate::report::{num, opt, or_none, Meta, Report, Table, VERSION};
use hdeform_core::harmonic::{favb_scan, family_scan, HarmonicTower, HermitianComplex};
use hdeform_core::sg::{balanced_residual, family_sg_scan, is_gauduchon, sg_level, HermitianMetric};
use hdeform_core::{sampling, spectral, CatalogEntry, CohomologyKind, Error, ExteriorModel};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// A run that produced no report.
#[derive(Debug)]
pub struct RunError {
    pub status: i32,
    pub message: String,
}

impl RunError {
    fn input(message: impl Into<String>) -> Self {
        RunError {
            status: 2,
            message: message.into(),
        }
    }

    /// Core errors caused by the input map to 2, failed preconditions to 1.
    fn core(module: &str, e: Error) -> Self {
        let status = match e {
            Error::Shape { .. } | Error::Domain(_) | Error::NonIntegrable { .. } | Error::Lookup { .. } => 2,
            Error::Precondition { .. } | Error::Capability(_) | Error::NoRoot { .. } => 1,
        };
        RunError {
            status,
            message: format!("{module}: {e}"),
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type Outcome = Result<Report, RunError>;

pub fn entry_text(entry: &CatalogEntry) -> String {
    match entry {
        CatalogEntry::Model(s) => s.to_text(),
        CatalogEntry::Family(f) => f.to_text(),
    }
}

pub fn model_hash(entry: &CatalogEntry) -> String {
    let digest = Sha256::digest(entry_text(entry).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Pages => "pages",
        Command::Dh => "dh",
        Command::Favb => "favb",
        Command::Tower => "tower",
        Command::Sg => "sg",
        Command::Family { scan: FamilyScan::Dims } => "family dims",
        Command::Family { scan: FamilyScan::Sg } => "family sg",
        Command::List => "list",
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    entry: &'a CatalogEntry,
    model: ExteriorModel<f64>,
    meta: Meta,
}

impl Ctx<'_> {
    fn report(&self, summary: Vec<(&str, String)>, table: Table, body: Value, findings: Vec<String>) -> Report {
        Report {
            meta: self.meta.clone(),
            summary: summary.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            table,
            body,
            status: if findings.is_empty() { 0 } else { 1 },
            findings,
        }
    }

    fn degree(&self, default: usize) -> Result<usize, RunError> {
        let k = self.cfg.k.unwrap_or(default);
        let top = 2 * self.model.n();
        if k > top {
            return Err(RunError::input(format!("--k {k} is outside 0..={top}")));
        }
        Ok(k)
    }
}

fn h_label(h: Complex64) -> [String; 2] {
    [num(h.re), num(h.im)]
}

pub fn run(cfg: &RunConfig) -> Outcome {
    if cfg.command == Command::List {
        return Ok(list(cfg));
    }
    let entry = cfg.entry.as_ref().ok_or_else(|| RunError::input("no model given"))?;
    let model = ExteriorModel::<f64>::build(&entry.base()).map_err(|e| RunError::core("models", e))?;
    let name = match &cfg.source {
        Source::Catalog(n) => n.clone(),
        Source::File(p) => p.display().to_string(),
        Source::None => String::new(),
    };
    let meta = Meta {
        tool: "hdeform",
        version: VERSION,
        command: command_name(cfg.command).into(),
        model: name,
        model_sha256: model_hash(entry),
        seed: cfg.seed,
        tolerances: cfg.tol,
    };
    let ctx = Ctx { cfg, entry, model, meta };
    match cfg.command {
        Command::Validate => validate(&ctx),
        Command::Pages => pages(&ctx),
        Command::Dh => dh(&ctx),
        Command::Favb => favb(&ctx),
        Command::Tower => tower(&ctx),
        Command::Sg => sg(&ctx),
        Command::Family { scan } => family(&ctx, scan),
        Command::List => unreachable!(),
    }
}

fn list(cfg: &RunConfig) -> Report {
    let mut table = Table::new(&["name", "n", "kind"]);
    for name in hdeform_core::models::catalog_names() {
        let e = hdeform_core::catalog(&name).expect("listed names resolve");
        let kind = match e {
            CatalogEntry::Model(_) => "model",
            CatalogEntry::Family(_) => "family",
        };
        table.push(vec![name, e.n().to_string(), kind.into()]);
    }
    Report {
        meta: Meta {
            tool: "hdeform",
            version: VERSION,
            command: "list".into(),
            model: String::new(),
            model_sha256: String::new(),
            seed: cfg.seed,
            tolerances: cfg.tol,
        },
        summary: vec![],
        body: json!(table.rows.iter().map(|r| r[0].clone()).collect::<Vec<_>>()),
        table,
        status: 0,
        findings: vec![],
    }
}

fn validate(ctx: &Ctx) -> Outcome {
    let b = &ctx.model.bicomplex;
    let tol = &ctx.cfg.tol;
    let rep = b.validate(tol);
    let scale = 1.0 + b.max_op_norm();
    let threshold = tol.zero * scale * scale;
    let hs = sampling::h_samples::<f64>(ctx.cfg.seed);
    let mut table = Table::new(&["check", "h_real", "h_imag", "residual", "threshold", "pass"]);
    let mut findings = Vec::new();
    table.push(vec![
        "bicomplex".into(),
        String::new(),
        String::new(),
        num(rep.max_residual),
        num(rep.threshold),
        rep.valid.to_string(),
    ]);
    for v in &rep.violations {
        findings.push(format!(
            "{:?} fails at ({},{}) with residual {:e}",
            v.identity, v.p, v.q, v.residual
        ));
    }
    let mut dh_rows = Vec::new();
    for &h in &hs {
        let mut worst = 0.0f64;
        for k in 0..2 * ctx.model.n() {
            let d0 = b.d_h_total(h, k).map_err(|e| RunError::core("bicomplex", e))?;
            let d1 = b.d_h_total(h, k + 1).map_err(|e| RunError::core("bicomplex", e))?;
            let scale_h = (1.0 + h.norm()).powi(2);
            worst = worst.max(hdeform_core::linalg::max_abs(&(d1 * d0)) / scale_h);
        }
        let pass = worst <= threshold;
        if !pass {
            findings.push(format!("d_h∘d_h = {worst:e} at h = {h}"));
        }
        let [re, im] = h_label(h);
        table.push(vec!["d_h^2".into(), re, im, num(worst), num(threshold), pass.to_string()]);
        dh_rows.push(json!({"h": h, "residual": worst, "pass": pass}));
    }
    let conj = ctx.model.conjugation_residual();
    let conj_ok = conj <= threshold;
    if !conj_ok {
        findings.push(format!("conjugation residual {conj:e}"));
    }
    table.push(vec![
        "conjugation".into(),
        String::new(),
        String::new(),
        num(conj),
        num(threshold),
        conj_ok.to_string(),
    ]);
    let body = json!({"bicomplex": rep, "d_h_squared": dh_rows, "conjugation_residual": conj});
    Ok(ctx.report(vec![("valid", findings.is_empty().to_string())], table, body, findings))
}

fn pages(ctx: &Ctx) -> Outcome {
    let b = &ctx.model.bicomplex;
    let tol = &ctx.cfg.tol;
    let degen = spectral::degeneration(b, tol);
    let last = ctx.cfg.r.unwrap_or(degen.page).max(degen.page);
    let tables: Vec<spectral::PageTable<f64>> = (1..=last + 1)
        .map(|r| match degen.tables.get(r - 1) {
            Some(t) => t.clone(),
            None => spectral::page(b, r, tol),
        })
        .collect();
    let mut findings = Vec::new();
    let n = b.n();
    let checks: Vec<Vec<Vec<usize>>> = tables[..last]
        .par_iter()
        .map(|t| spectral::next_page_dims(b, t, tol, ctx.cfg.seed))
        .collect();
    for (i, dims) in checks.iter().enumerate() {
        for p in 0..=n {
            for q in 0..=n {
                let expect = tables[i + 1].cell(p, q).dim;
                if dims[p][q] != expect {
                    findings.push(format!(
                        "d_{} homology at ({p},{q}) is {} but E_{} has {expect}",
                        i + 1,
                        dims[p][q],
                        i + 2
                    ));
                }
            }
        }
    }
    let mut table = Table::new(&["r", "p", "q", "dim"]);
    for t in &tables[..last] {
        for c in &t.cells {
            table.push(vec![t.r.to_string(), c.p.to_string(), c.q.to_string(), c.dim.to_string()]);
        }
    }
    let summary = vec![
        ("degeneration_page", degen.page.to_string()),
        ("betti", format!("{:?}", degen.betti)),
        ("page_totals", format!("{:?}", tables[degen.page - 1].totals)),
        ("cross_route", if findings.is_empty() { "agree" } else { "MISMATCH" }.to_string()),
    ];
    let body = json!({
        "degeneration_page": degen.page,
        "betti": degen.betti,
        "pages": &tables[..last],
        "next_page_dims": checks,
    });
    Ok(ctx.report(summary, table, body, findings))
}

fn dh(ctx: &Ctx) -> Outcome {
    let b = &ctx.model.bicomplex;
    let tol = &ctx.cfg.tol;
    let top = 2 * ctx.model.n();
    let ks: Vec<usize> = match ctx.cfg.k {
        Some(_) => vec![ctx.degree(0)?],
        None => (0..=top).collect(),
    };
    let betti = spectral::betti(b, tol);
    let jobs: Vec<(usize, Complex64)> = ks
        .iter()
        .flat_map(|&k| ctx.cfg.h_grid.iter().map(move |&h| (k, h)))
        .collect();
    let dims = jobs
        .par_iter()
        .map(|&(k, h)| {
            let kind = if h.norm() == 0.0 {
                CohomologyKind::DelbarTotal
            } else {
                CohomologyKind::DH(h)
            };
            b.cohomology(kind, k, tol).map(|c| c.dimension)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunError::core("bicomplex", e))?;
    let mut table = Table::new(&["k", "h_real", "h_imag", "dim", "betti"]);
    let mut findings = Vec::new();
    let mut rows = Vec::new();
    for (&(k, h), &d) in jobs.iter().zip(&dims) {
        if h.norm() != 0.0 && d != betti[k] {
            findings.push(format!("dim H^{k}_(d_h) = {d} at h = {h}, expected b_{k} = {}", betti[k]));
        }
        let [re, im] = h_label(h);
        table.push(vec![k.to_string(), re, im, d.to_string(), betti[k].to_string()]);
        rows.push(json!({"k": k, "h": h, "dim": d}));
    }
    let summary = vec![("betti", format!("{betti:?}"))];
    Ok(ctx.report(summary, table, json!({"betti": betti, "rows": rows}), findings))
}

fn favb(ctx: &Ctx) -> Outcome {
    let b = &ctx.model.bicomplex;
    let tol = &ctx.cfg.tol;
    let k = ctx.degree(1)?;
    let r = match ctx.cfg.r {
        Some(r) => r,
        None => spectral::degeneration(b, tol).page,
    };
    let hc = HermitianComplex::from_model(&ctx.model);
    let rep = favb_scan(&hc, k, r, &ctx.cfg.h_grid, tol).map_err(|e| RunError::core("harmonic", e))?;
    let mut table = Table::new(&["h_real", "h_imag", "kernel_dim", "lambda_bk", "lambda_bk_plus_1"]);
    for pt in &rep.points {
        let [re, im] = h_label(pt.h);
        table.push(vec![
            re,
            im,
            pt.kernel_dim.to_string(),
            num(pt.lambda_bk),
            opt(pt.lambda_bk_plus_1.map(num)),
        ]);
    }
    let findings = rep
        .jumps
        .iter()
        .map(|&i| {
            let pt = &rep.points[i];
            format!("rank jump at h = {}: kernel dim {} but b_{k} = {}", pt.h, pt.kernel_dim, rep.betti)
        })
        .collect();
    let summary = vec![
        ("k", k.to_string()),
        ("r", r.to_string()),
        ("betti", rep.betti.to_string()),
        ("constant_rank", rep.constant().to_string()),
    ];
    let body = serde_json::to_value(&rep).expect("serializable");
    Ok(ctx.report(summary, table, body, findings))
}

fn tower(ctx: &Ctx) -> Outcome {
    let b = &ctx.model.bicomplex;
    let tol = &ctx.cfg.tol;
    let r = match ctx.cfg.r {
        Some(r) => r,
        None => spectral::degeneration(b, tol).page + 1,
    };
    let tw = HarmonicTower::new(b, r, tol);
    let n = b.n();
    let levels: Vec<(Vec<Vec<usize>>, spectral::PageTable<f64>)> = (1..=tw.r_max)
        .into_par_iter()
        .map(|j| (tw.dims(j), spectral::page(b, j, tol)))
        .collect();
    let mut table = Table::new(&["r", "p", "q", "harmonic_dim", "page_dim"]);
    let mut findings = Vec::new();
    for (j, (dims, page)) in levels.iter().enumerate() {
        for p in 0..=n {
            for q in 0..=n {
                let (hd, pd) = (dims[p][q], page.cell(p, q).dim);
                if hd != pd {
                    findings.push(format!("H_{} at ({p},{q}) has dim {hd}, E_{} has {pd}", j + 1, j + 1));
                }
                table.push(vec![(j + 1).to_string(), p.to_string(), q.to_string(), hd.to_string(), pd.to_string()]);
            }
        }
    }
    let mut summary = vec![
        ("depth", tw.r_max.to_string()),
        ("cross_route", if findings.is_empty() { "agree" } else { "MISMATCH" }.to_string()),
    ];
    if tw.clamped {
        summary.push(("clamped_from", r.to_string()));
    }
    let body = json!({
        "depth": tw.r_max,
        "clamped": tw.clamped,
        "harmonic_dims": levels.iter().map(|(d, _)| d).collect::<Vec<_>>(),
        "page_dims": levels.iter().map(|(_, t)| t.cells.iter().map(|c| c.dim).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    Ok(ctx.report(summary, table, body, findings))
}

fn sg(ctx: &Ctx) -> Outcome {
    let tol = &ctx.cfg.tol;
    let m = &ctx.model;
    let gamma = HermitianMetric::identity(m.n());
    let gauduchon = is_gauduchon(m, &gamma, tol).map_err(|e| RunError::core("sg", e))?;
    let (level, witness_residual, del_norm) = if gauduchon {
        let rep = sg_level(m, &gamma, tol).map_err(|e| RunError::core("sg", e))?;
        (rep.level, rep.witness_residual, rep.del_gamma.norm())
    } else {
        (None, f64::NAN, f64::NAN)
    };
    let balanced = balanced_residual(m, &gamma).map_err(|e| RunError::core("sg", e))?;
    let mut table = Table::new(&["metric", "gauduchon", "level", "witness_residual", "del_gamma_norm", "d_gamma_power_norm"]);
    table.push(vec![
        "identity".into(),
        gauduchon.to_string(),
        opt(level),
        num(witness_residual),
        num(del_norm),
        num(balanced),
    ]);
    let body = json!({
        "metric": "identity",
        "gauduchon": gauduchon,
        "level": level,
        "witness_residual": witness_residual,
        "del_gamma_norm": del_norm,
        "d_gamma_power_norm": balanced,
    });
    Ok(ctx.report(vec![("sg_level", or_none(level))], table, body, vec![]))
}

fn family(ctx: &Ctx, scan: FamilyScan) -> Outcome {
    let CatalogEntry::Family(fam) = ctx.entry else {
        return Err(RunError::input("the family command needs a family model"));
    };
    let tol = &ctx.cfg.tol;
    match scan {
        FamilyScan::Dims => {
            let k = ctx.degree(1)?;
            let rep = family_scan(fam, k, &ctx.cfg.h_grid, &ctx.cfg.t_grid, tol)
                .map_err(|e| RunError::core("harmonic", e))?;
            let mut table = Table::new(&["t_real", "t_imag", "h_real", "h_imag", "kernel_dim", "degen_page"]);
            let mut findings = Vec::new();
            for row in &rep.rows {
                let [tr, ti] = h_label(row.t);
                let [hr, hi] = h_label(row.h);
                table.push(vec![tr, ti, hr, hi, row.kernel_dim.to_string(), row.degen_page.to_string()]);
            }
            if !rep.upper_semicontinuous {
                findings.push("Hodge numbers are not upper semicontinuous at t = 0".into());
            }
            let summary = vec![
                ("k", k.to_string()),
                ("betti", rep.betti.to_string()),
                ("constant_rank", rep.constant_rank.to_string()),
                ("upper_semicontinuous", rep.upper_semicontinuous.to_string()),
            ];
            let body = serde_json::to_value(&rep).expect("serializable");
            Ok(ctx.report(summary, table, body, findings))
        }
        FamilyScan::Sg => {
            let gamma = HermitianMetric::identity(fam.n);
            let rep = family_sg_scan(fam, &gamma, &ctx.cfg.t_grid, tol).map_err(|e| RunError::core("sg", e))?;
            let mut table = Table::new(&[
                "t_real",
                "t_imag",
                "min_eigenvalue",
                "positive",
                "gauduchon",
                "level",
                "root_residual",
                "error",
            ]);
            let mut findings = Vec::new();
            for (t, p) in ctx.cfg.t_grid.iter().zip(&rep.points) {
                let [tr, ti] = h_label(*t);
                match p {
                    Ok(pt) => table.push(vec![
                        tr,
                        ti,
                        num(pt.min_eigenvalue),
                        pt.positive.to_string(),
                        pt.gauduchon.to_string(),
                        opt(pt.level),
                        num(pt.root_residual),
                        String::new(),
                    ]),
                    Err(e) => table.push(vec![
                        tr,
                        ti,
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        e.replace(',', ";"),
                    ]),
                }
            }
            if let Some(i) = rep.first_failure {
                findings.push(format!("positivity or Gauduchon property lost at t = {}", ctx.cfg.t_grid[i]));
            }
            let summary = vec![
                ("base_level", or_none(rep.base_level)),
                ("first_failure", or_none(rep.first_failure)),
            ];
            let body = serde_json::to_value(&rep).expect("serializable");
            Ok(ctx.report(summary, table, body, findings))
        }
    }
}
