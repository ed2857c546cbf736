mod common;

use common::oracles::{self, M};
use hdeform_core::bicomplex::CohomologyKind;
use hdeform_core::models::{catalog, catalog_names, CatalogEntry, ExteriorModel};
use hdeform_core::spectral::{self, degeneration, dr_map, next_page_dims, page};
use hdeform_core::{linalg, sampling, Form, Tolerances};
use nalgebra::Complex;
use rand::Rng;

fn models() -> Vec<(String, ExteriorModel<f64>)> {
    catalog_names()
        .into_iter()
        .filter_map(|name| match catalog(&name).unwrap() {
            CatalogEntry::Model(s) => Some((name, ExteriorModel::build(&s).unwrap())),
            CatalogEntry::Family(_) => None,
        })
        .collect()
}

fn model(name: &str) -> ExteriorModel<f64> {
    ExteriorModel::build(&catalog(name).unwrap().base()).unwrap()
}

#[test]
fn oracle_betti_numbers() {
    let tol = Tolerances::default();
    let expect: &[(&str, &[usize])] = &[
        ("torus_1", &[1, 2, 1]),
        ("torus_2", &[1, 4, 6, 4, 1]),
        ("iwasawa", &[1, 4, 8, 10, 8, 4, 1]),
        ("primary_kodaira", &[1, 3, 4, 3, 1]),
        ("nilmanifold_e3", &[1, 3, 5, 6, 5, 3, 1]),
    ];
    for (name, betti) in expect {
        let m = model(name);
        assert_eq!(oracles::betti(&m.bicomplex), betti.to_vec(), "{name}");
        assert_eq!(spectral::betti(&m.bicomplex, &tol), betti.to_vec(), "{name}");
    }
}

#[test]
fn degeneration_pages() {
    let tol = Tolerances::default();
    for (name, m) in models() {
        let d = degeneration(&m.bicomplex, &tol);
        let expected = match name.as_str() {
            "iwasawa" => 2,
            "nilmanifold_e3" => 3,
            _ => 1,
        };
        assert_eq!(d.page, expected, "{name}");
        // oracle totals at the degeneration page equal the Betti numbers
        let n = m.n();
        let betti = oracles::betti(&m.bicomplex);
        for k in 0..=2 * n {
            let total: usize = (0..=n)
                .filter(|&p| k >= p && k - p <= n)
                .map(|p| oracles::filtration_page_dim(&m.bicomplex, d.page, p, k - p))
                .sum();
            assert_eq!(total, betti[k], "{name} k={k}");
        }
    }
    let iw = degeneration(&model("iwasawa").bicomplex, &tol);
    assert_eq!((iw.tables[0].totals[1], iw.tables[1].totals[1]), (5, 4));
}

#[test]
fn pages_match_filtration_oracle() {
    let tol = Tolerances::default();
    for (name, m) in models() {
        let b = &m.bicomplex;
        let n = m.n();
        let last = degeneration(b, &tol).page + 1;
        for r in 1..=last {
            let table = page(b, r, &tol);
            for p in 0..=n {
                for q in 0..=n {
                    assert_eq!(
                        table.cell(p, q).dim,
                        oracles::filtration_page_dim(b, r, p, q),
                        "{name} r={r} ({p},{q})"
                    );
                }
            }
        }
    }
}

#[test]
fn dr_homology_is_next_page() {
    let tol = Tolerances::default();
    for (name, m) in models() {
        let b = &m.bicomplex;
        let n = m.n();
        let last = degeneration(b, &tol).page + 1;
        for r in 1..=last {
            let table = page(b, r, &tol);
            let next = page(b, r + 1, &tol);
            let dims = next_page_dims(b, &table, &tol, 11);
            for p in 0..=n {
                for q in 0..=n {
                    assert_eq!(dims[p][q], next.cell(p, q).dim, "{name} r={r} ({p},{q})");
                    let d = dr_map(b, &table, p, q, &tol, 11);
                    assert!(d.witness_spread < 1e-8, "{name} r={r} ({p},{q}) {}", d.witness_spread);
                    if let Some((tp, tq)) = d.target {
                        let d2 = dr_map(b, &table, tp, tq, &tol, 11);
                        if d2.target.is_some() {
                            let comp = &d2.matrix * &d.matrix;
                            assert!(linalg::max_abs(&comp) < 1e-8, "{name} r={r} ({p},{q})");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn iwasawa_d1_and_d2() {
    let tol = Tolerances::default();
    let b = model("iwasawa").bicomplex;
    let e1 = page(&b, 1, &tol);
    assert_eq!(linalg::rank(&dr_map(&b, &e1, 1, 0, &tol, 1).matrix, tol.rank), 1);
    let e2 = page(&b, 2, &tol);
    for p in 0..=3 {
        for q in 0..=3 {
            assert_eq!(linalg::rank(&dr_map(&b, &e2, p, q, &tol, 1).matrix, tol.rank), 0);
        }
    }
}

#[test]
fn exact_inside_closed_and_monotone() {
    let tol = Tolerances::default();
    for (name, m) in models() {
        let b = &m.bicomplex;
        let n = m.n();
        for p in 0..=n {
            for q in 0..=n {
                let mut prev_z: Option<M> = None;
                let mut prev_b: Option<M> = None;
                for r in 1..=n + 2 {
                    let z = spectral::er_closed_space(b, p, q, r, &tol);
                    let e = spectral::er_exact_space(b, p, q, r, &tol);
                    assert!(linalg::containment_residual(&z, &e) < 1e-8, "{name} B⊆Z r={r}");
                    if let Some(pz) = &prev_z {
                        assert!(linalg::containment_residual(pz, &z) < 1e-8, "{name} Z_(r+1)⊆Z_r");
                        assert!(z.ncols() <= pz.ncols());
                    }
                    if let Some(pb) = &prev_b {
                        assert!(linalg::containment_residual(&e, pb) < 1e-8, "{name} B_r⊆B_(r+1)");
                    }
                    prev_z = Some(z);
                    prev_b = Some(e);
                }
            }
        }
    }
}

#[test]
fn exact_witness_reconstructs() {
    let tol = Tolerances::default();
    let b = model("nilmanifold_e3").bicomplex;
    let mut g = sampling::rng(4);
    for r in 1..=3 {
        for (p, q) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let e = spectral::er_exact_space(&b, p, q, r, &tol);
            if e.ncols() == 0 {
                continue;
            }
            let c = sampling::random_vector::<f64, _>(&mut g, e.ncols());
            let alpha = &e * c;
            let (_, res) = spectral::exact_witness(&b, p, q, r, &alpha, &tol);
            assert!(res < 1e-9, "r={r} ({p},{q}) res={res}");
        }
    }
}

#[test]
fn theta0_is_surjective() {
    let tol = Tolerances::default();
    for (name, m) in models() {
        let b = &m.bicomplex;
        let d = degeneration(b, &tol);
        for k in 0..=2 * m.n() {
            let t = spectral::theta0_map(b, &d, k, &tol).unwrap();
            assert_eq!(linalg::rank(&t, tol.rank), t.nrows(), "{name} k={k}");
            if k <= m.n() {
                assert_eq!(t.nrows(), d.tables.last().unwrap().cell(0, k).dim);
            }
        }
    }
}

fn realify(m: &ExteriorModel<f64>, u: &Form<f64>) -> Form<f64> {
    let c = m.conjugate(u);
    Form { degree: u.degree, coeffs: (&u.coeffs + c.coeffs) * Complex::new(0.5, 0.0) }
}

/// Real d-closed 2-forms that are cohomologous to a pure (1,1)-form,
/// disguised by an exact real term.
fn positive_classes(m: &ExteriorModel<f64>, count: usize, seed: u64) -> Vec<Form<f64>> {
    let b = &m.bicomplex;
    let g = &b.grading;
    let slot = g.slot(1, 1).unwrap();
    let d = oracles::total_d(b, 2);
    let closed11 = oracles::kernel(&d.columns(slot.offset, slot.len).into_owned());
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| {
            let c = sampling::random_vector::<f64, _>(&mut rng, closed11.ncols());
            let a = Form::pure(g, 1, 1, &(&closed11 * c));
            let beta = realify(m, &sampling::random_form::<f64, _>(&mut rng, g, 1));
            let a = realify(m, &a);
            Form { degree: 2, coeffs: a.coeffs + m.d(&beta).coeffs }
        })
        .collect()
}

/// Real closed 2-forms far from every (1,1)-class according to the oracle.
fn negative_classes(m: &ExteriorModel<f64>, count: usize, seed: u64) -> Vec<Form<f64>> {
    let tol = Tolerances::default();
    let b = &m.bicomplex;
    let dr = b.cohomology(CohomologyKind::DeRham, 2, &tol).unwrap();
    let mut rng = sampling::rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let c = sampling::random_vector::<f64, _>(&mut rng, dr.dimension);
        let beta = realify(m, &sampling::random_form::<f64, _>(&mut rng, &b.grading, 1));
        let alpha = realify(m, &Form { degree: 2, coeffs: &dr.basis * c });
        let alpha = Form { degree: 2, coeffs: alpha.coeffs + m.d(&beta).coeffs * Complex::new(rng.gen_range(0.0..1.0), 0.0) };
        if oracles::type_one_one_residual(b, &alpha.coeffs) > 1e-3 {
            out.push(alpha);
        }
    }
    out
}

#[test]
fn type_one_one_against_oracle() {
    let tol = Tolerances::default();
    for name in ["torus_2", "iwasawa", "nilmanifold_e3"] {
        let m = model(name);
        let b = &m.bicomplex;
        let degen = degeneration(b, &tol);
        for alpha in positive_classes(&m, 10, 21) {
            assert!(oracles::type_one_one_residual(b, &alpha.coeffs) < 1e-9);
            let res = spectral::is_type_one_one(&m, &degen, &alpha, &tol).unwrap();
            assert!(res.is_type_one_one, "{name}");
            let cert = res.certificate.unwrap();
            assert!(res.certificate_residual < 1e-9, "{name} {}", res.certificate_residual);
            assert!(cert.component(&b.grading, 0).norm() < 1e-9);
            assert!(cert.component(&b.grading, 2).norm() < 1e-9);
            assert!(m.d(&cert).norm() < 1e-9);
        }
        for alpha in negative_classes(&m, 10, 22) {
            let res = spectral::is_type_one_one(&m, &degen, &alpha, &tol).unwrap();
            assert!(!res.is_type_one_one, "{name}");
            assert!(res.theta0.norm() > 1e-6);
        }
    }
}

#[test]
fn type_one_one_rejects_bad_input() {
    let tol = Tolerances::default();
    let m = model("iwasawa");
    let degen = degeneration(&m.bicomplex, &tol);
    let one_form = m.monomial(0b000001, Complex::new(1.0, 0.0));
    assert!(spectral::is_type_one_one(&m, &degen, &one_form, &tol).is_err());
    // φ¹∧φ² is not real
    let f12 = m.monomial(0b000011, Complex::new(1.0, 0.0));
    assert!(spectral::is_type_one_one(&m, &degen, &f12, &tol).is_err());
    // a real 2-form that is not closed: φ³∧φ̄³ + conj
    let f = realify(&m, &m.monomial(0b100100, Complex::new(0.0, 1.0)));
    assert!(m.d(&f).norm() > 1e-3);
    assert!(spectral::is_type_one_one(&m, &degen, &f, &tol).is_err());
}
